// Copyright 2026 The beamdesign Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "beamdesign/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace beamdesign {

namespace {

constexpr double kCoincidenceTol = 1e-12;
// Lattice membership slack, absorbs rounding of i * spacing.
constexpr double kMembershipTol = 1e-12;

}  // namespace

void ArrayGeometry::validate() const {
  if (elements.empty()) {
    throw ConfigurationError("array has no elements");
  }
  const double lambda = wavelength_m();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigurationError("wavelength must be positive and finite");
  }
  if (!(medium.spreading_unit_m > 0.0) ||
      !std::isfinite(medium.spreading_unit_m)) {
    throw ConfigurationError("spreading unit must be positive and finite");
  }
  for (size_t i = 0; i < elements.size(); ++i) {
    if (!elements[i].allFinite()) {
      throw ConfigurationError("element " + std::to_string(i) +
                               " has a non-finite position");
    }
    for (size_t j = i + 1; j < elements.size(); ++j) {
      if ((elements[i] - elements[j]).norm() <= kCoincidenceTol) {
        throw ConfigurationError("elements " + std::to_string(i) + " and " +
                                 std::to_string(j) + " coincide");
      }
    }
  }
}

ArrayGeometry build_curvilinear_array(const CurvilinearArrayParams& params,
                                      const Medium& medium) {
  if (params.element_count < 1) {
    throw ConfigurationError("element count must be at least 1");
  }
  if (!(params.spacing_m > 0.0)) {
    throw ConfigurationError("element spacing must be positive");
  }
  if (!(params.arc_radius_m > 0.0)) {
    throw ConfigurationError("arc radius must be positive");
  }
  if (params.element_count * params.spacing_m >
      std::numbers::pi * params.arc_radius_m) {
    throw ConfigurationError(
        "array does not fit on a semicircle of the given radius");
  }

  ArrayGeometry geometry;
  geometry.medium = medium;
  geometry.elements.reserve(params.element_count);
  const double step = params.spacing_m / params.arc_radius_m;
  const double mid = 0.5 * (params.element_count - 1);
  for (int m = 0; m < params.element_count; ++m) {
    const double phi = params.center_angle_rad + (m - mid) * step;
    geometry.elements.push_back(
        params.arc_center +
        params.arc_radius_m * Position(std::cos(phi), std::sin(phi), 0.0));
  }
  geometry.validate();
  return geometry;
}

void RegionGrids::validate() const {
  if (healthy_points.empty() || tumor_points.empty()) {
    throw ConfigurationError("both region grids must be non-empty");
  }
  for (const auto& p : tumor_points) {
    if ((p - tumor_center).norm() > tumor_radius_m + kMembershipTol) {
      throw ConfigurationError("tumor point outside the tumor radius");
    }
  }
  for (const auto& s : healthy_points) {
    for (const auto& t : tumor_points) {
      if ((s - t).norm() <= kCoincidenceTol) {
        throw ConfigurationError("healthy and tumor grids share a point");
      }
    }
  }
}

RegionGrids build_region_grids(const RegionGridParams& params) {
  if (!(params.grid_spacing_m > 0.0)) {
    throw ConfigurationError("grid spacing must be positive");
  }
  if (!(params.tumor_radius_m >= 0.0) ||
      !(params.tumor_radius_m <
        0.5 * std::min(params.box_width_m, params.box_height_m))) {
    throw ConfigurationError(
        "tumor radius must be below half the smaller box extent");
  }

  RegionGrids grids;
  grids.tumor_center = params.tumor_center;
  grids.tumor_radius_m = params.tumor_radius_m;
  // A small relative slack keeps e.g. 64 mm / 4 mm at 16 intervals.
  grids.lattice_columns =
      static_cast<int>(std::floor(params.box_width_m / params.grid_spacing_m +
                                  1e-9)) + 1;
  grids.lattice_rows =
      static_cast<int>(std::floor(params.box_height_m / params.grid_spacing_m +
                                  1e-9)) + 1;

  const double x_mid = 0.5 * (grids.lattice_columns - 1);
  const double y_mid = 0.5 * (grids.lattice_rows - 1);
  for (int row = 0; row < grids.lattice_rows; ++row) {
    for (int col = 0; col < grids.lattice_columns; ++col) {
      const Position offset((col - x_mid) * params.grid_spacing_m,
                            (row - y_mid) * params.grid_spacing_m, 0.0);
      const Position p = params.tumor_center + offset;
      if (offset.norm() <= params.tumor_radius_m + kMembershipTol) {
        grids.tumor_points.push_back(p);
      } else {
        grids.healthy_points.push_back(p);
      }
    }
  }
  if (grids.tumor_points.empty()) {
    throw ConfigurationError("tumor region contains no lattice point");
  }
  if (grids.healthy_points.empty()) {
    throw ConfigurationError("healthy region contains no lattice point");
  }
  return grids;
}

}  // namespace beamdesign
