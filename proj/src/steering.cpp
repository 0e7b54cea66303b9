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

#include "beamdesign/steering.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace beamdesign {

ComplexVector nominal_steering(const ArrayGeometry& geometry,
                               const Position& r) {
  const int m_count = geometry.element_count();
  ComplexVector a(m_count);
  for (int m = 0; m < m_count; ++m) {
    const double d = (geometry.elements[m] - r).norm();
    if (!(d > 0.0)) {
      throw SingularityError("field point coincides with element " +
                             std::to_string(m));
    }
    // Reduce the phase argument before the trig call so that whole numbers
    // of wavelengths map to exactly zero phase.
    const double cycles = d / geometry.wavelength_m();
    const double frac = cycles - std::round(cycles);
    const double phase = -2.0 * std::numbers::pi * frac;
    a(m) = std::polar(1.0 / std::sqrt(d / geometry.medium.spreading_unit_m),
                      phase);
  }
  return a;
}

UncertaintyModel UncertaintyModel::isotropic(int element_count,
                                             double epsilon) {
  UncertaintyModel model;
  model.weights = Eigen::VectorXd::Ones(element_count);
  model.epsilon = epsilon;
  return model;
}

double UncertaintyModel::healthy_bound(int index) const {
  return healthy_epsilon.empty() ? epsilon : healthy_epsilon.at(index);
}

double UncertaintyModel::tumor_bound(int index) const {
  return tumor_epsilon.empty() ? epsilon : tumor_epsilon.at(index);
}

void UncertaintyModel::validate(int element_count) const {
  if (weights.size() != element_count) {
    throw ConfigurationError("uncertainty weight has " +
                             std::to_string(weights.size()) +
                             " entries, expected " +
                             std::to_string(element_count));
  }
  if (!(weights.array() > 0.0).all() || !weights.allFinite()) {
    throw ConfigurationError("uncertainty weights must be positive");
  }
  if (!(epsilon >= 0.0)) {
    throw ConfigurationError("uncertainty bound must be non-negative");
  }
  for (double e : healthy_epsilon) {
    if (!(e >= 0.0)) throw ConfigurationError("negative uncertainty bound");
  }
  for (double e : tumor_epsilon) {
    if (!(e >= 0.0)) throw ConfigurationError("negative uncertainty bound");
  }
}

bool uncertainty_ball_membership(const ComplexVector& perturbation,
                                 const Eigen::VectorXd& weights,
                                 double epsilon) {
  if (perturbation.size() != weights.size()) {
    throw ValidationError("perturbation length does not match weights");
  }
  const double norm2 =
      (weights.array() * perturbation.array().abs2()).sum();
  return norm2 <= epsilon + 1e-12;
}

SteeringField build_steering_field(const ArrayGeometry& geometry,
                                   const RegionGrids& grids,
                                   const UncertaintyModel& uncertainty) {
  geometry.validate();
  grids.validate();
  uncertainty.validate(geometry.element_count());
  if (!uncertainty.healthy_epsilon.empty() &&
      static_cast<int>(uncertainty.healthy_epsilon.size()) !=
          grids.healthy_count()) {
    throw ConfigurationError("healthy uncertainty table size mismatch");
  }
  if (!uncertainty.tumor_epsilon.empty() &&
      static_cast<int>(uncertainty.tumor_epsilon.size()) !=
          grids.tumor_count()) {
    throw ConfigurationError("tumor uncertainty table size mismatch");
  }

  SteeringField field;
  field.geometry = geometry;
  field.uncertainty = uncertainty;
  const int m_count = geometry.element_count();
  field.healthy.resize(m_count, grids.healthy_count());
  field.tumor.resize(m_count, grids.tumor_count());
  for (int i = 0; i < grids.healthy_count(); ++i) {
    field.healthy.col(i) = nominal_steering(geometry, grids.healthy_points[i]);
  }
  for (int j = 0; j < grids.tumor_count(); ++j) {
    field.tumor.col(j) = nominal_steering(geometry, grids.tumor_points[j]);
  }
  field.center = nominal_steering(geometry, grids.tumor_center);
  return field;
}

}  // namespace beamdesign
