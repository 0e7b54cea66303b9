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

#pragma once

#include <vector>

#include "beamdesign/common.hpp"

namespace beamdesign {

/// Propagation medium and carrier.
struct Medium {
  double carrier_frequency_hz = 500e3;
  double sound_speed_m_per_s = 1500.0;
  /// Length unit (in meters) in which distances enter the 1/sqrt(d)
  /// spreading law of the steering model. Phases always use meters.
  double spreading_unit_m = 1.0;

  double wavelength_m() const {
    return sound_speed_m_per_s / carrier_frequency_hz;
  }
};

/// Transducer element layout. Positions are in meters; planar layouts use
/// z = 0.
struct ArrayGeometry {
  std::vector<Position> elements;
  Medium medium;

  int element_count() const { return static_cast<int>(elements.size()); }
  double wavelength_m() const { return medium.wavelength_m(); }

  /// Throws ConfigurationError when an invariant is broken (empty array,
  /// coincident elements, non-positive or non-finite wavelength).
  void validate() const;
};

struct CurvilinearArrayParams {
  double arc_radius_m = 0.05;
  int element_count = 51;
  double spacing_m = 1.5e-3;
  Position arc_center = Position::Zero();
  /// Angle (in the x-y plane, from +x) of the middle of the array.
  double center_angle_rad = -1.5707963267948966;
};

/// Places `element_count` elements on a circular arc, symmetric about
/// `center_angle_rad`, with `spacing_m` of arc length between neighbours.
ArrayGeometry build_curvilinear_array(const CurvilinearArrayParams& params,
                                      const Medium& medium);

/// Discrete control points of the healthy (Omega_S) and tumor (Omega_T)
/// regions.
struct RegionGrids {
  std::vector<Position> healthy_points;
  std::vector<Position> tumor_points;
  Position tumor_center = Position::Zero();
  double tumor_radius_m = 0.0;
  int lattice_columns = 0;
  int lattice_rows = 0;

  int healthy_count() const { return static_cast<int>(healthy_points.size()); }
  int tumor_count() const { return static_cast<int>(tumor_points.size()); }

  void validate() const;
};

struct RegionGridParams {
  Position tumor_center = Position(0.0, 0.034, 0.0);
  double tumor_radius_m = 0.008;
  double box_width_m = 0.064;
  double box_height_m = 0.040;
  double grid_spacing_m = 0.004;
};

/// Rectangular lattice centred on the tumor center. Points within
/// `tumor_radius_m` (boundary inclusive) form the tumor set, the rest the
/// healthy set. Points are enumerated row by row (y outer, x inner).
RegionGrids build_region_grids(const RegionGridParams& params);

}  // namespace beamdesign
