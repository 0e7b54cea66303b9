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
#include "beamdesign/geometry.hpp"

namespace beamdesign {

/// Nominal steering vector at `r`:
///   a_m(r) = exp(-j 2 pi f_c d_m / c) / sqrt(d_m / spreading_unit),
/// with d_m = |theta_m - r| in meters.
/// Throws SingularityError when `r` coincides with an element.
ComplexVector nominal_steering(const ArrayGeometry& geometry,
                               const Position& r);

/// Ellipsoidal steering-error set  { a~ : a~^H W a~ <= eps_r },  W diagonal.
///
/// eps_r is either the constant `epsilon` or, when the per-point tables are
/// non-empty, looked up by grid index.
struct UncertaintyModel {
  Eigen::VectorXd weights;  ///< diagonal of W, strictly positive
  double epsilon = 0.25;
  std::vector<double> healthy_epsilon;
  std::vector<double> tumor_epsilon;

  static UncertaintyModel isotropic(int element_count, double epsilon);

  double healthy_bound(int index) const;
  double tumor_bound(int index) const;
  /// Throws ConfigurationError for non-positive weights or negative bounds.
  void validate(int element_count) const;
};

/// a~^H W a~ <= eps within 1e-12 absolute slack.
bool uncertainty_ball_membership(const ComplexVector& perturbation,
                                 const Eigen::VectorXd& weights,
                                 double epsilon);

/// Nominal steering vectors of every control point (one column per point, in
/// grid order) together with the uncertainty model.
struct SteeringField {
  ArrayGeometry geometry;
  ComplexMatrix healthy;  ///< M x N_S
  ComplexMatrix tumor;    ///< M x N_T
  ComplexVector center;   ///< steering at the tumor center r0
  UncertaintyModel uncertainty;

  int element_count() const { return static_cast<int>(healthy.rows()); }
  int healthy_count() const { return static_cast<int>(healthy.cols()); }
  int tumor_count() const { return static_cast<int>(tumor.cols()); }
};

SteeringField build_steering_field(const ArrayGeometry& geometry,
                                   const RegionGrids& grids,
                                   const UncertaintyModel& uncertainty);

}  // namespace beamdesign
