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

#include "beamdesign/design.hpp"
#include "beamdesign/evaluate.hpp"
#include "beamdesign/steering.hpp"

namespace beamdesign {

enum class TrsCase { interior, boundary, hard_case };

const char* to_string(TrsCase c);

/// Global solution of  min / max (a + x)^H R (a + x)  s.t.  x^H W x <= eps.
struct TrsSolution {
  ComplexVector perturbation;
  double power = 0.0;
  double multiplier = 0.0;       ///< lambda*
  double kkt_residual = 0.0;     ///< |(+-R + lambda W) x +- R a|
  double slackness = 0.0;        ///< |lambda (eps - x^H W x)|
  double constraint_value = 0.0; ///< x^H W x
  TrsCase case_tag = TrsCase::boundary;
};

TrsSolution min_power_over_ball(const ComplexMatrix& R, const ComplexVector& a,
                                const Eigen::VectorXd& weights, double epsilon);
TrsSolution max_power_over_ball(const ComplexMatrix& R, const ComplexVector& a,
                                const Eigen::VectorXd& weights, double epsilon);

/// Worst case per point: highest power on the healthy set, lowest on the
/// tumor set.
PowerMap worst_case_power_map(const CovarianceDesign& design,
                              const SteeringField& field,
                              const RegionGrids& grids);

}  // namespace beamdesign
