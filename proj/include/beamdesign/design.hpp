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

#include <optional>
#include <string>

#include "beamdesign/assemble.hpp"
#include "beamdesign/geometry.hpp"
#include "beamdesign/solver.hpp"

namespace beamdesign {

/// Optimized covariance with the data needed to reproduce and audit it.
struct CovarianceDesign {
  DesignVariant variant = DesignVariant::robust;
  SolveStatus status = SolveStatus::numerical_failure;
  ComplexMatrix R;  ///< empty when the problem is infeasible or unbounded
  double gamma = 1.0;
  double delta = 0.7;
  double t = 0.0;
  std::optional<double> level;  ///< P (free or fixed); absent for nominal_eq5
  Eigen::VectorXd point_gaps;   ///< t(r) per healthy point (sum-energy only)
  Eigen::VectorXd multipliers;  ///< beta values in block order
  double objective = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  double verified_min_eigenvalue = 0.0;  ///< over all blocks, from the verifier

  int element_count() const { return static_cast<int>(R.rows()); }
  bool has_covariance() const { return R.size() > 0; }

  /// Throws IntegrityError unless R is Hermitian (1e-10), PSD (-1e-8),
  /// has diagonal gamma / M (1e-8) and trace gamma (1e-7), and delta lies in
  /// [0, 1).
  void check_integrity() const;
};

struct DesignOptions {
  SolverOptions solver;
};

/// Solves an assembled description and unpacks the result.
CovarianceDesign run_design(const DesignDescription& description,
                            const DesignOptions& options = {});

CovarianceDesign design_nominal_eq5(const SteeringField& field, double delta,
                                    double gamma,
                                    const DesignOptions& options = {});
CovarianceDesign design_robust(const SteeringField& field, double delta,
                               double gamma, const DesignOptions& options = {});
/// Robust problem with every uncertainty bound forced to zero.
CovarianceDesign design_nominal_generalized(const SteeringField& field,
                                            double delta, double gamma,
                                            const DesignOptions& options = {});
CovarianceDesign design_weighted_robust(const SteeringField& field,
                                        const Eigen::VectorXd& weights,
                                        double level, double delta,
                                        double gamma,
                                        const DesignOptions& options = {});
CovarianceDesign design_sum_energy_robust(const SteeringField& field,
                                          double level, double delta,
                                          double gamma,
                                          const DesignOptions& options = {});

/// w(r) = max(|r - r0| / tumor_radius, 1) for every healthy point.
Eigen::VectorXd default_healthy_weights(const RegionGrids& grids);

/// Exact worst-case check of every constraint family of a design.
struct CertificationReport {
  bool passed = false;
  double max_violation = 0.0;  ///< largest constraint excess (power units)
  double tolerance = 0.0;
  std::string worst_constraint;
};

/// Healthy: max power <= bound; tumor: min power >= (1 - delta) P and
/// max power <= (1 + delta) P, all over each point's uncertainty ball
/// (zero radius for the nominal variants). The tolerance is
/// relative_tol * (1 + reference power).
CertificationReport certify_design(const CovarianceDesign& design,
                                   const SteeringField& field,
                                   const Eigen::VectorXd& healthy_weights = {},
                                   double relative_tol = 1e-6);

}  // namespace beamdesign
