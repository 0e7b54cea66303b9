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

#include "beamdesign/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beamdesign/worstcase.hpp"

namespace beamdesign {

void CovarianceDesign::check_integrity() const {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw IntegrityError("delta outside [0, 1)");
  }
  if (!(gamma > 0.0)) throw IntegrityError("total power must be positive");
  if (!has_covariance()) throw IntegrityError("design carries no covariance");
  if (R.rows() != R.cols()) throw IntegrityError("covariance is not square");
  if (!R.allFinite()) throw IntegrityError("covariance has non-finite entries");
  const int m = element_count();
  const double herm = hermitian_defect(R);
  if (herm > 1e-10) {
    throw IntegrityError("covariance is not Hermitian (defect " +
                         std::to_string(herm) + ")");
  }
  const double target = gamma / m;
  for (int i = 0; i < m; ++i) {
    if (std::abs(R(i, i) - Complex(target, 0.0)) > 1e-8) {
      throw IntegrityError("element " + std::to_string(i) +
                           " power differs from gamma / M");
    }
  }
  if (std::abs(R.trace().real() - gamma) > 1e-7) {
    throw IntegrityError("trace differs from gamma");
  }
  const double lam = min_eigenvalue(R);
  if (lam < -1e-8) {
    throw IntegrityError("covariance is not PSD (min eigenvalue " +
                         std::to_string(lam) + ")");
  }
}

CovarianceDesign run_design(const DesignDescription& description,
                            const DesignOptions& options) {
  const SdpProblem problem = assemble(description);
  const SdpSolution sol = solve(problem, options.solver);

  CovarianceDesign d;
  d.variant = description.variant;
  d.status = sol.status;
  d.gamma = description.gamma;
  d.delta = description.delta;
  d.iterations = sol.iterations;
  d.duality_gap = sol.gap;
  d.objective = sol.objective;
  if (sol.status == SolveStatus::infeasible ||
      sol.status == SolveStatus::unbounded || sol.y.size() == 0) {
    return d;
  }
  d.R = problem.matrix_value(sol.y);
  if (!sol.block_min_eigenvalues.empty()) {
    d.verified_min_eigenvalue = *std::min_element(
        sol.block_min_eigenvalues.begin(), sol.block_min_eigenvalues.end());
  }

  const int ns = description.field.healthy_count();
  switch (description.variant) {
    case DesignVariant::sum_energy_robust:
      d.point_gaps.resize(ns);
      for (int i = 0; i < ns; ++i) {
        d.point_gaps(i) =
            sol.y(problem.variable_index("t[" + std::to_string(i) + "]"));
      }
      d.t = d.point_gaps.sum();
      d.level = description.fixed_level;
      break;
    case DesignVariant::weighted_robust:
      d.t = sol.y(problem.variable_index("t"));
      d.level = description.fixed_level;
      break;
    case DesignVariant::nominal_eq5:
      d.t = sol.y(problem.variable_index("t"));
      break;
    default:
      d.t = sol.y(problem.variable_index("t"));
      d.level = sol.y(problem.variable_index("P"));
      break;
  }
  std::vector<double> betas;
  for (const auto& b : problem.blocks) {
    if (b.multiplier >= 0) betas.push_back(sol.y(b.multiplier));
  }
  d.multipliers = Eigen::Map<Eigen::VectorXd>(betas.data(), betas.size());
  return d;
}

namespace {

DesignDescription describe(DesignVariant variant, const SteeringField& field,
                           double delta, double gamma) {
  DesignDescription d;
  d.variant = variant;
  d.field = field;
  d.delta = delta;
  d.gamma = gamma;
  return d;
}

}  // namespace

CovarianceDesign design_nominal_eq5(const SteeringField& field, double delta,
                                    double gamma, const DesignOptions& options) {
  return run_design(describe(DesignVariant::nominal_eq5, field, delta, gamma),
                    options);
}

CovarianceDesign design_robust(const SteeringField& field, double delta,
                               double gamma, const DesignOptions& options) {
  return run_design(describe(DesignVariant::robust, field, delta, gamma),
                    options);
}

CovarianceDesign design_nominal_generalized(const SteeringField& field,
                                            double delta, double gamma,
                                            const DesignOptions& options) {
  return run_design(
      describe(DesignVariant::nominal_generalized, field, delta, gamma),
      options);
}

CovarianceDesign design_weighted_robust(const SteeringField& field,
                                        const Eigen::VectorXd& weights,
                                        double level, double delta,
                                        double gamma,
                                        const DesignOptions& options) {
  DesignDescription d =
      describe(DesignVariant::weighted_robust, field, delta, gamma);
  d.fixed_level = level;
  d.healthy_weights = weights;
  return run_design(d, options);
}

CovarianceDesign design_sum_energy_robust(const SteeringField& field,
                                          double level, double delta,
                                          double gamma,
                                          const DesignOptions& options) {
  DesignDescription d =
      describe(DesignVariant::sum_energy_robust, field, delta, gamma);
  d.fixed_level = level;
  return run_design(d, options);
}

Eigen::VectorXd default_healthy_weights(const RegionGrids& grids) {
  Eigen::VectorXd w(grids.healthy_count());
  for (int i = 0; i < grids.healthy_count(); ++i) {
    const double r = (grids.healthy_points[i] - grids.tumor_center).norm();
    w(i) = std::max(r / grids.tumor_radius_m, 1.0);
  }
  return w;
}

CertificationReport certify_design(const CovarianceDesign& design,
                                   const SteeringField& field,
                                   const Eigen::VectorXd& healthy_weights,
                                   double relative_tol) {
  CertificationReport rep;
  if (!design.has_covariance()) {
    rep.worst_constraint = "no covariance";
    return rep;
  }
  const int m = field.element_count();
  const int ns = field.healthy_count();
  const int nt = field.tumor_count();
  const auto& unc = field.uncertainty;
  const Eigen::VectorXd weights =
      unc.weights.size() == m ? unc.weights : Eigen::VectorXd::Ones(m);
  const bool nominal = design.variant == DesignVariant::nominal_eq5 ||
                       design.variant == DesignVariant::nominal_generalized;
  auto heps = [&](int i) { return nominal ? 0.0 : unc.healthy_bound(i); };
  auto teps = [&](int j) { return nominal ? 0.0 : unc.tumor_bound(j); };

  const double level = design.variant == DesignVariant::nominal_eq5
                           ? beampattern_at(design.R, field.center)
                           : design.level.value_or(0.0);
  rep.tolerance = relative_tol * (1.0 + std::abs(level));
  rep.max_violation = -std::numeric_limits<double>::infinity();
  auto consider = [&](double excess, const std::string& what) {
    if (excess > rep.max_violation) {
      rep.max_violation = excess;
      rep.worst_constraint = what;
    }
  };

  for (int i = 0; i < ns; ++i) {
    const double pmax =
        max_power_over_ball(design.R, field.healthy.col(i), weights, heps(i))
            .power;
    double bound = level - design.t;
    if (design.variant == DesignVariant::weighted_robust) {
      bound = design.t *
              (healthy_weights.size() == ns ? healthy_weights(i) : 1.0);
    } else if (design.variant == DesignVariant::sum_energy_robust) {
      bound = design.point_gaps(i);
    }
    consider(pmax - bound, "healthy[" + std::to_string(i) + "]");
  }
  for (int j = 0; j < nt; ++j) {
    const ComplexVector a = field.tumor.col(j);
    const double pmin = min_power_over_ball(design.R, a, weights, teps(j)).power;
    const double pmax = max_power_over_ball(design.R, a, weights, teps(j)).power;
    consider((1.0 - design.delta) * level - pmin,
             "tumor_lower[" + std::to_string(j) + "]");
    consider(pmax - (1.0 + design.delta) * level,
             "tumor_upper[" + std::to_string(j) + "]");
  }
  rep.passed = rep.max_violation <= rep.tolerance;
  return rep;
}

}  // namespace beamdesign
