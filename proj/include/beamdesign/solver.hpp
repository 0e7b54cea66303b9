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

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "beamdesign/sdp_problem.hpp"

namespace beamdesign {

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(SolveStatus status);

struct SolverOptions {
  double gap_tol = 1e-7;   ///< relative duality gap
  double feas_tol = 1e-6;  ///< absolute, on block minimum eigenvalues
  int max_iter = 100;
  std::ostream* log = nullptr;  ///< per-iteration trace when set
};

struct SdpSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd y;
  double objective = 0.0;       ///< objective^T y
  double dual_objective = 0.0;  ///< bound from the dual iterate
  double gap = 0.0;             ///< relative duality gap
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::vector<double> block_min_eigenvalues;  ///< of F_k(y)
  std::vector<ComplexMatrix> dual_matrices;   ///< one per block
};

/// Backend-neutral solver contract.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string name() const = 0;
  virtual SdpSolution solve(const SdpProblem& problem,
                            const SolverOptions& options) const = 0;
};

/// Infeasible-start primal-dual path-following method (HKM direction,
/// Mehrotra predictor-corrector) working directly on Hermitian blocks. Blocks
/// that reach the matrix variable through congruence terms get a
/// Kronecker-structured Schur complement.
class InteriorPointBackend : public SdpBackend {
 public:
  std::string name() const override { return "interior-point"; }
  SdpSolution solve(const SdpProblem& problem,
                    const SolverOptions& options) const override;
};

/// Solves with the default backend.
SdpSolution solve(const SdpProblem& problem, const SolverOptions& options = {});

/// Independent re-evaluation of a candidate point from the problem data:
/// each block is rebuilt, embedded as a real symmetric matrix and
/// eigen-decomposed; the pinned diagonal is re-checked.
struct VerificationReport {
  bool passed = false;
  double min_eigenvalue = 0.0;
  int worst_block = -1;
  double max_equality_residual = 0.0;
  std::vector<double> block_min_eigenvalues;
};

VerificationReport verify_solution(const SdpProblem& problem,
                                   const Eigen::VectorXd& y, double feas_tol);

}  // namespace beamdesign
