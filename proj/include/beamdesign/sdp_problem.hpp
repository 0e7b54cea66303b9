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
#include <vector>

#include "beamdesign/lmi.hpp"

namespace beamdesign {

/// maximize  objective^T y   subject to   F_k(y) >= 0 for every block k.
///
/// An optional Hermitian matrix variable R (diagonal pinned by equality,
/// off-diagonals free) enters blocks through congruence terms. Scalar
/// non-negativity (multipliers) is expressed as 1x1 blocks.
struct SdpProblem {
  std::vector<std::string> variable_names;
  Eigen::VectorXd objective;
  std::optional<MatrixVariable> matrix;
  std::vector<LmiBlock> blocks;

  int variable_count() const {
    return static_cast<int>(variable_names.size());
  }
  /// Number of pinned-diagonal equalities R_mm = value.
  int equality_count() const { return matrix ? matrix->dimension() : 0; }
  const MatrixVariable* matrix_ptr() const {
    return matrix ? &*matrix : nullptr;
  }
  int count(BlockKind kind) const;
  int variable_index(const std::string& name) const;  ///< -1 if absent

  ComplexMatrix evaluate_block(int k, const Eigen::VectorXd& y) const;
  ComplexMatrix matrix_value(const Eigen::VectorXd& y) const;

  /// Throws AssemblyError on dimension mismatches, undeclared variables or
  /// variables that no block references.
  void validate() const;

  /// Congruence terms replaced by explicit per-variable coefficients.
  SdpProblem expanded() const;
  /// Expanded problem with every block mapped through complex_to_real.
  SdpProblem embedded_real() const;
};

/// Adds a 1x1 block  y_v >= 0.
void add_nonnegativity(SdpProblem& problem, int variable,
                       const std::string& label);

}  // namespace beamdesign
