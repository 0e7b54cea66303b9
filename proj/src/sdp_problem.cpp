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

#include "beamdesign/sdp_problem.hpp"

#include <string>

namespace beamdesign {

int SdpProblem::count(BlockKind kind) const {
  int n = 0;
  for (const auto& b : blocks) n += b.kind == kind;
  return n;
}

int SdpProblem::variable_index(const std::string& name) const {
  for (int i = 0; i < variable_count(); ++i) {
    if (variable_names[i] == name) return i;
  }
  return -1;
}

ComplexMatrix SdpProblem::evaluate_block(int k, const Eigen::VectorXd& y) const {
  return blocks.at(k).evaluate(y, matrix_ptr());
}

ComplexMatrix SdpProblem::matrix_value(const Eigen::VectorXd& y) const {
  if (!matrix) return ComplexMatrix();
  return matrix->assemble(y);
}

void SdpProblem::validate() const {
  const int m = variable_count();
  if (objective.size() != m) {
    throw AssemblyError("objective length differs from variable count");
  }
  std::vector<char> referenced(m, 0);
  const int dim = matrix ? matrix->dimension() : 0;
  if (matrix) {
    if (matrix->first_variable() < 0 ||
        matrix->first_variable() + matrix->parameter_count() > m) {
      throw AssemblyError("matrix variable parameters are not declared");
    }
  }
  for (const auto& block : blocks) {
    try {
      block.validate(dim);
    } catch (const ValidationError& e) {
      throw AssemblyError(e.what());
    }
    if (!block.congruences.empty() && !matrix) {
      throw AssemblyError("block '" + block.label +
                          "' references an undeclared matrix variable");
    }
    for (const auto& term : block.terms) {
      if (term.variable >= m) {
        throw AssemblyError("block '" + block.label +
                            "' references an undeclared variable");
      }
      referenced[term.variable] = 1;
    }
    if (!block.congruences.empty()) {
      for (int v = 0; v < matrix->parameter_count(); ++v) {
        referenced[matrix->first_variable() + v] = 1;
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!referenced[i]) {
      throw AssemblyError("variable '" + variable_names[i] +
                          "' appears in no block");
    }
  }
}

SdpProblem SdpProblem::expanded() const {
  SdpProblem out;
  out.variable_names = variable_names;
  out.objective = objective;
  out.matrix = matrix;
  out.blocks.reserve(blocks.size());
  for (const auto& b : blocks) out.blocks.push_back(b.expanded(matrix_ptr()));
  return out;
}

SdpProblem SdpProblem::embedded_real() const {
  SdpProblem out = expanded();
  for (auto& b : out.blocks) b = complex_to_real(b);
  return out;
}

void add_nonnegativity(SdpProblem& problem, int variable,
                       const std::string& label) {
  LmiBlock b;
  b.kind = BlockKind::nonnegative;
  b.label = label;
  b.size = 1;
  b.constant = ComplexMatrix::Zero(1, 1);
  b.terms.push_back({variable, {{0, 0, Complex(1.0, 0.0)}}});
  problem.blocks.push_back(std::move(b));
}

}  // namespace beamdesign
