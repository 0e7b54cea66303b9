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

#include <string>
#include <utility>
#include <vector>

#include "beamdesign/common.hpp"

namespace beamdesign {

/// f(x) = x^H A x + 2 Re(b^H x) + c  over complex n-vectors.
struct QuadraticForm {
  ComplexMatrix A;
  ComplexVector b;
  double c = 0.0;

  int dimension() const { return static_cast<int>(A.rows()); }
  double operator()(const ComplexVector& x) const;
  /// [[A, b], [b^H, c]]
  ComplexMatrix homogenized() const;
  /// Throws ValidationError unless A is square, Hermitian within 1e-12 and b
  /// has matching length.
  void validate() const;

  /// eps - x^H W x
  static QuadraticForm ball(const Eigen::VectorXd& weights, double epsilon);
};

/// Upper-triangle (row <= col) entry of a sparse Hermitian matrix.
struct HermitianEntry {
  int row = 0;
  int col = 0;
  Complex value;
};
using SparseHermitian = std::vector<HermitianEntry>;

ComplexMatrix to_dense(const SparseHermitian& entries, int size);
SparseHermitian to_sparse(const ComplexMatrix& h, double drop_tol = 0.0);

/// Hermitian matrix variable with a pinned diagonal. The free parameters are
/// the real and imaginary parts of the strict upper triangle, laid out as
/// consecutive (re, im) pairs in row-major (p < q) order starting at
/// `first_variable`.
class MatrixVariable {
 public:
  MatrixVariable() = default;
  MatrixVariable(Eigen::VectorXd pinned_diagonal, int first_variable);

  int dimension() const { return static_cast<int>(pinned_.size()); }
  int parameter_count() const { return dimension() * (dimension() - 1); }
  int first_variable() const { return first_; }
  const Eigen::VectorXd& pinned_diagonal() const { return pinned_; }

  int pair_count() const { return static_cast<int>(rows_.size()); }
  int pair_row(int k) const { return rows_[k]; }
  int pair_col(int k) const { return cols_[k]; }
  int real_variable(int k) const { return first_ + 2 * k; }
  int imag_variable(int k) const { return first_ + 2 * k + 1; }
  /// True when `variable` is one of this matrix's parameters.
  bool owns(int variable) const {
    return variable >= first_ && variable < first_ + parameter_count();
  }

  /// R(y) including the pinned diagonal.
  ComplexMatrix assemble(const Eigen::VectorXd& y) const;
  /// Writes the off-diagonal parameters of `r` into `y`.
  void scatter(const ComplexMatrix& r, Eigen::VectorXd& y) const;
  /// Hermitian basis element of parameter `variable` (re: E_pq + E_qp,
  /// im: i E_pq - i E_qp).
  ComplexMatrix basis(int variable) const;
  /// Re tr(B_v Y) for every parameter v, written into `out` at the parameter
  /// positions.  Y need not be Hermitian.
  void adjoint(const ComplexMatrix& y_matrix, Eigen::VectorXd& out) const;

 private:
  Eigen::VectorXd pinned_;
  int first_ = 0;
  std::vector<int> rows_;
  std::vector<int> cols_;
};

/// Real affine combination  constant + sum coeff_k * y_k.
struct AffineScalar {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;
};

enum class BlockKind {
  generic,
  healthy,
  tumor_lower,
  tumor_upper,
  scalar,
  psd,
  nonnegative,
};

const char* to_string(BlockKind kind);

struct ScalarTerm {
  int variable = 0;
  SparseHermitian coefficient;
};

/// Contributes sign * G^H R G to its block, G being M x size.
struct CongruenceTerm {
  double sign = 1.0;
  ComplexMatrix map;
};

/// Hermitian block affine in the decision vector y and the matrix variable R:
///   F(y) = constant + sum_k y_k D_k + sum_l s_l G_l^H R(y) G_l.
struct LmiBlock {
  BlockKind kind = BlockKind::generic;
  std::string label;
  int size = 0;
  ComplexMatrix constant;
  std::vector<ScalarTerm> terms;
  std::vector<CongruenceTerm> congruences;
  int multiplier = -1;  ///< S-procedure multiplier variable, -1 if none

  int embedded_size() const { return 2 * size; }

  ComplexMatrix evaluate(const Eigen::VectorXd& y,
                         const ComplexMatrix& r_value) const;
  ComplexMatrix evaluate(const Eigen::VectorXd& y,
                         const MatrixVariable* r) const;
  /// Dense coefficient of `variable` (scalar term or matrix parameter).
  ComplexMatrix coefficient(int variable, const MatrixVariable* r) const;
  /// Same block with every congruence term expanded into explicit scalar
  /// terms; the pinned diagonal moves into the constant.
  LmiBlock expanded(const MatrixVariable* r) const;
  LmiBlock principal_submatrix(const std::vector<int>& indices) const;
  /// Throws ValidationError on dimension mismatches or non-Hermitian data.
  void validate(int matrix_dimension) const;
};

/// S-procedure: f0(x) >= 0 whenever f1(x) >= 0  <=>  exists beta >= 0 with
///   hom(f0) - beta hom(f1) >= 0,
/// provided f1 has a strictly feasible point. When {f1 >= 0} = {0} (a ball
/// of radius zero) the implication is emitted as the scalar f0(0) >= 0 and no
/// multiplier is used.
LmiBlock s_procedure_block(const QuadraticForm& f0, const QuadraticForm& f1,
                           int multiplier);
/// Variant with f0 given as an affine homogenized block of size n + 1.
LmiBlock s_procedure_block(const LmiBlock& f0_homogenized,
                           const QuadraticForm& f1, int multiplier);

/// Robust constraint  sign (a + x)^H R (a + x) + rhs(y) >= 0  for all
/// x^H W x <= eps, as an LMI block of size M + 1 (or 1 when eps == 0).
LmiBlock robust_power_block(double sign, const ComplexVector& a,
                            const AffineScalar& rhs,
                            const Eigen::VectorXd& weights, double epsilon,
                            int multiplier, BlockKind kind);

/// Decision-variable ids used by the healthy/tumor block builders.
struct PowerVariables {
  int gap = -1;    ///< t
  int level = -1;  ///< P
};

/// [[b W - R, -R a], [-a^H R, P - t - a^H R a - b eps]]
LmiBlock healthy_point_block(const ComplexVector& a,
                             const Eigen::VectorXd& weights, double epsilon,
                             const PowerVariables& vars, int multiplier);
/// [[b W + R, R a], [a^H R, a^H R a - (1 - delta) P - b eps]]
LmiBlock tumor_lower_block(const ComplexVector& a,
                           const Eigen::VectorXd& weights, double epsilon,
                           double delta, const PowerVariables& vars,
                           int multiplier);
/// [[b W - R, -R a], [-a^H R, (1 + delta) P - a^H R a - b eps]]
LmiBlock tumor_upper_block(const ComplexVector& a,
                           const Eigen::VectorXd& weights, double epsilon,
                           double delta, const PowerVariables& vars,
                           int multiplier);

/// [[Re H, -Im H], [Im H, Re H]]. Throws ValidationError if H is not
/// Hermitian within 1e-12 (relative to its largest entry).
Eigen::MatrixXd complex_to_real(const ComplexMatrix& h);
/// Embeds every coefficient of an explicit block (no congruence terms).
LmiBlock complex_to_real(const LmiBlock& block);

struct MultiplierCertificate {
  bool feasible = false;
  double multiplier = 0.0;
  double min_eigenvalue = 0.0;  ///< at the returned multiplier
};

/// Maximises lambda_min(base + beta * direction) over beta >= 0. The block is
/// certified feasible when that maximum is >= -slack.
MultiplierCertificate find_multiplier(const ComplexMatrix& base,
                                      const ComplexMatrix& direction,
                                      double slack = 1e-8);

}  // namespace beamdesign
