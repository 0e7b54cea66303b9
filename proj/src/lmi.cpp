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

#include "beamdesign/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace beamdesign {

namespace {

constexpr double kHermitianTol = 1e-12;

void check_hermitian(const ComplexMatrix& h, const char* what) {
  if (h.rows() != h.cols()) {
    throw ValidationError(std::string(what) + " is not square");
  }
  const double scale =
      h.size() == 0 ? 1.0 : std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermitian_defect(h) > kHermitianTol * scale) {
    throw ValidationError(std::string(what) + " is not Hermitian");
  }
}

// sup_x f(x); +inf when unbounded above.
double supremum(const QuadraticForm& f) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(f.A));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const ComplexVector g = es.eigenvectors().adjoint() * f.b;
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  double value = f.c;
  for (int k = 0; k < lam.size(); ++k) {
    if (lam(k) > 1e-14 * scale) return std::numeric_limits<double>::infinity();
    if (lam(k) < -1e-14 * scale) {
      value += std::norm(g(k)) / (-lam(k));
    } else if (std::abs(g(k)) > 1e-14 * std::max(1.0, f.b.norm())) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return value;
}

bool is_point_ball(const QuadraticForm& f1) {
  if (f1.c != 0.0 || f1.b.cwiseAbs().maxCoeff() != 0.0) return false;
  if (f1.A.size() == 0) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(f1.A),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() < 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticForm

double QuadraticForm::operator()(const ComplexVector& x) const {
  return (x.dot(A * x)).real() + 2.0 * b.dot(x).real() + c;
}

ComplexMatrix QuadraticForm::homogenized() const {
  const int n = dimension();
  ComplexMatrix h(n + 1, n + 1);
  h.topLeftCorner(n, n) = A;
  h.topRightCorner(n, 1) = b;
  h.bottomLeftCorner(1, n) = b.adjoint();
  h(n, n) = c;
  return h;
}

void QuadraticForm::validate() const {
  check_hermitian(A, "quadratic form matrix");
  if (b.size() != A.rows()) {
    throw ValidationError("quadratic form vector has the wrong length");
  }
}

QuadraticForm QuadraticForm::ball(const Eigen::VectorXd& weights,
                                  double epsilon) {
  QuadraticForm f;
  f.A = (-weights).cast<Complex>().asDiagonal();
  f.b = ComplexVector::Zero(weights.size());
  f.c = epsilon;
  return f;
}

// ---------------------------------------------------------------------------
// Sparse Hermitian helpers

ComplexMatrix to_dense(const SparseHermitian& entries, int size) {
  ComplexMatrix h = ComplexMatrix::Zero(size, size);
  for (const auto& e : entries) {
    if (e.row == e.col) {
      h(e.row, e.row) += e.value.real();
    } else {
      h(e.row, e.col) += e.value;
      h(e.col, e.row) += std::conj(e.value);
    }
  }
  return h;
}

SparseHermitian to_sparse(const ComplexMatrix& h, double drop_tol) {
  SparseHermitian out;
  for (int c = 0; c < h.cols(); ++c) {
    for (int r = 0; r <= c; ++r) {
      const Complex v = r == c ? Complex(h(r, r).real(), 0.0) : h(r, c);
      if (std::abs(v) > drop_tol) out.push_back({r, c, v});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// MatrixVariable

MatrixVariable::MatrixVariable(Eigen::VectorXd pinned_diagonal,
                               int first_variable)
    : pinned_(std::move(pinned_diagonal)), first_(first_variable) {
  const int m = dimension();
  for (int p = 0; p < m; ++p) {
    for (int q = p + 1; q < m; ++q) {
      rows_.push_back(p);
      cols_.push_back(q);
    }
  }
}

ComplexMatrix MatrixVariable::assemble(const Eigen::VectorXd& y) const {
  ComplexMatrix r = pinned_.cast<Complex>().asDiagonal();
  for (int k = 0; k < pair_count(); ++k) {
    const Complex v(y(real_variable(k)), y(imag_variable(k)));
    r(rows_[k], cols_[k]) = v;
    r(cols_[k], rows_[k]) = std::conj(v);
  }
  return r;
}

void MatrixVariable::scatter(const ComplexMatrix& r, Eigen::VectorXd& y) const {
  for (int k = 0; k < pair_count(); ++k) {
    const Complex v = 0.5 * (r(rows_[k], cols_[k]) +
                             std::conj(r(cols_[k], rows_[k])));
    y(real_variable(k)) = v.real();
    y(imag_variable(k)) = v.imag();
  }
}

ComplexMatrix MatrixVariable::basis(int variable) const {
  const int local = variable - first_;
  const int k = local / 2;
  const Complex alpha = (local % 2 == 0) ? Complex(1, 0) : Complex(0, 1);
  ComplexMatrix b = ComplexMatrix::Zero(dimension(), dimension());
  b(rows_[k], cols_[k]) = alpha;
  b(cols_[k], rows_[k]) = std::conj(alpha);
  return b;
}

void MatrixVariable::adjoint(const ComplexMatrix& y_matrix,
                             Eigen::VectorXd& out) const {
  for (int k = 0; k < pair_count(); ++k) {
    const Complex upper = y_matrix(rows_[k], cols_[k]);
    const Complex lower = y_matrix(cols_[k], rows_[k]);
    out(real_variable(k)) = upper.real() + lower.real();
    out(imag_variable(k)) = upper.imag() - lower.imag();
  }
}

// ---------------------------------------------------------------------------
// LmiBlock

const char* to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::generic: return "generic";
    case BlockKind::healthy: return "healthy";
    case BlockKind::tumor_lower: return "tumor_lower";
    case BlockKind::tumor_upper: return "tumor_upper";
    case BlockKind::scalar: return "scalar";
    case BlockKind::psd: return "psd";
    case BlockKind::nonnegative: return "nonnegative";
  }
  return "generic";
}

ComplexMatrix LmiBlock::evaluate(const Eigen::VectorXd& y,
                                 const ComplexMatrix& r_value) const {
  ComplexMatrix f = constant;
  for (const auto& term : terms) {
    const double v = y(term.variable);
    if (v == 0.0) continue;
    for (const auto& e : term.coefficient) {
      if (e.row == e.col) {
        f(e.row, e.row) += v * e.value.real();
      } else {
        f(e.row, e.col) += v * e.value;
        f(e.col, e.row) += v * std::conj(e.value);
      }
    }
  }
  for (const auto& c : congruences) {
    f.noalias() += c.sign * (c.map.adjoint() * r_value * c.map);
  }
  return f;
}

ComplexMatrix LmiBlock::evaluate(const Eigen::VectorXd& y,
                                 const MatrixVariable* r) const {
  if (congruences.empty() || r == nullptr) {
    if (!congruences.empty()) {
      throw ValidationError("block needs a matrix variable to evaluate");
    }
    return evaluate(y, ComplexMatrix());
  }
  return evaluate(y, r->assemble(y));
}

ComplexMatrix LmiBlock::coefficient(int variable,
                                    const MatrixVariable* r) const {
  ComplexMatrix d = ComplexMatrix::Zero(size, size);
  for (const auto& term : terms) {
    if (term.variable == variable) d += to_dense(term.coefficient, size);
  }
  if (r != nullptr && r->owns(variable)) {
    const ComplexMatrix b = r->basis(variable);
    for (const auto& c : congruences) {
      d.noalias() += c.sign * (c.map.adjoint() * b * c.map);
    }
  }
  return d;
}

LmiBlock LmiBlock::expanded(const MatrixVariable* r) const {
  LmiBlock out = *this;
  out.congruences.clear();
  if (congruences.empty()) return out;
  if (r == nullptr) {
    throw ValidationError("block needs a matrix variable to expand");
  }
  const ComplexMatrix pinned = r->pinned_diagonal().cast<Complex>().asDiagonal();
  for (const auto& c : congruences) {
    out.constant.noalias() += c.sign * (c.map.adjoint() * pinned * c.map);
  }
  for (int k = 0; k < r->pair_count(); ++k) {
    const int p = r->pair_row(k);
    const int q = r->pair_col(k);
    for (int part = 0; part < 2; ++part) {
      const Complex alpha = part == 0 ? Complex(1, 0) : Complex(0, 1);
      ComplexMatrix d = ComplexMatrix::Zero(size, size);
      for (const auto& c : congruences) {
        const ComplexMatrix gp = c.map.row(p).adjoint();
        const ComplexMatrix gq = c.map.row(q).adjoint();
        d.noalias() += c.sign * (alpha * gp * gq.adjoint() +
                                 std::conj(alpha) * gq * gp.adjoint());
      }
      SparseHermitian entries = to_sparse(d);
      if (!entries.empty()) {
        out.terms.push_back({part == 0 ? r->real_variable(k)
                                       : r->imag_variable(k),
                             std::move(entries)});
      }
    }
  }
  return out;
}

LmiBlock LmiBlock::principal_submatrix(const std::vector<int>& indices) const {
  LmiBlock out;
  out.kind = kind;
  out.label = label;
  out.multiplier = multiplier;
  out.size = static_cast<int>(indices.size());
  out.constant.resize(out.size, out.size);
  std::vector<int> position(size, -1);
  for (int i = 0; i < out.size; ++i) {
    position[indices[i]] = i;
    for (int j = 0; j < out.size; ++j) {
      out.constant(i, j) = constant(indices[i], indices[j]);
    }
  }
  for (const auto& term : terms) {
    ScalarTerm t{term.variable, {}};
    for (const auto& e : term.coefficient) {
      int r = position[e.row];
      int c = position[e.col];
      if (r < 0 || c < 0) continue;
      Complex v = e.value;
      if (r > c) {
        std::swap(r, c);
        v = std::conj(v);
      }
      t.coefficient.push_back({r, c, v});
    }
    if (!t.coefficient.empty()) out.terms.push_back(std::move(t));
  }
  for (const auto& c : congruences) {
    CongruenceTerm sub{c.sign, ComplexMatrix(c.map.rows(), out.size)};
    for (int i = 0; i < out.size; ++i) sub.map.col(i) = c.map.col(indices[i]);
    out.congruences.push_back(std::move(sub));
  }
  // A multiplier that no longer appears is dropped.
  if (multiplier >= 0) {
    bool present = false;
    for (const auto& t : out.terms) present |= t.variable == multiplier;
    if (!present) out.multiplier = -1;
  }
  return out;
}

void LmiBlock::validate(int matrix_dimension) const {
  if (constant.rows() != size || constant.cols() != size) {
    throw ValidationError("block '" + label + "' constant has wrong size");
  }
  check_hermitian(constant, "block constant");
  for (const auto& term : terms) {
    if (term.variable < 0) throw ValidationError("negative variable id");
    for (const auto& e : term.coefficient) {
      if (e.row < 0 || e.col >= size || e.row > e.col) {
        throw ValidationError("block '" + label +
                              "' has an out-of-range coefficient entry");
      }
    }
  }
  for (const auto& c : congruences) {
    if (c.map.rows() != matrix_dimension || c.map.cols() != size) {
      throw ValidationError("block '" + label +
                            "' congruence map has wrong shape");
    }
  }
}

// ---------------------------------------------------------------------------
// S-procedure

LmiBlock s_procedure_block(const QuadraticForm& f0, const QuadraticForm& f1,
                           int multiplier) {
  f0.validate();
  LmiBlock h;
  h.size = f0.dimension() + 1;
  h.constant = f0.homogenized();
  return s_procedure_block(h, f1, multiplier);
}

LmiBlock s_procedure_block(const LmiBlock& f0_homogenized,
                           const QuadraticForm& f1, int multiplier) {
  f1.validate();
  const int n = f1.dimension();
  if (f0_homogenized.size != n + 1) {
    throw ValidationError("S-procedure operands have different dimensions");
  }
  if (is_point_ball(f1)) {
    LmiBlock scalar = f0_homogenized.principal_submatrix({n});
    scalar.multiplier = -1;
    return scalar;
  }
  if (!(supremum(f1) > 0.0)) {
    throw ValidationError(
        "S-procedure constraint has no strictly feasible point");
  }
  if (multiplier < 0) throw ValidationError("S-procedure needs a multiplier");
  LmiBlock block = f0_homogenized;
  block.terms.push_back({multiplier, to_sparse(-f1.homogenized())});
  block.multiplier = multiplier;
  return block;
}

LmiBlock robust_power_block(double sign, const ComplexVector& a,
                            const AffineScalar& rhs,
                            const Eigen::VectorXd& weights, double epsilon,
                            int multiplier, BlockKind kind) {
  const int m = static_cast<int>(a.size());
  if (weights.size() != m) {
    throw ValidationError("weight and steering dimensions differ");
  }
  if (!(epsilon >= 0.0)) throw ValidationError("negative uncertainty bound");

  LmiBlock f0;
  f0.size = m + 1;
  f0.constant = ComplexMatrix::Zero(m + 1, m + 1);
  f0.constant(m, m) = rhs.constant;
  for (const auto& [var, coeff] : rhs.terms) {
    f0.terms.push_back({var, {{m, m, Complex(coeff, 0.0)}}});
  }
  CongruenceTerm power{sign, ComplexMatrix(m, m + 1)};
  power.map.leftCols(m).setIdentity();
  power.map.col(m) = a;
  f0.congruences.push_back(std::move(power));

  LmiBlock block = s_procedure_block(f0, QuadraticForm::ball(weights, epsilon),
                                     multiplier);
  block.kind = kind;
  return block;
}

LmiBlock healthy_point_block(const ComplexVector& a,
                             const Eigen::VectorXd& weights, double epsilon,
                             const PowerVariables& vars, int multiplier) {
  AffineScalar rhs;
  rhs.terms = {{vars.level, 1.0}, {vars.gap, -1.0}};
  return robust_power_block(-1.0, a, rhs, weights, epsilon, multiplier,
                            BlockKind::healthy);
}

LmiBlock tumor_lower_block(const ComplexVector& a,
                           const Eigen::VectorXd& weights, double epsilon,
                           double delta, const PowerVariables& vars,
                           int multiplier) {
  AffineScalar rhs;
  rhs.terms = {{vars.level, -(1.0 - delta)}};
  return robust_power_block(1.0, a, rhs, weights, epsilon, multiplier,
                            BlockKind::tumor_lower);
}

LmiBlock tumor_upper_block(const ComplexVector& a,
                           const Eigen::VectorXd& weights, double epsilon,
                           double delta, const PowerVariables& vars,
                           int multiplier) {
  AffineScalar rhs;
  rhs.terms = {{vars.level, 1.0 + delta}};
  return robust_power_block(-1.0, a, rhs, weights, epsilon, multiplier,
                            BlockKind::tumor_upper);
}

// ---------------------------------------------------------------------------
// Complex-to-real embedding

Eigen::MatrixXd complex_to_real(const ComplexMatrix& h) {
  check_hermitian(h, "embedded matrix");
  const int n = static_cast<int>(h.rows());
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return out;
}

LmiBlock complex_to_real(const LmiBlock& block) {
  if (!block.congruences.empty()) {
    throw ValidationError("expand congruence terms before embedding");
  }
  LmiBlock out;
  out.kind = block.kind;
  out.label = block.label;
  out.multiplier = block.multiplier;
  out.size = 2 * block.size;
  out.constant = complex_to_real(block.constant).cast<Complex>();
  for (const auto& term : block.terms) {
    const Eigen::MatrixXd d =
        complex_to_real(to_dense(term.coefficient, block.size));
    out.terms.push_back({term.variable, to_sparse(d.cast<Complex>())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multiplier search

MultiplierCertificate find_multiplier(const ComplexMatrix& base,
                                      const ComplexMatrix& direction,
                                      double slack) {
  const int n = static_cast<int>(base.rows());
  auto lam_min = [&](double beta) {
    return min_eigenvalue(base + beta * direction);
  };

  // Diagonal entries with a negative slope bound beta from above.
  double upper = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double slope = direction(i, i).real();
    if (slope < 0.0) {
      upper = std::min(upper, (base(i, i).real() + slack) / -slope);
    }
  }
  MultiplierCertificate cert;
  if (upper < 0.0) {
    cert.multiplier = 0.0;
    cert.min_eigenvalue = lam_min(0.0);
    cert.feasible = cert.min_eigenvalue >= -slack;
    return cert;
  }
  if (!std::isfinite(upper)) {
    const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());
    const double dscale =
        std::max(1e-300, direction.cwiseAbs().maxCoeff());
    upper = 1e6 * scale / dscale;
  }

  // lambda_min is concave in beta: golden-section search.
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = upper;
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = lam_min(x1), f2 = lam_min(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, upper); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = lam_min(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = lam_min(x1);
    }
  }
  double best = 0.5 * (lo + hi);
  double best_val = lam_min(best);
  for (double cand : {0.0, upper}) {
    const double v = lam_min(cand);
    if (v > best_val) {
      best = cand;
      best_val = v;
    }
  }
  cert.multiplier = best;
  cert.min_eigenvalue = best_val;
  cert.feasible = best_val >= -slack;
  return cert;
}

}  // namespace beamdesign
