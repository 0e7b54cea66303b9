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

#include "beamdesign/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

namespace beamdesign {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "numerical_failure";
}

namespace {

using Blocks = std::vector<ComplexMatrix>;

// Re tr(A B) for Hermitian A, B.
double inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.cwiseProduct(b.conjugate())).sum().real();
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += inner(a[k], b[k]);
  return s;
}

double frobenius(const Blocks& a) {
  double s = 0.0;
  for (const auto& b : a) s += b.squaredNorm();
  return std::sqrt(s);
}

struct PreparedBlock {
  int size = 0;
  ComplexMatrix f0;
  std::vector<int> vars;
  std::vector<ComplexMatrix> coeffs;
  std::vector<CongruenceTerm> congruences;
};

// The affine map y -> F(y) with its adjoint and the HKM Schur complement.
class AffineOperator {
 public:
  explicit AffineOperator(const SdpProblem& problem)
      : m_(problem.variable_count()), mat_(problem.matrix_ptr()) {
    for (const auto& block : problem.blocks) {
      PreparedBlock pb;
      pb.size = block.size;
      pb.f0 = block.constant;
      std::map<int, ComplexMatrix> merged;
      for (const auto& term : block.terms) {
        auto it = merged.find(term.variable);
        if (it == merged.end()) {
          merged.emplace(term.variable, to_dense(term.coefficient, block.size));
        } else {
          it->second += to_dense(term.coefficient, block.size);
        }
      }
      for (auto& [v, d] : merged) {
        pb.vars.push_back(v);
        pb.coeffs.push_back(std::move(d));
      }
      pb.congruences = block.congruences;
      if (!pb.congruences.empty()) {
        const ComplexMatrix pinned =
            mat_->pinned_diagonal().cast<Complex>().asDiagonal();
        for (const auto& c : pb.congruences) {
          pb.f0.noalias() += c.sign * (c.map.adjoint() * pinned * c.map);
        }
        has_congruence_ = true;
      }
      total_size_ += pb.size;
      blocks_.push_back(std::move(pb));
    }
  }

  int variable_count() const { return m_; }
  int total_size() const { return total_size_; }
  const std::vector<PreparedBlock>& blocks() const { return blocks_; }

  Blocks constant() const {
    Blocks out;
    for (const auto& b : blocks_) out.push_back(b.f0);
    return out;
  }

  Blocks linear(const Eigen::VectorXd& dy) const {
    ComplexMatrix r_lin;
    if (has_congruence_) {
      r_lin = mat_->assemble(dy);
      r_lin.diagonal().setZero();
    }
    Blocks out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_) {
      ComplexMatrix f = ComplexMatrix::Zero(b.size, b.size);
      for (size_t i = 0; i < b.vars.size(); ++i) {
        const double v = dy(b.vars[i]);
        if (v != 0.0) f.noalias() += v * b.coeffs[i];
      }
      for (const auto& c : b.congruences) {
        f.noalias() += c.sign * (c.map.adjoint() * r_lin * c.map);
      }
      out.push_back(std::move(f));
    }
    return out;
  }

  Blocks evaluate(const Eigen::VectorXd& y) const {
    Blocks out = linear(y);
    for (size_t k = 0; k < blocks_.size(); ++k) out[k] += blocks_[k].f0;
    return out;
  }

  // (A X)_i = Re tr(F_i X).
  Eigen::VectorXd adjoint(const Blocks& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
    ComplexMatrix acc;
    if (has_congruence_) {
      acc = ComplexMatrix::Zero(mat_->dimension(), mat_->dimension());
    }
    for (size_t k = 0; k < blocks_.size(); ++k) {
      const auto& b = blocks_[k];
      for (size_t i = 0; i < b.vars.size(); ++i) {
        out(b.vars[i]) += inner(b.coeffs[i], x[k]);
      }
      for (const auto& c : b.congruences) {
        acc.noalias() += c.sign * (c.map * x[k] * c.map.adjoint());
      }
    }
    if (has_congruence_) {
      Eigen::VectorXd r_part = Eigen::VectorXd::Zero(m_);
      mat_->adjoint(acc, r_part);
      const int first = mat_->first_variable();
      const int count = mat_->parameter_count();
      out.segment(first, count) += r_part.segment(first, count);
    }
    return out;
  }

  // S_ij = Re tr(F_i X F_j Z^{-1}).
  Eigen::MatrixXd schur(const Blocks& x, const Blocks& zinv) const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m_, m_);
    const int dim = has_congruence_ ? mat_->dimension() : 0;
    const int first = has_congruence_ ? mat_->first_variable() : 0;
    const int count = has_congruence_ ? mat_->parameter_count() : 0;

    // Columns of the Kronecker accumulation and rank-one rows.
    std::vector<ComplexVector> u_cols, v_cols;
    std::vector<Eigen::VectorXd> rank_one;
    Eigen::VectorXd r_part = Eigen::VectorXd::Zero(m_);

    for (size_t k = 0; k < blocks_.size(); ++k) {
      const auto& b = blocks_[k];
      const ComplexMatrix& xk = x[k];
      const ComplexMatrix& zk = zinv[k];

      // Scalar-term rows (scalar x scalar and scalar x matrix).
      for (size_t i = 0; i < b.vars.size(); ++i) {
        const ComplexMatrix p = zk * b.coeffs[i] * xk;  // Z^{-1} D_i X
        for (size_t j = 0; j < b.vars.size(); ++j) {
          // Re tr(D_j P)
          const double v =
              (b.coeffs[j].cwiseProduct(p.transpose())).sum().real();
          s(b.vars[i], b.vars[j]) += v;
        }
        if (!b.congruences.empty()) {
          ComplexMatrix w = ComplexMatrix::Zero(dim, dim);
          for (const auto& c : b.congruences) {
            w.noalias() += c.sign * (c.map * p * c.map.adjoint());
          }
          r_part.setZero();
          mat_->adjoint(w, r_part);
          for (int j = 0; j < count; ++j) {
            const double v = r_part(first + j);
            s(b.vars[i], first + j) += v;
            s(first + j, b.vars[i]) += v;
          }
        }
      }

      if (b.congruences.empty()) continue;
      if (b.size == 1) {
        ComplexMatrix q = ComplexMatrix::Zero(dim, dim);
        for (const auto& c : b.congruences) {
          q.noalias() += c.sign * (c.map * c.map.adjoint());
        }
        r_part.setZero();
        mat_->adjoint(q, r_part);
        const double weight = std::sqrt(std::max(
            0.0, xk(0, 0).real() * zk(0, 0).real()));
        rank_one.push_back(weight * r_part.segment(first, count));
        continue;
      }
      for (const auto& cl : b.congruences) {
        for (const auto& cm : b.congruences) {
          ComplexMatrix u = cl.map * xk * cm.map.adjoint();
          ComplexMatrix v = cm.map * zk * cl.map.adjoint();
          u *= cl.sign * cm.sign;
          u_cols.emplace_back(Eigen::Map<ComplexVector>(u.data(), u.size()));
          v_cols.emplace_back(Eigen::Map<ComplexVector>(v.data(), v.size()));
        }
      }
    }

    if (!rank_one.empty()) {
      Eigen::MatrixXd rows(count, rank_one.size());
      for (size_t i = 0; i < rank_one.size(); ++i) rows.col(i) = rank_one[i];
      s.block(first, first, count, count).noalias() += rows * rows.transpose();
    }

    if (!u_cols.empty()) {
      const int n2 = dim * dim;
      ComplexMatrix um(n2, u_cols.size()), vm(n2, v_cols.size());
      for (size_t i = 0; i < u_cols.size(); ++i) {
        um.col(i) = u_cols[i];
        vm.col(i) = v_cols[i];
      }
      ComplexMatrix kron(n2, n2);
      kron.noalias() = um * vm.transpose();
      const int pairs = mat_->pair_count();
      for (int k1 = 0; k1 < pairs; ++k1) {
        const int a = mat_->pair_row(k1), b = mat_->pair_col(k1);
        for (int k2 = k1; k2 < pairs; ++k2) {
          const int c = mat_->pair_row(k2), d = mat_->pair_col(k2);
          const Complex kk1 = kron(b + c * dim, d + a * dim);
          const Complex kk2 = kron(b + d * dim, c + a * dim);
          const Complex kk3 = kron(a + c * dim, d + b * dim);
          const Complex kk4 = kron(a + d * dim, c + b * dim);
          const double rr = (kk1 + kk2 + kk3 + kk4).real();
          const double ri = -(kk1 - kk2 + kk3 - kk4).imag();
          const double ir = -(kk1 + kk2 - kk3 - kk4).imag();
          const double ii = (-kk1 + kk2 + kk3 - kk4).real();
          const int re1 = mat_->real_variable(k1), im1 = mat_->imag_variable(k1);
          const int re2 = mat_->real_variable(k2), im2 = mat_->imag_variable(k2);
          s(re1, re2) += rr;
          s(re1, im2) += ri;
          s(im1, re2) += ir;
          s(im1, im2) += ii;
          if (k2 != k1) {
            s(re2, re1) += rr;
            s(im2, re1) += ri;
            s(re2, im1) += ir;
            s(im2, im1) += ii;
          }
        }
      }
    }
    return 0.5 * (s + s.transpose());
  }

 private:
  int m_ = 0;
  const MatrixVariable* mat_ = nullptr;
  bool has_congruence_ = false;
  int total_size_ = 0;
  std::vector<PreparedBlock> blocks_;
};

// Largest alpha with M + alpha dM >= 0 (infinity when unbounded).
double max_step(const ComplexMatrix& m, const ComplexMatrix& dm) {
  if (m.rows() == 1) {
    const double d = dm(0, 0).real();
    return d < 0.0 ? -m(0, 0).real() / d
                   : std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto l = llt.matrixL();
  const ComplexMatrix t = l.solve(dm);
  const ComplexMatrix s = l.solve(t.adjoint());
  const double lam = min_eigenvalue(s);
  return lam < 0.0 ? -1.0 / lam : std::numeric_limits<double>::infinity();
}

double max_step(const Blocks& m, const Blocks& dm) {
  double a = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < m.size(); ++k) a = std::min(a, max_step(m[k], dm[k]));
  return a;
}

bool invert_pd(const ComplexMatrix& z, ComplexMatrix& zinv) {
  if (z.rows() == 1) {
    const double v = z(0, 0).real();
    if (!(v > 0.0)) return false;
    zinv = ComplexMatrix::Constant(1, 1, Complex(1.0 / v, 0.0));
    return true;
  }
  Eigen::LLT<ComplexMatrix> llt(z);
  if (llt.info() != Eigen::Success) return false;
  zinv = llt.solve(ComplexMatrix::Identity(z.rows(), z.cols()));
  zinv = hermitian_part(zinv);
  return true;
}

struct Iterate {
  Blocks x, z;
  Eigen::VectorXd y;
};

}  // namespace

SdpSolution InteriorPointBackend::solve(const SdpProblem& problem,
                                        const SolverOptions& options) const {
  problem.validate();
  AffineOperator op(problem);
  const int m = op.variable_count();
  const Eigen::VectorXd& c = problem.objective;
  const auto& pblocks = op.blocks();
  const int nb = static_cast<int>(pblocks.size());
  const Blocks f0 = op.constant();
  const double norm_c = c.norm();
  const double norm_f0 = frobenius(f0);

  // Starting point, scaled from the data norms.
  Iterate it;
  it.y = Eigen::VectorXd::Zero(m);
  for (const auto& b : pblocks) {
    const double n = b.size;
    double max_coeff = 0.0;
    double ratio = 1.0;
    for (size_t i = 0; i < b.vars.size(); ++i) {
      const double nrm = b.coeffs[i].norm();
      max_coeff = std::max(max_coeff, nrm);
      ratio = std::max(ratio, (1.0 + std::abs(c(b.vars[i]))) / (1.0 + nrm));
    }
    for (const auto& cg : b.congruences) {
      max_coeff = std::max(max_coeff, std::sqrt(2.0) * cg.map.squaredNorm());
    }
    const double xi = std::max({10.0, std::sqrt(n), n * ratio});
    const double eta = std::max({10.0, std::sqrt(n), max_coeff, b.f0.norm()});
    it.x.push_back(xi * ComplexMatrix::Identity(b.size, b.size));
    it.z.push_back(eta * ComplexMatrix::Identity(b.size, b.size));
  }

  SdpSolution sol;
  sol.status = SolveStatus::numerical_failure;
  double best_merit = std::numeric_limits<double>::infinity();
  Iterate best = it;
  int stall = 0;
  double step_frac = 0.9;

  auto record = [&](const Iterate& cur, double pobj, double dobj, double gap,
                    double pinf, double dinf) {
    sol.y = cur.y;
    sol.objective = pobj;
    sol.dual_objective = dobj;
    sol.gap = gap;
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;
    sol.dual_matrices = cur.x;
  };

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    sol.iterations = iter;
    const Blocks fy = op.evaluate(it.y);
    Blocks rd(nb);
    for (int k = 0; k < nb; ++k) rd[k] = fy[k] - it.z[k];
    const Eigen::VectorXd ax = op.adjoint(it.x);
    const Eigen::VectorXd rp = -c - ax;
    const double xz = inner(it.x, it.z);
    const double mu = xz / op.total_size();
    const double pobj = c.dot(it.y);
    const double dobj = inner(f0, it.x);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double gap = std::max(std::abs(dobj - pobj), std::abs(xz)) / denom;
    const double pinf = rp.norm() / (1.0 + norm_c);
    const double dinf = frobenius(rd) / (1.0 + norm_f0);

    if (options.log) {
      *options.log << std::setw(3) << iter << std::scientific
                   << std::setprecision(3) << "  pobj " << pobj << "  dobj "
                   << dobj << "  gap " << gap << "  pinf " << pinf << "  dinf "
                   << dinf << "  mu " << mu << '\n';
    }

    const double merit = std::max({gap, pinf, dinf});
    if (merit < best_merit) {
      best_merit = merit;
      best = it;
      record(it, pobj, dobj, gap, pinf, dinf);
    }

    if (gap <= options.gap_tol && pinf <= 1e-8 && dinf <= 1e-9) {
      record(it, pobj, dobj, gap, pinf, dinf);
      sol.status = SolveStatus::optimal;
      break;
    }

    // Dual ray: X >= 0, A(X) ~ 0, tr(F0 X) < 0 proves F(y) >= 0 infeasible.
    if (dobj < 0.0 && ax.norm() <= 1e-8 * -dobj) {
      record(it, pobj, dobj, gap, pinf, dinf);
      sol.status = SolveStatus::infeasible;
      break;
    }
    // Primal ray: F_lin(d) >= 0 with c^T d > 0.
    const double ynorm = it.y.norm();
    if (ynorm > 1e8 && pobj > 0.0 && dinf <= 1e-8) {
      const Eigen::VectorXd d = it.y / ynorm;
      const Blocks fd = op.linear(d);
      double lam = std::numeric_limits<double>::infinity();
      for (const auto& b : fd) lam = std::min(lam, min_eigenvalue(b));
      if (c.dot(d) > 0.0 && lam >= -1e-8) {
        record(it, pobj, dobj, gap, pinf, dinf);
        sol.status = SolveStatus::unbounded;
        break;
      }
    }
    if (iter == options.max_iter) break;

    Blocks zinv(nb);
    bool ok = true;
    for (int k = 0; k < nb && ok; ++k) ok = invert_pd(it.z[k], zinv[k]);
    if (!ok) break;

    Eigen::MatrixXd s = op.schur(it.x, zinv);
    Eigen::LLT<Eigen::MatrixXd> chol(s);
    if (chol.info() != Eigen::Success) {
      const double reg = 1e-13 * std::max(1.0, s.diagonal().cwiseAbs().maxCoeff());
      s.diagonal().array() += reg;
      chol.compute(s);
      if (chol.info() != Eigen::Success) break;
    }

    // X Rd Z^{-1} is shared by predictor and corrector.
    Blocks x_rd_zinv(nb);
    for (int k = 0; k < nb; ++k) x_rd_zinv[k] = it.x[k] * rd[k] * zinv[k];

    auto direction = [&](double sigma_mu, const Blocks* corr, Blocks& dx,
                         Eigen::VectorXd& dy, Blocks& dz) {
      Blocks h(nb);
      for (int k = 0; k < nb; ++k) {
        ComplexMatrix hk = sigma_mu * zinv[k] - it.x[k] - x_rd_zinv[k];
        if (corr) hk -= (*corr)[k];
        h[k] = hermitian_part(hk);
      }
      const Eigen::VectorXd rhs = op.adjoint(h) - rp;
      dy = chol.solve(rhs);
      dz = op.linear(dy);
      dx.resize(nb);
      for (int k = 0; k < nb; ++k) {
        dz[k] += rd[k];
        ComplexMatrix d = sigma_mu * zinv[k] - it.x[k] - it.x[k] * dz[k] * zinv[k];
        if (corr) d -= (*corr)[k];
        dx[k] = hermitian_part(d);
      }
    };

    // Predictor.
    Blocks dx_a, dz_a;
    Eigen::VectorXd dy_a;
    direction(0.0, nullptr, dx_a, dy_a, dz_a);
    const double ap_a = std::min(1.0, max_step(it.x, dx_a));
    const double ad_a = std::min(1.0, max_step(it.z, dz_a));
    double mu_aff = 0.0;
    for (int k = 0; k < nb; ++k) {
      mu_aff += inner(it.x[k] + ap_a * dx_a[k], it.z[k] + ad_a * dz_a[k]);
    }
    mu_aff /= op.total_size();
    const double expon = std::max(1.0, 3.0 * std::pow(std::min(ap_a, ad_a), 2));
    const double sigma =
        std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expon), 0.0, 1.0);

    // Corrector.
    Blocks corr(nb);
    for (int k = 0; k < nb; ++k) corr[k] = dx_a[k] * dz_a[k] * zinv[k];
    Blocks dx, dz;
    Eigen::VectorXd dy;
    direction(sigma * mu, &corr, dx, dy, dz);

    const double ap = std::min(1.0, step_frac * max_step(it.x, dx));
    const double ad = std::min(1.0, step_frac * max_step(it.z, dz));
    if (!std::isfinite(ap) || !std::isfinite(ad) || !dy.allFinite()) break;

    for (int k = 0; k < nb; ++k) {
      it.x[k] = hermitian_part(it.x[k] + ap * dx[k]);
      it.z[k] = hermitian_part(it.z[k] + ad * dz[k]);
    }
    it.y += ad * dy;
    step_frac = 0.9 + 0.09 * std::min(ap, ad);

    if (std::max(ap, ad) < 1e-9) {
      if (++stall >= 3) break;
    } else {
      stall = 0;
    }
  }

  if (sol.status == SolveStatus::numerical_failure && sol.y.size() == 0) {
    sol.y = best.y;
  }
  const VerificationReport report =
      verify_solution(problem, sol.y, options.feas_tol);
  sol.block_min_eigenvalues = report.block_min_eigenvalues;
  if (sol.status == SolveStatus::optimal && !report.passed) {
    sol.status = SolveStatus::numerical_failure;
  }
  return sol;
}

SdpSolution solve(const SdpProblem& problem, const SolverOptions& options) {
  return InteriorPointBackend().solve(problem, options);
}

VerificationReport verify_solution(const SdpProblem& problem,
                                   const Eigen::VectorXd& y, double feas_tol) {
  VerificationReport report;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  if (y.size() != problem.variable_count()) {
    report.passed = false;
    return report;
  }
  for (int k = 0; k < static_cast<int>(problem.blocks.size()); ++k) {
    const ComplexMatrix f = problem.evaluate_block(k, y);
    const Eigen::MatrixXd real_form = complex_to_real(hermitian_part(f));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(real_form,
                                                      Eigen::EigenvaluesOnly);
    const double lam = es.eigenvalues().minCoeff();
    report.block_min_eigenvalues.push_back(lam);
    if (lam < report.min_eigenvalue) {
      report.min_eigenvalue = lam;
      report.worst_block = k;
    }
  }
  if (problem.matrix) {
    const ComplexMatrix r = problem.matrix->assemble(y);
    report.max_equality_residual =
        (r.diagonal().real() - problem.matrix->pinned_diagonal())
            .cwiseAbs()
            .maxCoeff();
  }
  report.passed = y.allFinite() && report.min_eigenvalue >= -feas_tol &&
                  report.max_equality_residual <= feas_tol;
  return report;
}

}  // namespace beamdesign
