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

#include "beamdesign/worstcase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace beamdesign {

const char* to_string(TrsCase c) {
  switch (c) {
    case TrsCase::interior: return "interior";
    case TrsCase::boundary: return "boundary";
    case TrsCase::hard_case: return "hard_case";
  }
  return "boundary";
}

namespace {

// Problem in whitened coordinates: u = W^{1/2} x, a' = W^{1/2} a,
// R~ = W^{-1/2} R W^{-1/2} = V diag(lambda) V^H, c = V^H a'.
struct Whitened {
  Eigen::VectorXd sqrt_w;
  Eigen::VectorXd lambda;
  ComplexMatrix V;
  ComplexVector c;
};

Whitened whiten(const ComplexMatrix& R, const ComplexVector& a,
                const Eigen::VectorXd& weights) {
  const int m = static_cast<int>(a.size());
  if (R.rows() != m || R.cols() != m || weights.size() != m) {
    throw ValidationError("worst-case dimensions differ");
  }
  if (!(weights.array() > 0.0).all()) {
    throw ValidationError("uncertainty weights must be positive");
  }
  Whitened w;
  w.sqrt_w = weights.cwiseSqrt();
  const Eigen::VectorXd inv = w.sqrt_w.cwiseInverse();
  const ComplexMatrix rt =
      inv.cast<Complex>().asDiagonal() * hermitian_part(R) *
      inv.cast<Complex>().asDiagonal();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rt);
  w.lambda = es.eigenvalues();
  w.V = es.eigenvectors();
  w.c = w.V.adjoint() * (w.sqrt_w.cast<Complex>().asDiagonal() * a);
  return w;
}

// Root of the decreasing function phi on [lo, hi] with phi(lo) > 0 > phi(hi):
// bisection safeguarding Newton steps on 1/sqrt(phi + eps) - 1/sqrt(eps).
template <class Norm2>
double secular_root(Norm2 norm2, double eps, double lo, double hi) {
  auto phi = [&](double mu) { return norm2(mu) - eps; };
  if (!(phi(lo) > 0.0) || !(phi(hi) < 0.0)) {
    throw ValidationError("secular equation is not bracketed");
  }
  double mu = 0.5 * (lo + hi);
  for (int it = 0; it < 500; ++it) {
    const double f = phi(mu);
    if (f == 0.0) return mu;
    if (f > 0.0) lo = mu; else hi = mu;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(hi))) {
      break;
    }
    // Secant step on h(mu) = 1/sqrt(norm2) - 1/sqrt(eps), nearly linear.
    const double step = 1e-7 * std::max(1.0, std::abs(mu));
    const double m2 = std::min(hi, mu + step);
    const double h1 = 1.0 / std::sqrt(norm2(mu)) - 1.0 / std::sqrt(eps);
    const double h2 = 1.0 / std::sqrt(norm2(m2)) - 1.0 / std::sqrt(eps);
    double next = (m2 > mu && h2 != h1) ? mu - h1 * (m2 - mu) / (h2 - h1)
                                        : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }
  const double root = 0.5 * (lo + hi);
  if (phi(lo) < 0.0 || phi(hi) > 0.0) {
    throw ValidationError("secular bracket lost during root finding");
  }
  return root;
}

TrsSolution finish(const ComplexMatrix& R, const ComplexVector& a,
                   const Eigen::VectorXd& weights, double eps,
                   const Whitened& w, const ComplexVector& v, double mu,
                   double sign, TrsCase tag) {
  TrsSolution s;
  const ComplexVector u = w.V * v;
  s.perturbation = w.sqrt_w.cwiseInverse().cast<Complex>().asDiagonal() * u;
  const ComplexVector total = a + s.perturbation;
  s.power = std::max(0.0, (total.adjoint() * R * total)(0, 0).real());
  s.multiplier = mu;
  const ComplexVector wx =
      weights.cast<Complex>().asDiagonal() * s.perturbation;
  s.constraint_value = (s.perturbation.adjoint() * wx)(0, 0).real();
  if (eps > 0.0) {
    s.kkt_residual =
        (sign * (R * s.perturbation) + mu * wx + sign * (R * a)).norm();
    s.slackness = std::abs(mu * (eps - s.constraint_value));
  }
  s.case_tag = tag;
  return s;
}

}  // namespace

TrsSolution min_power_over_ball(const ComplexMatrix& R, const ComplexVector& a,
                                const Eigen::VectorXd& weights,
                                double epsilon) {
  if (!(epsilon >= 0.0)) throw ValidationError("negative uncertainty bound");
  const Whitened w = whiten(R, a, weights);
  const int m = static_cast<int>(a.size());
  if (epsilon == 0.0) {
    // Degenerate ball: the only feasible point is zero.
    return finish(R, a, weights, epsilon, w, ComplexVector::Zero(m), 0.0, 1.0,
                  TrsCase::boundary);
  }
  const double scale = std::max(1e-300, w.lambda.cwiseAbs().maxCoeff());
  const Eigen::VectorXd lam = w.lambda.cwiseMax(0.0);

  // Minimum-norm zero of the power: cancel every component with lambda > 0.
  ComplexVector v0 = ComplexVector::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (lam(i) > 1e-14 * scale) v0(i) = -w.c(i);
  }
  if (v0.squaredNorm() <= epsilon) {
    return finish(R, a, weights, epsilon, w, v0, 0.0, 1.0, TrsCase::interior);
  }
  Eigen::VectorXd g2(m);  // |lambda_i c_i|^2
  for (int i = 0; i < m; ++i) g2(i) = std::norm(lam(i) * w.c(i));
  auto norm2 = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      if (g2(i) > 0.0) s += g2(i) / ((lam(i) + mu) * (lam(i) + mu));
    }
    return s;
  };
  const double hi = std::sqrt(g2.sum() / epsilon) * (1.0 + 1e-12) +
                    std::numeric_limits<double>::min();
  const double mu = secular_root(norm2, epsilon, 0.0, hi);
  ComplexVector v(m);
  for (int i = 0; i < m; ++i) v(i) = -lam(i) * w.c(i) / (lam(i) + mu);
  return finish(R, a, weights, epsilon, w, v, mu, 1.0, TrsCase::boundary);
}

TrsSolution max_power_over_ball(const ComplexMatrix& R, const ComplexVector& a,
                                const Eigen::VectorXd& weights,
                                double epsilon) {
  if (!(epsilon >= 0.0)) throw ValidationError("negative uncertainty bound");
  const Whitened w = whiten(R, a, weights);
  const int m = static_cast<int>(a.size());
  if (epsilon == 0.0) {
    return finish(R, a, weights, epsilon, w, ComplexVector::Zero(m), 0.0, -1.0,
                  TrsCase::boundary);
  }
  const double lmax = w.lambda(m - 1);
  const double scale = std::max(1e-300, w.lambda.cwiseAbs().maxCoeff());
  const double tie = 1e-12 * scale;

  Eigen::VectorXd g2(m);
  double g2_total = 0.0, g2_dom = 0.0;
  std::vector<char> dominant(m, 0);
  for (int i = 0; i < m; ++i) {
    g2(i) = std::norm(w.lambda(i) * w.c(i));
    g2_total += g2(i);
    if (w.lambda(i) >= lmax - tie) {
      dominant[i] = 1;
      g2_dom += g2(i);
    }
  }
  const bool hard =
      std::sqrt(g2_dom) <= 1e-10 * std::sqrt(g2_total) || g2_total == 0.0;

  if (hard) {
    // Stationary point at lambda = lambda_max without the dominant part.
    ComplexVector v = ComplexVector::Zero(m);
    for (int i = 0; i < m; ++i) {
      if (!dominant[i]) v(i) = w.lambda(i) * w.c(i) / (lmax - w.lambda(i));
    }
    const double rest = epsilon - v.squaredNorm();
    if (rest >= 0.0) {
      int k = m - 1;
      Complex phase(1.0, 0.0);
      for (int i = 0; i < m; ++i) {
        if (dominant[i] && std::abs(w.c(i)) > std::abs(w.c(k))) k = i;
      }
      if (std::abs(w.c(k)) > 0.0) phase = w.c(k) / std::abs(w.c(k));
      v(k) += std::sqrt(rest) * phase;
      return finish(R, a, weights, epsilon, w, v, lmax, -1.0,
                    TrsCase::hard_case);
    }
  }
  auto norm2 = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      if (g2(i) > 0.0) s += g2(i) / ((mu - w.lambda(i)) * (mu - w.lambda(i)));
    }
    return s;
  };
  // Move lo off the pole until phi(lo) > 0.
  double gap = std::sqrt(g2_dom / epsilon);
  if (!(gap > 0.0)) gap = std::sqrt(g2_total / epsilon) * 1e-12;
  double lo = lmax + 0.5 * gap;
  for (int k = 0; k < 200 && norm2(lo) <= epsilon; ++k) {
    lo = lmax + 0.5 * (lo - lmax);
  }
  const double hi =
      lmax + std::sqrt(g2_total / epsilon) * (1.0 + 1e-12) + tie;
  const double mu = secular_root(norm2, epsilon, lo, hi);
  ComplexVector v(m);
  for (int i = 0; i < m; ++i) {
    v(i) = w.lambda(i) * w.c(i) / (mu - w.lambda(i));
  }
  return finish(R, a, weights, epsilon, w, v, mu, -1.0, TrsCase::boundary);
}

PowerMap worst_case_power_map(const CovarianceDesign& design,
                              const SteeringField& field,
                              const RegionGrids& grids) {
  if (!design.has_covariance()) {
    throw IntegrityError("design carries no covariance");
  }
  const auto& unc = field.uncertainty;
  const int m = field.element_count();
  const Eigen::VectorXd weights =
      unc.weights.size() == m ? unc.weights : Eigen::VectorXd::Ones(m);
  PowerMap map = nominal_power_map(design.R, field, grids);
  map.scenario = Scenario::worst_case;
  map.nominal_power = map.power;
  const int ns = field.healthy_count();
  for (int k = 0; k < map.size(); ++k) {
    const bool healthy = k < ns;
    const int idx = healthy ? k : k - ns;
    const ComplexVector a =
        healthy ? field.healthy.col(idx) : field.tumor.col(idx);
    const double eps =
        healthy ? unc.healthy_bound(idx) : unc.tumor_bound(idx);
    const TrsSolution s = healthy
                              ? max_power_over_ball(design.R, a, weights, eps)
                              : min_power_over_ball(design.R, a, weights, eps);
    map.power(k) = s.power;
    map.multipliers.push_back(s.multiplier);
    map.case_tags.push_back(to_string(s.case_tag));
    map.perturbations.push_back(s.perturbation);
  }
  return map;
}

}  // namespace beamdesign
