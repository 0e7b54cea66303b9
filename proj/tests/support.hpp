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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "beamdesign/geometry.hpp"
#include "beamdesign/lmi.hpp"
#include "beamdesign/solver.hpp"
#include "beamdesign/steering.hpp"

namespace beamdesign::testing {

inline ComplexVector random_vector(std::mt19937_64& rng, int n,
                                   double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

/// Random Hermitian PSD matrix of the given rank.
inline ComplexMatrix random_psd(std::mt19937_64& rng, int n, int rank) {
  ComplexMatrix g(n, rank);
  for (int k = 0; k < rank; ++k) g.col(k) = random_vector(rng, n);
  return g * g.adjoint();
}

/// Random equal-power covariance with diagonal gamma / n.
inline ComplexMatrix random_equal_power(std::mt19937_64& rng, int n,
                                        double gamma) {
  ComplexMatrix r = random_psd(rng, n, n);
  Eigen::VectorXd d = r.diagonal().real().cwiseSqrt().cwiseInverse();
  ComplexMatrix s = d.cast<Complex>().asDiagonal() * r *
                    d.cast<Complex>().asDiagonal();
  return (gamma / n) * hermitian_part(s);
}

/// Uniform sample in { x : x^H W x <= eps }.
inline ComplexVector sample_ball(std::mt19937_64& rng,
                                 const Eigen::VectorXd& w, double eps) {
  const int n = static_cast<int>(w.size());
  ComplexVector x = random_vector(rng, n);
  x /= x.norm();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double radius = std::sqrt(eps) * std::pow(u(rng), 1.0 / (2.0 * n));
  for (int i = 0; i < n; ++i) x(i) *= radius / std::sqrt(w(i));
  return x;
}

/// Golden-section minimisation of a unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, int iterations = 200) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iterations; ++k) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a); fd = f(d);
    }
  }
  return std::min(fc, fd);
}

/// Extremes of (a + x)^H R (a + x) over x^H W x <= eps through the
/// one-dimensional Lagrangian dual (exact by strong duality for a single
/// quadratic constraint).
inline double dual_max_power(const ComplexMatrix& r, const ComplexVector& a,
                             const Eigen::VectorXd& w, double eps) {
  Eigen::VectorXd s = w.cwiseSqrt().cwiseInverse();
  ComplexMatrix rt = s.cast<Complex>().asDiagonal() * r *
                     s.cast<Complex>().asDiagonal();
  ComplexVector at = w.cwiseSqrt().cast<Complex>().asDiagonal() * a;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(rt));
  const Eigen::VectorXd& mu = es.eigenvalues();
  ComplexVector g = es.eigenvectors().adjoint() * (rt * at);
  double base = (at.adjoint() * rt * at)(0).real();
  if (eps == 0.0) return base;
  double top = mu.maxCoeff();
  auto dual = [&](double lam) {
    double v = base + lam * eps;
    for (int i = 0; i < mu.size(); ++i)
      v += std::norm(g(i)) / std::max(lam - mu(i), 1e-300);
    return v;
  };
  double span = g.norm() / std::sqrt(eps) + 1e-12 + std::abs(top);
  auto f = [&](double s) { return dual(top + span * std::exp(s)); };
  return golden_min(f, -60.0, 2.0, 300);
}

inline double dual_min_power(const ComplexMatrix& r, const ComplexVector& a,
                             const Eigen::VectorXd& w, double eps) {
  Eigen::VectorXd s = w.cwiseSqrt().cwiseInverse();
  ComplexMatrix rt = s.cast<Complex>().asDiagonal() * r *
                     s.cast<Complex>().asDiagonal();
  ComplexVector at = w.cwiseSqrt().cast<Complex>().asDiagonal() * a;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(rt));
  Eigen::VectorXd mu = es.eigenvalues().cwiseMax(0.0);
  ComplexVector g = es.eigenvectors().adjoint() * (rt * at);
  double base = (at.adjoint() * rt * at)(0).real();
  if (eps == 0.0) return base;
  auto negdual = [&](double lam) {
    double v = base - lam * eps;
    for (int i = 0; i < mu.size(); ++i) {
      double den = mu(i) + lam;
      if (den > 0.0) v -= std::norm(g(i)) / den;
    }
    return -v;
  };
  double hi = g.norm() / std::sqrt(eps) + 1.0;
  double best = negdual(0.0);
  best = std::min(best, golden_min([&](double s) {
    return negdual(hi * std::exp(s));
  }, -60.0, 0.0, 300));
  return std::max(-best, 0.0);
}

/// Planar toy scene: M elements on a line at y = 0 spaced half a
/// wavelength, healthy/tumor points placed in front of the array.
inline SteeringField toy_field(int m, const std::vector<Position>& healthy,
                               const std::vector<Position>& tumor,
                               double epsilon,
                               double spreading_unit_m = 0.01) {
  ArrayGeometry geo;
  geo.medium.spreading_unit_m = spreading_unit_m;
  double lam = geo.wavelength_m();
  for (int i = 0; i < m; ++i)
    geo.elements.emplace_back((i - 0.5 * (m - 1)) * 0.5 * lam, 0.0, 0.0);
  RegionGrids grids;
  grids.healthy_points = healthy;
  grids.tumor_points = tumor;
  grids.tumor_center = tumor.front();
  grids.tumor_radius_m = 0.004;
  return build_steering_field(geo, grids, UncertaintyModel::isotropic(m, epsilon));
}

/// Random toy scene with points 10-40 mm in front of the array.
inline SteeringField random_toy_field(std::mt19937_64& rng, int m, int ns,
                                      int nt, double epsilon) {
  std::uniform_real_distribution<double> ux(-0.015, 0.015), uy(0.01, 0.04);
  std::vector<Position> h, t;
  Position c(ux(rng) * 0.5, 0.025, 0.0);
  for (int i = 0; i < nt; ++i)
    t.push_back(c + Position(0.002 * i, 0.001 * (i % 2), 0.0));
  for (int i = 0; i < ns; ++i) {
    Position p(ux(rng), uy(rng), 0.0);
    while ((p - c).norm() < 0.008) p = Position(ux(rng), uy(rng), 0.0);
    h.push_back(p);
  }
  return toy_field(m, h, t, epsilon);
}

/// Equal-power membership recomputed from scratch.
struct MembershipCheck {
  double hermitian = 0.0;
  double diagonal = 0.0;
  double min_eig = 0.0;
};

inline MembershipCheck check_membership(const ComplexMatrix& r, double gamma) {
  MembershipCheck c;
  const int n = static_cast<int>(r.rows());
  c.hermitian = (r - r.adjoint()).cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i)
    c.diagonal = std::max(c.diagonal, std::abs(r(i, i) - gamma / n));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (r + r.adjoint()),
                                                   Eigen::EigenvaluesOnly);
  c.min_eig = es.eigenvalues().minCoeff();
  return c;
}

/// Decision layout used with the block builders in tests: y = (t, P, beta).
inline constexpr PowerVariables kToyVars{0, 1};
inline constexpr int kToyMultiplier = 2;

/// Whether some beta >= 0 makes the block PSD at the given R, t, P.
inline MultiplierCertificate block_feasibility(const LmiBlock& block,
                                               const ComplexMatrix& r,
                                               double t, double level,
                                               double slack = 1e-8) {
  Eigen::VectorXd y(3);
  y << t, level, 0.0;
  ComplexMatrix base = block.evaluate(y, r);
  if (block.multiplier < 0) {
    MultiplierCertificate c;
    c.min_eigenvalue = min_eigenvalue(base);
    c.feasible = c.min_eigenvalue >= -slack;
    return c;
  }
  return find_multiplier(base, block.coefficient(block.multiplier, nullptr),
                         slack);
}

/// max (a + x)^H R (a + x) over x^H W x <= eps through the lifted
/// semidefinite relaxation  X = [[x x^H, x], [x^H, 1]],  solved with the
/// generic scalar-term path of the SDP solver.
inline double sdr_max_power(const ComplexMatrix& r, const ComplexVector& a,
                            const Eigen::VectorXd& w, double eps,
                            SolveStatus* status = nullptr) {
  const int m = static_cast<int>(a.size());
  const int n = m + 1;
  ComplexMatrix g(m, n);
  g.leftCols(m).setIdentity();
  g.col(m) = a;
  const ComplexMatrix h = g.adjoint() * r * g;

  SdpProblem p;
  std::vector<double> c;
  LmiBlock lift;
  lift.kind = BlockKind::generic;
  lift.size = n;
  lift.constant = ComplexMatrix::Zero(n, n);
  lift.constant(m, m) = 1.0;
  LmiBlock ball;
  ball.kind = BlockKind::scalar;
  ball.size = 1;
  ball.constant = ComplexMatrix::Constant(1, 1, eps);
  for (int i = 0; i < m; ++i) {
    const int v = static_cast<int>(c.size());
    p.variable_names.push_back("d" + std::to_string(i));
    c.push_back(h(i, i).real());
    lift.terms.push_back({v, {{i, i, Complex(1.0, 0.0)}}});
    ball.terms.push_back({v, {{0, 0, Complex(-w(i), 0.0)}}});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int v = static_cast<int>(c.size());
      p.variable_names.push_back("re" + std::to_string(i) + "_" + std::to_string(j));
      p.variable_names.push_back("im" + std::to_string(i) + "_" + std::to_string(j));
      c.push_back(2.0 * h(i, j).real());
      c.push_back(2.0 * h(i, j).imag());
      lift.terms.push_back({v, {{i, j, Complex(1.0, 0.0)}}});
      lift.terms.push_back({v + 1, {{i, j, Complex(0.0, 1.0)}}});
    }
  }
  p.objective = Eigen::Map<Eigen::VectorXd>(c.data(), c.size());
  p.blocks = {lift, ball};
  SolverOptions o;
  o.gap_tol = 1e-10;
  SdpSolution s = solve(p, o);
  if (status) *status = s.status;
  return s.objective + h(m, m).real();
}

}  // namespace beamdesign::testing
