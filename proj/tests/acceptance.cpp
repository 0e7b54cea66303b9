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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "beamdesign/design.hpp"
#include "beamdesign/evaluate.hpp"
#include "beamdesign/io.hpp"
#include "beamdesign/worstcase.hpp"
#include "support.hpp"

using namespace beamdesign;
using namespace beamdesign::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  int id;
  std::string line;
  bool pass;
};
std::vector<Verdict> g_verdicts;

// Verdicts are printed in criterion order once every check has run.
void report(int id, const char* name, bool pass, const std::string& detail) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, "criterion %d: %s  %s  (%s)", id,
                pass ? "PASS" : "FAIL", name, detail.c_str());
  g_verdicts.push_back({id, buf, pass});
  std::fprintf(stderr, "[done] criterion %d\n", id);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double power(const ComplexMatrix& r, const ComplexVector& v) {
  return v.dot(r * v).real();
}

// Every design produced by the suite, for the membership audit.
std::vector<CovarianceDesign> g_designs;

void keep(const CovarianceDesign& d) {
  if (d.has_covariance()) g_designs.push_back(d);
}

// ---------------------------------------------------------------------------
// 1. S-procedure equivalence

// Largest (sign = -1) or smallest (sign = +1) power over |x|^2 <= eps found
// by sampling, then polished by a monotone first-order method from the best
// sample.
double sampled_extreme(std::mt19937_64& rng, const ComplexMatrix& r,
                       const ComplexVector& a, double eps, double sign) {
  const int m = static_cast<int>(a.size());
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
  ComplexVector best = ComplexVector::Zero(m);
  double best_p = power(r, a);
  for (int s = 0; s < 10000; ++s) {
    ComplexVector x = sample_ball(rng, w, eps);
    double p = power(r, a + x);
    if (sign * p < sign * best_p) {
      best_p = p;
      best = x;
    }
  }
  const double radius = std::sqrt(eps);
  if (sign < 0.0) {
    // Maximise a convex quadratic: step to the maximiser of the
    // linearisation over the ball.
    for (int it = 0; it < 2000; ++it) {
      ComplexVector g = r * (a + best);
      if (g.norm() == 0.0) break;
      ComplexVector next = radius * g / g.norm();
      if (power(r, a + next) <= best_p) break;
      best = next;
      best_p = power(r, a + best);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r, Eigen::EigenvaluesOnly);
    const double step = 1.0 / std::max(es.eigenvalues().maxCoeff(), 1e-300);
    for (int it = 0; it < 20000; ++it) {
      ComplexVector next = best - step * (r * (a + best));
      if (next.norm() > radius) next *= radius / next.norm();
      best = next;
    }
    best_p = std::min(best_p, power(r, a + best));
  }
  return best_p;
}

void criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int instances = 0, checks = 0, disagreements = 0, analytic = 0;
  for (int m = 1; m <= 3; ++m) {
    for (int trial = 0; trial < 200; ++trial, ++instances) {
      ComplexMatrix r = random_psd(rng, m, 1 + trial % m);
      ComplexVector a = random_vector(rng, m);
      const double eps = (0.02 + 0.6 * u(rng)) * a.squaredNorm();
      const double delta = 0.95 * u(rng);
      const double nominal = power(r, a);
      const double level = nominal * (0.2 + 2.0 * u(rng));
      const double t = nominal * (u(rng) - 0.5);
      const Eigen::VectorXd w = Eigen::VectorXd::Ones(m);

      const double pmax = sampled_extreme(rng, r, a, eps, -1.0);
      const double pmin = sampled_extreme(rng, r, a, eps, 1.0);
      struct Case {
        LmiBlock block;
        double margin;
      };
      Case cases[] = {
          {healthy_point_block(a, w, eps, kToyVars, kToyMultiplier),
           level - t - pmax},
          {tumor_lower_block(a, w, eps, delta, kToyVars, kToyMultiplier),
           pmin - (1.0 - delta) * level},
          {tumor_upper_block(a, w, eps, delta, kToyVars, kToyMultiplier),
           (1.0 + delta) * level - pmax},
      };
      double exact_max = 0.0, exact_min = 0.0;
      if (m == 1) {
        const double rv = r(0, 0).real(), na = std::abs(a(0)), re = std::sqrt(eps);
        exact_max = rv * (na + re) * (na + re);
        exact_min = rv * std::pow(std::max(na - re, 0.0), 2);
      }
      const double exact_margins[] = {level - t - exact_max,
                                      exact_min - (1.0 - delta) * level,
                                      (1.0 + delta) * level - exact_max};
      for (int k = 0; k < 3; ++k) {
        const bool lmi = block_feasibility(cases[k].block, r, t, level).feasible;
        const bool sampled = cases[k].margin >= -1e-8;
        ++checks;
        disagreements += lmi != sampled;
        if (m == 1) {
          ++analytic;
          disagreements += lmi != (exact_margins[k] >= -1e-8);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, "S-procedure equivalence", disagreements == 0 && secs < 60.0,
         std::to_string(instances) + " instances, " + std::to_string(checks) +
             " block checks (+" + std::to_string(analytic) +
             " analytic), disagreements " + std::to_string(disagreements) +
             fmt(", %.1f s", secs));
}

// ---------------------------------------------------------------------------
// 2. Robust-SDP optimality against exhaustive search over 2x2 covariances

struct BruteForce {
  bool feasible = false;
  double t = -std::numeric_limits<double>::infinity();
};

double gap_at(const SteeringField& f, double delta, double gamma, Complex z,
              bool* feasible) {
  ComplexMatrix r(2, 2);
  r << gamma / 2, z, std::conj(z), gamma / 2;
  const Eigen::VectorXd& w = f.uncertainty.weights;
  double min_tumor = std::numeric_limits<double>::infinity(), max_tumor = 0.0;
  for (int j = 0; j < f.tumor_count(); ++j) {
    const double eps = f.uncertainty.tumor_bound(j);
    min_tumor = std::min(min_tumor, dual_min_power(r, f.tumor.col(j), w, eps));
    max_tumor = std::max(max_tumor, dual_max_power(r, f.tumor.col(j), w, eps));
  }
  const double level = min_tumor / (1.0 - delta);
  *feasible = max_tumor <= (1.0 + delta) * level;
  double peak = 0.0;
  for (int i = 0; i < f.healthy_count(); ++i)
    peak = std::max(peak, dual_max_power(r, f.healthy.col(i), w,
                                         f.uncertainty.healthy_bound(i)));
  return level - peak;
}

BruteForce exhaustive_two_element(const SteeringField& f, double delta,
                                  double gamma) {
  BruteForce best;
  const double rho = gamma / 2;
  Complex centre(0.0, 0.0);
  auto consider = [&](Complex z) {
    if (std::abs(z) > rho) z *= rho / std::abs(z);
    bool ok = false;
    const double t = gap_at(f, delta, gamma, z, &ok);
    if (ok && t > best.t) {
      best.t = t;
      best.feasible = true;
      centre = z;
    }
  };
  const int nr = 60, na = 120;
  for (int i = 0; i <= nr; ++i)
    for (int k = 0; k < na; ++k)
      consider(std::polar(rho * i / nr, 2.0 * M_PI * k / na));
  if (!best.feasible) return best;
  double half = 2.0 * rho / nr;
  for (int level = 0; level < 40; ++level) {
    const Complex c = centre;
    for (int i = -6; i <= 6; ++i)
      for (int k = -6; k <= 6; ++k)
        consider(c + Complex(half * i / 6.0, half * k / 6.0));
    half *= 0.5;
  }
  return best;
}

void criterion_2() {
  const auto t0 = Clock::now();
  struct Setup {
    std::vector<Position> healthy, tumor;
  };
  const Setup setups[] = {
      {{Position(0.012, 0.03, 0)}, {Position(0.0, 0.02, 0)}},
      {{Position(0.012, 0.03, 0), Position(-0.009, 0.024, 0)}, {Position(0.002, 0.02, 0)}},
      {{Position(-0.011, 0.028, 0)}, {Position(0.0, 0.02, 0), Position(0.002, 0.021, 0)}},
      {{Position(0.006, 0.035, 0)}, {Position(-0.003, 0.018, 0)}},
  };
  int compared = 0, agree = 0;
  double worst = 0.0;
  for (const auto& s : setups) {
    SteeringField f = toy_field(2, s.healthy, s.tumor, 0.1);
    CovarianceDesign d = design_robust(f, 0.7, 1.0);
    keep(d);
    BruteForce b = exhaustive_two_element(f, 0.7, 1.0);
    ++compared;
    if (d.status != SolveStatus::optimal) {
      agree += !b.feasible && d.status == SolveStatus::infeasible;
      continue;
    }
    const double rel = std::abs(d.t - b.t) / std::max(std::abs(b.t), 1e-12);
    worst = std::max(worst, rel);
    agree += b.feasible && rel <= 1e-3;
  }
  const double secs = seconds_since(t0);
  report(2, "robust SDP vs exhaustive 2x2 search", agree == compared && secs < 300.0,
         std::to_string(agree) + "/" + std::to_string(compared) +
             " instances agree" + fmt(", worst relative gap %.2e", worst) +
             fmt(", %.1f s", secs));
}

// ---------------------------------------------------------------------------
// 3. TRS exactness

void criterion_3() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int instances = 0, kkt_fail = 0, sandwich_violations = 0, sdr_checked = 0,
      sdr_fail = 0;
  double worst_kkt = 0.0, worst_sdr = 0.0;
  for (int trial = 0; trial < 100; ++trial, ++instances) {
    const int m = 1 + trial % 8;
    ComplexMatrix r = random_psd(rng, m, 1 + trial % m);
    ComplexVector a = random_vector(rng, m);
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) w(i) = trial % 3 == 0 ? 0.5 + u(rng) : 1.0;
    const double eps = (0.01 + u(rng)) * a.squaredNorm();
    const TrsSolution lo = min_power_over_ball(r, a, w, eps);
    const TrsSolution hi = max_power_over_ball(r, a, w, eps);
    const ComplexMatrix wd = w.cast<Complex>().asDiagonal();
    for (const auto* s : {&lo, &hi}) {
      const double sign = s == &lo ? 1.0 : -1.0;
      const ComplexVector grad =
          sign * (r * (a + s->perturbation)) + s->multiplier * (wd * s->perturbation);
      const double scale = 1.0 + r.norm() * (a.norm() + s->perturbation.norm());
      const double xw = s->perturbation.dot(wd * s->perturbation).real();
      const double kkt = std::max({grad.norm() / scale,
                                   std::abs(s->multiplier * (eps - xw)) / scale,
                                   std::max(xw - eps, 0.0) / (1.0 + eps),
                                   std::max(-s->multiplier, 0.0)});
      worst_kkt = std::max(worst_kkt, kkt);
      kkt_fail += kkt > 1e-8;
    }
    const double tol = 1e-9 * (1.0 + hi.power);
    for (int k = 0; k < 1000; ++k) {
      const double p = power(r, a + sample_ball(rng, w, eps));
      sandwich_violations += p < lo.power - tol || p > hi.power + tol;
    }
    if (m <= 4) {
      ++sdr_checked;
      SolveStatus st;
      const double sdr = sdr_max_power(r, a, w, eps, &st);
      const double err = std::abs(sdr - hi.power) / (1.0 + std::abs(sdr));
      worst_sdr = std::max(worst_sdr, err);
      sdr_fail += st != SolveStatus::optimal || err > 1e-6;
    }
  }
  report(3, "trust-region worst case exactness",
         kkt_fail == 0 && sandwich_violations == 0 && sdr_fail == 0,
         std::to_string(instances) + " instances" +
             fmt(", worst KKT %.1e", worst_kkt) + ", sandwich violations " +
             std::to_string(sandwich_violations) + ", SDR " +
             std::to_string(sdr_checked - sdr_fail) + "/" +
             std::to_string(sdr_checked) + fmt(" (worst %.1e)", worst_sdr));
}

// ---------------------------------------------------------------------------
// 4. Reduction identity

void criterion_4() {
  std::mt19937_64 rng(4004);
  int agree = 0, compared = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 4;
    SteeringField f = random_toy_field(rng, m, 2 + trial % 5, 1 + trial % 3, 0.0);
    CovarianceDesign r = design_robust(f, 0.7, 1.0);
    CovarianceDesign n = design_nominal_generalized(f, 0.7, 1.0);
    keep(r);
    keep(n);
    ++compared;
    if (r.status != n.status) continue;
    if (r.status != SolveStatus::optimal) {
      ++agree;
      continue;
    }
    const double err = std::abs(r.objective - n.objective) / (1.0 + std::abs(n.objective));
    worst = std::max(worst, err);
    agree += err <= 1e-5;
  }
  report(4, "zero uncertainty reduces to the nominal design", agree == compared,
         std::to_string(agree) + "/" + std::to_string(compared) +
             fmt(" instances agree, worst %.1e", worst));
}

// ---------------------------------------------------------------------------
// Reference scenario (criteria 6-9)

struct ReferenceScene {
  RunConfig config;
  ArrayGeometry geometry;
  RegionGrids grids;
  SteeringField field;
};

ReferenceScene load_reference_scene() {
  ReferenceScene s;
  s.config = load_run_config(BEAMDESIGN_CONFIG_DIR "/reference_scenario.json");
  s.geometry = build_curvilinear_array(s.config.array, s.config.medium);
  s.grids = build_region_grids(s.config.grid);
  s.field = build_steering_field(s.geometry, s.grids, s.config.uncertainty());
  return s;
}

void criterion_6(const ReferenceScene& s, CovarianceDesign* robust_out) {
  const auto t0 = Clock::now();
  const RunConfig& c = s.config;
  const bool setup_ok = s.field.element_count() == 51 && c.epsilon == 0.25 &&
                        c.delta == 0.7 && c.gamma == 1.0 &&
                        c.uncertainty_weights.size() == 0 &&
                        s.grids.healthy_count() == 174 && s.grids.tumor_count() == 13;
  DesignOptions opt;
  opt.solver = c.solver_options();
  CovarianceDesign nr = design_nominal_generalized(s.field, c.delta, c.gamma, opt);
  CovarianceDesign rs = design_robust(s.field, c.delta, c.gamma, opt);
  keep(nr);
  keep(rs);
  *robust_out = rs;
  if (!nr.has_covariance() || !rs.has_covariance()) {
    report(6, "full-scale structural reproduction", false,
           std::string("R_nr ") + to_string(nr.status) + ", R* " + to_string(rs.status));
    return;
  }
  const PowerMap nom = nominal_power_map(nr.R, s.field, s.grids);
  const PowerMap wnr = worst_case_power_map(nr, s.field, s.grids);
  const PowerMap wrs = worst_case_power_map(rs, s.field, s.grids);
  auto avg = [&](const PowerMap& m, Region r) {
    return m.region_average_db(r, c.db_convention, c.averaging);
  };
  const double a = avg(nom, Region::tumor) - avg(nom, Region::healthy);
  const double b_t = avg(nom, Region::tumor) - avg(wnr, Region::tumor);
  const double b_s = avg(wnr, Region::healthy) - avg(nom, Region::healthy);
  const double c_t = avg(wrs, Region::tumor) - avg(wnr, Region::tumor);
  const double c_s = avg(wnr, Region::healthy) - avg(wrs, Region::healthy);
  const double secs = seconds_since(t0);
  const bool pass = setup_ok && a >= 8.0 && b_t >= 10.0 && b_s >= 10.0 &&
                    c_t >= 5.0 && c_s >= 3.0 && secs <= 1800.0;
  std::string detail = std::string("setup ") + (setup_ok ? "ok" : "MISMATCH") +
                       fmt(", (a) %.2f dB [>=8]", a) +
                       fmt(", (b) tumor -%.2f dB", b_t) +
                       fmt(" / healthy +%.2f dB [>=10/10]", b_s) +
                       fmt(", (c) tumor +%.2f dB", c_t) +
                       fmt(" / healthy -%.2f dB [>=5/3]", c_s) +
                       fmt(", %.0f s", secs);
  report(6, "full-scale structural reproduction", pass, detail);
}

void criterion_7() {
  const RegionGrids g = build_region_grids(RegionGridParams{});
  report(7, "grid fidelity", g.healthy_count() == 174 && g.tumor_count() == 13,
         "N_S=" + std::to_string(g.healthy_count()) +
             ", N_T=" + std::to_string(g.tumor_count()));
}

void criterion_8(const CovarianceDesign& robust, std::uint64_t seed) {
  if (!robust.has_covariance()) {
    report(8, "synthesis convergence", false, "no full-scale covariance");
    return;
  }
  const WaveformBlock b = synthesize_waveforms(robust.R, 100000, seed);
  const double dev = (b.sample_covariance - robust.R).cwiseAbs().maxCoeff();
  const int m = robust.element_count();
  const double target = robust.gamma / m;
  double worst_channel = 0.0;
  for (int k = 0; k < m; ++k)
    worst_channel = std::max(worst_channel,
                             std::abs(b.sample_covariance(k, k).real() - target) / target);
  report(8, "synthesis convergence", dev <= 0.05 && worst_channel <= 0.05,
         fmt("max entry deviation %.4f [<=0.05]", dev) +
             fmt(", worst channel power error %.2f%% [<=5%%]", 100.0 * worst_channel));
}

void criterion_9(const ReferenceScene& s) {
  SteeringField f = s.field;
  f.uncertainty.epsilon = 0.5;
  DesignOptions opt;
  opt.solver = s.config.solver_options();
  bool threw = false;
  CovarianceDesign d;
  try {
    d = design_robust(f, 0.05, s.config.gamma, opt);
  } catch (const std::exception&) {
    threw = true;
  }
  report(9, "infeasibility surfacing",
         !threw && d.status == SolveStatus::infeasible && !d.has_covariance(),
         threw ? std::string("exception thrown")
               : std::string("status ") + to_string(d.status) +
                     (d.has_covariance() ? ", covariance present" : ", no covariance"));
}

// ---------------------------------------------------------------------------
// 5. Membership audit of every design above plus each variant on a toy scene

void criterion_5() {
  std::mt19937_64 rng(5005);
  SteeringField f = random_toy_field(rng, 4, 5, 2, 0.02);
  CovarianceDesign r = design_robust(f, 0.7, 1.0);
  keep(r);
  keep(design_nominal_eq5(f, 0.7, 1.0));
  keep(design_nominal_generalized(f, 0.7, 1.0));
  if (r.level) {
    keep(design_weighted_robust(f, Eigen::VectorXd::Ones(f.healthy_count()), *r.level, 0.7, 1.0));
    keep(design_sum_energy_robust(f, *r.level, 0.7, 1.0));
  }
  int bad = 0;
  double herm = 0.0, diag = 0.0, eig = 0.0;
  for (const auto& d : g_designs) {
    const MembershipCheck c = check_membership(d.R, d.gamma);
    herm = std::max(herm, c.hermitian);
    diag = std::max(diag, c.diagonal);
    eig = std::min(eig, c.min_eig);
    bad += c.hermitian > 1e-10 || c.diagonal > 1e-8 || c.min_eig < -1e-8;
  }
  report(5, "covariance set membership", bad == 0 && !g_designs.empty(),
         std::to_string(g_designs.size()) + " designs" +
             fmt(", hermitian %.1e", herm) + fmt(", diagonal %.1e", diag) +
             fmt(", min eigenvalue %.1e", eig));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  ReferenceScene scene = load_reference_scene();
  CovarianceDesign robust;
  criterion_6(scene, &robust);
  criterion_7();
  criterion_8(robust, scene.config.seed);
  criterion_9(scene);
  criterion_5();
  std::sort(g_verdicts.begin(), g_verdicts.end(),
            [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  int failures = 0;
  for (const auto& v : g_verdicts) {
    std::printf("%s\n", v.line.c_str());
    failures += !v.pass;
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(g_verdicts.size()) - failures, g_verdicts.size());
  return failures == 0 ? 0 : 1;
}
