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

#include "beamdesign/assemble.hpp"

#include <string>

namespace beamdesign {

const char* to_string(DesignVariant variant) {
  switch (variant) {
    case DesignVariant::nominal_eq5: return "nominal_eq5";
    case DesignVariant::robust: return "robust";
    case DesignVariant::weighted_robust: return "weighted_robust";
    case DesignVariant::sum_energy_robust: return "sum_energy_robust";
    case DesignVariant::nominal_generalized: return "nominal_generalized";
  }
  return "robust";
}

std::optional<DesignVariant> parse_variant(const std::string& text) {
  for (auto v : {DesignVariant::nominal_eq5, DesignVariant::robust,
                 DesignVariant::weighted_robust,
                 DesignVariant::sum_energy_robust,
                 DesignVariant::nominal_generalized}) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

namespace {

class Builder {
 public:
  explicit Builder(SdpProblem& p) : p_(p) {}

  int add(const std::string& name, double objective) {
    p_.variable_names.push_back(name);
    objective_.push_back(objective);
    return static_cast<int>(p_.variable_names.size()) - 1;
  }

  void finish() {
    p_.objective = Eigen::Map<Eigen::VectorXd>(objective_.data(),
                                               objective_.size());
  }

 private:
  SdpProblem& p_;
  std::vector<double> objective_;
};

std::string point_label(const char* prefix, int i) {
  return std::string(prefix) + "[" + std::to_string(i) + "]";
}

// Scalar block  sum_k s_k a_k^H R a_k + rhs >= 0.
LmiBlock power_difference_block(
    const std::vector<std::pair<double, ComplexVector>>& powers,
    const AffineScalar& rhs, BlockKind kind, const std::string& label) {
  LmiBlock b;
  b.kind = kind;
  b.label = label;
  b.size = 1;
  b.constant = ComplexMatrix::Constant(1, 1, Complex(rhs.constant, 0.0));
  for (const auto& [var, coeff] : rhs.terms) {
    b.terms.push_back({var, {{0, 0, Complex(coeff, 0.0)}}});
  }
  for (const auto& [sign, a] : powers) {
    b.congruences.push_back({sign, ComplexMatrix(a)});
  }
  return b;
}

void add_psd_block(SdpProblem& p, int m) {
  LmiBlock b;
  b.kind = BlockKind::psd;
  b.label = "R";
  b.size = m;
  b.constant = ComplexMatrix::Zero(m, m);
  b.congruences.push_back({1.0, ComplexMatrix::Identity(m, m)});
  p.blocks.push_back(std::move(b));
}

}  // namespace

SdpProblem assemble(const DesignDescription& d) {
  const SteeringField& f = d.field;
  const int m = f.element_count();
  const int ns = f.healthy_count();
  const int nt = f.tumor_count();
  if (m < 1 || ns < 1 || nt < 1) {
    throw AssemblyError("empty array or control-point set");
  }
  if (f.tumor.rows() != m || f.center.size() != m) {
    throw AssemblyError("steering dimensions differ between regions");
  }
  if (!(d.gamma > 0.0)) throw AssemblyError("total power must be positive");
  if (!(d.delta >= 0.0 && d.delta < 1.0)) {
    throw AssemblyError("delta must lie in [0, 1)");
  }
  const auto& unc = f.uncertainty;
  if (d.variant != DesignVariant::nominal_eq5 &&
      d.variant != DesignVariant::nominal_generalized) {
    try {
      unc.validate(m);
    } catch (const ConfigurationError& e) {
      throw AssemblyError(e.what());
    }
  }

  SdpProblem p;
  Builder vars(p);
  p.matrix.emplace(Eigen::VectorXd::Constant(m, d.gamma / m), 0);
  for (int k = 0; k < p.matrix->pair_count(); ++k) {
    const std::string rc = std::to_string(p.matrix->pair_row(k)) + "," +
                           std::to_string(p.matrix->pair_col(k));
    vars.add("re R[" + rc + "]", 0.0);
    vars.add("im R[" + rc + "]", 0.0);
  }

  if (d.variant == DesignVariant::nominal_eq5) {
    const int t = vars.add("t", 1.0);
    for (int i = 0; i < ns; ++i) {
      p.blocks.push_back(power_difference_block(
          {{1.0, f.center}, {-1.0, f.healthy.col(i)}}, {0.0, {{t, -1.0}}},
          BlockKind::healthy, point_label("healthy", i)));
    }
    for (int j = 0; j < nt; ++j) {
      p.blocks.push_back(power_difference_block(
          {{1.0, f.tumor.col(j)}, {-(1.0 - d.delta), f.center}}, {},
          BlockKind::tumor_lower, point_label("tumor_lower", j)));
    }
    for (int j = 0; j < nt; ++j) {
      p.blocks.push_back(power_difference_block(
          {{1.0 + d.delta, f.center}, {-1.0, f.tumor.col(j)}}, {},
          BlockKind::tumor_upper, point_label("tumor_upper", j)));
    }
    add_psd_block(p, m);
    vars.finish();
    p.validate();
    return p;
  }

  const bool nominal = d.variant == DesignVariant::nominal_generalized;
  const bool fixed_p = d.variant == DesignVariant::weighted_robust ||
                       d.variant == DesignVariant::sum_energy_robust;
  const Eigen::VectorXd weights =
      unc.weights.size() == m ? unc.weights : Eigen::VectorXd::Ones(m);
  auto healthy_eps = [&](int i) { return nominal ? 0.0 : unc.healthy_bound(i); };
  auto tumor_eps = [&](int j) { return nominal ? 0.0 : unc.tumor_bound(j); };

  std::vector<int> gaps;
  if (d.variant == DesignVariant::sum_energy_robust) {
    for (int i = 0; i < ns; ++i) gaps.push_back(vars.add(point_label("t", i), -1.0));
  } else {
    const double sense = d.variant == DesignVariant::weighted_robust ? -1.0 : 1.0;
    gaps.push_back(vars.add("t", sense));
  }
  int level = -1;
  if (fixed_p) {
    if (!(d.fixed_level > 0.0)) throw AssemblyError("fixed P must be positive");
  } else {
    level = vars.add("P", 0.0);
  }
  if (d.variant == DesignVariant::weighted_robust) {
    if (d.healthy_weights.size() != ns) {
      throw AssemblyError("weight table length differs from healthy count");
    }
    if (!(d.healthy_weights.array() > 0.0).all()) {
      throw AssemblyError("healthy weights must be positive");
    }
  }

  auto multiplier = [&](double eps, const std::string& label) {
    return eps > 0.0 ? vars.add("beta " + label, 0.0) : -1;
  };
  auto level_term = [&](double coeff, AffineScalar& rhs) {
    if (fixed_p) {
      rhs.constant += coeff * d.fixed_level;
    } else {
      rhs.terms.push_back({level, coeff});
    }
  };

  for (int i = 0; i < ns; ++i) {
    const std::string label = point_label("healthy", i);
    const double eps = healthy_eps(i);
    AffineScalar rhs;
    switch (d.variant) {
      case DesignVariant::weighted_robust:
        rhs.terms.push_back({gaps[0], d.healthy_weights(i)});
        break;
      case DesignVariant::sum_energy_robust:
        rhs.terms.push_back({gaps[i], 1.0});
        break;
      default:
        rhs.terms.push_back({gaps[0], -1.0});
        level_term(1.0, rhs);
        break;
    }
    LmiBlock b = robust_power_block(-1.0, f.healthy.col(i), rhs, weights, eps,
                                    multiplier(eps, label), BlockKind::healthy);
    b.label = label;
    p.blocks.push_back(std::move(b));
  }
  for (int pass = 0; pass < 2; ++pass) {
    const bool lower = pass == 0;
    for (int j = 0; j < nt; ++j) {
      const std::string label =
          point_label(lower ? "tumor_lower" : "tumor_upper", j);
      const double eps = tumor_eps(j);
      AffineScalar rhs;
      level_term(lower ? -(1.0 - d.delta) : 1.0 + d.delta, rhs);
      LmiBlock b = robust_power_block(
          lower ? 1.0 : -1.0, f.tumor.col(j), rhs, weights, eps,
          multiplier(eps, label),
          lower ? BlockKind::tumor_lower : BlockKind::tumor_upper);
      b.label = label;
      p.blocks.push_back(std::move(b));
    }
  }
  add_psd_block(p, m);
  const int nblocks = static_cast<int>(p.blocks.size());
  for (int k = 0; k < nblocks; ++k) {
    if (p.blocks[k].multiplier >= 0) {
      add_nonnegativity(p, p.blocks[k].multiplier,
                        "beta>=0 " + p.blocks[k].label);
    }
  }
  vars.finish();
  p.validate();
  return p;
}

}  // namespace beamdesign
