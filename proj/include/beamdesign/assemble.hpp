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

#include "beamdesign/sdp_problem.hpp"
#include "beamdesign/steering.hpp"

namespace beamdesign {

enum class DesignVariant {
  nominal_eq5,
  robust,
  weighted_robust,
  sum_energy_robust,
  nominal_generalized,
};

const char* to_string(DesignVariant variant);
std::optional<DesignVariant> parse_variant(const std::string& text);

/// Everything needed to pose one design problem.
struct DesignDescription {
  DesignVariant variant = DesignVariant::robust;
  SteeringField field;
  double gamma = 1.0;
  double delta = 0.7;
  /// Fixed tumor level P (weighted and sum-energy variants).
  double fixed_level = 0.0;
  /// w(r) > 0 per healthy point (weighted variant).
  Eigen::VectorXd healthy_weights;
};

/// Variable layout: the off-diagonal parameters of R come first, followed by
/// t (or t_1..t_NS for the sum-energy variant), then P when it is free, then
/// one multiplier per robust block with a positive uncertainty bound.
/// Blocks: healthy, tumor lower, tumor upper, R >= 0, multiplier signs.
SdpProblem assemble(const DesignDescription& description);

}  // namespace beamdesign
