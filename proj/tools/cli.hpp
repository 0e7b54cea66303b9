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

#include <iosfwd>
#include <string>
#include <vector>

namespace beamdesign::cli {

enum ExitCode : int {
  kOptimal = 0,
  kInfeasible = 2,
  kUnbounded = 3,
  kNumericalFailure = 4,
  kUsage = 64,
  kIntegrity = 65,
};

/// Runs one command line (args[0] is the program name) and returns the exit
/// code.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace beamdesign::cli
