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

#include <cstdint>
#include <string>
#include <vector>

#include "beamdesign/design.hpp"
#include "beamdesign/steering.hpp"

namespace beamdesign {

enum class DbConvention { amplitude_20log10, power_10log10 };
enum class Averaging { db_of_mean, mean_of_db };

/// 20 log10(p) or 10 log10(p); -inf for p == 0.
double to_db(double power, DbConvention convention);
double from_db(double db, DbConvention convention);

/// a^H R a (imaginary round-off dropped).
double beampattern_at(const ComplexMatrix& R, const ComplexVector& a);

enum class Scenario { nominal, worst_case };
enum class Region { healthy, tumor };

const char* to_string(Scenario s);
const char* to_string(Region r);

/// Per-point power over the control points, healthy points first.
struct PowerMap {
  Scenario scenario = Scenario::nominal;
  std::string design_label;
  std::vector<Position> positions;
  std::vector<Region> regions;
  Eigen::VectorXd power;

  // Worst-case maps only.
  Eigen::VectorXd nominal_power;
  std::vector<double> multipliers;
  std::vector<std::string> case_tags;
  std::vector<ComplexVector> perturbations;

  int size() const { return static_cast<int>(power.size()); }
  double db(int i, DbConvention convention) const {
    return to_db(power(i), convention);
  }
  /// Region average under the chosen conventions.
  double region_average_db(Region region, DbConvention convention,
                           Averaging averaging) const;
};

PowerMap nominal_power_map(const ComplexMatrix& R, const SteeringField& field,
                           const RegionGrids& grids);

/// x(n) = R^{1/2} w(n) with w circular complex Gaussian, identity covariance.
struct WaveformBlock {
  ComplexMatrix samples;  ///< N x M
  ComplexMatrix sample_covariance;
  ComplexMatrix target;
};

/// Hermitian PSD square root; eigenvalues in [-1e-8, 0) are clamped to zero,
/// anything lower throws IntegrityError.
ComplexMatrix psd_sqrt(const ComplexMatrix& R);

WaveformBlock synthesize_waveforms(const ComplexMatrix& R, int sample_count,
                                   std::uint64_t seed);

struct ReportRow {
  std::string scenario;
  std::string design;
  double tumor_db = 0.0;
  double healthy_db = 0.0;
};

struct ReportTable {
  std::vector<ReportRow> rows;
  DbConvention convention = DbConvention::amplitude_20log10;
  Averaging averaging = Averaging::db_of_mean;
};

struct LabelledMap {
  std::string scenario;
  std::string design;
  const PowerMap* map = nullptr;
};

ReportTable region_report(const std::vector<LabelledMap>& maps,
                          DbConvention convention = DbConvention::amplitude_20log10,
                          Averaging averaging = Averaging::db_of_mean);

}  // namespace beamdesign
