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
#include <iosfwd>
#include <optional>
#include <string>

#include "beamdesign/assemble.hpp"
#include "beamdesign/design.hpp"
#include "beamdesign/evaluate.hpp"
#include "beamdesign/geometry.hpp"
#include "beamdesign/sdp_problem.hpp"
#include "beamdesign/steering.hpp"
#include "json.hpp"

namespace beamdesign {

using Json = nlohmann::ordered_json;

/// Complete, unit-explicit run configuration. Lengths are stored in meters;
/// the document uses millimeter keys.
struct RunConfig {
  Medium medium;
  CurvilinearArrayParams array;
  RegionGridParams grid;

  DesignVariant variant = DesignVariant::robust;
  double gamma = 1.0;
  double delta = 0.7;
  double epsilon = 0.25;
  Eigen::VectorXd uncertainty_weights;  ///< empty: identity
  std::vector<double> healthy_epsilon;
  std::vector<double> tumor_epsilon;
  std::optional<double> fixed_level;    ///< P for the fixed-level variants
  Eigen::VectorXd healthy_weights;      ///< empty: default weighting

  double gap_tol = 1e-7;
  double feas_tol = 1e-6;
  int max_iter = 100;

  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int synthesis_samples = 100000;
  DbConvention db_convention = DbConvention::amplitude_20log10;
  Averaging averaging = Averaging::db_of_mean;

  Json annotations = Json::object();

  /// Throws ConfigurationError on non-positive physical quantities, delta
  /// outside [0, 1) or inconsistent table lengths.
  void validate() const;

  UncertaintyModel uncertainty() const;
  SolverOptions solver_options() const;
};

Json to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& doc);
RunConfig load_run_config(const std::string& path);

/// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& config);

const char* to_string(DbConvention c);
const char* to_string(Averaging a);
std::optional<DbConvention> parse_db_convention(const std::string& text);
std::optional<Averaging> parse_averaging(const std::string& text);

Json to_json(const ArrayGeometry& geometry);
Json to_json(const RegionGrids& grids);
ArrayGeometry array_geometry_from_json(const Json& doc);
RegionGrids region_grids_from_json(const Json& doc);

Json to_json(const CovarianceDesign& design);
CovarianceDesign covariance_design_from_json(const Json& doc);

/// Sparse block text format. Every block is written with its congruence
/// terms expanded, so the result is a plain
///   maximize c^T y  s.t.  F0_k + sum_i y_i F_ik >= 0.
/// Entry lines are  "<block> <variable> <row> <col> <re> <im>"  with
/// variable -1 for the constant term and row <= col.
void write_sparse_lmi(std::ostream& out, const SdpProblem& problem);
SdpProblem read_sparse_lmi(std::istream& in);

/// Rows are elements, columns grid points (healthy then tumor); entries are
/// "re,im" separated by single spaces.
void write_steering_matrix(std::ostream& out, const SteeringField& field);
ComplexMatrix read_steering_matrix(std::istream& in);

/// x_mm,y_mm,p_linear,p_dB,scenario  with "-inf" for zero power.
void write_power_map_csv(std::ostream& out, const PowerMap& map,
                         DbConvention convention);
/// Reads back positions, powers and scenario (region tags are not stored).
PowerMap read_power_map_csv(std::istream& in);

/// x_mm,y_mm,region,p_nominal,p_worst,multiplier,case
void write_worst_case_csv(std::ostream& out, const PowerMap& map);

void write_report_csv(std::ostream& out, const ReportTable& table);
/// Fixed-width text table with the same rows.
std::string format_report(const ReportTable& table);

/// N rows of 2M comma-separated reals (re, im per channel).
void write_waveforms_csv(std::ostream& out, const WaveformBlock& block);

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for
/// non-finite values.
std::string format_double(double v);
double parse_double(const std::string& text);

}  // namespace beamdesign
