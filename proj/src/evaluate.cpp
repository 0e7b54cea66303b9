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

#include "beamdesign/evaluate.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace beamdesign {

double to_db(double power, DbConvention convention) {
  if (power <= 0.0) return -std::numeric_limits<double>::infinity();
  const double k = convention == DbConvention::amplitude_20log10 ? 20.0 : 10.0;
  return k * std::log10(power);
}

double from_db(double db, DbConvention convention) {
  const double k = convention == DbConvention::amplitude_20log10 ? 20.0 : 10.0;
  return std::pow(10.0, db / k);
}

double beampattern_at(const ComplexMatrix& R, const ComplexVector& a) {
  if (R.rows() != a.size() || R.cols() != a.size()) {
    throw ValidationError("covariance and steering dimensions differ");
  }
  return (a.adjoint() * R * a)(0, 0).real();
}

const char* to_string(Scenario s) {
  return s == Scenario::nominal ? "nominal" : "worst_case";
}

const char* to_string(Region r) {
  return r == Region::healthy ? "healthy" : "tumor";
}

double PowerMap::region_average_db(Region region, DbConvention convention,
                                   Averaging averaging) const {
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < size(); ++i) {
    if (regions[i] != region) continue;
    sum += averaging == Averaging::db_of_mean ? power(i) : db(i, convention);
    ++n;
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return averaging == Averaging::db_of_mean ? to_db(sum / n, convention)
                                            : sum / n;
}

PowerMap nominal_power_map(const ComplexMatrix& R, const SteeringField& field,
                           const RegionGrids& grids) {
  if (grids.healthy_count() != field.healthy_count() ||
      grids.tumor_count() != field.tumor_count()) {
    throw ValidationError("grid and steering field sizes differ");
  }
  PowerMap map;
  map.scenario = Scenario::nominal;
  const int ns = field.healthy_count();
  const int nt = field.tumor_count();
  map.power.resize(ns + nt);
  for (int i = 0; i < ns; ++i) {
    map.positions.push_back(grids.healthy_points[i]);
    map.regions.push_back(Region::healthy);
    map.power(i) = std::max(0.0, beampattern_at(R, field.healthy.col(i)));
  }
  for (int j = 0; j < nt; ++j) {
    map.positions.push_back(grids.tumor_points[j]);
    map.regions.push_back(Region::tumor);
    map.power(ns + j) = std::max(0.0, beampattern_at(R, field.tumor.col(j)));
  }
  return map;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& R) {
  if (hermitian_defect(R) > 1e-10 * std::max(1.0, R.cwiseAbs().maxCoeff())) {
    throw IntegrityError("covariance is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(R));
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < -1e-8) {
      throw IntegrityError("covariance has a negative eigenvalue");
    }
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  return es.eigenvectors() * lam.cast<Complex>().asDiagonal() *
         es.eigenvectors().adjoint();
}

WaveformBlock synthesize_waveforms(const ComplexMatrix& R, int sample_count,
                                   std::uint64_t seed) {
  if (sample_count < 1) throw ValidationError("sample count must be >= 1");
  const ComplexMatrix root = psd_sqrt(R);
  const int m = static_cast<int>(R.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix w(sample_count, m);
  for (int n = 0; n < sample_count; ++n) {
    for (int k = 0; k < m; ++k) {
      const double re = normal(rng);
      w(n, k) = Complex(re, normal(rng));
    }
  }
  WaveformBlock block;
  block.target = R;
  // Rows are snapshots: x(n)^T = w(n)^T R^{1/2 T}.
  block.samples = w * root.transpose();
  block.sample_covariance =
      (block.samples.transpose() * block.samples.conjugate()) /
      static_cast<double>(sample_count);
  return block;
}

ReportTable region_report(const std::vector<LabelledMap>& maps,
                          DbConvention convention, Averaging averaging) {
  ReportTable table;
  table.convention = convention;
  table.averaging = averaging;
  const PowerMap* first = nullptr;
  for (const auto& entry : maps) {
    if (!entry.map) throw ValidationError("report entry without a map");
    if (first && first->regions != entry.map->regions) {
      throw ValidationError("report maps do not share a grid");
    }
    first = entry.map;
    table.rows.push_back(
        {entry.scenario, entry.design,
         entry.map->region_average_db(Region::tumor, convention, averaging),
         entry.map->region_average_db(Region::healthy, convention,
                                      averaging)});
  }
  return table;
}

}  // namespace beamdesign
