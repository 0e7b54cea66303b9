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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "beamdesign/steering.hpp"
#include "support.hpp"

using namespace beamdesign;

namespace {

ArrayGeometry single_element(double spreading_unit = 1.0) {
  ArrayGeometry g;
  g.elements = {Position::Zero()};
  g.medium.spreading_unit_m = spreading_unit;
  return g;
}

double wrap(double phase) {
  return std::remainder(phase, 2.0 * std::numbers::pi);
}

}  // namespace

TEST(NominalSteering, OneWavelengthHasZeroPhase) {
  ArrayGeometry g = single_element();
  double d = g.wavelength_m();
  ComplexVector a = nominal_steering(g, Position(d, 0, 0));
  EXPECT_NEAR(std::abs(a(0)), 1.0 / std::sqrt(d), 1e-12);
  EXPECT_NEAR(std::arg(a(0)), 0.0, 1e-12);
}

TEST(NominalSteering, HalfWavelengthFlipsSign) {
  ArrayGeometry g = single_element();
  double d = 0.5 * g.wavelength_m();
  ComplexVector a = nominal_steering(g, Position(0, d, 0));
  EXPECT_NEAR(a(0).real(), -1.0 / std::sqrt(d), 1e-10);
  EXPECT_NEAR(a(0).imag(), 0.0, 1e-10);
}

TEST(NominalSteering, FiveCentimetreDistance) {
  // 0.05 m is 16 2/3 wavelengths at 3 mm, so the phase is
  // -2 pi * 16.667 = 2 pi / 3 (mod 2 pi), magnitude 1/sqrt(0.05).
  ArrayGeometry g = single_element();
  ComplexVector a = nominal_steering(g, Position(0.05, 0, 0));
  EXPECT_NEAR(std::abs(a(0)), 4.47213595499958, 1e-12);
  EXPECT_NEAR(wrap(std::arg(a(0)) - 2.0 * std::numbers::pi / 3.0), 0.0, 1e-9);
}

TEST(NominalSteering, MagnitudeAndPhaseLaws) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  ArrayGeometry g;
  g.medium.spreading_unit_m = 3e-3;
  for (int m = 0; m < 6; ++m) g.elements.emplace_back(u(rng), u(rng), 0.0);
  const double k = 2.0 * std::numbers::pi / g.wavelength_m();
  for (int trial = 0; trial < 50; ++trial) {
    Position r(u(rng), u(rng) + 0.1, 0.0);
    ComplexVector a = nominal_steering(g, r);
    for (int m = 0; m < 6; ++m) {
      double d = (g.elements[m] - r).norm();
      EXPECT_NEAR(std::abs(a(m)), 1.0 / std::sqrt(d / 3e-3), 1e-12);
      EXPECT_NEAR(wrap(std::arg(a(m)) + k * d), 0.0, 1e-9);
    }
  }
}

TEST(NominalSteering, ElementPermutationPermutesEntries) {
  ArrayGeometry g;
  g.elements = {Position(0, 0, 0), Position(0.002, 0, 0), Position(0.004, 0.001, 0)};
  ArrayGeometry h = g;
  std::swap(h.elements[0], h.elements[2]);
  Position r(0.01, 0.03, 0);
  ComplexVector a = nominal_steering(g, r), b = nominal_steering(h, r);
  EXPECT_EQ(a(0), b(2));
  EXPECT_EQ(a(1), b(1));
  EXPECT_EQ(a(2), b(0));
}

TEST(NominalSteering, CoincidentPointIsSingular) {
  ArrayGeometry g = single_element();
  EXPECT_THROW(nominal_steering(g, Position::Zero()), SingularityError);
}

TEST(UncertaintyBall, Membership) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  EXPECT_TRUE(uncertainty_ball_membership(ComplexVector::Zero(4), w, 0.0));
  EXPECT_TRUE(uncertainty_ball_membership(ComplexVector::Zero(4), w, 0.25));
  ComplexVector x = ComplexVector::Zero(4);
  x(0) = 0.5;
  EXPECT_TRUE(uncertainty_ball_membership(x, w, 0.25));
  w(0) = 4.0;
  x(0) = 0.3;
  EXPECT_FALSE(uncertainty_ball_membership(x, w, 0.25));
  EXPECT_THROW(uncertainty_ball_membership(ComplexVector::Zero(3), w, 0.25),
               ValidationError);
}

TEST(UncertaintyModel, BoundsAndValidation) {
  UncertaintyModel m = UncertaintyModel::isotropic(3, 0.25);
  EXPECT_EQ(m.healthy_bound(5), 0.25);
  m.tumor_epsilon = {0.1, 0.2};
  EXPECT_EQ(m.tumor_bound(1), 0.2);
  EXPECT_NO_THROW(m.validate(3));
  EXPECT_THROW(m.validate(4), ConfigurationError);
  m.weights(1) = 0.0;
  EXPECT_THROW(m.validate(3), ConfigurationError);
  m = UncertaintyModel::isotropic(3, -0.1);
  EXPECT_THROW(m.validate(3), ConfigurationError);
}

TEST(SteeringField, ColumnsFollowGridOrder) {
  Medium medium;
  medium.spreading_unit_m = 3e-3;
  CurvilinearArrayParams params;
  params.element_count = 9;
  ArrayGeometry geo = build_curvilinear_array(params, medium);
  RegionGrids grids = build_region_grids(RegionGridParams{});
  SteeringField f =
      build_steering_field(geo, grids, UncertaintyModel::isotropic(9, 0.25));
  ASSERT_EQ(f.element_count(), 9);
  ASSERT_EQ(f.healthy_count(), 174);
  ASSERT_EQ(f.tumor_count(), 13);
  EXPECT_EQ(f.healthy.col(17), nominal_steering(geo, grids.healthy_points[17]));
  EXPECT_EQ(f.tumor.col(6), nominal_steering(geo, grids.tumor_points[6]));
  EXPECT_EQ(f.center, nominal_steering(geo, grids.tumor_center));

  UncertaintyModel bad = UncertaintyModel::isotropic(9, 0.25);
  bad.tumor_epsilon = {0.1};
  EXPECT_THROW(build_steering_field(geo, grids, bad), ConfigurationError);
}
