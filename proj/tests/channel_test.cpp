// Copyright 2026 The gaussim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gaussim/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"

namespace gaussim {
namespace {

using testing::max_abs_diff;

TEST(ValidateCp, IdentityIsMarginal) {
  const auto r = validate_cp(identity_channel(2));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.min_eigenvalue, 0.0, 1e-15);
}

TEST(ValidateCp, ScaledIdentityFails) {
  const GaussianChannel ch(1, 1, Vec::Zero(2), 2.0 * Mat::Identity(2, 2), Mat::Zero(2, 2));
  const auto r = validate_cp(ch);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.min_eigenvalue, -3.0, 1e-14);
  EXPECT_THROW(apply(ch, vacuum(1)), RejectedChannel);
}

TEST(ValidateCp, QuantumLimitedAmplifierIsMarginal) {
  for (double g : {1.0, 1.5, 2.0, 10.0}) {
    const auto r = validate_cp(amplifier(1, 0, g));
    // 2x2 block (g-1)(I - iΣ) has eigenvalues 0 and 2(g-1)
    EXPECT_NEAR(r.min_eigenvalue, 0.0, 1e-12);
    EXPECT_TRUE(r.passed);
  }
  // less noise than the quantum limit is not CP
  GaussianChannel under = amplifier(1, 0, 2.0);
  under.g *= 0.9;
  EXPECT_FALSE(validate_cp(under).passed);
}

TEST(ValidateCp, LossSweep) {
  for (double eta = 0.0; eta <= 1.0; eta += 0.05) {
    EXPECT_TRUE(validate_cp(loss(1, 0, eta)).passed) << eta;
  }
  for (double eta : {1.01, 1.5, 3.0}) {
    const GaussianChannel ch(1, 1, Vec::Zero(2), std::sqrt(eta) * Mat::Identity(2, 2),
                             (1.0 - eta) * Mat::Identity(2, 2));
    EXPECT_FALSE(validate_cp(ch).passed) << eta;
  }
}

TEST(IsSymplectic, Basics) {
  EXPECT_TRUE(is_symplectic(Mat::Identity(4, 4)));
  EXPECT_FALSE(is_symplectic(2.0 * Mat::Identity(2, 2)));
  for (double theta : {0.0, 0.3, 1.7, -2.5}) {
    EXPECT_TRUE(is_symplectic(beamsplitter(2, 0, 1, theta, 0.4).a));
  }
  EXPECT_TRUE(is_symplectic(squeezer(1, 0, 0.7, 0.2).a));
  EXPECT_TRUE(is_symplectic(two_mode_squeezer(3, 0, 2, 0.5).a));
  EXPECT_TRUE(is_symplectic(phase_rotation(2, 1, 0.9).a));
  EXPECT_THROW(is_symplectic(Mat::Identity(2, 3)), std::invalid_argument);
}

TEST(Apply, DisplacementOnVacuum) {
  const Vec alpha = (Vec(4) << 1, -2, 0.5, 3).finished();
  const auto out = apply(displacement(2, alpha), vacuum(2));
  EXPECT_EQ(out.xi(), alpha);
  EXPECT_EQ(out.gamma(), Mat::Identity(4, 4));
}

TEST(Apply, TwoModeSqueezerMatchesConstructor) {
  for (double r : {0.0, 0.3, -0.8}) {
    const auto out = apply(two_mode_squeezer(2, 0, 1, r), vacuum(2));
    EXPECT_LE(max_abs_diff(out.gamma(), two_mode_squeezed_vacuum(r).gamma()), 1e-12);
    const auto local_out = apply(local::two_mode_squeezer(0, 1, r), vacuum(2));
    EXPECT_LE(max_abs_diff(local_out.gamma(), out.gamma()), 1e-12);
  }
}

TEST(Apply, LossOnCoherent) {
  const auto out = apply(loss(1, 0, 0.5), coherent(1, 0, 2.0, 0.0));
  EXPECT_NEAR(out.xi()(0), std::sqrt(0.5) * 2.0, 1e-15);
  EXPECT_NEAR(out.xi()(1), 0.0, 1e-15);
  EXPECT_LE(max_abs_diff(out.gamma(), Mat::Identity(2, 2)), 1e-15);
}

TEST(Apply, LossLimits) {
  const auto s = apply(local::squeezer(0, 0.5, 0.0), coherent(2, 0, 1.0, 1.0));
  EXPECT_LE(max_abs_diff(apply(loss(2, 0, 1.0), s).gamma(), s.gamma()), 1e-15);
  const auto dark = apply(loss(2, 0, 0.0), s);
  EXPECT_LE(max_abs_diff(reduced(dark, {0}).gamma(), Mat::Identity(2, 2)), 1e-15);
  EXPECT_LE(max_abs_diff(reduced(dark, {0}).xi(), Vec::Zero(2)), 1e-15);
}

TEST(Apply, DimensionMismatch) { EXPECT_THROW(apply(identity_channel(2), vacuum(1)), std::invalid_argument); }

TEST(Apply, LocalMatchesEmbedded) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto s = testing::random_physical_state(4, rng);
    const auto lc = LocalChannel{{3, 1}, testing::random_cp_channel(2, rng)};
    const auto a = apply(lc, s);
    const auto b = apply(embed(lc, 4), s);
    EXPECT_LE(max_abs_diff(a.xi(), b.xi()), 1e-10);
    EXPECT_LE(max_abs_diff(a.gamma(), b.gamma()), 1e-10);
    EXPECT_EQ(a.gamma(), a.gamma().transpose());
  }
}

TEST(Constructors, Identities) {
  EXPECT_LE(max_abs_diff(beamsplitter(2, 0, 1, 0.0, 0.7).a, Mat::Identity(4, 4)), 1e-15);
  const auto round = compose(squeezer(1, 0, -0.6, 0.0), squeezer(1, 0, 0.6, 0.0));
  EXPECT_LE(max_abs_diff(round.a, Mat::Identity(2, 2)), 1e-12);
  const auto round_phase = compose(squeezer(1, 0, -0.6, 1.1), squeezer(1, 0, 0.6, 1.1));
  EXPECT_LE(max_abs_diff(round_phase.a, Mat::Identity(2, 2)), 1e-12);
  EXPECT_LE(max_abs_diff(loss(1, 0, 1.0).a, Mat::Identity(2, 2)), 0.0);
  EXPECT_LE(max_abs_diff(loss(1, 0, 1.0).g, Mat::Zero(2, 2)), 0.0);
}

TEST(Compose, IdentityLaw) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto ch = testing::random_cp_channel(2, rng);
    const auto c1 = compose(identity_channel(2), ch);
    const auto c2 = compose(ch, identity_channel(2));
    EXPECT_LE(max_abs_diff(c1.a, ch.a), 1e-15);
    EXPECT_LE(max_abs_diff(c2.g, ch.g), 1e-15);
    EXPECT_LE(max_abs_diff(c1.alpha, ch.alpha), 1e-15);
  }
}

TEST(Compose, LossSemigroup) {
  const auto both = compose(loss(1, 0, 0.3), loss(1, 0, 0.6));
  const auto direct = loss(1, 0, 0.18);
  EXPECT_LE(max_abs_diff(both.a, direct.a), 1e-12);
  EXPECT_LE(max_abs_diff(both.g, direct.g), 1e-12);
}

TEST(Compose, ApplyEquivalence) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const auto t1 = testing::random_cp_channel(2, rng, t % 3 == 0);
    const auto t2 = testing::random_cp_channel(2, rng);
    const auto s = testing::random_physical_state(2, rng);
    const auto direct = apply(t2, apply(t1, s));
    const auto composed = apply(compose(t2, t1), s);
    const double scale = 1.0 + direct.gamma().cwiseAbs().maxCoeff();
    EXPECT_LE(max_abs_diff(direct.xi(), composed.xi()), 1e-9 * scale);
    EXPECT_LE(max_abs_diff(direct.gamma(), composed.gamma()), 1e-9 * scale);
  }
  EXPECT_THROW(compose(identity_channel(1), identity_channel(2)), std::invalid_argument);
}

TEST(Compose, ClosurePreservesCp) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 1000; ++t) {
    const auto t1 = testing::random_cp_channel(2, rng, t % 2 == 0);
    const auto t2 = testing::random_cp_channel(2, rng, t % 5 == 0);
    const auto c = compose(t2, t1);
    const double scale = 1.0 + c.g.cwiseAbs().maxCoeff();
    EXPECT_GE(validate_cp(c).min_eigenvalue, -1e-9 * scale);
  }
}

TEST(Apply, PreservesPhysicality) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 500; ++t) {
    const auto s = testing::random_physical_state(2, rng);
    const auto out = apply(testing::random_cp_channel(2, rng, t % 2 == 0), s);
    EXPECT_TRUE(check_physical(out).passed) << check_physical(out).min_eigenvalue;
  }
}

TEST(Apply, MeanShiftLinearity) {
  std::mt19937_64 rng(29);
  const auto ch = testing::random_cp_channel(2, rng);
  const auto s = testing::random_physical_state(2, rng);
  const Vec delta = (Vec(4) << 0.3, -1.0, 2.0, 0.1).finished();
  const auto shifted = apply(ch, GaussianState(s.xi() + delta, s.gamma()));
  const auto base = apply(ch, s);
  EXPECT_LE(max_abs_diff(shifted.xi(), base.xi() + ch.a.transpose() * delta), 1e-12);
  EXPECT_LE(max_abs_diff(shifted.gamma(), base.gamma()), 0.0);
}

TEST(ZeroNoise, CpIffSymplectic) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> entry(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const Mat sym = testing::random_symplectic(2, rng);
    const GaussianChannel good(2, 2, Vec::Zero(4), sym, Mat::Zero(4, 4));
    EXPECT_TRUE(is_symplectic(sym));
    EXPECT_TRUE(validate_cp(good).passed);
    Mat rnd(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) {
      rnd(i) = entry(rng);
    }
    const GaussianChannel bad(2, 2, Vec::Zero(4), rnd, Mat::Zero(4, 4));
    EXPECT_FALSE(is_symplectic(rnd));
    EXPECT_FALSE(validate_cp(bad).passed);
  }
}

TEST(Cloner, CloneCovarianceAndFidelity) {
  const auto cloner = cloner_1to2();
  EXPECT_EQ(cloner.n_in, 1u);
  EXPECT_EQ(cloner.n_out, 2u);
  EXPECT_TRUE(validate_cp(cloner).passed);
  for (double q : {-2.0, 0.0, 1.5}) {
    for (double p : {-1.0, 0.0, 2.5}) {
      const auto input = coherent(1, 0, q, p);
      const auto out = apply(cloner, input);
      for (std::size_t m : {0u, 1u}) {
        const auto clone = reduced(out, {m});
        EXPECT_LE(max_abs_diff(clone.gamma(), 2.0 * Mat::Identity(2, 2)), 1e-12);
        EXPECT_LE(max_abs_diff(clone.xi(), input.xi()), 1e-12);
        EXPECT_NEAR(overlap(clone, input), 2.0 / 3.0, 1e-12);
      }
    }
  }
}

TEST(Cloner, StepByStepMatchesComposed) {
  const auto input = coherent(1, 0, 0.7, -1.2);
  auto stepwise = apply(amplifier(1, 0, 2.0), input);
  stepwise = apply(append_vacuum(1), stepwise);
  stepwise = apply(local::beamsplitter(0, 1, std::numbers::pi / 4, 0.0), stepwise);
  const auto composed = apply(cloner_1to2(), input);
  EXPECT_LE(max_abs_diff(stepwise.gamma(), composed.gamma()), 1e-12);
  EXPECT_LE(max_abs_diff(stepwise.xi(), composed.xi()), 1e-12);
}

TEST(Cloner, VacuumClonesIdentical) {
  const auto out = apply(cloner_1to2(), vacuum(1));
  EXPECT_LE(max_abs_diff(reduced(out, {0}).gamma(), reduced(out, {1}).gamma()), 1e-15);
  EXPECT_LE(max_abs_diff(reduced(out, {0}).xi(), reduced(out, {1}).xi()), 1e-15);
}

}  // namespace
}  // namespace gaussim
