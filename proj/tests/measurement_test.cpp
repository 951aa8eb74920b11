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

#include "gaussim/measurement.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gaussim/channel.hpp"
#include "gaussim/fock.hpp"
#include "test_util.hpp"

namespace gaussim {
namespace {

using testing::expect_moments_near;
using testing::max_abs_diff;

TEST(Condition, HeterodyneOfTmsvMatchesOracleProjection) {
  const double r = 0.3;
  const auto fock_state = fock::from_gaussian(fock::TwoModeSqueezedVacuum{r}, 30);
  for (const auto &[q, p] : {std::pair{0.0, 0.0}, std::pair{0.7, -0.4}, std::pair{-1.5, 2.0}}) {
    const auto res = condition(two_mode_squeezed_vacuum(r), heterodyne_spec({0}), (Vec(2) << q, p).finished());
    const auto proj = fock::project_coherent(fock_state, 0, q, p);
    expect_moments_near(fock::moments(proj.state), res.state, 1e-5);
    EXPECT_NEAR(std::exp(res.record.log_density), proj.density, 1e-8);
    EXPECT_NEAR(res.state.log_weight(), res.record.log_density, 0.0);
  }
}

TEST(Condition, HeterodyneOfCorrelatedStateMatchesOracle) {
  auto st = fock::from_gaussian(fock::Coherent{2, 1, 0.5, 0.5}, 40);
  st = fock::apply_gaussian_unitary(st, fock::Squeezer{0, 0.3, 0.4});
  st = fock::apply_gaussian_unitary(st, fock::Beamsplitter{0, 1, 0.6, 0.2});
  GaussianState s = coherent(2, 1, 0.5, 0.5);
  s = apply(local::squeezer(0, 0.3, 0.4), std::move(s));
  s = apply(local::beamsplitter(0, 1, 0.6, 0.2), std::move(s));
  const auto res = condition(s, heterodyne_spec({1}), (Vec(2) << 0.4, -0.9).finished());
  const auto proj = fock::project_coherent(st, 1, 0.4, -0.9);
  expect_moments_near(fock::moments(proj.state), res.state, 1e-6);
  EXPECT_NEAR(std::exp(res.record.log_density), proj.density, 1e-9);
}

TEST(Condition, UncorrelatedModeUntouched) {
  const auto res = condition(vacuum(2), heterodyne_spec({0}), (Vec(2) << 3.0, -1.0).finished());
  EXPECT_EQ(res.state.n(), 1u);
  EXPECT_EQ(res.state.gamma(), Mat::Identity(2, 2));
  EXPECT_EQ(res.state.xi(), Vec::Zero(2));
  const auto all = condition(vacuum(1), heterodyne_spec({0}), Vec::Zero(2));
  EXPECT_EQ(all.state.n(), 0u);
}

TEST(Condition, CovarianceIndependentOfOutcome) {
  std::mt19937_64 rng(41);
  const auto s = testing::random_physical_state(3, rng);
  const auto spec = heterodyne_spec({1, 2});
  const auto a = condition(s, spec, (Vec(4) << 1, 2, 3, 4).finished());
  const auto b = condition(s, spec, (Vec(4) << -5, 0, 0.1, 9).finished());
  EXPECT_EQ(a.state.gamma(), b.state.gamma());
}

TEST(Condition, PreservesPhysicality) {
  std::mt19937_64 rng(43);
  Rng stream(99);
  for (int t = 0; t < 1000; ++t) {
    const auto s = testing::random_physical_state(3, rng);
    MeasurementSpec spec = t % 3 == 0   ? heterodyne_spec({static_cast<std::size_t>(t % 3)})
                           : t % 3 == 1 ? homodyne_spec(1, t % 2 ? Quadrature::q : Quadrature::p, 6.0)
                                        : epr_spec(0, 2, 0.8);
    const auto res = sample(s, spec, stream);
    EXPECT_TRUE(check_physical(res.state).passed) << check_physical(res.state).min_eigenvalue;
    EXPECT_TRUE(std::isfinite(res.record.log_density));
  }
}

TEST(Condition, Errors) {
  EXPECT_THROW(condition(vacuum(2), heterodyne_spec({2}), Vec::Zero(2)), std::invalid_argument);
  EXPECT_THROW(condition(vacuum(2), heterodyne_spec({0, 0}), Vec::Zero(4)), std::invalid_argument);
  EXPECT_THROW(condition(vacuum(2), heterodyne_spec({0}), Vec::Zero(3)), std::invalid_argument);
  EXPECT_THROW(condition(vacuum(1), heterodyne_spec({0}), (Vec(2) << 100, 0).finished()), ImpossibleOutcome);
  const auto unphysical = general_dyne_spec({0}, 0.1 * Mat::Identity(2, 2));
  EXPECT_THROW(condition(vacuum(1), unphysical, Vec::Zero(2)), std::invalid_argument);
}

TEST(Sample, Deterministic) {
  const auto s = two_mode_squeezed_vacuum(0.5);
  Rng a(1234);
  Rng b(1234);
  for (int t = 0; t < 20; ++t) {
    const auto ra = sample(s, heterodyne_spec({0}), a);
    const auto rb = sample(s, heterodyne_spec({0}), b);
    EXPECT_EQ(ra.record.outcome, rb.record.outcome);
  }
}

TEST(Sample, HeterodyneOfCoherentCentred) {
  const auto s = coherent(1, 0, 1.5, -0.5);
  Rng rng(5);
  const int n = 100000;
  Vec sum = Vec::Zero(2);
  for (int t = 0; t < n; ++t) {
    sum += sample(s, heterodyne_spec({0}), rng).record.outcome;
  }
  const Vec mean = sum / n;
  // outcome covariance is γ + I = 2I
  const double sigma = std::sqrt(2.0 / n);
  EXPECT_LT(std::abs(mean(0) - 1.5), 3 * sigma);
  EXPECT_LT(std::abs(mean(1) + 0.5), 3 * sigma);
}

TEST(Homodyne, ZeroSqueezingIsHeterodyne) {
  EXPECT_EQ(homodyne_spec(0, Quadrature::q, 0.0).gamma_m, Mat::Identity(2, 2));
  EXPECT_THROW(homodyne(vacuum(1), 0, Quadrature::q, 0.0, 1.0), std::invalid_argument);
}

// Exact quadrature measurement: Schur complement with the pseudoinverse of
// the measured q-block, γ' = γ_A - C_q C_qᵀ / γ_qq.
Mat ideal_q_homodyne(const GaussianState &s, std::size_t mode) {
  std::vector<std::size_t> rest;
  for (std::size_t m = 0; m < s.n(); ++m) {
    if (m != mode) {
      rest.push_back(m);
    }
  }
  const auto a = quadrature_indices(rest, s.n());
  const auto q = static_cast<Eigen::Index>(mode);
  Mat out = gather(s.gamma(), a, a);
  Vec c(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    c(static_cast<Eigen::Index>(i)) = s.gamma()(a[i], q);
  }
  return out - c * c.transpose() / s.gamma()(q, q);
}

TEST(Homodyne, ApproachesIdealLimit) {
  GaussianState s = apply(local::beamsplitter(0, 1, 0.5, 0.0), tensor(squeezed_vacuum(1, 0, 0.5), thermal(1, 0, 0.3)));
  const auto res = homodyne(s, 0, Quadrature::q, 0.7, 15.0);
  EXPECT_LE(max_abs_diff(res.state.gamma(), ideal_q_homodyne(s, 0)), 1e-6);
}

TEST(Homodyne, TmsvArmConvergesMonotonically) {
  const double r = 0.6;
  const auto s = two_mode_squeezed_vacuum(r);
  const double exact = 1.0 / std::cosh(2.0 * r);
  double previous = INFINITY;
  for (double sq : {5.0, 10.0, 15.0}) {
    const double v = homodyne(s, 0, Quadrature::q, 0.0, sq).state.gamma()(0, 0);
    const double err = std::abs(v - exact);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-9);
  EXPECT_NEAR(ideal_q_homodyne(s, 0)(0, 0), exact, 1e-12);
}

TEST(VacuumProbability, Values) {
  EXPECT_NEAR(vacuum_probability(vacuum(2), 1), 1.0, 1e-15);
  const auto coh = fock::from_gaussian(fock::Coherent{1, 0, 2.0, 0.0}, 40);
  EXPECT_NEAR(vacuum_probability(coherent(1, 0, 2.0, 0.0), 0), fock::photon_number_distribution(coh, 0)(0), 1e-12);
  EXPECT_NEAR(vacuum_probability(coherent(1, 0, 2.0, 0.0), 0), std::exp(-1.0), 1e-15);
  const double r = 0.4;
  const auto tm = fock::from_gaussian(fock::TwoModeSqueezedVacuum{r}, 30);
  EXPECT_NEAR(vacuum_probability(two_mode_squeezed_vacuum(r), 0), fock::photon_number_distribution(tm, 0)(0), 1e-12);
}

TEST(VacuumProbability, RandomPreparationsMatchOracle) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int t = 0; t < 10; ++t) {
    const fock::GateDescriptor gates[] = {fock::Squeezer{0, u(rng), 3 * u(rng)}, fock::Displacement{1, d(rng), d(rng)},
                                          fock::Beamsplitter{0, 1, 3 * u(rng), u(rng)},
                                          fock::TwoModeSqueezer{0, 1, u(rng)}, fock::Displacement{0, d(rng), d(rng)}};
    auto st = fock::from_gaussian(fock::Vacuum{2}, 40);
    GaussianState s = vacuum(2);
    for (const auto &g : gates) {
      st = fock::apply_gaussian_unitary(st, g);
      s = apply(testing::engine_gate(g), std::move(s));
    }
    for (std::size_t m : {0u, 1u}) {
      EXPECT_NEAR(vacuum_probability(s, m), fock::photon_number_distribution(st, m)(0), 1e-6);
    }
  }
}

TEST(NoAbsorption, PdcHeraldLeavesVacuum) {
  const double r = 0.3;
  const auto res = condition_no_absorption(two_mode_squeezed_vacuum(r), 0);
  EXPECT_LE(max_abs_diff(res.state.gamma(), Mat::Identity(2, 2)), 1e-12);
  EXPECT_LE(res.state.xi().norm(), 1e-15);
  EXPECT_NEAR(std::exp(res.state.log_weight()), 1.0 / std::pow(std::cosh(r), 2), 1e-14);
  EXPECT_EQ(res.record.spec.kind, MeasurementKind::vacuum_projection);
  EXPECT_EQ(res.record.log_density, res.state.log_weight());
}

TEST(NoAbsorption, ProductStateUnchanged) {
  const auto s = tensor(vacuum(1), squeezed_vacuum(1, 0, 0.3));
  const auto res = condition_no_absorption(apply(local::displacement(1, 1.0, 2.0), s), 0);
  EXPECT_LE(max_abs_diff(res.state.gamma(), squeezed_vacuum(1, 0, 0.3).gamma()), 0.0);
  EXPECT_EQ(res.state.xi(), (Vec(2) << 1.0, 2.0).finished());
  EXPECT_NEAR(res.state.log_weight(), 0.0, 1e-15);
}

TEST(NoAbsorption, MatchesOracleOnCorrelatedState) {
  auto st = fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.4}, 40);
  st = fock::apply_gaussian_unitary(st, fock::Displacement{0, 0.6, -0.3});
  st = fock::apply_gaussian_unitary(st, fock::Beamsplitter{0, 1, 0.3, 0.0});
  GaussianState s = apply(local::displacement(0, 0.6, -0.3), two_mode_squeezed_vacuum(0.4));
  s = apply(local::beamsplitter(0, 1, 0.3, 0.0), std::move(s));
  const auto res = condition_no_absorption(s, 1);
  const auto h = fock::condition_photodetection(st, 1, fock::Photodetection::no_absorption);
  expect_moments_near(fock::moments(h.state), res.state, 1e-6);
  EXPECT_NEAR(std::exp(res.record.log_density), h.probability, 1e-9);
}

TEST(NoAbsorption, ImpossibleOutcome) {
  EXPECT_THROW(condition_no_absorption(coherent(1, 0, 80.0, 0.0), 0), ImpossibleOutcome);
}

TEST(Absorption, AlwaysRejectedWithProbability) {
  try {
    condition_absorption(vacuum(1), 0);
    FAIL();
  } catch (const NonGaussianOutcome &e) {
    EXPECT_EQ(e.absorption_probability(), 0.0);
  }
  const auto oracle = fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.3}, 30);
  try {
    condition_absorption(two_mode_squeezed_vacuum(0.3), 0);
    FAIL();
  } catch (const NonGaussianOutcome &e) {
    EXPECT_NEAR(e.absorption_probability(), 1.0 - fock::photon_number_distribution(oracle, 0)(0), 1e-12);
  }
}

TEST(Neumark, ExtendAndDiscard) {
  EXPECT_EQ(neumark_extend(vacuum(1), 1).gamma(), vacuum(2).gamma());
  std::mt19937_64 rng(53);
  const auto s = testing::random_physical_state(2, rng);
  const auto ext = neumark_extend(s, 2);
  EXPECT_EQ(ext.n(), 4u);
  const auto back = condition(ext, heterodyne_spec({2, 3}), (Vec(4) << 0.3, 1, -2, 0.5).finished()).state;
  EXPECT_LE(max_abs_diff(back.gamma(), s.gamma()), 0.0);
  EXPECT_LE(max_abs_diff(back.xi(), s.xi()), 0.0);
  EXPECT_THROW(neumark_extend(s, 0), std::invalid_argument);
}

// Heterodyne realized as beamsplitter + vacuum ancilla + two homodynes has the
// same outcome distribution as the direct coherent-state projection.
TEST(Neumark, AncillaHeterodyneMatchesDirect) {
  const auto s = apply(local::squeezer(0, 0.4, 0.5), coherent(1, 0, 1.0, -2.0));
  const int n = 100000;
  Rng rng_direct(1);
  Rng rng_anc(2);
  Eigen::Matrix2d cov_d = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d cov_a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d mean_d = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_a = Eigen::Vector2d::Zero();
  for (int t = 0; t < n; ++t) {
    const Eigen::Vector2d d = sample(s, heterodyne_spec({0}), rng_direct).record.outcome;
    auto ext = apply(local::beamsplitter(0, 1, std::numbers::pi / 4, 0.0), neumark_extend(s, 1));
    const auto first = homodyne_sample(ext, 0, Quadrature::q, rng_anc, 8.0);
    const auto second = homodyne_sample(first.state, 0, Quadrature::p, rng_anc, 8.0);
    // output 0 carries (q_in - q_anc)/√2 with this phase convention ... rescale by √2
    const Eigen::Vector2d a(std::sqrt(2.0) * first.record.outcome(0), std::sqrt(2.0) * second.record.outcome(1));
    mean_d += d;
    mean_a += a;
    cov_d += d * d.transpose();
    cov_a += a * a.transpose();
  }
  mean_d /= n;
  mean_a /= n;
  cov_d = cov_d / n - mean_d * mean_d.transpose();
  cov_a = cov_a / n - mean_a * mean_a.transpose();
  const Eigen::Matrix2d expected_cov = (s.gamma() + Mat::Identity(2, 2)).diagonal().asDiagonal();
  for (int i = 0; i < 2; ++i) {
    const double se_mean = std::sqrt(cov_d(i, i) / n);
    EXPECT_LT(std::abs(mean_a(i) - mean_d(i)), 5 * std::sqrt(2.0) * se_mean);
    const double se_var = cov_d(i, i) * std::sqrt(2.0 / n);
    EXPECT_LT(std::abs(cov_a(i, i) - cov_d(i, i)), 5 * std::sqrt(2.0) * se_var);
    EXPECT_LT(std::abs(cov_d(i, i) - expected_cov(i, i)), 5 * se_var);
  }
}

TEST(Marginalization, LawOfTotalVariance) {
  std::mt19937_64 rng(59);
  const auto s = testing::random_physical_state(2, rng);
  const auto spec = heterodyne_spec({0});
  Rng stream(77);
  const int n = 100000;
  Vec mean = Vec::Zero(2);
  Mat second = Mat::Zero(2, 2);
  Mat conditional_gamma;
  for (int t = 0; t < n; ++t) {
    const auto res = sample(s, spec, stream);
    mean += res.state.xi();
    second += res.state.xi() * res.state.xi().transpose();
    conditional_gamma = res.state.gamma();
  }
  mean /= n;
  const Mat cov = second / n - mean * mean.transpose();
  const auto marginal = reduced(s, {1});
  const Mat between = marginal.gamma() - conditional_gamma;
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(mean(i) - marginal.xi()(i)), 5 * std::sqrt(between(i, i) / n));
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double se = std::sqrt((between(i, i) * between(j, j) + between(i, j) * between(i, j)) / n);
      EXPECT_LT(std::abs(cov(i, j) + conditional_gamma(i, j) - marginal.gamma()(i, j)), 5 * se);
    }
  }
}

}  // namespace
}  // namespace gaussim
