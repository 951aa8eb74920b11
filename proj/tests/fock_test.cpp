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

#include "gaussim/fock.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gaussim/channel.hpp"
#include "gaussim/measurement.hpp"
#include "gaussim/state.hpp"
#include "test_util.hpp"

namespace gaussim {
namespace {

using testing::engine_gate;
using testing::expect_moments_near;
using testing::max_abs_diff;

TEST(FockPreparation, VacuumIsBasisVectorZero) {
  const auto st = fock::from_gaussian(fock::Vacuum{2}, 10);
  EXPECT_EQ(st.amplitudes.size(), 121);
  EXPECT_EQ(st.amplitudes(0), cdouble(1.0));
  EXPECT_DOUBLE_EQ(st.amplitudes.squaredNorm(), 1.0);
  EXPECT_EQ(st.norm_deficit, 0.0);
  const auto m = fock::moments(st);
  EXPECT_LE(max_abs_diff(m.xi, Vec::Zero(4)), 1e-15);
  EXPECT_LE(max_abs_diff(m.gamma, Mat::Identity(4, 4)), 1e-15);
}

TEST(FockPreparation, TwoModeSqueezedAmplitudeRatio) {
  const auto st = fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.3}, 30);
  const auto sp = st.space();
  for (std::size_t n = 0; n + 1 < 30; ++n) {
    const auto a0 = st.amplitudes(static_cast<Eigen::Index>(n * sp.stride(0) + n));
    const auto a1 = st.amplitudes(static_cast<Eigen::Index>((n + 1) * sp.stride(0) + n + 1));
    EXPECT_NEAR(std::abs(a1 / a0), std::tanh(0.3), 1e-12);
  }
  EXPECT_LT(st.norm_deficit, 1e-10);
}

TEST(FockPreparation, CoherentPhotonStatisticsArePoisson) {
  // |α|² = (q² + p²)/4 = 1
  const auto st = fock::from_gaussian(fock::Coherent{1, 0, 2.0, 0.0}, 40);
  const Vec p = fock::photon_number_distribution(st, 0);
  double chi2 = 0.0;
  double poisson = std::exp(-1.0);
  for (int n = 0; n <= 40; ++n) {
    if (poisson > 1e-300) {
      chi2 += std::pow(p(n) - poisson, 2) / poisson;
    }
    poisson /= (n + 1);
  }
  EXPECT_LT(chi2, 1e-20);
}

TEST(FockPreparation, CutoffTooSmallIsReported) {
  EXPECT_THROW(fock::from_gaussian(fock::Coherent{1, 0, 6.0, 0.0}, 5), CutoffTooSmall);
  EXPECT_THROW(fock::from_gaussian(fock::Vacuum{4}, 5), std::invalid_argument);
  EXPECT_THROW(fock::from_gaussian(fock::Vacuum{1}, 65), std::invalid_argument);
}

TEST(FockPreparation, TruncationDeficitShrinksWithCutoff) {
  double previous = 1.0;
  for (std::size_t cutoff : {28u, 32u, 36u, 40u, 48u}) {
    const auto st = fock::from_gaussian(fock::SqueezedVacuum{1, 0, 0.5}, cutoff);
    EXPECT_LE(st.norm_deficit, previous);
    previous = st.norm_deficit;
  }
}

TEST(FockUnitary, IdentityGateLeavesStateUnchanged) {
  const auto st = fock::from_gaussian(fock::Coherent{2, 1, 0.7, -0.3}, 20);
  const auto out = fock::apply_gaussian_unitary(st, fock::Rotation{0, 0.0});
  EXPECT_LT((out.amplitudes - st.amplitudes).norm(), 1e-14);
}

TEST(FockUnitary, BalancedSwapMovesSinglePhoton) {
  // |1, 0⟩ built by hand
  fock::FockState st{2, 4, fock::CVec::Zero(25), 0.0};
  st.amplitudes(5) = 1.0;
  const auto out = fock::apply_gaussian_unitary(st, fock::Beamsplitter{0, 1, std::numbers::pi / 2, 0.0});
  // a_0 → -a_1 means |1,0⟩ → |0,1⟩ up to phase
  EXPECT_NEAR(std::abs(out.amplitudes(1)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(out.amplitudes(5)), 0.0, 1e-12);
}

TEST(FockUnitary, TwoModeSqueezerMatchesClosedForm) {
  const auto vac = fock::from_gaussian(fock::Vacuum{2}, 30);
  const auto evolved = fock::apply_gaussian_unitary(vac, fock::TwoModeSqueezer{0, 1, 0.3});
  const auto closed = fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.3}, 30);
  const double fidelity = std::norm(closed.amplitudes.dot(evolved.amplitudes));
  EXPECT_LT(1.0 - fidelity, 1e-8);
}

TEST(FockUnitary, SqueezerMatchesClosedForm) {
  const auto vac = fock::from_gaussian(fock::Vacuum{1}, 40);
  const auto evolved = fock::apply_gaussian_unitary(vac, fock::Squeezer{0, 0.5, 0.0});
  const auto closed = fock::from_gaussian(fock::SqueezedVacuum{1, 0, 0.5}, 40);
  EXPECT_LT(1.0 - std::norm(closed.amplitudes.dot(evolved.amplitudes)), 1e-10);
}

TEST(FockUnitary, DisplacementMatchesClosedForm) {
  const auto vac = fock::from_gaussian(fock::Vacuum{1}, 40);
  const auto evolved = fock::apply_gaussian_unitary(vac, fock::Displacement{0, 1.2, -2.1});
  const auto closed = fock::from_gaussian(fock::Coherent{1, 0, 1.2, -2.1}, 40);
  EXPECT_LT((closed.amplitudes - evolved.amplitudes).norm(), 1e-10);
}

TEST(FockUnitary, NormPreservedUpToDeficit) {
  const auto st = fock::from_gaussian(fock::Coherent{2, 0, 1.0, 1.0}, 30);
  const auto out = fock::apply_gaussian_unitary(st, fock::Squeezer{0, 0.4, 0.3});
  EXPECT_NEAR(out.amplitudes.squaredNorm() + out.norm_deficit, 1.0, 1e-12);
}

TEST(FockUnitary, TooSmallCutoffThrows) {
  const auto vac = fock::from_gaussian(fock::Vacuum{1}, 8);
  EXPECT_THROW(fock::apply_gaussian_unitary(vac, fock::Squeezer{0, 1.0, 0.0}), CutoffTooSmall);
}

// The oracle is the source of truth for the engine's constructors.
TEST(ConventionLock, ConstructorsMatchOracleMoments) {
  expect_moments_near(fock::moments(fock::from_gaussian(fock::Vacuum{2}, 30)), vacuum(2), 1e-12);
  expect_moments_near(fock::moments(fock::from_gaussian(fock::Coherent{1, 0, 2.0, 0.0}, 40)), coherent(1, 0, 2.0, 0.0),
                      1e-9);
  expect_moments_near(fock::moments(fock::from_gaussian(fock::Coherent{2, 1, 1.0, -1.0}, 30)),
                      coherent(2, 1, 1.0, -1.0), 1e-9);
  expect_moments_near(fock::moments(fock::from_gaussian(fock::SqueezedVacuum{1, 0, 0.5}, 40)),
                      squeezed_vacuum(1, 0, 0.5), 1e-6);
  expect_moments_near(fock::moments(fock::from_gaussian(fock::SqueezedVacuum{2, 1, -0.8}, 60)),
                      squeezed_vacuum(2, 1, -0.8), 1e-6);
  expect_moments_near(fock::moments(fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.3}, 30)),
                      two_mode_squeezed_vacuum(0.3), 1e-6);
  expect_moments_near(fock::moments(fock::from_gaussian(fock::TwoModeSqueezedVacuum{-0.7}, 50)),
                      two_mode_squeezed_vacuum(-0.7), 1e-6);
}

TEST(ConventionLock, SqueezedQuadratureVariance) {
  const auto m = fock::moments(fock::from_gaussian(fock::SqueezedVacuum{1, 0, 0.5}, 40));
  EXPECT_NEAR(m.gamma(0, 0), std::exp(-1.0), 1e-6);
  EXPECT_NEAR(m.gamma(1, 1), std::exp(1.0), 1e-6);
}

TEST(ConventionLock, ThermalMeanPhotonNumber) {
  for (double nbar : {0.0, 0.5, 1.0, 2.0}) {
    const auto rho = fock::thermal_density(nbar, 60);
    const auto m = fock::moments(rho);
    expect_moments_near(m, thermal(1, 0, nbar), 1e-8);
    EXPECT_NEAR(mean_photon_number(thermal(1, 0, nbar), 0), nbar, 1e-15);
  }
}

TEST(ConventionLock, GatesOnVacuumMatchOracle) {
  const std::vector<fock::GateDescriptor> gates = {
      fock::Rotation{0, 0.7},
      fock::Beamsplitter{0, 1, 0.4, 0.9},
      fock::Squeezer{0, 0.5, 0.0},
      fock::Squeezer{1, 0.4, 1.1},
      fock::TwoModeSqueezer{0, 1, 0.45},
      fock::Displacement{1, 2.0, -1.5},
  };
  // a displaced squeezed input so passive gates act nontrivially
  const std::vector<fock::GateDescriptor> prep = {fock::Squeezer{0, 0.3, 0.2}, fock::Displacement{0, 1.0, 0.5},
                                                  fock::Displacement{1, -0.5, 0.8}};
  for (const auto &g : gates) {
    auto st = fock::from_gaussian(fock::Vacuum{2}, 56);
    GaussianState s = vacuum(2);
    for (const auto &p : prep) {
      st = fock::apply_gaussian_unitary(st, p);
      s = apply(engine_gate(p), std::move(s));
    }
    st = fock::apply_gaussian_unitary(st, g);
    s = apply(engine_gate(g), std::move(s));
    EXPECT_LT(st.norm_deficit, 1e-10);
    expect_moments_near(fock::moments(st), s, 1e-6);
  }
}

TEST(ConventionLock, LossMatchesOracle) {
  const auto st = fock::from_gaussian(fock::Coherent{2, 0, 2.0, -1.0}, 30);
  const auto squeezed = fock::apply_gaussian_unitary(st, fock::TwoModeSqueezer{0, 1, 0.3});
  for (double eta : {1.0, 0.7, 0.25, 0.0}) {
    const auto rho = fock::apply_loss(squeezed, 0, eta);
    GaussianState s = apply(local::two_mode_squeezer(0, 1, 0.3), coherent(2, 0, 2.0, -1.0));
    s = apply(local::loss(0, eta), std::move(s));
    expect_moments_near(fock::moments(rho), s, 1e-6);
  }
}

TEST(ConventionLock, LossToZeroLeavesVacuum) {
  const auto st = fock::from_gaussian(fock::Coherent{1, 0, 2.0, 1.0}, 30);
  const auto rho = fock::apply_loss(st, 0, 0.0);
  EXPECT_NEAR(fock::photon_number_distribution(rho, 0)(0), 1.0, 1e-12);
}

TEST(ConventionLock, AmplifierMatchesOracle) {
  const auto st = fock::from_gaussian(fock::Coherent{1, 0, 1.0, 0.5}, 40);
  const auto rho = fock::apply_amplifier(st, 0, 1.5);
  const GaussianState s = apply(local::amplifier(0, 1.5), coherent(1, 0, 1.0, 0.5));
  expect_moments_near(fock::moments(rho), s, 1e-6);
}

TEST(ConventionLock, ClassicalNoiseMatchesOracle) {
  Mat g(2, 2);
  g << 0.4, 0.1, 0.1, 0.2;
  const auto st = fock::from_gaussian(fock::SqueezedVacuum{1, 0, 0.3}, 40);
  const auto rho = fock::apply_classical_noise(st, 0, g);
  const GaussianState s = apply(local::classical_noise(0, g), squeezed_vacuum(1, 0, 0.3));
  expect_moments_near(fock::moments(rho), s, 1e-6);
}

TEST(FockPhotodetection, ThermalMarginalOfTwoModeSqueezedVacuum) {
  const double r = 0.3;
  const auto st = fock::from_gaussian(fock::TwoModeSqueezedVacuum{r}, 30);
  const Vec p = fock::photon_number_distribution(st, 0);
  const double t2 = std::pow(std::tanh(r), 2);
  for (int n = 0; n <= 30; ++n) {
    EXPECT_NEAR(p(n), std::pow(t2, n) / std::pow(std::cosh(r), 2), 1e-14);
  }
  EXPECT_NEAR(p.sum(), 1.0 - st.norm_deficit, 1e-14);
}

TEST(FockPhotodetection, NoClickHeraldsVacuum) {
  const auto st = fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.3}, 30);
  const auto h = fock::condition_photodetection(st, 0, fock::Photodetection::no_absorption);
  EXPECT_NEAR(h.probability, 1.0 / std::pow(std::cosh(0.3), 2), 1e-12);
  EXPECT_NEAR(fock::photon_number_distribution(h.state, 0)(0), 1.0, 1e-12);
}

TEST(FockPhotodetection, ClickHeraldsMostlySinglePhoton) {
  const double r = 0.3;
  const auto st = fock::from_gaussian(fock::TwoModeSqueezedVacuum{r}, 30);
  const auto h = fock::condition_photodetection(st, 0, fock::Photodetection::absorption);
  const Vec p = fock::photon_number_distribution(h.state, 0);
  const double t2 = std::pow(std::tanh(r), 2);
  EXPECT_NEAR(p(0), 0.0, 1e-15);
  // P(n) ∝ tanh^{2n} r for n ≥ 1, so P(1) = 1 - tanh² r
  EXPECT_NEAR(p(1), 1.0 - t2, 1e-10);
  EXPECT_GT(p(1), 0.9);
  EXPECT_NEAR(h.probability, 1.0 - 1.0 / std::pow(std::cosh(r), 2), 1e-12);
}

TEST(FockPhotodetection, HeraldedStateIsNotGaussian) {
  const auto st = fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.3}, 30);
  const auto h = fock::condition_photodetection(st, 0, fock::Photodetection::absorption);
  const auto m = fock::moments(h.state);
  // moment-matched Gaussian: zero mean, isotropic γ, i.e. thermal
  EXPECT_LE(m.xi.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(m.gamma(0, 0), m.gamma(1, 1), 1e-10);
  const double nbar = (m.gamma(0, 0) + m.gamma(1, 1) - 2.0) / 4.0;
  const double gaussian_p2 = nbar * nbar / std::pow(1.0 + nbar, 3);
  const double oracle_p2 = fock::photon_number_distribution(h.state, 0)(2);
  EXPECT_GT(std::abs(oracle_p2 - gaussian_p2), 10 * 1e-6);
}

TEST(FockCoherentProjection, DensityIntegratesToOne) {
  // Σ over a fine grid of |⟨β|ψ⟩|²/4π · dq dp ≈ 1
  const auto st = fock::from_gaussian(fock::TwoModeSqueezedVacuum{0.2}, 20);
  double total = 0.0;
  const double h = 0.25;
  for (double q = -9; q <= 9; q += h) {
    for (double p = -9; p <= 9; p += h) {
      total += fock::project_coherent(st, 0, q, p).density * h * h;
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

}  // namespace
}  // namespace gaussim
