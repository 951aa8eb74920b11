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

#ifndef GAUSSIM_MEASUREMENT_HPP
#define GAUSSIM_MEASUREMENT_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaussim/errors.hpp"
#include "gaussim/linalg.hpp"
#include "gaussim/rng.hpp"
#include "gaussim/state.hpp"

namespace gaussim {

inline constexpr double kHomodyneMinSqueezing = 5.0;
inline constexpr double kHomodyneDefaultSqueezing = 15.0;

enum class MeasurementKind { heterodyne, homodyne, eprdyne, dyne, vacuum_projection };

inline const char *to_string(MeasurementKind k) {
  switch (k) {
    case MeasurementKind::heterodyne:
      return "heterodyne";
    case MeasurementKind::homodyne:
      return "homodyne";
    case MeasurementKind::eprdyne:
      return "eprdyne";
    case MeasurementKind::dyne:
      return "dyne";
    case MeasurementKind::vacuum_projection:
      return "vacuum_projection";
  }
  return "?";
}

inline MeasurementKind measurement_kind_from_string(const std::string &s) {
  for (auto k : {MeasurementKind::heterodyne, MeasurementKind::homodyne, MeasurementKind::eprdyne,
                 MeasurementKind::dyne, MeasurementKind::vacuum_projection}) {
    if (s == to_string(k)) {
      return k;
    }
  }
  throw std::invalid_argument("unknown measurement kind '" + s + "'");
}

enum class Quadrature { q, p };

/// Which modes are measured and the projector family.
///
/// General-dyne measurements project onto displaced copies of a pure Gaussian
/// state with covariance gamma_m (2m x 2m, measured modes' q's then p's).
/// gamma_m is empty for the vacuum projection.
struct MeasurementSpec {
  std::vector<std::size_t> modes;
  MeasurementKind kind;
  Mat gamma_m;

  bool is_dyne() const { return kind != MeasurementKind::vacuum_projection; }
};

inline MeasurementSpec general_dyne_spec(std::vector<std::size_t> modes, Mat gamma_m,
                                         MeasurementKind kind = MeasurementKind::dyne) {
  const auto d = static_cast<Eigen::Index>(2 * modes.size());
  if (modes.empty() || gamma_m.rows() != d || gamma_m.cols() != d) {
    throw std::invalid_argument("general_dyne_spec: gamma_m must be 2m x 2m for m >= 1 modes");
  }
  symmetrize(gamma_m);
  return {std::move(modes), kind, std::move(gamma_m)};
}

inline MeasurementSpec heterodyne_spec(std::vector<std::size_t> modes) {
  const auto d = static_cast<Eigen::Index>(2 * modes.size());
  return general_dyne_spec(std::move(modes), Mat::Identity(d, d), MeasurementKind::heterodyne);
}

/// Projection onto a state squeezed by s in the measured quadrature.
/// Converges to an ideal quadrature measurement as s grows; s = 0 is
/// heterodyne.
inline MeasurementSpec homodyne_spec(std::size_t mode, Quadrature quad, double s) {
  if (!(s >= 0.0)) {
    throw std::invalid_argument("homodyne_spec: squeezing must be non-negative");
  }
  Mat g = Mat::Zero(2, 2);
  const double narrow = std::exp(-2.0 * s);
  const double wide = std::exp(2.0 * s);
  g(0, 0) = quad == Quadrature::q ? narrow : wide;
  g(1, 1) = quad == Quadrature::q ? wide : narrow;
  return general_dyne_spec({mode}, std::move(g), MeasurementKind::homodyne);
}

/// Projection onto displaced two-mode squeezed states with squeezing s: a
/// finite-resolution Bell-type (EPR) measurement of q_i - q_j and p_i + p_j.
inline MeasurementSpec epr_spec(std::size_t mode_i, std::size_t mode_j, double s) {
  return general_dyne_spec({mode_i, mode_j}, two_mode_squeezed_vacuum(s).gamma(), MeasurementKind::eprdyne);
}

inline MeasurementSpec vacuum_projection_spec(std::size_t mode) {
  return {{mode}, MeasurementKind::vacuum_projection, Mat()};
}

struct MeasurementRecord {
  Vec outcome;
  /// log density for dyne outcomes, log probability for the vacuum projection
  double log_density;
  MeasurementSpec spec;
};

struct ConditionResult {
  GaussianState state;
  MeasurementRecord record;
};

namespace detail {

inline std::vector<std::size_t> validated_modes(const GaussianState &state, const std::vector<std::size_t> &modes) {
  if (modes.empty()) {
    throw std::invalid_argument("measurement: no modes selected");
  }
  std::vector<bool> seen(state.n(), false);
  for (auto m : modes) {
    check_mode(state.n(), m, "measurement");
    if (seen[m]) {
      throw std::invalid_argument("measurement: repeated mode " + std::to_string(m));
    }
    seen[m] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t m = 0; m < state.n(); ++m) {
    if (!seen[m]) {
      rest.push_back(m);
    }
  }
  return rest;
}

/// Pieces of the Gaussian update shared by condition() and sample().
struct DyneSplit {
  std::vector<Eigen::Index> measured;
  std::vector<Eigen::Index> remaining;
  Vec xi_b;
  Mat outcome_cov;  // γ_B + γ_M
  Eigen::LLT<Mat> llt;
};

inline DyneSplit split_for_dyne(const GaussianState &state, const MeasurementSpec &spec, const Tolerances &tol) {
  if (!spec.is_dyne()) {
    throw std::invalid_argument("measurement: expected a general-dyne spec");
  }
  const auto rest = validated_modes(state, spec.modes);
  const auto d = static_cast<Eigen::Index>(2 * spec.modes.size());
  if (spec.gamma_m.rows() != d || spec.gamma_m.cols() != d) {
    throw std::invalid_argument("measurement: gamma_m has the wrong size");
  }
  if (min_hermitian_eigenvalue(spec.gamma_m, symplectic_form(spec.modes.size())) < -tol.psd) {
    throw std::invalid_argument("measurement: gamma_m is not a physical covariance");
  }
  DyneSplit out;
  out.measured = quadrature_indices(spec.modes, state.n());
  if (!rest.empty()) {
    out.remaining = quadrature_indices(rest, state.n());
  }
  out.xi_b = gather(state.xi(), out.measured);
  out.outcome_cov = gather(state.gamma(), out.measured, out.measured) + spec.gamma_m;
  out.llt.compute(out.outcome_cov);
  if (out.llt.info() != Eigen::Success) {
    throw DegenerateMeasurement("measurement: gamma_B + gamma_M is singular");
  }
  return out;
}

}  // namespace detail

/// Post-selects the general-dyne outcome `outcome` (a 2m phase-space vector).
///
/// With γ partitioned into remaining block A, measured block B and cross
/// block C:  γ' = γ_A - C (γ_B + γ_M)⁻¹ Cᵀ,  ξ' = ξ_A + C (γ_B + γ_M)⁻¹ (x - ξ_B).
/// The outcome density is normal with mean ξ_B and covariance γ_B + γ_M; its
/// log is added to the state's log_weight. Measured modes are removed.
inline ConditionResult condition(const GaussianState &state, const MeasurementSpec &spec, const Vec &outcome,
                                 const Tolerances &tol = kDefaultTolerances) {
  auto split = detail::split_for_dyne(state, spec, tol);
  if (outcome.size() != split.xi_b.size()) {
    throw std::invalid_argument("condition: outcome must have length 2m");
  }
  if (!outcome.allFinite()) {
    throw std::invalid_argument("condition: non-finite outcome");
  }
  const Vec delta = outcome - split.xi_b;
  const Vec solved = split.llt.solve(delta);
  const Mat l = split.llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double half_dim = static_cast<double>(delta.size()) / 2.0;
  const double log_density = -0.5 * delta.dot(solved) - 0.5 * log_det - half_dim * std::log(2.0 * std::numbers::pi);
  if (!(log_density >= tol.log_underflow)) {
    throw ImpossibleOutcome("condition: outcome log-density " + std::to_string(log_density) + " underflows",
                            log_density);
  }

  Vec xi;
  Mat gamma;
  if (split.remaining.empty()) {
    xi = Vec();
    gamma = Mat();
  } else {
    const Mat c = gather(state.gamma(), split.remaining, split.measured);
    xi = gather(state.xi(), split.remaining) + c * solved;
    gamma = gather(state.gamma(), split.remaining, split.remaining) - c * split.llt.solve(c.transpose());
  }
  GaussianState next(std::move(xi), std::move(gamma), state.log_weight() + log_density);
  return {std::move(next), MeasurementRecord{outcome, log_density, spec}};
}

/// Draws an outcome from N(ξ_B, γ_B + γ_M) and conditions on it.
inline ConditionResult sample(const GaussianState &state, const MeasurementSpec &spec, Rng &rng,
                              const Tolerances &tol = kDefaultTolerances) {
  const auto split = detail::split_for_dyne(state, spec, tol);
  Vec z(split.xi_b.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = rng.normal();
  }
  const Mat l = split.llt.matrixL();
  const Vec outcome = split.xi_b + l * z;
  return condition(state, spec, outcome, tol);
}

namespace detail {
inline void check_homodyne_squeezing(double s) {
  if (!(s >= kHomodyneMinSqueezing)) {
    throw std::invalid_argument("homodyne: squeezing must be at least " + std::to_string(kHomodyneMinSqueezing));
  }
}
}  // namespace detail

namespace detail {
struct QuadratureMarginal {
  double mean;
  double variance;
};

/// Outcome law of the measured quadrature alone: N(ξ_x, γ_xx + e^{-2s}).
inline QuadratureMarginal homodyne_marginal(const GaussianState &state, std::size_t mode, Quadrature quad, double s) {
  const auto i = static_cast<Eigen::Index>(quad == Quadrature::q ? mode : mode + state.n());
  return {state.xi()(i), state.gamma()(i, i) + std::exp(-2.0 * s)};
}
}  // namespace detail

/// Finite-squeezing homodyne with a fixed reading of one quadrature. The
/// conjugate component of the outcome vector is set to its prior mean, and
/// the reported density is the marginal density of the measured quadrature.
inline ConditionResult homodyne(const GaussianState &state, std::size_t mode, Quadrature quad, double outcome,
                                double s = kHomodyneDefaultSqueezing, const Tolerances &tol = kDefaultTolerances) {
  detail::check_homodyne_squeezing(s);
  detail::check_mode(state.n(), mode, "homodyne");
  if (!std::isfinite(outcome)) {
    throw std::invalid_argument("homodyne: non-finite outcome");
  }
  const auto m = detail::homodyne_marginal(state, mode, quad, s);
  const double z = outcome - m.mean;
  const double log_density = -0.5 * z * z / m.variance - 0.5 * std::log(2.0 * std::numbers::pi * m.variance);
  if (!(log_density >= tol.log_underflow)) {
    throw ImpossibleOutcome("homodyne: outcome log-density " + std::to_string(log_density) + " underflows",
                            log_density);
  }
  Vec x(2);
  const auto q = static_cast<Eigen::Index>(mode);
  const auto p = static_cast<Eigen::Index>(mode + state.n());
  x << (quad == Quadrature::q ? outcome : state.xi()(q)), (quad == Quadrature::p ? outcome : state.xi()(p));
  auto res = condition(state.with_log_weight(0.0), homodyne_spec(mode, quad, s), x, tol);
  res.record.log_density = log_density;
  return {res.state.with_log_weight(state.log_weight() + log_density), std::move(res.record)};
}

inline ConditionResult homodyne_sample(const GaussianState &state, std::size_t mode, Quadrature quad, Rng &rng,
                                       double s = kHomodyneDefaultSqueezing,
                                       const Tolerances &tol = kDefaultTolerances) {
  detail::check_homodyne_squeezing(s);
  detail::check_mode(state.n(), mode, "homodyne");
  const auto m = detail::homodyne_marginal(state, mode, quad, s);
  return homodyne(state, mode, quad, m.mean + std::sqrt(m.variance) * rng.normal(), s, tol);
}

/// log Tr(ρ |0⟩⟨0|) on one mode: log 2 - ½ log det(γ_B + I) - ½ ξ_Bᵀ(γ_B + I)⁻¹ξ_B.
inline double log_vacuum_probability(const GaussianState &state, std::size_t mode) {
  detail::check_mode(state.n(), mode, "vacuum_probability");
  const auto idx = quadrature_indices({mode}, state.n());
  const Vec xi_b = gather(state.xi(), idx);
  const Mat k = gather(state.gamma(), idx, idx) + Mat::Identity(2, 2);
  const double det = k(0, 0) * k(1, 1) - k(0, 1) * k(1, 0);
  const double quad = xi_b.dot(k.inverse() * xi_b);
  return std::log(2.0) - 0.5 * std::log(det) - 0.5 * quad;
}

inline double vacuum_probability(const GaussianState &state, std::size_t mode) {
  return std::exp(log_vacuum_probability(state, mode));
}

/// Post-selects the "no photon" outcome of a threshold detector on `mode`.
/// Projecting onto |0⟩ is the coherent-state projection at the origin, so the
/// state update is the heterodyne update with outcome 0; the weight is the
/// vacuum probability itself.
inline ConditionResult condition_no_absorption(const GaussianState &state, std::size_t mode,
                                               const Tolerances &tol = kDefaultTolerances) {
  const double log_p0 = log_vacuum_probability(state, mode);
  if (!(log_p0 >= tol.log_underflow)) {
    throw ImpossibleOutcome("condition_no_absorption: vacuum probability underflows", log_p0);
  }
  auto result = condition(state, heterodyne_spec({mode}), Vec::Zero(2), tol);
  GaussianState next = result.state.with_log_weight(state.log_weight() + log_p0);
  return {std::move(next), MeasurementRecord{Vec::Zero(2), log_p0, vacuum_projection_spec(mode)}};
}

/// A detector click leaves a non-Gaussian state. This always throws
/// NonGaussianOutcome carrying the click probability 1 - P(0).
[[noreturn]] inline void condition_absorption(const GaussianState &state, std::size_t mode) {
  const double p_click = -std::expm1(log_vacuum_probability(state, mode));
  throw NonGaussianOutcome(
      "conditioning on photon absorption leaves a non-Gaussian state; it lies outside the Gaussian CP "
      "semigroup and cannot be simulated from means and covariances (absorption probability " +
          std::to_string(p_click) + ")",
      p_click);
}

/// Appends `ancilla_count` vacuum modes after the existing ones.
inline GaussianState neumark_extend(const GaussianState &state, std::size_t ancilla_count) {
  if (ancilla_count == 0) {
    throw std::invalid_argument("neumark_extend: need at least one ancilla");
  }
  return tensor(state, vacuum(ancilla_count));
}

}  // namespace gaussim

#endif
