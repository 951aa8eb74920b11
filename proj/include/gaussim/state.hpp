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

#ifndef GAUSSIM_STATE_HPP
#define GAUSSIM_STATE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaussim/linalg.hpp"

namespace gaussim {

namespace detail {
struct StateAccess;
}

/// A Gaussian state of n modes: the mean vector ξ and the real symmetric
/// covariance matrix γ, both in (q_1..q_n, p_1..p_n) order, with the vacuum
/// normalized to γ = I. log_weight accumulates the log-probability (density)
/// of every post-selected outcome that produced this state. n = 0 is allowed
/// and is what remains after every mode has been measured.
class GaussianState {
 public:
  GaussianState(Vec xi, Mat gamma, double log_weight = 0.0)
      : xi_(std::move(xi)), gamma_(std::move(gamma)), log_weight_(log_weight) {
    if (xi_.size() % 2 != 0) {
      throw std::invalid_argument("GaussianState: mean vector length must be even");
    }
    if (gamma_.rows() != xi_.size() || gamma_.cols() != xi_.size()) {
      throw std::invalid_argument("GaussianState: covariance must be 2n x 2n");
    }
    if (!xi_.allFinite() || !gamma_.allFinite()) {
      throw std::invalid_argument("GaussianState: non-finite entries");
    }
    symmetrize(gamma_);
  }

  std::size_t n() const { return static_cast<std::size_t>(xi_.size() / 2); }
  const Vec &xi() const { return xi_; }
  const Mat &gamma() const { return gamma_; }
  double log_weight() const { return log_weight_; }

  GaussianState with_log_weight(double w) const {
    GaussianState s = *this;
    s.log_weight_ = w;
    return s;
  }

 private:
  friend struct detail::StateAccess;
  Vec xi_;
  Mat gamma_;
  double log_weight_;
};

namespace detail {
/// In-place access for the engine's move-through update paths.
struct StateAccess {
  static Vec &xi(GaussianState &s) { return s.xi_; }
  static Mat &gamma(GaussianState &s) { return s.gamma_; }
  static double &log_weight(GaussianState &s) { return s.log_weight_; }
};
}  // namespace detail

/// Scalar bookkeeping of the phase-space representation.
struct StateSize {
  std::size_t means;
  std::size_t covariance_independent;
  std::size_t total;
};

inline StateSize state_size(std::size_t n) {
  const std::size_t means = 2 * n;
  const std::size_t cov = 2 * n * (2 * n + 1) / 2;
  return {means, cov, means + cov};
}

inline StateSize state_size(const GaussianState &s) { return state_size(s.n()); }

namespace detail {
inline void check_mode(std::size_t n, std::size_t mode, const char *what) {
  if (mode >= n) {
    throw std::invalid_argument(std::string(what) + ": mode " + std::to_string(mode) + " out of range for " +
                                std::to_string(n) + " modes");
  }
}
}  // namespace detail

inline GaussianState vacuum(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("vacuum: mode count must be positive");
  }
  const auto dim = static_cast<Eigen::Index>(2 * n);
  return GaussianState(Vec::Zero(dim), Mat::Identity(dim, dim));
}

inline GaussianState coherent(std::size_t n, std::size_t mode, double q0, double p0) {
  detail::check_mode(n, mode, "coherent");
  GaussianState s = vacuum(n);
  Vec xi = s.xi();
  xi(static_cast<Eigen::Index>(mode)) = q0;
  xi(static_cast<Eigen::Index>(mode + n)) = p0;
  return GaussianState(std::move(xi), s.gamma());
}

/// Squeezed vacuum with q-variance e^{-2r} and p-variance e^{2r} on `mode`.
inline GaussianState squeezed_vacuum(std::size_t n, std::size_t mode, double r) {
  detail::check_mode(n, mode, "squeezed_vacuum");
  GaussianState s = vacuum(n);
  Mat gamma = s.gamma();
  gamma(static_cast<Eigen::Index>(mode), static_cast<Eigen::Index>(mode)) = std::exp(-2.0 * r);
  gamma(static_cast<Eigen::Index>(mode + n), static_cast<Eigen::Index>(mode + n)) = std::exp(2.0 * r);
  return GaussianState(s.xi(), std::move(gamma));
}

/// Two-mode squeezed vacuum: cosh(2r) variances, +sinh(2r) q-q and
/// -sinh(2r) p-p correlations.
inline GaussianState two_mode_squeezed_vacuum(double r) {
  const double c = std::cosh(2.0 * r);
  const double s = std::sinh(2.0 * r);
  Mat gamma(4, 4);
  gamma << c, s, 0, 0,  //
      s, c, 0, 0,       //
      0, 0, c, -s,      //
      0, 0, -s, c;
  return GaussianState(Vec::Zero(4), std::move(gamma));
}

inline GaussianState thermal(std::size_t n, std::size_t mode, double nbar) {
  detail::check_mode(n, mode, "thermal");
  if (!(nbar >= 0.0)) {
    throw std::invalid_argument("thermal: mean photon number must be non-negative");
  }
  GaussianState s = vacuum(n);
  Mat gamma = s.gamma();
  const double v = 2.0 * nbar + 1.0;
  gamma(static_cast<Eigen::Index>(mode), static_cast<Eigen::Index>(mode)) = v;
  gamma(static_cast<Eigen::Index>(mode + n), static_cast<Eigen::Index>(mode + n)) = v;
  return GaussianState(s.xi(), std::move(gamma));
}

/// Mean photon number of one mode: (γ_qq + γ_pp + ξ_q² + ξ_p² - 2) / 4.
inline double mean_photon_number(const GaussianState &s, std::size_t mode) {
  detail::check_mode(s.n(), mode, "mean_photon_number");
  const auto q = static_cast<Eigen::Index>(mode);
  const auto p = static_cast<Eigen::Index>(mode + s.n());
  return (s.gamma()(q, q) + s.gamma()(p, p) + s.xi()(q) * s.xi()(q) + s.xi()(p) * s.xi()(p) - 2.0) / 4.0;
}

struct PhysicalityReport {
  double min_eigenvalue;
  bool passed;
};

/// Uncertainty principle γ + iΣ ⪰ 0, reported as the smallest eigenvalue.
inline PhysicalityReport check_physical(const GaussianState &s, const Tolerances &tol = kDefaultTolerances) {
  if (s.n() == 0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  const double lo = min_hermitian_eigenvalue(s.gamma(), symplectic_form(s.n()));
  return {lo, lo >= -tol.psd};
}

/// Marginal state on `modes` (in the given order).
inline GaussianState reduced(const GaussianState &s, const std::vector<std::size_t> &modes) {
  if (modes.empty()) {
    throw std::invalid_argument("reduced: need at least one mode");
  }
  std::vector<bool> seen(s.n(), false);
  for (auto m : modes) {
    detail::check_mode(s.n(), m, "reduced");
    if (seen[m]) {
      throw std::invalid_argument("reduced: duplicate mode");
    }
    seen[m] = true;
  }
  const auto idx = quadrature_indices(modes, s.n());
  return GaussianState(gather(s.xi(), idx), gather(s.gamma(), idx, idx), s.log_weight());
}

/// Product state a ⊗ b; modes of b follow those of a. Weights add.
inline GaussianState tensor(const GaussianState &a, const GaussianState &b) {
  if (a.n() == 0) {
    return b.with_log_weight(a.log_weight() + b.log_weight());
  }
  if (b.n() == 0) {
    return a.with_log_weight(a.log_weight() + b.log_weight());
  }
  const auto na = static_cast<Eigen::Index>(a.n());
  const auto nb = static_cast<Eigen::Index>(b.n());
  const auto n = na + nb;
  Vec xi(2 * n);
  xi << a.xi().head(na), b.xi().head(nb), a.xi().tail(na), b.xi().tail(nb);
  Mat gamma = Mat::Zero(2 * n, 2 * n);
  // (q block, p block) of each factor land at offsets 0/n for a and na/n+na for b
  const Eigen::Index a_off[2] = {0, n};
  const Eigen::Index b_off[2] = {na, n + na};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      gamma.block(a_off[r], a_off[c], na, na) = a.gamma().block(r * na, c * na, na, na);
      gamma.block(b_off[r], b_off[c], nb, nb) = b.gamma().block(r * nb, c * nb, nb, nb);
    }
  }
  return GaussianState(std::move(xi), std::move(gamma), a.log_weight() + b.log_weight());
}

/// Tr(ρ_a ρ_b) = 2^n / sqrt(det(γ_a + γ_b)) · exp(-½ δᵀ (γ_a + γ_b)⁻¹ δ), δ = ξ_a - ξ_b.
inline double overlap(const GaussianState &a, const GaussianState &b) {
  if (a.n() != b.n()) {
    throw std::invalid_argument("overlap: mode counts differ");
  }
  const Mat sum = a.gamma() + b.gamma();
  const Vec delta = a.xi() - b.xi();
  Eigen::LLT<Mat> llt(sum);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("overlap: covariance sum is not positive definite");
  }
  const Mat l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double quad = delta.dot(llt.solve(delta));
  const double n = static_cast<double>(a.n());
  return std::exp(n * std::log(2.0) - 0.5 * log_det - 0.5 * quad);
}

}  // namespace gaussim

#endif
