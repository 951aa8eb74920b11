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

#ifndef GAUSSIM_CHANNEL_HPP
#define GAUSSIM_CHANNEL_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaussim/errors.hpp"
#include "gaussim/linalg.hpp"
#include "gaussim/state.hpp"

namespace gaussim {

/// A Clifford-semigroup element T(α, A, G).
///
/// The matrix convention follows the Heisenberg action ẑ'_i = Σ_k ẑ_k a_ki:
/// rows of A index input quadratures and columns index outputs. On states,
/// ξ' = Aᵀξ + α and γ' = AᵀγA + G. n_in and n_out differ only for maps that
/// add or drop modes (ancilla preparation).
///
/// Construction checks shapes only; a channel that violates complete
/// positivity can be built and inspected, but apply() refuses it.
struct GaussianChannel {
  std::size_t n_in;
  std::size_t n_out;
  Vec alpha;
  Mat a;
  Mat g;

  GaussianChannel(std::size_t n_in_, std::size_t n_out_, Vec alpha_, Mat a_, Mat g_)
      : n_in(n_in_), n_out(n_out_), alpha(std::move(alpha_)), a(std::move(a_)), g(std::move(g_)) {
    const auto di = static_cast<Eigen::Index>(2 * n_in);
    const auto d_out = static_cast<Eigen::Index>(2 * n_out);
    if (n_in == 0 || n_out == 0) {
      throw std::invalid_argument("GaussianChannel: mode counts must be positive");
    }
    if (alpha.size() != d_out || a.rows() != di || a.cols() != d_out || g.rows() != d_out || g.cols() != d_out) {
      throw std::invalid_argument("GaussianChannel: inconsistent dimensions");
    }
    if (!alpha.allFinite() || !a.allFinite() || !g.allFinite()) {
      throw std::invalid_argument("GaussianChannel: non-finite entries");
    }
    symmetrize(g);
  }
};

inline GaussianChannel identity_channel(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(2 * n);
  return GaussianChannel(n, n, Vec::Zero(d), Mat::Identity(d, d), Mat::Zero(d, d));
}

struct CpReport {
  double min_eigenvalue;
  bool passed;
};

/// Complete positivity: G + iΣ_out - iAᵀΣ_in A ⪰ 0.
inline CpReport validate_cp(const GaussianChannel &ch, const Tolerances &tol = kDefaultTolerances) {
  const Mat imag = symplectic_form(ch.n_out) - ch.a.transpose() * symplectic_form(ch.n_in) * ch.a;
  const double lo = min_hermitian_eigenvalue(ch.g, imag);
  return {lo, lo >= -tol.psd};
}

inline bool is_symplectic(const Mat &a, const Tolerances &tol = kDefaultTolerances) {
  if (a.rows() != a.cols() || a.rows() == 0 || a.rows() % 2 != 0) {
    throw std::invalid_argument("is_symplectic: expected a square 2n x 2n matrix");
  }
  const Mat sigma = symplectic_form(static_cast<std::size_t>(a.rows() / 2));
  return (a.transpose() * sigma * a - sigma).cwiseAbs().maxCoeff() <= tol.symplectic;
}

namespace detail {
inline void require_cp(const GaussianChannel &ch, const Tolerances &tol) {
  const auto report = validate_cp(ch, tol);
  if (!report.passed) {
    throw RejectedChannel("channel violates complete positivity (min eigenvalue " +
                              std::to_string(report.min_eigenvalue) + ")",
                          report.min_eigenvalue);
  }
}
}  // namespace detail

/// ξ' = Aᵀξ + α, γ' = AᵀγA + G. Trace preserving, so log_weight is kept.
inline GaussianState apply(const GaussianChannel &ch, GaussianState state, const Tolerances &tol = kDefaultTolerances) {
  if (ch.n_in != state.n()) {
    throw std::invalid_argument("apply: channel expects " + std::to_string(ch.n_in) + " modes, state has " +
                                std::to_string(state.n()));
  }
  detail::require_cp(ch, tol);
  Vec xi = ch.a.transpose() * state.xi() + ch.alpha;
  Mat gamma = ch.a.transpose() * state.gamma() * ch.a + ch.g;
  return GaussianState(std::move(xi), std::move(gamma), state.log_weight());
}

/// The channel equivalent to applying `first`, then `second`.
inline GaussianChannel compose(const GaussianChannel &second, const GaussianChannel &first) {
  if (first.n_out != second.n_in) {
    throw std::invalid_argument("compose: first.n_out != second.n_in");
  }
  Mat a = first.a * second.a;
  Vec alpha = second.a.transpose() * first.alpha + second.alpha;
  Mat g = second.a.transpose() * first.g * second.a + second.g;
  return GaussianChannel(first.n_in, second.n_out, std::move(alpha), std::move(a), std::move(g));
}

/// A k-mode channel acting on selected modes of a larger register, identity
/// elsewhere. Its CP status equals that of the embedded channel, and applying
/// it costs O(n·k²) instead of O(n³).
struct LocalChannel {
  std::vector<std::size_t> modes;
  GaussianChannel channel;
};

namespace detail {
inline void check_local(const LocalChannel &lc, std::size_t n) {
  if (lc.channel.n_in != lc.modes.size() || lc.channel.n_out != lc.modes.size()) {
    throw std::invalid_argument("LocalChannel: channel size does not match mode list");
  }
  std::vector<bool> seen(n, false);
  for (auto m : lc.modes) {
    check_mode(n, m, "LocalChannel");
    if (seen[m]) {
      throw std::invalid_argument("LocalChannel: repeated mode " + std::to_string(m));
    }
    seen[m] = true;
  }
}
}  // namespace detail

inline GaussianChannel embed(const LocalChannel &lc, std::size_t n) {
  detail::check_local(lc, n);
  const auto d = static_cast<Eigen::Index>(2 * n);
  const auto idx = quadrature_indices(lc.modes, n);
  Vec alpha = Vec::Zero(d);
  Mat a = Mat::Identity(d, d);
  Mat g = Mat::Zero(d, d);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto li = static_cast<Eigen::Index>(i);
    alpha(idx[i]) = lc.channel.alpha(li);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto lj = static_cast<Eigen::Index>(j);
      a(idx[i], idx[j]) = lc.channel.a(li, lj);
      g(idx[i], idx[j]) = lc.channel.g(li, lj);
    }
  }
  return GaussianChannel(n, n, std::move(alpha), std::move(a), std::move(g));
}

/// In-place local update. With X = Aᵀ restricted to the touched indices,
/// columns are updated first (γ[:, idx] ← γ[:, idx] Xᵀ), rows are then copied
/// from the columns, and the touched block becomes X γ_idx Xᵀ + G.
inline GaussianState apply(const LocalChannel &lc, GaussianState state, const Tolerances &tol = kDefaultTolerances) {
  detail::check_local(lc, state.n());
  detail::require_cp(lc.channel, tol);
  const auto idx = quadrature_indices(lc.modes, state.n());
  const auto k = static_cast<Eigen::Index>(idx.size());
  const Mat x = lc.channel.a.transpose();
  Vec &xi = detail::StateAccess::xi(state);
  Mat &gamma = detail::StateAccess::gamma(state);

  const Vec local_xi = x * gather(xi, idx) + lc.channel.alpha;
  for (Eigen::Index i = 0; i < k; ++i) {
    xi(idx[static_cast<std::size_t>(i)]) = local_xi(i);
  }

  Mat cols(gamma.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    cols.col(j) = gamma.col(idx[static_cast<std::size_t>(j)]);
  }
  const Mat new_cols = cols * x.transpose();
  Mat block(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    block.row(i) = new_cols.row(idx[static_cast<std::size_t>(i)]);
  }
  block = x * block + lc.channel.g;
  symmetrize(block);
  for (Eigen::Index j = 0; j < k; ++j) {
    gamma.col(idx[static_cast<std::size_t>(j)]) = new_cols.col(j);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    gamma.row(idx[static_cast<std::size_t>(j)]) = new_cols.col(j).transpose();
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      gamma(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) = block(i, j);
    }
  }
  return state;
}

/// Real phase-space matrix S (acting as z → S z) of the Bogoliubov map
/// a → M a + N a†, using a = (q + i p) / 2.
inline Mat bogoliubov(const CMat &m, const CMat &n) {
  const auto k = m.rows();
  const CMat plus = m + n;
  const CMat minus = m - n;
  Mat s(2 * k, 2 * k);
  s.topLeftCorner(k, k) = plus.real();
  s.topRightCorner(k, k) = -minus.imag();
  s.bottomLeftCorner(k, k) = plus.imag();
  s.bottomRightCorner(k, k) = minus.real();
  return s;
}

namespace local {

inline LocalChannel symplectic(std::vector<std::size_t> modes, const Mat &s) {
  const auto d = s.rows();
  const auto k = modes.size();
  return {std::move(modes), GaussianChannel(k, k, Vec::Zero(d), s.transpose(), Mat::Zero(d, d))};
}

inline LocalChannel displacement(std::size_t mode, double q, double p) {
  Vec alpha(2);
  alpha << q, p;
  return {{mode}, GaussianChannel(1, 1, std::move(alpha), Mat::Identity(2, 2), Mat::Zero(2, 2))};
}

/// a → e^{iθ} a.
inline LocalChannel rotation(std::size_t mode, double theta) {
  CMat m(1, 1);
  m(0, 0) = std::polar(1.0, theta);
  return symplectic({mode}, bogoliubov(m, CMat::Zero(1, 1)));
}

/// a_i → cos θ a_i - e^{-iφ} sin θ a_j,  a_j → e^{iφ} sin θ a_i + cos θ a_j.
inline LocalChannel beamsplitter(std::size_t mode_i, std::size_t mode_j, double theta, double phi) {
  CMat m(2, 2);
  m(0, 0) = std::cos(theta);
  m(0, 1) = -std::polar(std::sin(theta), -phi);
  m(1, 0) = std::polar(std::sin(theta), phi);
  m(1, 1) = std::cos(theta);
  return symplectic({mode_i, mode_j}, bogoliubov(m, CMat::Zero(2, 2)));
}

/// a → cosh r a - e^{iφ} sinh r a†; φ = 0 squeezes q by e^{-r}.
inline LocalChannel squeezer(std::size_t mode, double r, double phi) {
  CMat m(1, 1);
  CMat n(1, 1);
  m(0, 0) = std::cosh(r);
  n(0, 0) = -std::polar(std::sinh(r), phi);
  return symplectic({mode}, bogoliubov(m, n));
}

/// a_i → cosh r a_i + sinh r a_j†, and symmetrically for a_j.
inline LocalChannel two_mode_squeezer(std::size_t mode_i, std::size_t mode_j, double r) {
  CMat m = CMat::Identity(2, 2) * std::cosh(r);
  CMat n = CMat::Zero(2, 2);
  n(0, 1) = std::sinh(r);
  n(1, 0) = std::sinh(r);
  return symplectic({mode_i, mode_j}, bogoliubov(m, n));
}

inline LocalChannel loss(std::size_t mode, double eta) {
  if (!(eta >= 0.0)) {
    throw std::invalid_argument("loss: transmissivity must be non-negative");
  }
  return {{mode},
          GaussianChannel(1, 1, Vec::Zero(2), std::sqrt(eta) * Mat::Identity(2, 2), (1.0 - eta) * Mat::Identity(2, 2))};
}

/// Quantum-limited phase-insensitive amplifier.
inline LocalChannel amplifier(std::size_t mode, double gain) {
  if (!(gain >= 0.0)) {
    throw std::invalid_argument("amplifier: gain must be non-negative");
  }
  return {{mode}, GaussianChannel(1, 1, Vec::Zero(2), std::sqrt(gain) * Mat::Identity(2, 2),
                                  (gain - 1.0) * Mat::Identity(2, 2))};
}

/// Additive classical noise with a 2x2 covariance in (q, p) order.
inline LocalChannel classical_noise(std::size_t mode, const Mat &g_block) {
  if (g_block.rows() != 2 || g_block.cols() != 2) {
    throw std::invalid_argument("classical_noise: noise block must be 2x2");
  }
  return {{mode}, GaussianChannel(1, 1, Vec::Zero(2), Mat::Identity(2, 2), g_block)};
}

}  // namespace local

inline GaussianChannel displacement(std::size_t n, const Vec &alpha) {
  const auto d = static_cast<Eigen::Index>(2 * n);
  if (alpha.size() != d) {
    throw std::invalid_argument("displacement: alpha must have length 2n");
  }
  return GaussianChannel(n, n, alpha, Mat::Identity(d, d), Mat::Zero(d, d));
}

inline GaussianChannel phase_rotation(std::size_t n, std::size_t mode, double theta) {
  return embed(local::rotation(mode, theta), n);
}

inline GaussianChannel beamsplitter(std::size_t n, std::size_t mode_i, std::size_t mode_j, double theta, double phi) {
  return embed(local::beamsplitter(mode_i, mode_j, theta, phi), n);
}

inline GaussianChannel squeezer(std::size_t n, std::size_t mode, double r, double phi) {
  return embed(local::squeezer(mode, r, phi), n);
}

inline GaussianChannel two_mode_squeezer(std::size_t n, std::size_t mode_i, std::size_t mode_j, double r) {
  return embed(local::two_mode_squeezer(mode_i, mode_j, r), n);
}

inline GaussianChannel loss(std::size_t n, std::size_t mode, double eta) { return embed(local::loss(mode, eta), n); }

inline GaussianChannel amplifier(std::size_t n, std::size_t mode, double gain) {
  return embed(local::amplifier(mode, gain), n);
}

inline GaussianChannel classical_noise(std::size_t n, std::size_t mode, const Mat &g_block) {
  return embed(local::classical_noise(mode, g_block), n);
}

/// n → n+1 modes; the new last mode is prepared in vacuum.
inline GaussianChannel append_vacuum(std::size_t n) {
  const auto ni = static_cast<Eigen::Index>(n);
  const auto no = ni + 1;
  Mat a = Mat::Zero(2 * ni, 2 * no);
  for (Eigen::Index i = 0; i < ni; ++i) {
    a(i, i) = 1.0;
    a(ni + i, no + i) = 1.0;
  }
  Mat g = Mat::Zero(2 * no, 2 * no);
  g(ni, ni) = 1.0;
  g(no + ni, no + ni) = 1.0;
  return GaussianChannel(n, n + 1, Vec::Zero(2 * no), std::move(a), std::move(g));
}

/// 1 → 2 Gaussian cloner: gain-2 quantum-limited amplifier, then a balanced
/// beamsplitter against a fresh vacuum mode.
inline GaussianChannel cloner_1to2() {
  const GaussianChannel amp = amplifier(1, 0, 2.0);
  const GaussianChannel widen = append_vacuum(1);
  const GaussianChannel split = beamsplitter(2, 0, 1, std::numbers::pi / 4.0, 0.0);
  return compose(split, compose(widen, amp));
}

}  // namespace gaussim

#endif
