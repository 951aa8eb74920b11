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

#ifndef GAUSSIM_FOCK_HPP
#define GAUSSIM_FOCK_HPP

// Brute-force reference simulator in the truncated photon-number basis.
//
// Everything here is computed from ladder operators and closed-form number
// expansions, never from the phase-space formulas, so it can serve as an
// independent check of the Gaussian engine. It is also the only place where
// the non-Gaussian "click" branch of a photodetector can be represented.

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <type_traits>
#include <variant>
#include <vector>

#include "gaussim/errors.hpp"
#include "gaussim/linalg.hpp"

namespace gaussim::fock {

inline constexpr std::size_t kMaxModes = 3;
/// Dilations (loss, amplification) may temporarily add one ancilla.
inline constexpr std::size_t kMaxDilatedModes = kMaxModes + 1;
inline constexpr std::size_t kMaxCutoff = 64;
inline constexpr double kPreparationDeficit = 1e-10;
inline constexpr double kEvolutionDeficit = 1e-6;

using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cdouble>;

/// Index arithmetic for (cutoff+1)^modes dense tensors, mode 0 most significant.
struct FockSpace {
  std::size_t modes;
  std::size_t cutoff;

  std::size_t levels() const { return cutoff + 1; }

  std::size_t dim() const {
    std::size_t d = 1;
    for (std::size_t k = 0; k < modes; ++k) {
      d *= levels();
    }
    return d;
  }

  std::size_t stride(std::size_t mode) const {
    std::size_t s = 1;
    for (std::size_t k = mode + 1; k < modes; ++k) {
      s *= levels();
    }
    return s;
  }

  std::size_t digit(std::size_t index, std::size_t mode) const { return (index / stride(mode)) % levels(); }
};

struct FockState {
  std::size_t n_modes;
  std::size_t cutoff;
  CVec amplitudes;
  /// 1 - ⟨ψ|ψ⟩: weight lost to truncation
  double norm_deficit;

  FockSpace space() const { return {n_modes, cutoff}; }
};

/// Truncated density operator; the oracle's only mixed-state representation.
struct FockDensity {
  std::size_t n_modes;
  std::size_t cutoff;
  CMat rho;
  double norm_deficit;

  FockSpace space() const { return {n_modes, cutoff}; }
};

namespace detail {

inline void check_space(std::size_t modes, std::size_t cutoff, std::size_t max_modes) {
  if (modes == 0 || modes > max_modes) {
    throw std::invalid_argument("fock: mode count must be in 1.." + std::to_string(max_modes));
  }
  if (cutoff == 0 || cutoff > kMaxCutoff) {
    throw std::invalid_argument("fock: cutoff must be in 1.." + std::to_string(kMaxCutoff));
  }
}

inline void check_mode(const FockSpace &sp, std::size_t mode) {
  if (mode >= sp.modes) {
    throw std::invalid_argument("fock: mode " + std::to_string(mode) + " out of range");
  }
}

/// Annihilation operator on `mode`, truncated to the space.
inline SpMat annihilation(const FockSpace &sp, std::size_t mode) {
  const auto dim = sp.dim();
  const auto stride = sp.stride(mode);
  std::vector<Eigen::Triplet<cdouble>> trips;
  trips.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto n = sp.digit(i, mode);
    if (n > 0) {
      trips.emplace_back(static_cast<int>(i - stride), static_cast<int>(i), std::sqrt(static_cast<double>(n)));
    }
  }
  SpMat a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

inline SpMat adjoint(const SpMat &m) { return SpMat(m.adjoint()); }

/// Moves amplitudes to another cutoff, dropping levels above the new one.
inline CVec recut(const CVec &v, const FockSpace &from, const FockSpace &to) {
  CVec out = CVec::Zero(static_cast<Eigen::Index>(to.dim()));
  for (std::size_t i = 0; i < from.dim(); ++i) {
    std::size_t j = 0;
    bool inside = true;
    for (std::size_t k = 0; k < from.modes; ++k) {
      const auto n = from.digit(i, k);
      if (n > to.cutoff) {
        inside = false;
        break;
      }
      j += n * to.stride(k);
    }
    if (inside) {
      out(static_cast<Eigen::Index>(j)) = v(static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

inline CMat recut(const CMat &rho, const FockSpace &from, const FockSpace &to) {
  std::vector<Eigen::Index> map(from.dim(), -1);
  for (std::size_t i = 0; i < from.dim(); ++i) {
    std::size_t j = 0;
    bool inside = true;
    for (std::size_t k = 0; k < from.modes; ++k) {
      const auto n = from.digit(i, k);
      if (n > to.cutoff) {
        inside = false;
        break;
      }
      j += n * to.stride(k);
    }
    if (inside) {
      map[i] = static_cast<Eigen::Index>(j);
    }
  }
  CMat out = CMat::Zero(static_cast<Eigen::Index>(to.dim()), static_cast<Eigen::Index>(to.dim()));
  for (std::size_t c = 0; c < from.dim(); ++c) {
    if (map[c] < 0) {
      continue;
    }
    for (std::size_t r = 0; r < from.dim(); ++r) {
      if (map[r] >= 0) {
        out(map[r], map[c]) = rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return out;
}

inline double one_norm(const SpMat &m) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    double col = 0.0;
    for (SpMat::InnerIterator it(m, c); it; ++it) {
      col += std::abs(it.value());
    }
    best = std::max(best, col);
  }
  return best;
}

/// exp(K) v by s scaled Taylor steps, s chosen so that ‖K/s‖₁ ≤ 4.
inline CVec expm_action(const SpMat &k, CVec v) {
  const double norm = one_norm(k);
  const int steps = std::max(1, static_cast<int>(std::ceil(norm / 4.0)));
  const SpMat scaled = k / static_cast<double>(steps);
  for (int s = 0; s < steps; ++s) {
    CVec term = v;
    CVec acc = v;
    for (int j = 1; j < 120; ++j) {
      term = (scaled * term) / static_cast<double>(j);
      acc += term;
      if (term.norm() <= 1e-18 * acc.norm()) {
        break;
      }
    }
    v = std::move(acc);
  }
  return v;
}

inline std::size_t padding(std::size_t cutoff) { return std::max<std::size_t>(6, cutoff / 2); }

inline double finish_deficit(double norm2, double bound, const char *what) {
  const double deficit = std::max(0.0, 1.0 - norm2);
  if (deficit > bound) {
    throw CutoffTooSmall(std::string(what) + ": truncation lost " + std::to_string(deficit) + " of the norm",
                         deficit);
  }
  return deficit;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Preparation

struct Vacuum {
  std::size_t n;
};
struct Coherent {
  std::size_t n;
  std::size_t mode;
  double q;
  double p;
};
struct SqueezedVacuum {
  std::size_t n;
  std::size_t mode;
  double r;
};
struct TwoModeSqueezedVacuum {
  double r;
};

using PureDescriptor = std::variant<Vacuum, Coherent, SqueezedVacuum, TwoModeSqueezedVacuum>;

namespace detail {

/// ⊗ of single-mode amplitude lists (vacuum except on `mode`).
inline FockState product_state(std::size_t n, std::size_t cutoff, std::size_t mode, const CVec &single) {
  check_space(n, cutoff, kMaxModes);
  const FockSpace sp{n, cutoff};
  check_mode(sp, mode);
  FockState st{n, cutoff, CVec::Zero(static_cast<Eigen::Index>(sp.dim())), 0.0};
  for (std::size_t k = 0; k <= cutoff; ++k) {
    st.amplitudes(static_cast<Eigen::Index>(k * sp.stride(mode))) = single(static_cast<Eigen::Index>(k));
  }
  st.norm_deficit = finish_deficit(st.amplitudes.squaredNorm(), kPreparationDeficit, "from_gaussian");
  return st;
}

/// e^{-|β|²/2} β^k / √k!, β = (q + i p) / 2.
inline CVec coherent_amplitudes(double q, double p, std::size_t cutoff) {
  const cdouble beta(q / 2.0, p / 2.0);
  CVec c(static_cast<Eigen::Index>(cutoff + 1));
  c(0) = std::exp(-std::norm(beta) / 2.0);
  for (std::size_t k = 1; k <= cutoff; ++k) {
    c(static_cast<Eigen::Index>(k)) = c(static_cast<Eigen::Index>(k - 1)) * beta / std::sqrt(static_cast<double>(k));
  }
  return c;
}

}  // namespace detail

/// Number-basis expansion of a pure Gaussian state from its closed form.
inline FockState from_gaussian(const PureDescriptor &desc, std::size_t cutoff) {
  return std::visit(
      [cutoff](const auto &d) -> FockState {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Vacuum>) {
          CVec single = CVec::Zero(static_cast<Eigen::Index>(cutoff + 1));
          single(0) = 1.0;
          return detail::product_state(d.n, cutoff, 0, single);
        } else if constexpr (std::is_same_v<T, Coherent>) {
          return detail::product_state(d.n, cutoff, d.mode, detail::coherent_amplitudes(d.q, d.p, cutoff));
        } else if constexpr (std::is_same_v<T, SqueezedVacuum>) {
          // (cosh r)^{-1/2} Σ_m (-tanh r)^m √((2m)!) / (2^m m!) |2m⟩
          CVec single = CVec::Zero(static_cast<Eigen::Index>(cutoff + 1));
          double c = 1.0 / std::sqrt(std::cosh(d.r));
          const double t = -std::tanh(d.r);
          for (std::size_t k = 0; k <= cutoff; k += 2) {
            single(static_cast<Eigen::Index>(k)) = c;
            const double m = static_cast<double>(k / 2);
            c *= t * std::sqrt((2.0 * m + 1.0) * (2.0 * m + 2.0)) / (2.0 * (m + 1.0));
          }
          return detail::product_state(d.n, cutoff, d.mode, single);
        } else {
          // Σ_k tanh^k r / cosh r |k, k⟩
          detail::check_space(2, cutoff, kMaxModes);
          const FockSpace sp{2, cutoff};
          FockState st{2, cutoff, CVec::Zero(static_cast<Eigen::Index>(sp.dim())), 0.0};
          double c = 1.0 / std::cosh(d.r);
          for (std::size_t k = 0; k <= cutoff; ++k) {
            st.amplitudes(static_cast<Eigen::Index>(k * sp.stride(0) + k * sp.stride(1))) = c;
            c *= std::tanh(d.r);
          }
          st.norm_deficit = detail::finish_deficit(st.amplitudes.squaredNorm(), kPreparationDeficit, "from_gaussian");
          return st;
        }
      },
      desc);
}

/// Diagonal thermal state with mean photon number nbar on a single mode.
inline FockDensity thermal_density(double nbar, std::size_t cutoff) {
  detail::check_space(1, cutoff, kMaxModes);
  if (!(nbar >= 0.0)) {
    throw std::invalid_argument("thermal_density: nbar must be non-negative");
  }
  CMat rho = CMat::Zero(static_cast<Eigen::Index>(cutoff + 1), static_cast<Eigen::Index>(cutoff + 1));
  const double ratio = nbar / (1.0 + nbar);
  double p = 1.0 / (1.0 + nbar);
  for (std::size_t k = 0; k <= cutoff; ++k) {
    rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = p;
    p *= ratio;
  }
  const double deficit = detail::finish_deficit(rho.trace().real(), kPreparationDeficit, "thermal_density");
  return {1, cutoff, std::move(rho), deficit};
}

// ---------------------------------------------------------------------------
// Unitary evolution

/// a → e^{iθ} a
struct Rotation {
  std::size_t mode;
  double theta;
};
/// exp(θ(e^{iφ} a_i a_j† - e^{-iφ} a_i† a_j))
struct Beamsplitter {
  std::size_t mode_i;
  std::size_t mode_j;
  double theta;
  double phi;
};
/// exp(r/2 (e^{-iφ} a² - e^{iφ} a†²))
struct Squeezer {
  std::size_t mode;
  double r;
  double phi;
};
/// exp(r (a_i† a_j† - a_i a_j))
struct TwoModeSqueezer {
  std::size_t mode_i;
  std::size_t mode_j;
  double r;
};
/// exp(β a† - β* a), β = (q + i p) / 2
struct Displacement {
  std::size_t mode;
  double q;
  double p;
};

using GateDescriptor = std::variant<Rotation, Beamsplitter, Squeezer, TwoModeSqueezer, Displacement>;

/// Anti-Hermitian generator K with U = exp(K).
inline SpMat generator(const FockSpace &sp, const GateDescriptor &gate) {
  const cdouble i1(0.0, 1.0);
  return std::visit(
      [&](const auto &g) -> SpMat {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Rotation>) {
          detail::check_mode(sp, g.mode);
          const SpMat a = detail::annihilation(sp, g.mode);
          return SpMat((i1 * g.theta) * SpMat(detail::adjoint(a) * a));
        } else if constexpr (std::is_same_v<T, Beamsplitter>) {
          detail::check_mode(sp, g.mode_i);
          detail::check_mode(sp, g.mode_j);
          if (g.mode_i == g.mode_j) {
            throw std::invalid_argument("fock: beamsplitter needs two distinct modes");
          }
          const SpMat a = detail::annihilation(sp, g.mode_i);
          const SpMat b = detail::annihilation(sp, g.mode_j);
          const SpMat ab_dag = a * detail::adjoint(b);
          const SpMat a_dag_b = detail::adjoint(a) * b;
          return SpMat(g.theta * (std::polar(1.0, g.phi) * ab_dag - std::polar(1.0, -g.phi) * a_dag_b));
        } else if constexpr (std::is_same_v<T, Squeezer>) {
          detail::check_mode(sp, g.mode);
          const SpMat a = detail::annihilation(sp, g.mode);
          const SpMat a2 = a * a;
          const SpMat ad2 = detail::adjoint(a2);
          return SpMat((g.r / 2.0) * (std::polar(1.0, -g.phi) * a2 - std::polar(1.0, g.phi) * ad2));
        } else if constexpr (std::is_same_v<T, TwoModeSqueezer>) {
          detail::check_mode(sp, g.mode_i);
          detail::check_mode(sp, g.mode_j);
          if (g.mode_i == g.mode_j) {
            throw std::invalid_argument("fock: two-mode squeezer needs two distinct modes");
          }
          const SpMat ab = detail::annihilation(sp, g.mode_i) * detail::annihilation(sp, g.mode_j);
          return SpMat(g.r * (detail::adjoint(ab) - ab));
        } else {
          detail::check_mode(sp, g.mode);
          const SpMat a = detail::annihilation(sp, g.mode);
          const cdouble beta(g.q / 2.0, g.p / 2.0);
          return SpMat(beta * detail::adjoint(a) - std::conj(beta) * a);
        }
      },
      gate);
}

/// Applies exp(K) on a padded space, then truncates back to the original
/// cutoff; the weight pushed above the cutoff becomes the new norm deficit.
inline FockState apply_gaussian_unitary(const FockState &state, const GateDescriptor &gate,
                                        double max_deficit = kEvolutionDeficit) {
  const FockSpace sp = state.space();
  const FockSpace padded{sp.modes, sp.cutoff + detail::padding(sp.cutoff)};
  const SpMat k = generator(padded, gate);
  const CVec evolved = detail::expm_action(k, detail::recut(state.amplitudes, sp, padded));
  FockState out{sp.modes, sp.cutoff, detail::recut(evolved, padded, sp), 0.0};
  out.norm_deficit = detail::finish_deficit(out.amplitudes.squaredNorm(), max_deficit, "apply_gaussian_unitary");
  return out;
}

/// Adds a vacuum mode after the existing ones.
inline FockState append_vacuum(const FockState &state) {
  detail::check_space(state.n_modes + 1, state.cutoff, kMaxDilatedModes);
  const auto levels = static_cast<Eigen::Index>(state.cutoff + 1);
  CVec amps = CVec::Zero(state.amplitudes.size() * levels);
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    amps(i * levels) = state.amplitudes(i);
  }
  return {state.n_modes + 1, state.cutoff, std::move(amps), state.norm_deficit};
}

/// Reduced density operator on `keep` (in increasing mode order).
inline FockDensity partial_trace(const FockState &state, const std::vector<std::size_t> &keep) {
  const FockSpace sp = state.space();
  std::vector<bool> kept(sp.modes, false);
  for (auto m : keep) {
    detail::check_mode(sp, m);
    kept[m] = true;
  }
  std::vector<std::size_t> keep_sorted;
  std::vector<std::size_t> traced;
  for (std::size_t m = 0; m < sp.modes; ++m) {
    (kept[m] ? keep_sorted : traced).push_back(m);
  }
  if (keep_sorted.empty()) {
    throw std::invalid_argument("partial_trace: must keep at least one mode");
  }
  const FockSpace ks{keep_sorted.size(), sp.cutoff};
  const FockSpace ts{traced.size(), sp.cutoff};
  CMat psi = CMat::Zero(static_cast<Eigen::Index>(ks.dim()), static_cast<Eigen::Index>(ts.dim()));
  for (std::size_t i = 0; i < sp.dim(); ++i) {
    std::size_t r = 0;
    std::size_t c = 0;
    for (std::size_t k = 0; k < keep_sorted.size(); ++k) {
      r += sp.digit(i, keep_sorted[k]) * ks.stride(k);
    }
    for (std::size_t k = 0; k < traced.size(); ++k) {
      c += sp.digit(i, traced[k]) * ts.stride(k);
    }
    psi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = state.amplitudes(static_cast<Eigen::Index>(i));
  }
  return {keep_sorted.size(), sp.cutoff, psi * psi.adjoint(), state.norm_deficit};
}

inline FockDensity to_density(const FockState &state) {
  return {state.n_modes, state.cutoff, state.amplitudes * state.amplitudes.adjoint(), state.norm_deficit};
}

namespace detail {
inline std::vector<std::size_t> all_but_last(std::size_t modes) {
  std::vector<std::size_t> keep(modes - 1);
  for (std::size_t m = 0; m + 1 < modes; ++m) {
    keep[m] = m;
  }
  return keep;
}
}  // namespace detail

/// Loss by Stinespring dilation: beamsplit `mode` against a vacuum ancilla
/// at angle arccos(√η), then trace the ancilla out.
inline FockDensity apply_loss(const FockState &state, std::size_t mode, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("apply_loss: eta must lie in [0, 1]");
  }
  detail::check_mode(state.space(), mode);
  FockState wide = append_vacuum(state);
  wide = apply_gaussian_unitary(wide, Beamsplitter{mode, state.n_modes, std::acos(std::sqrt(eta)), 0.0});
  return partial_trace(wide, detail::all_but_last(wide.n_modes));
}

/// Quantum-limited amplification: two-mode squeeze against a vacuum ancilla
/// with cosh² r = gain, then trace the ancilla out.
inline FockDensity apply_amplifier(const FockState &state, std::size_t mode, double gain) {
  if (!(gain >= 1.0)) {
    throw std::invalid_argument("apply_amplifier: gain must be >= 1");
  }
  detail::check_mode(state.space(), mode);
  FockState wide = append_vacuum(state);
  wide = apply_gaussian_unitary(wide, TwoModeSqueezer{mode, state.n_modes, std::acosh(std::sqrt(gain))});
  return partial_trace(wide, detail::all_but_last(wide.n_modes));
}

namespace detail {
/// Gauss-Hermite rule for the standard normal weight (Golub-Welsch).
inline std::pair<Vec, Vec> gauss_hermite(int points) {
  Mat jacobi = Mat::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jacobi);
  Vec weights = es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), weights};
}
}  // namespace detail

/// Random displacement noise with phase-space covariance g_block on `mode`,
/// as a quadrature-weighted mixture of displaced copies. The quadrature is
/// exact for first and second moments.
inline FockDensity apply_classical_noise(const FockState &state, std::size_t mode, const Mat &g_block,
                                         int points = 5) {
  detail::check_mode(state.space(), mode);
  if (g_block.rows() != 2 || g_block.cols() != 2) {
    throw std::invalid_argument("apply_classical_noise: noise block must be 2x2");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g_block + g_block.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("apply_classical_noise: noise covariance must be PSD");
  }
  const Vec scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const auto [nodes, weights] = detail::gauss_hermite(points);
  const auto dim = state.amplitudes.size();
  CMat rho = CMat::Zero(dim, dim);
  double worst = state.norm_deficit;
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      Vec x(2);
      x << scale(0) * nodes(i), scale(1) * nodes(j);
      const Vec d = es.eigenvectors() * x;
      const FockState shifted = apply_gaussian_unitary(state, Displacement{mode, d(0), d(1)});
      rho += (weights(i) * weights(j)) * (shifted.amplitudes * shifted.amplitudes.adjoint());
      worst = std::max(worst, shifted.norm_deficit);
    }
  }
  return {state.n_modes, state.cutoff, std::move(rho), worst};
}

// ---------------------------------------------------------------------------
// Observables

struct Moments {
  Vec xi;
  Mat gamma;
};

namespace detail {

/// q_k = a_k + a_k†, p_k = -i(a_k - a_k†), in (q.., p..) order.
inline std::vector<SpMat> quadrature_operators(const FockSpace &sp) {
  const cdouble i1(0.0, 1.0);
  std::vector<SpMat> z(2 * sp.modes);
  for (std::size_t k = 0; k < sp.modes; ++k) {
    const SpMat a = annihilation(sp, k);
    const SpMat ad = adjoint(a);
    z[k] = a + ad;
    z[k + sp.modes] = SpMat(-i1 * (a - ad));
  }
  return z;
}

}  // namespace detail

/// First moments and symmetrized covariances of the quadratures, in the
/// vacuum-is-identity convention, normalized by the retained norm.
inline Moments moments(const FockState &state) {
  const FockSpace sp = state.space();
  const FockSpace padded{sp.modes, sp.cutoff + 2};
  const CVec psi = detail::recut(state.amplitudes, sp, padded);
  const double norm2 = psi.squaredNorm();
  const auto z = detail::quadrature_operators(padded);
  const auto d = static_cast<Eigen::Index>(z.size());
  std::vector<CVec> w(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    w[i] = z[i] * psi;
  }
  Moments m{Vec(d), Mat(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    m.xi(i) = psi.dot(w[static_cast<std::size_t>(i)]).real() / norm2;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double sym = w[static_cast<std::size_t>(i)].dot(w[static_cast<std::size_t>(j)]).real() / norm2;
      m.gamma(i, j) = sym - m.xi(i) * m.xi(j);
    }
  }
  return m;
}

inline Moments moments(const FockDensity &state) {
  const FockSpace sp = state.space();
  const FockSpace padded{sp.modes, sp.cutoff + 2};
  const CMat rho = detail::recut(state.rho, sp, padded);
  const double tr = rho.trace().real();
  const auto z = detail::quadrature_operators(padded);
  const auto d = static_cast<Eigen::Index>(z.size());
  std::vector<CMat> zr(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    zr[i] = z[i] * rho;
  }
  Moments m{Vec(d), Mat(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    m.xi(i) = zr[static_cast<std::size_t>(i)].trace().real() / tr;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    const SpMat &zi = z[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      // Tr(z_i z_j ρ) = Σ_(a,b) (z_i)_ab (z_j ρ)_ba
      const CMat &zjr = zr[static_cast<std::size_t>(j)];
      cdouble acc = 0.0;
      for (Eigen::Index c = 0; c < zi.outerSize(); ++c) {
        for (SpMat::InnerIterator it(zi, c); it; ++it) {
          acc += it.value() * zjr(it.col(), it.row());
        }
      }
      m.gamma(i, j) = acc.real() / tr - m.xi(i) * m.xi(j);
    }
  }
  return m;
}

/// Marginal P(n) on one mode, not renormalized: Σ P(n) = 1 - norm_deficit.
inline Vec photon_number_distribution(const FockState &state, std::size_t mode) {
  const FockSpace sp = state.space();
  detail::check_mode(sp, mode);
  Vec p = Vec::Zero(static_cast<Eigen::Index>(sp.levels()));
  for (std::size_t i = 0; i < sp.dim(); ++i) {
    p(static_cast<Eigen::Index>(sp.digit(i, mode))) += std::norm(state.amplitudes(static_cast<Eigen::Index>(i)));
  }
  return p;
}

inline Vec photon_number_distribution(const FockDensity &state, std::size_t mode) {
  const FockSpace sp = state.space();
  detail::check_mode(sp, mode);
  Vec p = Vec::Zero(static_cast<Eigen::Index>(sp.levels()));
  for (std::size_t i = 0; i < sp.dim(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    p(static_cast<Eigen::Index>(sp.digit(i, mode))) += state.rho(ii, ii).real();
  }
  return p;
}

// ---------------------------------------------------------------------------
// Conditioning

enum class Photodetection { no_absorption, absorption };

struct HeraldResult {
  /// state of the unmeasured modes, trace normalized
  FockDensity state;
  double probability;
};

/// Projects `mode` onto |0⟩⟨0| or onto Σ_{n≥1} |n⟩⟨n| and traces it out.
/// The absorption branch is where non-Gaussian states appear.
inline HeraldResult condition_photodetection(const FockState &state, std::size_t mode, Photodetection outcome) {
  const FockSpace sp = state.space();
  detail::check_mode(sp, mode);
  if (sp.modes < 2) {
    throw std::invalid_argument("condition_photodetection: need at least one unmeasured mode");
  }
  FockState projected = state;
  for (std::size_t i = 0; i < sp.dim(); ++i) {
    const bool vacuum_here = sp.digit(i, mode) == 0;
    const bool keep = outcome == Photodetection::no_absorption ? vacuum_here : !vacuum_here;
    if (!keep) {
      projected.amplitudes(static_cast<Eigen::Index>(i)) = 0.0;
    }
  }
  const double prob = projected.amplitudes.squaredNorm() / state.amplitudes.squaredNorm();
  if (!(prob > 0.0)) {
    throw std::invalid_argument("condition_photodetection: outcome has zero probability");
  }
  std::vector<std::size_t> keep;
  for (std::size_t m = 0; m < sp.modes; ++m) {
    if (m != mode) {
      keep.push_back(m);
    }
  }
  FockDensity rest = partial_trace(projected, keep);
  const double deficit = std::min(1.0, state.norm_deficit / prob);
  rest.rho *= (1.0 - deficit) / rest.rho.trace().real();
  rest.norm_deficit = deficit;
  return {std::move(rest), prob};
}

struct VacuumProjection {
  FockState state;
  double probability;
};

/// Contracts `mode` with ⟨0|: the pure-state form of the no-absorption
/// branch, leaving a normalized state on the remaining modes.
inline VacuumProjection project_vacuum(const FockState &state, std::size_t mode) {
  const FockSpace sp = state.space();
  detail::check_mode(sp, mode);
  if (sp.modes < 2) {
    throw std::invalid_argument("project_vacuum: need at least one unmeasured mode");
  }
  const FockSpace rest{sp.modes - 1, sp.cutoff};
  CVec out = CVec::Zero(static_cast<Eigen::Index>(rest.dim()));
  for (std::size_t i = 0; i < sp.dim(); ++i) {
    if (sp.digit(i, mode) != 0) {
      continue;
    }
    std::size_t j = 0;
    std::size_t slot = 0;
    for (std::size_t k = 0; k < sp.modes; ++k) {
      if (k != mode) {
        j += sp.digit(i, k) * rest.stride(slot++);
      }
    }
    out(static_cast<Eigen::Index>(j)) = state.amplitudes(static_cast<Eigen::Index>(i));
  }
  const double norm2 = out.squaredNorm();
  if (!(norm2 > 0.0)) {
    throw std::invalid_argument("project_vacuum: outcome has zero probability");
  }
  const double prob = norm2 / state.amplitudes.squaredNorm();
  const double deficit = std::min(1.0, state.norm_deficit / prob);
  out *= std::sqrt(1.0 - deficit) / std::sqrt(norm2);
  return {{rest.modes, rest.cutoff, std::move(out), deficit}, prob};
}

struct CoherentProjection {
  FockState state;
  /// density of the outcome (q, p) per unit phase-space area, |⟨β|ψ⟩|² / 4π
  double density;
};

/// Contracts `mode` with ⟨β|, β = (q + i p)/2, leaving a pure state on the
/// remaining modes.
inline CoherentProjection project_coherent(const FockState &state, std::size_t mode, double q, double p) {
  const FockSpace sp = state.space();
  detail::check_mode(sp, mode);
  if (sp.modes < 2) {
    throw std::invalid_argument("project_coherent: need at least one unmeasured mode");
  }
  const CVec c = detail::coherent_amplitudes(q, p, sp.cutoff);
  const FockSpace rest{sp.modes - 1, sp.cutoff};
  CVec out = CVec::Zero(static_cast<Eigen::Index>(rest.dim()));
  for (std::size_t i = 0; i < sp.dim(); ++i) {
    std::size_t j = 0;
    std::size_t slot = 0;
    for (std::size_t k = 0; k < sp.modes; ++k) {
      if (k == mode) {
        continue;
      }
      j += sp.digit(i, k) * rest.stride(slot++);
    }
    out(static_cast<Eigen::Index>(j)) +=
        std::conj(c(static_cast<Eigen::Index>(sp.digit(i, mode)))) * state.amplitudes(static_cast<Eigen::Index>(i));
  }
  const double norm2 = out.squaredNorm();
  const double density = norm2 / (4.0 * std::numbers::pi * state.amplitudes.squaredNorm());
  if (!(norm2 > 0.0)) {
    throw std::invalid_argument("project_coherent: zero-probability outcome");
  }
  out *= std::sqrt(1.0 - state.norm_deficit) / std::sqrt(norm2);
  return {{rest.modes, rest.cutoff, std::move(out), state.norm_deficit}, density};
}

}  // namespace gaussim::fock

#endif
