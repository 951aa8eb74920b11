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

#ifndef GAUSSIM_BENCH_HPP
#define GAUSSIM_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gaussim/channel.hpp"
#include "gaussim/rng.hpp"
#include "gaussim/state.hpp"

namespace gaussim::bench {

struct Point {
  std::size_t modes;
  std::size_t depth;
  double seconds;
  double seconds_per_layer;
  /// bytes held by the mean vector and the dense covariance matrix
  std::size_t state_bytes;
  double min_eigenvalue;
};

/// One layer: a beamsplitter on every pair of a random perfect matching,
/// then a random squeezer, phase rotation and loss on every mode. Each gate
/// is a local update, so a layer costs O(n²).
inline GaussianState layer(GaussianState s, Rng &rng) {
  const std::size_t n = s.n();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    s = apply(local::beamsplitter(order[k], order[k + 1], rng.uniform() * std::numbers::pi / 2,
                                  rng.uniform() * 2 * std::numbers::pi),
              std::move(s));
  }
  for (std::size_t m = 0; m < n; ++m) {
    s = apply(local::squeezer(m, 0.2 * (rng.uniform() - 0.5), rng.uniform() * 2 * std::numbers::pi), std::move(s));
    s = apply(local::rotation(m, rng.uniform() * 2 * std::numbers::pi), std::move(s));
    s = apply(local::loss(m, 0.95 + 0.05 * rng.uniform()), std::move(s));
  }
  return s;
}

inline Point run_point(std::size_t modes, std::size_t depth, std::uint64_t seed) {
  if (modes == 0 || depth == 0) {
    throw std::invalid_argument("bench: modes and depth must be positive");
  }
  Rng rng = Rng(seed).split(modes);
  GaussianState s = vacuum(modes);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t d = 0; d < depth; ++d) {
    s = layer(std::move(s), rng);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto dim = 2 * modes;
  return {modes,
          depth,
          secs,
          secs / static_cast<double>(depth),
          (dim + dim * dim) * sizeof(double),
          check_physical(s).min_eigenvalue};
}

/// Least-squares slope of log(seconds_per_layer) against log(modes).
inline double fitted_exponent(const std::vector<Point> &points) {
  if (points.size() < 2) {
    throw std::invalid_argument("fitted_exponent: need at least two sizes");
  }
  double sx = 0;
  double sy = 0;
  double sxx = 0;
  double sxy = 0;
  for (const auto &p : points) {
    const double x = std::log(static_cast<double>(p.modes));
    const double y = std::log(std::max(p.seconds_per_layer, 1e-12));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(points.size());
  const double den = k * sxx - sx * sx;
  if (den == 0.0) {
    throw std::invalid_argument("fitted_exponent: sizes must differ");
  }
  return (k * sxy - sx * sy) / den;
}

}  // namespace gaussim::bench

#endif
