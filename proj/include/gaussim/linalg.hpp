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

#ifndef GAUSSIM_LINALG_HPP
#define GAUSSIM_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gaussim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using cdouble = std::complex<double>;

/// Module-wide numerical thresholds. Every one can be overridden per call.
struct Tolerances {
  /// A Hermitian matrix passes as PSD when its smallest eigenvalue is >= -psd.
  double psd = 1e-9;
  /// max |A^T Σ A - Σ| allowed for a matrix to count as symplectic.
  double symplectic = 1e-9;
  /// log-probabilities below this are treated as impossible outcomes.
  double log_underflow = -700.0;
};

inline constexpr Tolerances kDefaultTolerances{};

/// Σ for n modes in (q_1..q_n, p_1..p_n) ordering: Σ_ij = δ_{i+n,j} - δ_{i,j+n}.
inline Mat symplectic_form(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("symplectic_form: mode count must be positive");
  }
  const auto dim = static_cast<Eigen::Index>(2 * n);
  const auto half = static_cast<Eigen::Index>(n);
  Mat sigma = Mat::Zero(dim, dim);
  sigma.topRightCorner(half, half).setIdentity();
  sigma.bottomLeftCorner(half, half) = -Mat::Identity(half, half);
  return sigma;
}

inline void symmetrize(Mat &m) { m = 0.5 * (m + m.transpose()).eval(); }

/// Smallest eigenvalue of real + i·imag, which must be Hermitian.
inline double min_hermitian_eigenvalue(const Mat &real, const Mat &imag) {
  CMat h(real.rows(), real.cols());
  h.real() = real;
  h.imag() = imag;
  Eigen::SelfAdjointEigenSolver<CMat> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// Row/column indices of the given modes inside a 2n phase-space vector:
/// all q indices first, then all p indices.
inline std::vector<Eigen::Index> quadrature_indices(const std::vector<std::size_t> &modes, std::size_t n) {
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * modes.size());
  for (auto m : modes) {
    idx.push_back(static_cast<Eigen::Index>(m));
  }
  for (auto m : modes) {
    idx.push_back(static_cast<Eigen::Index>(m + n));
  }
  return idx;
}

inline Vec gather(const Vec &v, const std::vector<Eigen::Index> &idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  }
  return out;
}

inline Mat gather(const Mat &m, const std::vector<Eigen::Index> &rows, const std::vector<Eigen::Index> &cols) {
  Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

}  // namespace gaussim

#endif
