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

#ifndef GAUSSIM_JSON_IO_HPP
#define GAUSSIM_JSON_IO_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

#include "gaussim/channel.hpp"
#include "gaussim/engine.hpp"
#include "gaussim/linalg.hpp"
#include "gaussim/measurement.hpp"
#include "gaussim/state.hpp"
#include "json.hpp"

// JSON forms shared by the command-line tool and tests. Matrices are arrays
// of rows. Mode numbers are 1-based, as in circuit text.

namespace gaussim::json {

using json = nlohmann::ordered_json;

inline constexpr const char *kSchema = "v1";

inline json from_vec(const Vec &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

inline json from_mat(const Mat &m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    a.push_back(from_vec(m.row(i).transpose()));
  }
  return a;
}

inline Vec to_vec(const json &j, const char *what) {
  if (!j.is_array()) {
    throw std::invalid_argument(std::string(what) + ": expected an array of numbers");
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw std::invalid_argument(std::string(what) + ": expected an array of numbers");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Mat to_mat(const json &j, const char *what) {
  if (!j.is_array()) {
    throw std::invalid_argument(std::string(what) + ": expected an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0) : 0;
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vec r = to_vec(j[static_cast<std::size_t>(i)], what);
    if (r.size() != cols) {
      throw std::invalid_argument(std::string(what) + ": ragged matrix");
    }
    m.row(i) = r.transpose();
  }
  return m;
}

inline json tolerances(const Tolerances &tol) {
  return {{"psd", tol.psd}, {"symplectic", tol.symplectic}, {"log_underflow", tol.log_underflow}};
}

inline json state(const GaussianState &s) {
  return {{"n", s.n()}, {"xi", from_vec(s.xi())}, {"gamma", from_mat(s.gamma())}, {"log_weight", s.log_weight()}};
}

/// Reads {"xi", "gamma", optional "log_weight"}; "n", if present, must agree.
inline GaussianState to_state(const json &j) {
  if (!j.is_object() || !j.contains("xi") || !j.contains("gamma")) {
    throw std::invalid_argument("state: expected an object with 'xi' and 'gamma'");
  }
  GaussianState s(to_vec(j["xi"], "xi"), to_mat(j["gamma"], "gamma"), j.value("log_weight", 0.0));
  if (j.contains("n") && j["n"].get<std::size_t>() != s.n()) {
    throw std::invalid_argument("state: 'n' does not match xi");
  }
  return s;
}

inline json channel(const GaussianChannel &ch) {
  return {{"n_in", ch.n_in},
          {"n_out", ch.n_out},
          {"alpha", from_vec(ch.alpha)},
          {"A", from_mat(ch.a)},
          {"G", from_mat(ch.g)}};
}

/// Reads {"n_in", optional "n_out" (default n_in), optional "alpha" and "G"
/// (default zero), "A"}.
inline GaussianChannel to_channel(const json &j) {
  if (!j.is_object() || !j.contains("n_in") || !j.contains("A")) {
    throw std::invalid_argument("channel: expected an object with 'n_in' and 'A'");
  }
  const auto n_in = j["n_in"].get<std::size_t>();
  const auto n_out = j.value("n_out", n_in);
  const auto d = static_cast<Eigen::Index>(2 * n_out);
  Vec alpha = j.contains("alpha") ? to_vec(j["alpha"], "alpha") : Vec::Zero(d);
  Mat g = j.contains("G") ? to_mat(j["G"], "G") : Mat::Zero(d, d);
  return GaussianChannel(n_in, n_out, std::move(alpha), to_mat(j["A"], "A"), std::move(g));
}

inline json record(const RunRecord &r) {
  json modes = json::array();
  for (auto m : r.record.spec.modes) {
    modes.push_back(m + 1);
  }
  return {{"instruction", r.instruction},
          {"register", r.target},
          {"modes", modes},
          {"kind", to_string(r.record.spec.kind)},
          {"value", from_vec(r.value)},
          {"outcome", from_vec(r.record.outcome)},
          {"log_density", r.record.log_density}};
}

inline json result(const RunResult &r) {
  json recs = json::array();
  for (const auto &rec : r.records) {
    recs.push_back(record(rec));
  }
  json j = {{"schema", kSchema}};
  j["shot_index"] = r.shot_index ? json(*r.shot_index) : json(nullptr);
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  j["final_state"] = state(r.final_state);
  j["records"] = std::move(recs);
  j["total_log_weight"] = r.total_log_weight;
  return j;
}

/// One output line: the result with the tolerances it was computed under.
inline json result(const RunResult &r, const Tolerances &tol) {
  json j = result(r);
  j["tolerances"] = tolerances(tol);
  return j;
}

/// Payload for a run stopped by a conditioned photodetector click.
inline json boundary(const NonGaussianOutcome &e) {
  return {{"schema", kSchema},
          {"error", "non_gaussian_outcome"},
          {"instruction", e.instruction() ? json(*e.instruction()) : json(nullptr)},
          {"absorption_probability", e.absorption_probability()},
          {"message", e.what()}};
}

/// Outcome files map register names to numbers or arrays of numbers.
inline Registers to_outcomes(const json &j) {
  if (!j.is_object()) {
    throw std::invalid_argument("outcomes: expected an object mapping register names to arrays");
  }
  Registers out;
  for (const auto &[name, v] : j.items()) {
    out[name] = v.is_number() ? Vec::Constant(1, v.get<double>()) : to_vec(v, name.c_str());
  }
  return out;
}

}  // namespace gaussim::json

#endif
