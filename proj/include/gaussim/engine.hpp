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

#ifndef GAUSSIM_ENGINE_HPP
#define GAUSSIM_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "gaussim/channel.hpp"
#include "gaussim/circuit.hpp"
#include "gaussim/errors.hpp"
#include "gaussim/measurement.hpp"
#include "gaussim/rng.hpp"
#include "gaussim/state.hpp"

namespace gaussim {

/// Every measurement is post-selected on a supplied outcome, keyed by the
/// register it writes. Dyne kinds need 2m numbers, homodyne one. Detector
/// measurements need none (they always post-select the no-click branch);
/// if given, the value must be [0].
struct Posterior {
  Registers outcomes;
};

/// Outcomes are drawn from their Born-rule densities using a stream seeded
/// with `seed`.
struct Sampled {
  std::uint64_t seed;
  std::uint64_t shot_index = 0;
};

using RunMode = std::variant<Posterior, Sampled>;

struct RunRecord {
  std::size_t instruction;
  std::string target;
  /// the register contents this measurement wrote
  Vec value;
  MeasurementRecord record;
};

struct RunResult {
  GaussianState final_state;
  std::vector<RunRecord> records;
  /// sum of log densities / log probabilities of all conditioning steps
  double total_log_weight;
  std::optional<std::uint64_t> shot_index;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline const Vec *supplied(const Posterior &post, const std::string &target) {
  const auto it = post.outcomes.find(target);
  return it == post.outcomes.end() ? nullptr : &it->second;
}

inline Vec require_outcome(const Posterior &post, const std::string &target, std::size_t length) {
  const Vec *v = supplied(post, target);
  if (!v) {
    throw std::invalid_argument("no outcome supplied for register '" + target + "'");
  }
  if (v->size() != static_cast<Eigen::Index>(length)) {
    throw std::invalid_argument("outcome for register '" + target + "' needs " + std::to_string(length) +
                                " numbers, got " + std::to_string(v->size()));
  }
  return *v;
}

inline ConditionResult execute_measure(const GaussianState &state, const Instruction &ins, const Posterior *post,
                                       Rng *rng, const Tolerances &tol, Vec &value) {
  const auto &me = ins.measure;
  switch (me.kind) {
    case MeasureKind::heterodyne:
    case MeasureKind::eprdyne:
    case MeasureKind::dyne: {
      const auto spec = dyne_spec(ins);
      auto res = post ? condition(state, spec, require_outcome(*post, me.target, 2 * ins.modes.size()), tol)
                      : sample(state, spec, *rng, tol);
      value = res.record.outcome;
      return res;
    }
    case MeasureKind::homodyne: {
      const auto mode = ins.modes.at(0);
      auto res = post ? homodyne(state, mode, me.quad, require_outcome(*post, me.target, 1)(0), me.s, tol)
                      : homodyne_sample(state, mode, me.quad, *rng, me.s, tol);
      value = Vec::Constant(1, res.record.outcome(me.quad == Quadrature::q ? 0 : 1));
      return res;
    }
    case MeasureKind::vacuum_projection: {
      if (post) {
        if (const Vec *v = supplied(*post, me.target); v && !(v->size() == 1 && (*v)(0) == 0.0)) {
          throw std::invalid_argument("vacuumproj register '" + me.target +
                                      "' post-selects zero photons; the only admissible outcome is [0]");
        }
      }
      value = Vec::Zero(1);
      return condition_no_absorption(state, ins.modes.at(0), tol);
    }
    case MeasureKind::absorption:
      condition_absorption(state, ins.modes.at(0));
  }
  throw std::invalid_argument("unknown measurement kind");
}

inline RunResult run_impl(const Circuit &circuit, const Posterior *post, Rng *rng, const Tolerances &tol) {
  if (post) {
    std::map<std::string, bool> known;
    for (const auto &[name, len] : registers(circuit)) {
      known[name] = true;
    }
    for (const auto &[name, v] : post->outcomes) {
      if (!known.count(name)) {
        throw std::invalid_argument("outcome given for unknown register '" + name + "'");
      }
    }
  }
  GaussianState state = initial_state(circuit);
  Registers regs;
  std::vector<RunRecord> records;
  for (std::size_t i = 0; i < circuit.instructions.size(); ++i) {
    const auto &ins = circuit.instructions[i];
    try {
      if (ins.op == Op::measure) {
        Vec value;
        auto res = execute_measure(state, ins, post, rng, tol, value);
        state = std::move(res.state);
        regs[ins.measure.target] = value;
        records.push_back({i, ins.measure.target, std::move(value), std::move(res.record)});
      } else {
        // Parameters may depend on registers, so the CP check in apply()
        // runs on the instantiated channel every time.
        state = apply(instantiate(ins, regs), std::move(state), tol);
      }
    } catch (Error &e) {
      e.set_instruction(i);
      throw;
    } catch (const std::invalid_argument &e) {
      Error wrapped(e.what());
      wrapped.set_instruction(i);
      throw wrapped;
    }
  }
  const double w = state.log_weight();
  return {std::move(state), std::move(records), w, std::nullopt, std::nullopt};
}

}  // namespace detail

/// Executes the circuit. The circuit must have passed validate() (parse()
/// does this). Runtime failures are gaussim::Error subclasses whose message
/// and instruction() identify the failing step.
inline RunResult run(const Circuit &circuit, const RunMode &mode, const Tolerances &tol = kDefaultTolerances) {
  if (const auto *post = std::get_if<Posterior>(&mode)) {
    return detail::run_impl(circuit, post, nullptr, tol);
  }
  const auto &s = std::get<Sampled>(mode);
  Rng rng(s.seed);
  auto result = detail::run_impl(circuit, nullptr, &rng, tol);
  result.seed = s.seed;
  result.shot_index = s.shot_index;
  return result;
}

/// Seed of shot k: a pure function of (base_seed, k).
inline std::uint64_t shot_seed(std::uint64_t base_seed, std::uint64_t shot) { return Rng(base_seed).split(shot).seed(); }

/// n_shots sampled runs. Shot k always uses shot_seed(base_seed, k), so the
/// returned list is identical for any thread count. If shots fail, the error
/// of the lowest failing shot index is rethrown.
inline std::vector<RunResult> run_shots(const Circuit &circuit, std::size_t n_shots, std::uint64_t base_seed,
                                        unsigned threads = 1, const Tolerances &tol = kDefaultTolerances) {
  if (n_shots == 0) {
    throw std::invalid_argument("run_shots: need at least one shot");
  }
  std::vector<std::optional<RunResult>> slots(n_shots);
  std::vector<std::exception_ptr> errors(n_shots);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n_shots; k = next++) {
      try {
        slots[k] = run(circuit, Sampled{shot_seed(base_seed, k), k}, tol);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_shots)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto &t : pool) {
      t.join();
    }
  }
  std::vector<RunResult> out;
  out.reserve(n_shots);
  for (std::size_t k = 0; k < n_shots; ++k) {
    if (errors[k]) {
      std::rethrow_exception(errors[k]);
    }
    out.push_back(std::move(*slots[k]));
  }
  return out;
}

}  // namespace gaussim

#endif
