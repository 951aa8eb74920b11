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

#ifndef GAUSSIM_COMPARE_HPP
#define GAUSSIM_COMPARE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaussim/circuit.hpp"
#include "gaussim/engine.hpp"
#include "gaussim/fock.hpp"

// Cross-checks the engine against the Fock-space oracle on small circuits.
// Loss, amplification and thermal preparation are realized with ancilla
// modes (beamsplitter, two-mode squeezer) that are traced out at the end, so
// the oracle state stays pure throughout.

namespace gaussim {

struct CompareReport {
  bool supported = false;
  std::string reason;
  std::size_t cutoff = 0;
  std::size_t oracle_modes = 0;
  std::size_t final_modes = 0;
  double max_abs_diff_xi = 0.0;
  double max_abs_diff_gamma = 0.0;
  double engine_log_weight = 0.0;
  double oracle_log_weight = 0.0;
  double norm_deficit = 0.0;
};

namespace detail {

class OracleRun {
 public:
  OracleRun(std::size_t cutoff) : cutoff_(cutoff) {}

  std::optional<std::string> init(const Circuit &c) {
    const auto n = c.n_modes;
    if (n > fock::kMaxModes) {
      return "oracle handles at most " + std::to_string(fock::kMaxModes) + " modes";
    }
    sys_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      sys_[k] = k;
    }
    const auto &in = c.init;
    switch (in.kind) {
      case InitKind::vacuum:
        psi_ = fock::from_gaussian(fock::Vacuum{n}, cutoff_);
        break;
      case InitKind::coherent:
        psi_ = fock::from_gaussian(fock::Coherent{n, in.mode, in.q, in.p}, cutoff_);
        break;
      case InitKind::squeezed:
        psi_ = fock::from_gaussian(fock::SqueezedVacuum{n, in.mode, in.r}, cutoff_);
        break;
      case InitKind::two_mode_squeezed:
        psi_ = fock::from_gaussian(fock::TwoModeSqueezedVacuum{in.r}, cutoff_);
        break;
      case InitKind::thermal: {
        psi_ = fock::from_gaussian(fock::Vacuum{n}, cutoff_);
        if (auto why = ancilla()) {
          return why;
        }
        psi_ = fock::apply_gaussian_unitary(
            psi_, fock::TwoModeSqueezer{sys_[in.mode], psi_.n_modes - 1, std::asinh(std::sqrt(in.nbar))});
        break;
      }
      case InitKind::explicit_state:
        return "explicit initial states have no oracle preparation";
    }
    return std::nullopt;
  }

  std::optional<std::string> step(const Instruction &ins, const RunRecord *rec, const Registers &regs) {
    const auto &m = ins.modes;
    auto val = [&](const char *name) { return detail::scalar(ins, name, regs); };
    switch (ins.op) {
      case Op::displacement:
        return gate(fock::Displacement{sys_[m[0]], val("q"), val("p")});
      case Op::rotation:
        return gate(fock::Rotation{sys_[m[0]], val("theta")});
      case Op::beamsplitter:
        return gate(fock::Beamsplitter{sys_[m[0]], sys_[m[1]], val("theta"), val("phi")});
      case Op::squeezer:
        return gate(fock::Squeezer{sys_[m[0]], val("r"), val("phi")});
      case Op::two_mode_squeezer:
        return gate(fock::TwoModeSqueezer{sys_[m[0]], sys_[m[1]], val("r")});
      case Op::loss: {
        const double eta = val("eta");
        if (!(eta >= 0.0 && eta <= 1.0)) {
          return "loss outside [0, 1]";
        }
        if (auto why = ancilla()) {
          return why;
        }
        return gate(fock::Beamsplitter{sys_[m[0]], psi_.n_modes - 1, std::acos(std::sqrt(eta)), 0.0});
      }
      case Op::amplifier: {
        const double g = val("gain");
        if (!(g >= 1.0)) {
          return "amplifier gain below 1";
        }
        if (auto why = ancilla()) {
          return why;
        }
        return gate(fock::TwoModeSqueezer{sys_[m[0]], psi_.n_modes - 1, std::acosh(std::sqrt(g))});
      }
      case Op::noise:
        return "classical noise has no pure dilation in the comparator";
      case Op::raw:
        return "raw channels have no oracle form";
      case Op::measure:
        return measure(ins, *rec);
    }
    return "unknown instruction";
  }

  std::size_t peak_modes() const { return peak_; }
  double log_weight() const { return log_weight_; }
  double norm_deficit() const { return psi_.norm_deficit; }
  std::size_t system_modes() const { return sys_.size(); }

  fock::Moments moments() const {
    if (psi_.n_modes == sys_.size()) {
      return fock::moments(psi_);
    }
    return fock::moments(fock::partial_trace(psi_, sys_));
  }

 private:
  std::optional<std::string> gate(const fock::GateDescriptor &g) {
    psi_ = fock::apply_gaussian_unitary(psi_, g);
    return std::nullopt;
  }

  std::optional<std::string> ancilla() {
    if (psi_.n_modes + 1 > fock::kMaxModes) {
      return "more than " + std::to_string(fock::kMaxModes) + " oracle modes including ancillas";
    }
    psi_ = fock::append_vacuum(psi_);
    peak_ = std::max(peak_, psi_.n_modes);
    return std::nullopt;
  }

  void remove(std::size_t oracle_mode) {
    sys_.erase(std::find(sys_.begin(), sys_.end(), oracle_mode));
    for (auto &s : sys_) {
      s -= s > oracle_mode ? 1 : 0;
    }
  }

  std::optional<std::string> measure(const Instruction &ins, const RunRecord &rec) {
    const auto kind = ins.measure.kind;
    if (kind != MeasureKind::heterodyne && kind != MeasureKind::vacuum_projection) {
      return std::string("no oracle for ") + measure_keyword(kind) + " measurements";
    }
    const std::size_t k = ins.modes.size();
    std::vector<std::size_t> targets;
    for (auto m : ins.modes) {
      targets.push_back(sys_[m]);
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (psi_.n_modes == 1) {
        // projections need a spectator mode; an idle vacuum ancilla works
        if (auto why = ancilla()) {
          return why;
        }
      }
      const auto om = targets[j];
      if (kind == MeasureKind::heterodyne) {
        const auto proj = fock::project_coherent(psi_, om, rec.value(static_cast<Eigen::Index>(j)),
                                                 rec.value(static_cast<Eigen::Index>(j + k)));
        psi_ = proj.state;
        log_weight_ += std::log(proj.density);
      } else {
        const auto proj = fock::project_vacuum(psi_, om);
        psi_ = proj.state;
        log_weight_ += std::log(proj.probability);
      }
      remove(om);
      for (auto &t : targets) {
        t -= t > om ? 1 : 0;
      }
    }
    return std::nullopt;
  }

  std::size_t cutoff_;
  fock::FockState psi_;
  std::vector<std::size_t> sys_;
  std::size_t peak_ = 0;
  double log_weight_ = 0.0;
};

/// Static check: every construct has an oracle form and the oracle never
/// needs more than kMaxModes modes, counting ancillas.
inline std::optional<std::string> oracle_support(const Circuit &c) {
  if (c.init.kind == InitKind::explicit_state) {
    return "explicit initial states have no oracle preparation";
  }
  std::size_t total = c.n_modes + (c.init.kind == InitKind::thermal ? 1 : 0);
  std::size_t peak = total;
  for (const auto &ins : c.instructions) {
    switch (ins.op) {
      case Op::noise:
        return "classical noise has no pure dilation in the comparator";
      case Op::raw:
        return "raw channels have no oracle form";
      case Op::loss:
      case Op::amplifier:
        ++total;
        break;
      case Op::measure: {
        const auto kind = ins.measure.kind;
        if (kind != MeasureKind::heterodyne && kind != MeasureKind::vacuum_projection) {
          return std::string("no oracle for ") + measure_keyword(kind) + " measurements";
        }
        for (std::size_t k = 0; k < ins.modes.size(); ++k) {
          if (total == 1) {
            ++total;
            peak = std::max(peak, total);
          }
          --total;
        }
        break;
      }
      default:
        break;
    }
    peak = std::max(peak, total);
  }
  if (peak > fock::kMaxModes) {
    return "needs " + std::to_string(peak) + " oracle modes including ancillas; the oracle handles " +
           std::to_string(fock::kMaxModes);
  }
  return std::nullopt;
}

}  // namespace detail

/// Runs the circuit in the engine (posterior or sampled) and replays the
/// same outcomes through the oracle. Unsupported constructs give
/// supported = false with a reason rather than an error.
inline CompareReport compare(const Circuit &circuit, const RunMode &mode, std::size_t cutoff,
                             const Tolerances &tol = kDefaultTolerances) {
  CompareReport rep;
  rep.cutoff = cutoff;
  const RunResult engine = run(circuit, mode, tol);
  rep.engine_log_weight = engine.total_log_weight;
  rep.final_modes = engine.final_state.n();

  auto fail = [&](std::string why) {
    rep.reason = std::move(why);
    return rep;
  };
  if (auto why = detail::oracle_support(circuit)) {
    return fail(*why);
  }
  detail::OracleRun oracle(cutoff);
  if (auto why = oracle.init(circuit)) {
    return fail(*why);
  }
  Registers regs;
  std::size_t next_record = 0;
  for (const auto &ins : circuit.instructions) {
    const RunRecord *rec = nullptr;
    if (ins.op == Op::measure) {
      rec = &engine.records.at(next_record++);
    }
    if (auto why = oracle.step(ins, rec, regs)) {
      return fail(*why);
    }
    if (rec) {
      regs[rec->target] = rec->value;
    }
  }
  rep.supported = true;
  rep.oracle_modes = std::max(oracle.peak_modes(), circuit.n_modes);
  rep.oracle_log_weight = oracle.log_weight();
  rep.norm_deficit = oracle.norm_deficit();
  if (oracle.system_modes() > 0) {
    const auto mom = oracle.moments();
    rep.max_abs_diff_xi = (mom.xi - engine.final_state.xi()).cwiseAbs().maxCoeff();
    rep.max_abs_diff_gamma = (mom.gamma - engine.final_state.gamma()).cwiseAbs().maxCoeff();
  }
  return rep;
}

}  // namespace gaussim

#endif
