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

#ifndef GAUSSIM_CIRCUIT_HPP
#define GAUSSIM_CIRCUIT_HPP

#include <cmath>
#include <cstddef>
#include <charconv>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaussim/channel.hpp"
#include "gaussim/errors.hpp"
#include "gaussim/linalg.hpp"
#include "gaussim/measurement.hpp"
#include "gaussim/state.hpp"

namespace gaussim {

/// Classical registers: one vector of recorded numbers per name.
using Registers = std::map<std::string, Vec>;

struct RegRef {
  std::string name;
  std::size_t index = 0;

  auto operator<=>(const RegRef &) const = default;
};

/// Shortest text (at most 17 significant digits) that reads back as the
/// same double.
inline std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// c₀ + Σ c_j·reg_j. Feedforward parameters are restricted to this form.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)

  static AffineExpr reg(std::string name, std::size_t index) {
    AffineExpr e;
    e.terms_[RegRef{std::move(name), index}] = 1.0;
    return e;
  }

  double constant() const { return constant_; }
  const std::map<RegRef, double> &terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  AffineExpr scaled(double k) const {
    AffineExpr e;
    e.constant_ = constant_ * k;
    for (const auto &[ref, c] : terms_) {
      e.add_term(ref, c * k);
    }
    return e;
  }

  friend AffineExpr operator+(const AffineExpr &a, const AffineExpr &b) {
    AffineExpr e = a;
    e.constant_ += b.constant_;
    for (const auto &[ref, c] : b.terms_) {
      e.add_term(ref, c);
    }
    return e;
  }
  friend AffineExpr operator-(const AffineExpr &a, const AffineExpr &b) { return a + b.scaled(-1.0); }
  friend AffineExpr operator-(const AffineExpr &a) { return a.scaled(-1.0); }
  friend bool operator==(const AffineExpr &, const AffineExpr &) = default;

  double evaluate(const Registers &regs) const {
    double v = constant_;
    for (const auto &[ref, c] : terms_) {
      const auto it = regs.find(ref.name);
      if (it == regs.end() || ref.index >= static_cast<std::size_t>(it->second.size())) {
        throw std::invalid_argument("register " + ref.name + "[" + std::to_string(ref.index) + "] has no value");
      }
      v += c * it->second(static_cast<Eigen::Index>(ref.index));
    }
    return v;
  }

  /// Canonical text: a bare number, or "(c + k*reg[i] + ...)".
  std::string to_string() const {
    if (terms_.empty()) {
      return format_number(constant_);
    }
    std::string s = "(" + format_number(constant_);
    for (const auto &[ref, c] : terms_) {
      s += " + " + format_number(c) + "*" + ref.name + "[" + std::to_string(ref.index) + "]";
    }
    return s + ")";
  }

 private:
  void add_term(const RegRef &ref, double c) {
    const double sum = terms_[ref] + c;
    if (sum == 0.0) {
      terms_.erase(ref);
    } else {
      terms_[ref] = sum;
    }
  }

  double constant_ = 0.0;
  std::map<RegRef, double> terms_;
};

enum class InitKind { vacuum, coherent, squeezed, thermal, two_mode_squeezed, explicit_state };

/// Initial-state descriptor. Modes not named by the descriptor start in
/// vacuum. `two_mode_squeezed` needs exactly two modes.
struct InitSpec {
  InitKind kind = InitKind::vacuum;
  std::size_t mode = 0;
  double q = 0.0;
  double p = 0.0;
  double r = 0.0;
  double nbar = 0.0;
  Vec xi;
  Mat gamma;
};

enum class Op { displacement, rotation, beamsplitter, squeezer, two_mode_squeezer, loss, amplifier, noise, raw, measure };

enum class MeasureKind { heterodyne, homodyne, eprdyne, dyne, vacuum_projection, absorption };

struct ParamValue {
  std::vector<AffineExpr> items;
  bool array = false;

  friend bool operator==(const ParamValue &, const ParamValue &) = default;
};

using Params = std::vector<std::pair<std::string, ParamValue>>;

struct Measure {
  MeasureKind kind = MeasureKind::heterodyne;
  Quadrature quad = Quadrature::q;
  double s = 0.0;
  Mat gamma;
  std::string target;
};

/// One circuit step. Modes are 0-based indices into the register as it
/// stands when the step executes; measured modes are removed and the
/// remaining ones keep their order. line/column point back into source text
/// (0 for circuits built in code).
struct Instruction {
  Op op = Op::displacement;
  std::vector<std::size_t> modes;
  Params params;
  Measure measure;
  int line = 0;
  int column = 0;
};

struct Circuit {
  std::size_t n_modes = 1;
  InitSpec init;
  std::vector<Instruction> instructions;
};

// ---------------------------------------------------------------------------
// Instruction tables

struct ParamSpec {
  const char *name;
  bool required;
  double default_value;
  bool array;
};

struct OpSpec {
  Op op;
  const char *keyword;
  /// 0 means "one or more"
  std::size_t arity;
  std::vector<ParamSpec> params;
};

inline const std::vector<OpSpec> &op_specs() {
  static const std::vector<OpSpec> specs = {
      {Op::displacement, "disp", 1, {{"q", false, 0.0, false}, {"p", false, 0.0, false}}},
      {Op::rotation, "rot", 1, {{"theta", true, 0.0, false}}},
      {Op::beamsplitter, "bs", 2, {{"theta", true, 0.0, false}, {"phi", false, 0.0, false}}},
      {Op::squeezer, "sq", 1, {{"r", true, 0.0, false}, {"phi", false, 0.0, false}}},
      {Op::two_mode_squeezer, "tmss", 2, {{"r", true, 0.0, false}}},
      {Op::loss, "loss", 1, {{"eta", true, 0.0, false}}},
      {Op::amplifier, "amp", 1, {{"gain", true, 0.0, false}}},
      {Op::noise, "noise", 1, {{"gqq", false, 0.0, false}, {"gpp", false, 0.0, false}, {"gqp", false, 0.0, false}}},
      {Op::raw, "raw", 0, {{"alpha", false, 0.0, true}, {"A", true, 0.0, true}, {"G", false, 0.0, true}}},
  };
  return specs;
}

inline const OpSpec &op_spec(Op op) {
  for (const auto &s : op_specs()) {
    if (s.op == op) {
      return s;
    }
  }
  throw std::invalid_argument("op_spec: no table entry");
}

inline const char *measure_keyword(MeasureKind k) {
  switch (k) {
    case MeasureKind::heterodyne:
      return "heterodyne";
    case MeasureKind::homodyne:
      return "homodyne";
    case MeasureKind::eprdyne:
      return "eprdyne";
    case MeasureKind::dyne:
      return "dyne";
    case MeasureKind::vacuum_projection:
      return "vacuumproj";
    case MeasureKind::absorption:
      return "absorption";
  }
  return "?";
}

/// Number of modes the measurement consumes (0 means "one or more").
inline std::size_t measure_arity(MeasureKind k) {
  switch (k) {
    case MeasureKind::heterodyne:
    case MeasureKind::dyne:
      return 0;
    case MeasureKind::eprdyne:
      return 2;
    default:
      return 1;
  }
}

/// Length of the register a measurement writes: the full 2m phase-space
/// outcome for dyne kinds, the single quadrature reading for homodyne, and
/// the photon count (always 0 when it succeeds) for the detector kinds.
inline std::size_t register_length(MeasureKind k, std::size_t modes) {
  switch (k) {
    case MeasureKind::heterodyne:
    case MeasureKind::eprdyne:
    case MeasureKind::dyne:
      return 2 * modes;
    default:
      return 1;
  }
}

inline std::size_t array_length(Op op, const std::string &name, std::size_t k) {
  if (op == Op::raw) {
    return name == "alpha" ? 2 * k : 4 * k * k;
  }
  return 1;
}

inline const ParamValue *find_param(const Instruction &ins, const std::string &name) {
  for (const auto &[n, v] : ins.params) {
    if (n == name) {
      return &v;
    }
  }
  return nullptr;
}

/// Fills defaulted parameters so every table entry is present, in table order.
inline Params canonical_params(Op op, std::size_t k, const Params &given) {
  Params out;
  for (const auto &ps : op_spec(op).params) {
    const ParamValue *v = nullptr;
    for (const auto &[n, val] : given) {
      if (n == ps.name) {
        v = &val;
      }
    }
    if (v) {
      out.emplace_back(ps.name, *v);
    } else if (!ps.required) {
      ParamValue d;
      d.array = ps.array;
      d.items.assign(ps.array ? array_length(op, ps.name, k) : 1, AffineExpr(ps.default_value));
      out.emplace_back(ps.name, std::move(d));
    } else {
      throw std::invalid_argument(std::string("missing required parameter '") + ps.name + "'");
    }
  }
  return out;
}

namespace detail {

inline double scalar(const Instruction &ins, const char *name, const Registers &regs) {
  const ParamValue *v = find_param(ins, name);
  if (!v || v->array || v->items.size() != 1) {
    throw std::invalid_argument(std::string("parameter '") + name + "' must be a scalar");
  }
  return v->items[0].evaluate(regs);
}

inline Vec array(const Instruction &ins, const char *name, const Registers &regs) {
  const ParamValue *v = find_param(ins, name);
  if (!v) {
    throw std::invalid_argument(std::string("missing parameter '") + name + "'");
  }
  Vec out(static_cast<Eigen::Index>(v->items.size()));
  for (std::size_t i = 0; i < v->items.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v->items[i].evaluate(regs);
  }
  return out;
}

inline Mat square_from_rows(const Vec &flat, Eigen::Index d) {
  if (flat.size() != d * d) {
    throw std::invalid_argument("matrix parameter has " + std::to_string(flat.size()) + " entries, expected " +
                                std::to_string(d * d));
  }
  Mat m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      m(i, j) = flat(i * d + j);
    }
  }
  return m;
}

inline bool all_constant(const Instruction &ins) {
  for (const auto &[n, v] : ins.params) {
    for (const auto &e : v.items) {
      if (!e.is_constant()) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// The local channel an instruction denotes once its parameters are known.
inline LocalChannel instantiate(const Instruction &ins, const Registers &regs) {
  const auto &m = ins.modes;
  using detail::scalar;
  switch (ins.op) {
    case Op::displacement:
      return local::displacement(m.at(0), scalar(ins, "q", regs), scalar(ins, "p", regs));
    case Op::rotation:
      return local::rotation(m.at(0), scalar(ins, "theta", regs));
    case Op::beamsplitter:
      return local::beamsplitter(m.at(0), m.at(1), scalar(ins, "theta", regs), scalar(ins, "phi", regs));
    case Op::squeezer:
      return local::squeezer(m.at(0), scalar(ins, "r", regs), scalar(ins, "phi", regs));
    case Op::two_mode_squeezer:
      return local::two_mode_squeezer(m.at(0), m.at(1), scalar(ins, "r", regs));
    case Op::loss:
      return local::loss(m.at(0), scalar(ins, "eta", regs));
    case Op::amplifier:
      return local::amplifier(m.at(0), scalar(ins, "gain", regs));
    case Op::noise: {
      Mat g(2, 2);
      const double qp = scalar(ins, "gqp", regs);
      g << scalar(ins, "gqq", regs), qp, qp, scalar(ins, "gpp", regs);
      return local::classical_noise(m.at(0), g);
    }
    case Op::raw: {
      const auto k = m.size();
      const auto d = static_cast<Eigen::Index>(2 * k);
      Vec alpha = detail::array(ins, "alpha", regs);
      if (alpha.size() != d) {
        throw std::invalid_argument("raw: alpha must have 2k entries");
      }
      Mat a = detail::square_from_rows(detail::array(ins, "A", regs), d);
      Mat g = detail::square_from_rows(detail::array(ins, "G", regs), d);
      return {m, GaussianChannel(k, k, std::move(alpha), std::move(a), std::move(g))};
    }
    case Op::measure:
      break;
  }
  throw std::invalid_argument("instantiate: measurement is not a channel");
}

inline GaussianState initial_state(const Circuit &c) {
  const auto &in = c.init;
  switch (in.kind) {
    case InitKind::vacuum:
      return vacuum(c.n_modes);
    case InitKind::coherent:
      return coherent(c.n_modes, in.mode, in.q, in.p);
    case InitKind::squeezed:
      return squeezed_vacuum(c.n_modes, in.mode, in.r);
    case InitKind::thermal:
      return thermal(c.n_modes, in.mode, in.nbar);
    case InitKind::two_mode_squeezed:
      if (c.n_modes != 2) {
        throw std::invalid_argument("two-mode squeezed initial state needs exactly 2 modes");
      }
      return two_mode_squeezed_vacuum(in.r);
    case InitKind::explicit_state:
      return GaussianState(in.xi, in.gamma);
  }
  throw std::invalid_argument("initial_state: unknown kind");
}

/// Builds the measurement spec (modes 0-based) for the dyne kinds.
inline MeasurementSpec dyne_spec(const Instruction &ins) {
  const auto &me = ins.measure;
  switch (me.kind) {
    case MeasureKind::heterodyne:
      return heterodyne_spec(ins.modes);
    case MeasureKind::homodyne:
      return homodyne_spec(ins.modes.at(0), me.quad, me.s);
    case MeasureKind::eprdyne:
      return epr_spec(ins.modes.at(0), ins.modes.at(1), me.s);
    case MeasureKind::dyne:
      return general_dyne_spec(ins.modes, me.gamma);
    default:
      break;
  }
  throw std::invalid_argument("dyne_spec: not a dyne measurement");
}

/// Register names and lengths in order of writing.
inline std::vector<std::pair<std::string, std::size_t>> registers(const Circuit &c) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto &ins : c.instructions) {
    if (ins.op == Op::measure) {
      out.emplace_back(ins.measure.target, register_length(ins.measure.kind, ins.modes.size()));
    }
  }
  return out;
}

/// Mode count after every instruction has executed.
inline std::size_t final_mode_count(const Circuit &c) {
  std::size_t n = c.n_modes;
  for (const auto &ins : c.instructions) {
    if (ins.op == Op::measure) {
      n -= ins.modes.size();
    }
  }
  return n;
}

namespace detail {

[[noreturn]] inline void semantic(const Instruction &ins, const std::string &msg) {
  throw SemanticError(msg, ins.line, ins.column);
}

inline void check_modes(const Instruction &ins, std::size_t n, std::size_t arity, const char *what) {
  if (ins.modes.empty() || (arity != 0 && ins.modes.size() != arity)) {
    semantic(ins, std::string(what) + " takes " + (arity ? std::to_string(arity) : std::string("at least one")) +
                      " mode(s), got " + std::to_string(ins.modes.size()));
  }
  std::set<std::size_t> seen;
  for (auto m : ins.modes) {
    if (m >= n) {
      semantic(ins, std::string(what) + ": unknown mode " + std::to_string(m + 1) + " (circuit has " +
                        std::to_string(n) + " modes here)");
    }
    if (!seen.insert(m).second) {
      semantic(ins, std::string(what) + ": mode " + std::to_string(m + 1) + " repeated");
    }
  }
}

inline void check_physical_covariance(const Instruction &ins, const Mat &gamma, const Tolerances &tol) {
  const auto report = check_physical(GaussianState(Vec::Zero(gamma.rows()), gamma), tol);
  if (!report.passed) {
    semantic(ins, "measurement covariance violates the uncertainty principle (min eigenvalue " +
                      format_number(report.min_eigenvalue) + ")");
  }
}

}  // namespace detail

/// Forward scan over the circuit. Throws SemanticError at the first
/// instruction that would reference a missing mode or register, has malformed
/// parameters, or (when all parameters are constant) denotes a non-CP map.
/// A circuit that passes never raises mode or register errors at run time.
inline void validate(const Circuit &c, const Tolerances &tol = kDefaultTolerances) {
  Instruction origin;
  if (c.n_modes == 0) {
    detail::semantic(origin, "circuit needs at least one mode");
  }
  try {
    const auto s0 = initial_state(c);
    if (c.init.kind != InitKind::vacuum && c.init.kind != InitKind::two_mode_squeezed &&
        c.init.kind != InitKind::explicit_state && c.init.mode >= c.n_modes) {
      throw std::invalid_argument("unknown mode " + std::to_string(c.init.mode + 1));
    }
    const auto report = check_physical(s0, tol);
    if (!report.passed) {
      throw std::invalid_argument("initial state is unphysical (min eigenvalue " +
                                  format_number(report.min_eigenvalue) + ")");
    }
  } catch (const std::invalid_argument &e) {
    detail::semantic(origin, std::string("init: ") + e.what());
  }

  std::size_t n = c.n_modes;
  std::map<std::string, std::size_t> written;
  for (const auto &ins : c.instructions) {
    if (ins.op == Op::measure) {
      const auto &me = ins.measure;
      const char *kw = measure_keyword(me.kind);
      detail::check_modes(ins, n, measure_arity(me.kind), kw);
      if (me.target.empty() || me.target == "pi") {
        detail::semantic(ins, "invalid register name '" + me.target + "'");
      }
      if (written.count(me.target)) {
        detail::semantic(ins, "register '" + me.target + "' is already written");
      }
      if (me.kind == MeasureKind::homodyne && !(me.s >= kHomodyneMinSqueezing && std::isfinite(me.s))) {
        detail::semantic(ins, "homodyne squeezing must be a finite number >= " + format_number(kHomodyneMinSqueezing));
      }
      if (me.kind == MeasureKind::eprdyne && !(me.s >= 0.0 && std::isfinite(me.s))) {
        detail::semantic(ins, "eprdyne squeezing must be finite and non-negative");
      }
      if (me.kind == MeasureKind::dyne) {
        const auto d = static_cast<Eigen::Index>(2 * ins.modes.size());
        if (me.gamma.rows() != d || me.gamma.cols() != d || !me.gamma.allFinite()) {
          detail::semantic(ins, "dyne: gamma must be a finite 2m x 2m matrix");
        }
        detail::check_physical_covariance(ins, me.gamma, tol);
      }
      written[me.target] = register_length(me.kind, ins.modes.size());
      n -= ins.modes.size();
      continue;
    }

    const auto &spec = op_spec(ins.op);
    detail::check_modes(ins, n, spec.arity, spec.keyword);
    if (ins.params.size() != spec.params.size()) {
      detail::semantic(ins, std::string(spec.keyword) + ": parameters not in canonical form");
    }
    for (std::size_t i = 0; i < spec.params.size(); ++i) {
      const auto &[name, value] = ins.params[i];
      const auto &ps = spec.params[i];
      if (name != ps.name || value.array != ps.array) {
        detail::semantic(ins, std::string(spec.keyword) + ": parameter '" + name + "' out of place");
      }
      const auto want = ps.array ? array_length(ins.op, name, ins.modes.size()) : 1;
      if (value.items.size() != want) {
        detail::semantic(ins, std::string(spec.keyword) + ": parameter '" + name + "' needs " + std::to_string(want) +
                                  " entries, got " + std::to_string(value.items.size()));
      }
      for (const auto &e : value.items) {
        if (!std::isfinite(e.constant())) {
          detail::semantic(ins, std::string(spec.keyword) + ": non-finite constant in '" + name + "'");
        }
        for (const auto &[ref, coeff] : e.terms()) {
          const auto it = written.find(ref.name);
          if (it == written.end()) {
            detail::semantic(ins, "register '" + ref.name + "' used before it is written");
          }
          if (ref.index >= it->second) {
            detail::semantic(ins, "register " + ref.name + "[" + std::to_string(ref.index) + "] out of range (length " +
                                      std::to_string(it->second) + ")");
          }
          if (!std::isfinite(coeff)) {
            detail::semantic(ins, std::string(spec.keyword) + ": non-finite coefficient in '" + name + "'");
          }
        }
      }
    }
    if (detail::all_constant(ins)) {
      try {
        const auto lc = instantiate(ins, {});
        const auto cp = validate_cp(lc.channel, tol);
        if (!cp.passed) {
          detail::semantic(ins, std::string(spec.keyword) + ": channel violates complete positivity (min eigenvalue " +
                                    format_number(cp.min_eigenvalue) + ")");
        }
      } catch (const std::invalid_argument &e) {
        detail::semantic(ins, std::string(spec.keyword) + ": " + e.what());
      }
    }
  }
}

}  // namespace gaussim

#endif
