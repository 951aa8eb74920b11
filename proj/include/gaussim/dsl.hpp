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

#ifndef GAUSSIM_DSL_HPP
#define GAUSSIM_DSL_HPP

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaussim/circuit.hpp"
#include "gaussim/errors.hpp"

// Text format for circuits (.gcirc). The grammar is documented in
// docs/GRAMMAR.md. Modes are 1-based in text and 0-based in Circuit.

namespace gaussim {

namespace dsl_detail {

enum class Tok { ident, integer, number, punct, arrow, end };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

inline std::string describe(const Token &t) {
  switch (t.kind) {
    case Tok::end:
      return "end of input";
    case Tok::arrow:
      return "'->'";
    default:
      return "'" + t.text + "'";
  }
}

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') {
        advance(1);
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::punct, "", 0.0, line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      t.kind = Tok::ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() &&
                                                               std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      bool integral = true;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        ++j;
      }
      if (j < src.size() && src[j] == '.') {
        integral = false;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          ++j;
        }
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) {
          ++k;
        }
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          integral = false;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
            ++j;
          }
        }
      }
      t.text = std::string(src.substr(i, j - i));
      const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      if (res.ec != std::errc() || !std::isfinite(t.value)) {
        throw SyntaxError("number '" + t.text + "' out of range", line, col);
      }
      t.kind = integral ? Tok::integer : Tok::number;
      advance(j - i);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      t.kind = Tok::arrow;
      t.text = "->";
      advance(2);
    } else if (std::string_view(";=[](),+-*/").find(c) != std::string_view::npos) {
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::end, "", 0.0, line, col});
  return out;
}

struct Item {
  // either a mode (1-based in text) or name=value
  std::optional<std::size_t> mode;
  std::string name;
  ParamValue value;
  std::optional<std::string> word;  // bare identifier value such as quad=q
  Token at;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Circuit parse() {
    Circuit c;
    expect_ident("modes");
    const Token n = next();
    if (n.kind != Tok::integer || n.value < 1 || n.value > 1e6) {
      fail(n, "expected a positive integer mode count");
    }
    c.n_modes = static_cast<std::size_t>(n.value);
    expect_punct(";");
    if (peek().kind == Tok::ident && peek().text == "init") {
      c.init = parse_init(c.n_modes);
    }
    while (peek().kind != Tok::end) {
      c.instructions.push_back(parse_instruction());
    }
    return c;
  }

 private:
  const Token &peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  [[noreturn]] static void fail(const Token &t, const std::string &msg) {
    throw SyntaxError(msg + ", found " + describe(t), t.line, t.column);
  }
  [[noreturn]] static void semantic(const Token &t, const std::string &msg) {
    throw SemanticError(msg, t.line, t.column);
  }

  void expect_punct(const char *p) {
    const Token t = next();
    if (t.kind != Tok::punct || t.text != p) {
      fail(t, std::string("expected '") + p + "'");
    }
  }

  void expect_ident(const char *w) {
    const Token t = next();
    if (t.kind != Tok::ident || t.text != w) {
      fail(t, std::string("expected '") + w + "'");
    }
  }

  bool at_punct(const char *p) const { return peek().kind == Tok::punct && peek().text == p; }

  // expr := term (('+' | '-') term)*
  AffineExpr expr() {
    AffineExpr e = term();
    while (at_punct("+") || at_punct("-")) {
      const bool plus = next().text == "+";
      const AffineExpr rhs = term();
      e = plus ? e + rhs : e - rhs;
    }
    return e;
  }

  // term := unary (('*' | '/') unary)*
  AffineExpr term() {
    AffineExpr e = unary();
    while (at_punct("*") || at_punct("/")) {
      const Token op = next();
      const AffineExpr rhs = unary();
      if (op.text == "*") {
        if (e.is_constant()) {
          e = rhs.scaled(e.constant());
        } else if (rhs.is_constant()) {
          e = e.scaled(rhs.constant());
        } else {
          semantic(op, "product of two register expressions is not affine");
        }
      } else {
        if (!rhs.is_constant()) {
          semantic(op, "division by a register expression is not affine");
        }
        if (rhs.constant() == 0.0) {
          semantic(op, "division by zero");
        }
        e = e.scaled(1.0 / rhs.constant());
      }
      for (const auto &[ref, c] : e.terms()) {
        if (!std::isfinite(c)) {
          semantic(op, "non-finite coefficient");
        }
      }
      if (!std::isfinite(e.constant())) {
        semantic(op, "non-finite constant");
      }
    }
    return e;
  }

  AffineExpr unary() {
    if (at_punct("-")) {
      next();
      return -unary();
    }
    if (at_punct("+")) {
      next();
      return unary();
    }
    return primary();
  }

  AffineExpr primary() {
    const Token t = next();
    if (t.kind == Tok::integer || t.kind == Tok::number) {
      return AffineExpr(t.value);
    }
    if (t.kind == Tok::punct && t.text == "(") {
      AffineExpr e = expr();
      expect_punct(")");
      return e;
    }
    if (t.kind == Tok::ident) {
      if (t.text == "pi") {
        return AffineExpr(std::numbers::pi);
      }
      std::size_t index = 0;
      if (at_punct("[")) {
        next();
        const Token k = next();
        if (k.kind != Tok::integer || k.value > 1e9) {
          fail(k, "expected a register index");
        }
        index = static_cast<std::size_t>(k.value);
        expect_punct("]");
      }
      return AffineExpr::reg(t.text, index);
    }
    fail(t, "expected a number, register or '('");
  }

  ParamValue value() {
    ParamValue v;
    if (at_punct("[")) {
      next();
      v.array = true;
      if (!at_punct("]")) {
        v.items.push_back(expr());
        while (at_punct(",")) {
          next();
          v.items.push_back(expr());
        }
      }
      expect_punct("]");
    } else {
      v.items.push_back(expr());
    }
    return v;
  }

  std::vector<Item> items(bool stop_at_arrow) {
    std::vector<Item> out;
    while (!at_punct(";") && !(stop_at_arrow && peek().kind == Tok::arrow)) {
      const Token t = next();
      Item it;
      it.at = t;
      if (t.kind == Tok::integer) {
        if (t.value < 1 || t.value > 1e6) {
          semantic(t, "modes are numbered from 1");
        }
        it.mode = static_cast<std::size_t>(t.value) - 1;
      } else if (t.kind == Tok::ident) {
        expect_punct("=");
        it.name = t.text;
        if (t.text == "quad") {
          const Token w = next();
          if (w.kind != Tok::ident || (w.text != "q" && w.text != "p")) {
            fail(w, "expected 'q' or 'p'");
          }
          it.word = w.text;
        } else {
          it.value = value();
        }
      } else {
        fail(t, stop_at_arrow ? "expected a mode, name=value or '->'" : "expected a mode, name=value or ';'");
      }
      out.push_back(std::move(it));
    }
    return out;
  }

  struct Split {
    std::vector<std::size_t> modes;
    std::vector<Item> named;
  };

  static Split split(std::vector<Item> its, const std::vector<std::string> &allowed, const char *what) {
    Split s;
    for (auto &it : its) {
      if (it.mode) {
        s.modes.push_back(*it.mode);
        continue;
      }
      bool ok = false;
      for (const auto &a : allowed) {
        ok = ok || a == it.name;
      }
      if (!ok) {
        semantic(it.at, std::string(what) + ": unknown parameter '" + it.name + "'");
      }
      for (const auto &prev : s.named) {
        if (prev.name == it.name) {
          semantic(it.at, std::string(what) + ": parameter '" + it.name + "' given twice");
        }
      }
      s.named.push_back(std::move(it));
    }
    return s;
  }

  static const Item *get(const Split &s, const char *name) {
    for (const auto &it : s.named) {
      if (it.name == name) {
        return &it;
      }
    }
    return nullptr;
  }

  static double constant(const Item &it, const char *what) {
    if (it.word || it.value.array || it.value.items.size() != 1 || !it.value.items[0].is_constant()) {
      semantic(it.at, std::string(what) + ": '" + it.name + "' must be a constant number");
    }
    return it.value.items[0].constant();
  }

  static Vec constant_array(const Item &it, const char *what) {
    if (!it.value.array) {
      semantic(it.at, std::string(what) + ": '" + it.name + "' must be an array");
    }
    Vec v(static_cast<Eigen::Index>(it.value.items.size()));
    for (std::size_t i = 0; i < it.value.items.size(); ++i) {
      if (!it.value.items[i].is_constant()) {
        semantic(it.at, std::string(what) + ": '" + it.name + "' must be constant");
      }
      v(static_cast<Eigen::Index>(i)) = it.value.items[i].constant();
    }
    return v;
  }

  static Mat square(const Item &it, const Vec &flat, const char *what) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (d * d != flat.size() || d == 0) {
      semantic(it.at, std::string(what) + ": '" + it.name + "' must list a square matrix row by row");
    }
    return detail::square_from_rows(flat, d);
  }

  InitSpec parse_init(std::size_t n) {
    next();
    const Token kind = next();
    if (kind.kind != Tok::ident) {
      fail(kind, "expected an initial-state kind");
    }
    InitSpec in;
    const auto its = items(false);
    expect_punct(";");
    auto one_mode = [&](const Split &s) {
      if (s.modes.size() != 1) {
        semantic(kind, "init " + kind.text + " takes exactly one mode");
      }
      return s.modes[0];
    };
    auto no_modes = [&](const Split &s) {
      if (!s.modes.empty()) {
        semantic(kind, "init " + kind.text + " takes no modes");
      }
    };
    auto need = [&](const Split &s, const char *name) -> const Item & {
      const Item *it = get(s, name);
      if (!it) {
        semantic(kind, "init " + kind.text + ": missing '" + name + "'");
      }
      return *it;
    };
    const char *what = "init";
    if (kind.text == "vacuum") {
      no_modes(split(its, {}, what));
    } else if (kind.text == "coherent") {
      const auto s = split(its, {"q", "p"}, what);
      in.kind = InitKind::coherent;
      in.mode = one_mode(s);
      in.q = get(s, "q") ? constant(*get(s, "q"), what) : 0.0;
      in.p = get(s, "p") ? constant(*get(s, "p"), what) : 0.0;
    } else if (kind.text == "squeezed") {
      const auto s = split(its, {"r"}, what);
      in.kind = InitKind::squeezed;
      in.mode = one_mode(s);
      in.r = constant(need(s, "r"), what);
    } else if (kind.text == "thermal") {
      const auto s = split(its, {"nbar"}, what);
      in.kind = InitKind::thermal;
      in.mode = one_mode(s);
      in.nbar = constant(need(s, "nbar"), what);
    } else if (kind.text == "tmss") {
      const auto s = split(its, {"r"}, what);
      no_modes(s);
      in.kind = InitKind::two_mode_squeezed;
      in.r = constant(need(s, "r"), what);
      if (n != 2) {
        semantic(kind, "init tmss needs exactly 2 modes");
      }
    } else if (kind.text == "explicit") {
      const auto s = split(its, {"xi", "gamma"}, what);
      no_modes(s);
      in.kind = InitKind::explicit_state;
      in.xi = constant_array(need(s, "xi"), what);
      in.gamma = square(need(s, "gamma"), constant_array(need(s, "gamma"), what), what);
      if (in.xi.size() != static_cast<Eigen::Index>(2 * n) || in.gamma.rows() != in.xi.size()) {
        semantic(kind, "init explicit: xi must have 2n entries and gamma 4n^2");
      }
    } else {
      fail(kind, "expected vacuum, coherent, squeezed, thermal, tmss or explicit");
    }
    if (in.kind != InitKind::vacuum && in.kind != InitKind::two_mode_squeezed &&
        in.kind != InitKind::explicit_state && in.mode >= n) {
      semantic(kind, "init: unknown mode " + std::to_string(in.mode + 1));
    }
    return in;
  }

  Instruction parse_instruction() {
    const Token kw = next();
    if (kw.kind != Tok::ident) {
      fail(kw, "expected an instruction keyword");
    }
    Instruction ins;
    ins.line = kw.line;
    ins.column = kw.column;
    if (kw.text == "measure") {
      return parse_measure(std::move(ins));
    }
    const OpSpec *spec = nullptr;
    for (const auto &s : op_specs()) {
      if (kw.text == s.keyword) {
        spec = &s;
      }
    }
    if (!spec) {
      fail(kw, "expected an instruction keyword");
    }
    std::vector<std::string> allowed;
    for (const auto &p : spec->params) {
      allowed.emplace_back(p.name);
    }
    auto s = split(items(false), allowed, spec->keyword);
    expect_punct(";");
    ins.op = spec->op;
    ins.modes = s.modes;
    Params given;
    for (auto &it : s.named) {
      given.emplace_back(it.name, std::move(it.value));
    }
    try {
      ins.params = canonical_params(ins.op, ins.modes.size(), given);
    } catch (const std::invalid_argument &e) {
      semantic(kw, std::string(spec->keyword) + ": " + e.what());
    }
    return ins;
  }

  Instruction parse_measure(Instruction ins) {
    const Token kind = next();
    ins.op = Op::measure;
    auto &me = ins.measure;
    const char *what = "measure";
    std::vector<std::string> allowed;
    if (kind.kind == Tok::ident && kind.text == "heterodyne") {
      me.kind = MeasureKind::heterodyne;
    } else if (kind.kind == Tok::ident && kind.text == "homodyne") {
      me.kind = MeasureKind::homodyne;
      allowed = {"quad", "s"};
    } else if (kind.kind == Tok::ident && kind.text == "eprdyne") {
      me.kind = MeasureKind::eprdyne;
      allowed = {"s"};
    } else if (kind.kind == Tok::ident && kind.text == "dyne") {
      me.kind = MeasureKind::dyne;
      allowed = {"gamma"};
    } else if (kind.kind == Tok::ident && kind.text == "vacuumproj") {
      me.kind = MeasureKind::vacuum_projection;
    } else if (kind.kind == Tok::ident && kind.text == "absorption") {
      me.kind = MeasureKind::absorption;
    } else {
      fail(kind, "expected heterodyne, homodyne, eprdyne, dyne, vacuumproj or absorption");
    }
    const auto s = split(items(true), allowed, what);
    const Token arrow = next();
    if (arrow.kind != Tok::arrow) {
      fail(arrow, "expected '->'");
    }
    const Token target = next();
    if (target.kind != Tok::ident) {
      fail(target, "expected a register name");
    }
    expect_punct(";");
    ins.modes = s.modes;
    me.target = target.text;
    if (me.kind == MeasureKind::homodyne) {
      const Item *q = get(s, "quad");
      me.quad = q && q->word == "p" ? Quadrature::p : Quadrature::q;
      me.s = get(s, "s") ? constant(*get(s, "s"), what) : kHomodyneDefaultSqueezing;
    } else if (me.kind == MeasureKind::eprdyne) {
      const Item *sq = get(s, "s");
      if (!sq) {
        semantic(kind, "eprdyne: missing 's'");
      }
      me.s = constant(*sq, what);
    } else if (me.kind == MeasureKind::dyne) {
      const Item *g = get(s, "gamma");
      if (!g) {
        semantic(kind, "dyne: missing 'gamma'");
      }
      me.gamma = square(*g, constant_array(*g, what), what);
    }
    return ins;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline std::string array_text(const Vec &v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    s += (i ? ", " : "") + format_number(v(i));
  }
  return s + "]";
}

inline std::string matrix_text(const Mat &m) {
  Vec flat(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      flat(i * m.cols() + j) = m(i, j);
    }
  }
  return array_text(flat);
}

inline std::string modes_text(const std::vector<std::size_t> &modes) {
  std::string s;
  for (auto m : modes) {
    s += " " + std::to_string(m + 1);
  }
  return s;
}

}  // namespace dsl_detail

/// Parses and statically validates circuit text. Throws SyntaxError or
/// SemanticError, both carrying line and column.
inline Circuit parse(std::string_view text, const Tolerances &tol = kDefaultTolerances) {
  Circuit c = dsl_detail::Parser(text).parse();
  validate(c, tol);
  return c;
}

/// Canonical text form. Numbers are written with 17 significant digits, so
/// parse(serialize(c)) reproduces c exactly.
inline std::string serialize(const Circuit &c) {
  using dsl_detail::array_text;
  using dsl_detail::matrix_text;
  using dsl_detail::modes_text;
  std::string out = "modes " + std::to_string(c.n_modes) + ";\n";
  const auto &in = c.init;
  const std::string mode = " " + std::to_string(in.mode + 1);
  switch (in.kind) {
    case InitKind::vacuum:
      break;
    case InitKind::coherent:
      out += "init coherent" + mode + " q=" + format_number(in.q) + " p=" + format_number(in.p) + ";\n";
      break;
    case InitKind::squeezed:
      out += "init squeezed" + mode + " r=" + format_number(in.r) + ";\n";
      break;
    case InitKind::thermal:
      out += "init thermal" + mode + " nbar=" + format_number(in.nbar) + ";\n";
      break;
    case InitKind::two_mode_squeezed:
      out += "init tmss r=" + format_number(in.r) + ";\n";
      break;
    case InitKind::explicit_state:
      out += "init explicit xi=" + array_text(in.xi) + " gamma=" + matrix_text(in.gamma) + ";\n";
      break;
  }
  for (const auto &ins : c.instructions) {
    if (ins.op == Op::measure) {
      const auto &me = ins.measure;
      out += std::string("measure ") + measure_keyword(me.kind) + modes_text(ins.modes);
      if (me.kind == MeasureKind::homodyne) {
        out += std::string(" quad=") + (me.quad == Quadrature::q ? "q" : "p") + " s=" + format_number(me.s);
      } else if (me.kind == MeasureKind::eprdyne) {
        out += " s=" + format_number(me.s);
      } else if (me.kind == MeasureKind::dyne) {
        out += " gamma=" + matrix_text(me.gamma);
      }
      out += " -> " + me.target + ";\n";
      continue;
    }
    out += op_spec(ins.op).keyword + modes_text(ins.modes);
    for (const auto &[name, v] : ins.params) {
      out += " " + name + "=";
      if (v.array) {
        out += "[";
        for (std::size_t i = 0; i < v.items.size(); ++i) {
          out += (i ? ", " : "") + v.items[i].to_string();
        }
        out += "]";
      } else {
        out += v.items.at(0).to_string();
      }
    }
    out += ";\n";
  }
  return out;
}

}  // namespace gaussim

#endif
