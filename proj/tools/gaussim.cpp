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

// gaussim: run, sample, validate, bench and compare Gaussian circuits.
//
// Exit codes:
//   0  success
//   1  usage error, unreadable input, or malformed outcomes/channel file
//   2  circuit syntax or semantic error
//   3  the circuit conditions on a photodetector click (non-Gaussian outcome)
//   4  any other runtime failure (rejected channel, impossible outcome, ...)
//
// stdout carries JSON only; diagnostics go to stderr.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gaussim/bench.hpp"
#include "gaussim/compare.hpp"
#include "gaussim/dsl.hpp"
#include "gaussim/engine.hpp"
#include "gaussim/json_io.hpp"

namespace {

using gaussim::json::json;

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kBoundary = 3, kRuntime = 4 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string &path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error &e) {
    throw InputError(path + ": " + e.what());
  }
}

struct Common {
  double psd = gaussim::kDefaultTolerances.psd;
  double symplectic = gaussim::kDefaultTolerances.symplectic;
  double log_underflow = gaussim::kDefaultTolerances.log_underflow;

  gaussim::Tolerances tol() const { return {psd, symplectic, log_underflow}; }

  void attach(CLI::App *cmd) {
    cmd->add_option("--psd-tol", psd, "PSD tolerance for CP and physicality checks")->capture_default_str();
    cmd->add_option("--symplectic-tol", symplectic, "tolerance for the symplectic test")->capture_default_str();
    cmd->add_option("--log-underflow", log_underflow, "log-probability below which outcomes are impossible")
        ->capture_default_str();
  }
};

gaussim::Circuit load_circuit(const std::string &path, const gaussim::Tolerances &tol) {
  return gaussim::parse(read_file(path), tol);
}

void emit(const json &j) { std::cout << j.dump() << "\n"; }

int report_error(const std::string &path, const std::exception &e) {
  if (const auto *se = dynamic_cast<const gaussim::SyntaxError *>(&e)) {
    std::cerr << path << ":" << se->what() << " [syntax error]\n";
    return kParse;
  }
  if (const auto *se = dynamic_cast<const gaussim::SemanticError *>(&e)) {
    std::cerr << path << ":" << se->what() << " [semantic error]\n";
    return kParse;
  }
  if (const auto *ng = dynamic_cast<const gaussim::NonGaussianOutcome *>(&e)) {
    std::cerr << "gaussim: " << ng->what() << "\n"
              << "gaussim: the simulation stops here by design: the Gaussian formalism covers vacuum projection "
                 "(no click) but not conditioning on a click.\n";
    emit(gaussim::json::boundary(*ng));
    return kBoundary;
  }
  if (dynamic_cast<const InputError *>(&e) || dynamic_cast<const std::invalid_argument *>(&e) ||
      dynamic_cast<const json::exception *>(&e)) {
    std::cerr << "gaussim: " << e.what() << "\n";
    return kUsage;
  }
  std::cerr << "gaussim: " << e.what() << "\n";
  return kRuntime;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Gaussian quantum circuit simulator"};
  app.require_subcommand(1);

  Common common;
  std::string circuit_path;
  std::string outcomes_path;
  std::string channel_path;
  std::uint64_t seed = 0;
  std::size_t shots = 1;
  unsigned threads = 1;
  std::vector<std::size_t> modes{8, 16, 32, 64, 128, 256, 512};
  std::size_t depth = 100;
  std::size_t cutoff = 30;

  auto *run = app.add_subcommand("run", "run a circuit, post-selecting the outcomes given in --outcomes");
  run->add_option("circuit", circuit_path, ".gcirc file")->required();
  run->add_option("--outcomes", outcomes_path, "JSON object mapping register names to outcomes");
  common.attach(run);

  auto *sample = app.add_subcommand("sample", "sample shots; one JSON result per line");
  sample->add_option("circuit", circuit_path, ".gcirc file")->required();
  sample->add_option("--shots", shots, "number of shots")->check(CLI::PositiveNumber)->capture_default_str();
  sample->add_option("--seed", seed, "base seed")->required();
  sample->add_option("--threads", threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  common.attach(sample);

  auto *validate = app.add_subcommand("validate", "report complete positivity and symplecticity of a channel");
  validate->add_option("channel", channel_path, "channel JSON file")->required();
  common.attach(validate);

  auto *bench = app.add_subcommand("bench", "time random symplectic + loss circuits at several sizes");
  bench->add_option("--modes", modes, "mode counts")->delimiter(',')->capture_default_str();
  bench->add_option("--depth", depth, "layers per circuit")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--seed", seed, "seed")->required();

  auto *compare = app.add_subcommand("compare", "compare engine moments with the Fock-space oracle");
  compare->add_option("circuit", circuit_path, ".gcirc file")->required();
  compare->add_option("--cutoff", cutoff, "photon-number cutoff")
      ->check(CLI::Range(std::size_t{1}, gaussim::fock::kMaxCutoff))
      ->capture_default_str();
  auto *cmp_outcomes = compare->add_option("--outcomes", outcomes_path, "post-selected outcomes");
  auto *cmp_seed = compare->add_option("--seed", seed, "sample outcomes with this seed instead");
  cmp_outcomes->excludes(cmp_seed);
  common.attach(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  const auto tol = common.tol();
  const json tol_json = gaussim::json::tolerances(tol);
  const std::string &source = circuit_path.empty() ? channel_path : circuit_path;
  try {
    if (*run) {
      const auto circuit = load_circuit(circuit_path, tol);
      gaussim::Posterior post;
      if (!outcomes_path.empty()) {
        post.outcomes = gaussim::json::to_outcomes(read_json(outcomes_path));
      }
      emit(gaussim::json::result(gaussim::run(circuit, post, tol), tol));
    } else if (*sample) {
      const auto circuit = load_circuit(circuit_path, tol);
      for (const auto &r : gaussim::run_shots(circuit, shots, seed, threads, tol)) {
        emit(gaussim::json::result(r, tol));
      }
    } else if (*validate) {
      const auto ch = gaussim::json::to_channel(read_json(channel_path));
      const auto cp = gaussim::validate_cp(ch, tol);
      json j = {{"schema", gaussim::json::kSchema}, {"n_in", ch.n_in}, {"n_out", ch.n_out}};
      j["completely_positive"] = cp.passed;
      j["min_eigenvalue"] = cp.min_eigenvalue;
      j["symplectic"] = ch.n_in == ch.n_out ? json(gaussim::is_symplectic(ch.a, tol)) : json(nullptr);
      j["noiseless"] = ch.g.cwiseAbs().maxCoeff() == 0.0;
      j["tolerances"] = tol_json;
      emit(j);
    } else if (*bench) {
      json points = json::array();
      std::vector<gaussim::bench::Point> pts;
      for (auto n : modes) {
        const auto p = gaussim::bench::run_point(n, depth, seed);
        std::cerr << "n=" << n << " " << p.seconds << " s\n";
        pts.push_back(p);
        points.push_back({{"modes", p.modes},
                          {"depth", p.depth},
                          {"seconds", p.seconds},
                          {"seconds_per_layer", p.seconds_per_layer},
                          {"state_bytes", p.state_bytes},
                          {"independent_scalars", gaussim::state_size(p.modes).total},
                          {"min_eigenvalue", p.min_eigenvalue}});
      }
      json j = {{"schema", gaussim::json::kSchema}, {"seed", seed}, {"points", points}};
      j["fitted_exponent"] = pts.size() >= 2 ? json(gaussim::bench::fitted_exponent(pts)) : json(nullptr);
      emit(j);
    } else if (*compare) {
      const auto circuit = load_circuit(circuit_path, tol);
      gaussim::RunMode mode = gaussim::Posterior{};
      if (*cmp_seed) {
        mode = gaussim::Sampled{seed, 0};
      } else if (!outcomes_path.empty()) {
        mode = gaussim::Posterior{gaussim::json::to_outcomes(read_json(outcomes_path))};
      }
      const auto rep = gaussim::compare(circuit, mode, cutoff, tol);
      json j = {{"schema", gaussim::json::kSchema},
                {"supported", rep.supported},
                {"reason", rep.reason},
                {"cutoff", rep.cutoff},
                {"oracle_modes", rep.oracle_modes},
                {"final_modes", rep.final_modes},
                {"max_abs_diff_xi", rep.max_abs_diff_xi},
                {"max_abs_diff_gamma", rep.max_abs_diff_gamma},
                {"engine_log_weight", rep.engine_log_weight},
                {"oracle_log_weight", rep.oracle_log_weight},
                {"norm_deficit", rep.norm_deficit},
                {"tolerances", tol_json}};
      emit(j);
    }
  } catch (const std::exception &e) {
    return report_error(source, e);
  }
  return kOk;
}
