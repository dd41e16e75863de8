// Copyright 2026 The tritrace Authors
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

// tritrace: command-line front end.
//
//   tritrace types --k 4
//   tritrace trace --ensemble anderson --n 64 --k 6 --seed 7
//   tritrace clt --config clt.ini --workers 8
//   tritrace run --config experiment.ini
//
// Exit status: 0 success, 1 error, 2 statistical acceptance failure.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "tritrace.hpp"

namespace {

using namespace tritrace;

using cli::kExitError;
using cli::kExitOk;

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags that set config keys; identical across subcommands.
constexpr FlagSpec kFlags[] = {
    {"--k", "run.k", "power k (or a comma list)"},
    {"--k-list", "run.k_list", "comma-separated powers"},
    {"--n", "run.n", "matrix dimension"},
    {"--n-list", "run.n_list", "comma-separated dimensions"},
    {"--trials", "run.trials", "Monte Carlo trials"},
    {"--seed", "run.master_seed", "master seed (decimal or 0x hex)"},
    {"--alpha", "run.alpha", "growth exponent alpha"},
    {"--epsilon", "run.epsilon", "diagonal growth exponent epsilon"},
    {"--workers", "run.workers", "worker threads or 'auto'"},
    {"--output", "run.output", "output file"},
    {"--format", "run.format", "json or csv"},
    {"--input", "run.input", "matrix CSV (sub,diag,sup) for trace"},
    {"--k-max", "run.k_max", "cap on k"},
    {"--type-cache", "run.type_cache", "directory for cached type tables"},
    {"--ensemble", "ensemble.model", "model name"},
    {"--symmetric", "ensemble.symmetric", "true/false"},
    {"--beta", "ensemble.beta", "beta-Hermite beta"},
    {"--coupling", "ensemble.coupling", "independent_triples, d_from_f, independent_streams"},
    {"--kernel-variant", "ensemble.kernel_variant", "v or conductance"},
    {"--f-offset", "ensemble.f_offset", "d = offset + scale (a_prev + a)"},
    {"--f-scale", "ensemble.f_scale", "d = offset + scale (a_prev + a)"},
    {"--law-a", "laws.a", "law of a"},
    {"--law-d", "laws.d", "law of d"},
    {"--law-b", "laws.b", "law of b"},
    {"--law-v", "laws.v", "law of V (birth-death kernel)"},
    {"--law-u", "laws.u", "law of U (birth-death conductances)"},
    {"--target", "stats.target", "iid_mc, symmetric_degenerate or beta_hermite"},
    {"--replicas", "stats.replicas", "window replicas for i.i.d. targets"},
    {"--target-a", "stats.a", "limit a of the symmetric degenerate regime"},
    {"--var-eta", "stats.var_eta", "Var(eta)"},
    {"--var-zeta", "stats.var_zeta", "Var(zeta)"},
    {"--nu", "deviations.nu", "lambda_n = n^-nu"},
    {"--delta-list", "deviations.delta_list", "comma-separated thresholds"},
    {"--t-max", "deviations.t_max", "Legendre search bound"},
    {"--law", "deviations.law", "entry law for cramer"},
    {"--x-grid", "deviations.x_grid", "comma-separated x values"},
    {"--x-min", "deviations.x_min", "grid start"},
    {"--x-max", "deviations.x_max", "grid end"},
    {"--x-points", "deviations.x_points", "grid size"},
};

struct Invocation {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_flags(CLI::App* app, Invocation& inv) {
  app->add_option("--config", inv.config_path, "config file");
  for (const auto& f : kFlags) {
    app->add_option_function<std::string>(
        f.flag, [&inv, key = std::string(f.key)](const std::string& v) { inv.overrides[key] = v; },
        f.help);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traces of tridiagonal random matrices: circuit expansion and limit theorems"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Invocation inv;
  std::string chosen;
  for (const auto& name : known_commands()) {
    auto* sub = app.add_subcommand(name, "run the '" + name + "' command");
    add_flags(sub, inv);
    sub->callback([&chosen, name] { chosen = name; });
  }
  auto* run = app.add_subcommand("run", "run the command named in a config file");
  add_flags(run, inv);
  run->callback([&chosen] { chosen = "run"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    ConfigValues values;
    if (!inv.config_path.empty()) values = load_config_file(inv.config_path);
    if (chosen == "run") {
      if (inv.config_path.empty()) throw InvalidArgument("run needs --config");
    } else {
      set_override(values, "run.command", chosen);
    }
    for (const auto& [key, value] : inv.overrides) set_override(values, key, value);
    const RunConfig config = resolve_config(values);
    return cli::dispatch(config);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const DegenerateTarget& e) {
    std::cerr << "degenerate target: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
