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

#pragma once

// Run configuration: a sectioned key = value text format, command-line
// overrides on the same keys, and resolution into a typed RunConfig.
//
//   # comment
//   [run]
//   command = clt
//   n = 4000
//   k_list = 1, 2, 3
//   [ensemble]
//   model = anderson
//   [laws]
//   d = rademacher
//
// Keys before the first section header belong to [run].

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tritrace/circuits.hpp"
#include "tritrace/covariance.hpp"
#include "tritrace/ensembles.hpp"
#include "tritrace/error.hpp"
#include "tritrace/laws.hpp"
#include "tritrace/parallel.hpp"

namespace tritrace {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// A raw value and the config line it came from (0 for command-line flags).
struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// Raw values keyed by "section.key".
using ConfigValues = std::map<std::string, ConfigEntry>;

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "run.command",         "run.k",               "run.k_list",
      "run.n",               "run.n_list",          "run.trials",
      "run.master_seed",     "run.alpha",           "run.epsilon",
      "run.workers",         "run.output",          "run.format",
      "run.input",           "run.k_max",           "run.type_cache",
      "ensemble.model",      "ensemble.symmetric",  "ensemble.beta",
      "ensemble.coupling",   "ensemble.kernel_variant",
      "ensemble.f_offset",   "ensemble.f_scale",
      "laws.a",              "laws.d",              "laws.b",
      "laws.v",              "laws.u",
      "stats.target",        "stats.replicas",      "stats.a",
      "stats.var_eta",       "stats.var_zeta",
      "deviations.nu",       "deviations.delta_list", "deviations.t_max",
      "deviations.law",      "deviations.x_grid",   "deviations.x_min",
      "deviations.x_max",    "deviations.x_points",
  };
  return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

inline ConfigValues parse_config_text(const std::string& text) {
  ConfigValues values;
  std::istringstream in(text);
  std::string raw;
  std::string section = "run";
  int line = 0;
  static const std::set<std::string> sections = {"run", "ensemble", "laws", "stats", "deviations"};
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (!sections.count(section)) throw ParseError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "missing key");
    if (value.empty()) throw ParseError(line, "missing value for '" + key + "'");
    const std::string full = section + "." + key;
    if (!known_config_keys().count(full)) {
      throw ParseError(line, "unknown key '" + key + "' in [" + section + "]");
    }
    if (values.count(full)) throw ParseError(line, "duplicate key '" + key + "'");
    values[full] = ConfigEntry{value, line};
  }
  if (values.empty()) throw ParseError(std::max(line, 1), "config contains no settings");
  return values;
}

inline ConfigValues load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

/// Sets a value from the command line; overrides any file value.
inline void set_override(ConfigValues& values, const std::string& key, const std::string& value) {
  if (!known_config_keys().count(key)) throw InvalidArgument("unknown config key '" + key + "'");
  values[key] = ConfigEntry{value, 0};
}

enum class OutputFormat { kJson, kCsv };

inline std::string to_string(OutputFormat f) { return f == OutputFormat::kJson ? "json" : "csv"; }

struct RunConfig {
  std::string command;
  EnsembleSpec ensemble;
  std::vector<int> k_list;
  std::size_t n = 0;
  std::vector<std::size_t> n_list;
  std::size_t trials = 10000;
  std::uint64_t master_seed = kDefaultSeed;
  double alpha = 0.0;
  double epsilon = 0.0;
  unsigned workers = 0;  // 0 = auto
  std::string output_path;
  OutputFormat format = OutputFormat::kJson;
  std::string input_path;
  int k_max = kDefaultMaxPower;
  std::string type_cache;
  std::optional<LambdaRegime> target;
  std::size_t replicas = 100000;
  DegenerateParams degenerate;
  double nu = 0.5;
  std::vector<double> delta_list;
  double t_max = 50.0;
  EntryLaw cramer_law = law::Rademacher{};
  std::vector<double> x_grid;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands = {"types", "trace", "simulate", "clt",
                                                    "cov",   "mdp",   "cramer",   "dump-sample"};
  return commands;
}

namespace detail {

[[noreturn]] inline void config_error(const ConfigEntry& entry, const std::string& key,
                                      const std::string& message) {
  if (entry.line > 0) throw ParseError(entry.line, key + ": " + message);
  throw InvalidArgument(key + ": " + message);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const ConfigValues& values) : values_(values) {}

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const ConfigEntry& entry(const std::string& key) const { return values_.at(key); }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? entry(key).value : fallback;
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return to_real(key, entry(key).value);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    return to_unsigned(key, entry(key).value);
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entry(key).value;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    config_error(entry(key), key, "expected a boolean, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    for (const auto& item : split_list(entry(key).value)) out.push_back(to_real(key, item));
    if (out.empty()) config_error(entry(key), key, "empty list");
    return out;
  }

  std::vector<std::uint64_t> unsigned_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    if (!has(key)) return out;
    for (const auto& item : split_list(entry(key).value)) out.push_back(to_unsigned(key, item));
    if (out.empty()) config_error(entry(key), key, "empty list");
    return out;
  }

  EntryLaw entry_law(const std::string& key, const EntryLaw& fallback) const {
    if (!has(key)) return fallback;
    try {
      return parse_law(entry(key).value);
    } catch (const InvalidArgument& e) {
      config_error(entry(key), key, e.what());
    }
  }

  template <class Fn>
  auto parsed(const std::string& key, Fn&& fn) const {
    try {
      return fn(entry(key).value);
    } catch (const InvalidArgument& e) {
      config_error(entry(key), key, e.what());
    }
  }

 private:
  double to_real(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
      config_error(entry(key), key, "expected a finite number, got '" + v + "'");
    }
    return x;
  }

  std::uint64_t to_unsigned(const std::string& key, const std::string& v) const {
    if (v.empty() || v.front() == '-' || v.front() == '+') {
      config_error(entry(key), key, "expected a nonnegative integer, got '" + v + "'");
    }
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 0);
    if (end != v.c_str() + v.size() || errno == ERANGE) {
      config_error(entry(key), key, "expected a nonnegative integer, got '" + v + "'");
    }
    return x;
  }

  const ConfigValues& values_;
};

inline EnsembleSpec base_spec(Model model, const Reader& r) {
  switch (model) {
    case Model::kAnderson: return EnsembleSpec::anderson();
    case Model::kHatanoNelson: return EnsembleSpec::hatano_nelson();
    case Model::kBirthDeathKernel: return EnsembleSpec::birth_death_kernel();
    case Model::kBirthDeathQ: return EnsembleSpec::birth_death_q();
    case Model::kBetaHermite: return EnsembleSpec::beta_hermite(r.real("ensemble.beta", 2.0));
    case Model::kGenericIid: {
      const bool symmetric = r.boolean("ensemble.symmetric", false);
      return EnsembleSpec::generic_iid(
          law::Uniform{0.5, 1.5}, law::Rademacher{}, law::Uniform{0.5, 1.5}, symmetric,
          symmetric ? Coupling::kIndependentStreams : Coupling::kIndependentTriples);
    }
  }
  return EnsembleSpec{};
}

inline int checked_power(const Reader& r, const std::string& key, std::uint64_t v) {
  if (v < 1 || v > 64) config_error(r.entry(key), key, "powers must lie in [1, 64]");
  return static_cast<int>(v);
}

}  // namespace detail

inline EnsembleSpec resolve_ensemble(const ConfigValues& values) {
  detail::Reader r(values);
  const Model model =
      r.has("ensemble.model") ? r.parsed("ensemble.model", parse_model) : Model::kAnderson;
  EnsembleSpec spec = detail::base_spec(model, r);
  spec.symmetric = r.boolean("ensemble.symmetric", spec.symmetric);
  spec.beta = r.real("ensemble.beta", spec.beta);
  if (r.has("ensemble.coupling")) spec.coupling = r.parsed("ensemble.coupling", parse_coupling);
  if (r.has("ensemble.kernel_variant")) {
    spec.kernel_variant = r.parsed("ensemble.kernel_variant", parse_kernel_variant);
  }
  spec.f.offset = r.real("ensemble.f_offset", spec.f.offset);
  spec.f.scale = r.real("ensemble.f_scale", spec.f.scale);
  spec.laws.a = r.entry_law("laws.a", spec.laws.a);
  spec.laws.d = r.entry_law("laws.d", spec.laws.d);
  spec.laws.b = r.entry_law("laws.b", spec.laws.b);
  spec.laws.v = r.entry_law("laws.v", spec.laws.v);
  spec.laws.u = r.entry_law("laws.u", spec.laws.u);
  try {
    validate(spec);
  } catch (const InvalidArgument& e) {
    const std::string key = r.has("ensemble.model") ? "ensemble.model" : "";
    if (!key.empty() && r.entry(key).line > 0) throw ParseError(r.entry(key).line, e.what());
    throw;
  }
  return spec;
}

/// Typed configuration with defaults applied and per-command requirements
/// checked. Workers fall back to TRITRACE_WORKERS, then auto.
inline RunConfig resolve_config(const ConfigValues& values) {
  detail::Reader r(values);
  RunConfig c;
  if (!r.has("run.command")) throw InvalidArgument("missing run.command");
  c.command = r.text("run.command", "");
  bool known = false;
  for (const auto& name : known_commands()) known = known || name == c.command;
  if (!known) detail::config_error(r.entry("run.command"), "run.command", "unknown command '" + c.command + "'");

  c.ensemble = resolve_ensemble(values);
  c.k_max = static_cast<int>(r.unsigned_integer("run.k_max", kDefaultMaxPower));
  if (c.k_max < 1 || c.k_max > 24) {
    detail::config_error(r.entry("run.k_max"), "run.k_max", "must lie in [1, 24]");
  }
  if (r.has("run.k") && r.has("run.k_list")) {
    detail::config_error(r.entry("run.k_list"), "run.k_list", "give either k or k_list");
  }
  for (auto v : r.unsigned_list(r.has("run.k") ? "run.k" : "run.k_list")) {
    c.k_list.push_back(detail::checked_power(r, r.has("run.k") ? "run.k" : "run.k_list", v));
  }
  c.n = r.unsigned_integer("run.n", 0);
  for (auto v : r.unsigned_list("run.n_list")) c.n_list.push_back(v);
  c.trials = r.unsigned_integer("run.trials", c.trials);
  c.master_seed = r.unsigned_integer("run.master_seed", kDefaultSeed);
  const bool growth = c.ensemble.model == Model::kBetaHermite;
  c.alpha = r.real("run.alpha", growth ? 0.5 : 0.0);
  c.epsilon = r.real("run.epsilon", growth ? 0.5 : 0.0);
  if (r.has("run.workers")) {
    c.workers = r.parsed("run.workers", parse_workers);
  } else {
    c.workers = workers_from_environment();
  }
  c.output_path = r.text("run.output", "");
  if (r.has("run.format")) {
    const auto f = r.text("run.format", "json");
    if (f != "json" && f != "csv") detail::config_error(r.entry("run.format"), "run.format", "expected json or csv");
    c.format = f == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
  }
  c.input_path = r.text("run.input", "");
  c.type_cache = r.text("run.type_cache", "");

  if (r.has("stats.target")) {
    c.target = r.parsed("stats.target", [](const std::string& s) {
      if (s == "iid_mc") return LambdaRegime::kIidMc;
      if (s == "symmetric_degenerate") return LambdaRegime::kSymmetricDegenerate;
      if (s == "beta_hermite") return LambdaRegime::kBetaHermite;
      throw InvalidArgument("expected iid_mc, symmetric_degenerate or beta_hermite");
    });
  }
  c.replicas = r.unsigned_integer("stats.replicas", c.replicas);
  c.degenerate.a = r.real("stats.a", 1.0);
  c.degenerate.var_eta = r.real("stats.var_eta", 0.0);
  c.degenerate.var_zeta = r.real("stats.var_zeta", 0.0);
  c.degenerate.alpha = c.alpha;
  c.degenerate.epsilon = c.epsilon;

  c.nu = r.real("deviations.nu", 0.5);
  c.delta_list = r.reals("deviations.delta_list");
  c.t_max = r.real("deviations.t_max", 50.0);
  c.cramer_law = r.entry_law("deviations.law", c.cramer_law);
  if (r.has("deviations.x_grid")) {
    c.x_grid = r.reals("deviations.x_grid");
  } else if (r.has("deviations.x_min") || r.has("deviations.x_max")) {
    if (!r.has("deviations.x_min") || !r.has("deviations.x_max")) {
      throw InvalidArgument("deviations.x_min and deviations.x_max go together");
    }
    const double lo = r.real("deviations.x_min", 0.0);
    const double hi = r.real("deviations.x_max", 0.0);
    const auto points = r.unsigned_integer("deviations.x_points", 101);
    if (points < 2 || !(hi > lo)) throw InvalidArgument("x grid needs x_max > x_min and >= 2 points");
    for (std::uint64_t i = 0; i < points; ++i) {
      c.x_grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
  }

  // Per-command requirements.
  const auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("command '" + c.command + "' requires " + what);
  };
  const std::string& cmd = c.command;
  if (cmd == "types" || cmd == "trace" || cmd == "simulate" || cmd == "clt" || cmd == "cov" ||
      cmd == "mdp") {
    require(!c.k_list.empty(), "k or k_list");
  }
  if (cmd == "trace") require(c.n >= 1 || !c.input_path.empty(), "n or input");
  if (cmd == "simulate" || cmd == "clt" || cmd == "cov" || cmd == "dump-sample") {
    require(c.n >= 2, "n >= 2");
  }
  if (cmd == "mdp") {
    require(c.k_list.size() == 1, "a single k");
    if (c.n_list.empty() && c.n >= 2) c.n_list.push_back(c.n);
    require(!c.n_list.empty(), "n_list or n");
  }
  if (cmd == "cramer") require(!c.x_grid.empty(), "x_grid or x_min/x_max");
  if (cmd == "clt" || cmd == "cov" || cmd == "simulate") require(c.trials >= 2, "trials >= 2");
  for (int k : c.k_list) {
    if (k > c.k_max) throw InvalidArgument("k=" + std::to_string(k) + " exceeds k_max=" + std::to_string(c.k_max));
  }
  return c;
}

}  // namespace tritrace
