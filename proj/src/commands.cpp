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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "tritrace.hpp"

namespace tritrace::cli {
namespace {

constexpr double kTraceTolerance = 1e-9;

// ---------------------------------------------------------------- output

void emit(const RunConfig& c, const std::string& content) {
  if (c.output_path.empty()) {
    std::cout << content;
  } else {
    write_text_file(c.output_path, content);
    std::cerr << "wrote " << c.output_path << "\n";
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fmt(double x, int precision = 6) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", precision, x);
  return buffer;
}

std::string vec_text(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

// ---------------------------------------------------------------- type tables

std::string cache_directory(const RunConfig& c) {
  if (!c.type_cache.empty()) return c.type_cache;
  const char* env = std::getenv("TRITRACE_CACHE_DIR");
  return env ? env : "";
}

// Loads type tables from the cache directory when present and valid, and
// stores freshly computed ones there.
void prepare_types(const RunConfig& c) {
  const std::string dir = cache_directory(c);
  for (int k : c.k_list) {
    auto& cache = TypeTableCache::instance();
    if (cache.contains(k)) continue;
    if (dir.empty()) {
      cache.get(k, c.k_max);
      continue;
    }
    const auto path = std::filesystem::path(dir) / ("types_k" + std::to_string(k) + ".jsonl");
    bool loaded = false;
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      try {
        loaded = cache.install(k, read_type_table(in));
      } catch (const ParseError&) {
        loaded = false;
      }
      if (!loaded) std::cerr << "warning: ignoring invalid type cache " << path << "\n";
    }
    if (!loaded) {
      const auto& table = cache.get(k, c.k_max);
      std::ostringstream out;
      write_type_table(out, table);
      write_text_file(path.string(), out.str());
    }
  }
}

// ---------------------------------------------------------------- commands

int cmd_types(const RunConfig& c) {
  prepare_types(c);
  if (!c.output_path.empty()) {
    if (c.format == OutputFormat::kCsv) {
      CsvTable table(c, {"k", "l", "m", "n", "count"});
      for (int k : c.k_list) {
        for (const auto& t : circuit_types(k)) {
          table.cell(t.k).cell(t.l).cell('"' + vec_text(t.m) + '"').cell('"' + vec_text(t.n) + '"');
          table.cell(t.count);
          table.end_row();
        }
      }
      emit(c, table.str());
    } else {
      std::ostringstream out;
      for (int k : c.k_list) write_type_table(out, circuit_types(k));
      emit(c, out.str());
    }
    return kExitOk;
  }
  std::cout << "k\tl\tm\tn\tcount\n";
  for (int k : c.k_list) {
    for (const auto& t : circuit_types(k)) {
      std::cout << t.k << "\t" << t.l << "\t" << vec_text(t.m) << "\t" << vec_text(t.n) << "\t"
                << t.count << "\n";
    }
  }
  return kExitOk;
}

int cmd_trace(const RunConfig& c) {
  prepare_types(c);
  TridiagonalMatrix q = [&] {
    if (!c.input_path.empty()) {
      std::ifstream in(c.input_path);
      if (!in) throw InvalidArgument("cannot open '" + c.input_path + "'");
      return read_matrix_csv(in);
    }
    return sample_matrix(c.ensemble, c.n, c.master_seed);
  }();
  Json doc = document_header(c);
  doc["n"] = q.size();
  Json rows = Json::array();
  bool agree = true;
  for (int k : c.k_list) {
    const double expansion = trace_power_expansion(q, k, circuit_types(k));
    const double direct = trace_power_direct(q, k);
    const double difference = expansion - direct;
    const double relative = std::abs(difference) / (1.0 + std::abs(direct));
    const bool ok = relative <= kTraceTolerance;
    agree = agree && ok;
    std::cout << "k=" << k << " expansion=" << format_number(expansion)
              << " direct=" << format_number(direct) << " difference=" << format_number(difference)
              << " relative=" << fmt(relative, 3) << (ok ? "" : "  EXCEEDS 1e-9") << "\n";
    Json row;
    row["k"] = k;
    row["expansion"] = json_number(expansion);
    row["direct"] = json_number(direct);
    if (q.size() <= kDenseMaxDimension) row["dense"] = json_number(trace_power_dense(q, k));
    row["difference"] = json_number(difference);
    row["relative_difference"] = json_number(relative);
    rows.push_back(row);
  }
  doc["traces"] = rows;
  if (!c.output_path.empty()) write_text_file(c.output_path, dump(doc));
  return agree ? kExitOk : kExitRejected;
}

TraceRun trace_run(const RunConfig& c) {
  return TraceRun{c.n, c.k_list, c.trials, c.master_seed, c.workers};
}

int cmd_simulate(const RunConfig& c) {
  prepare_types(c);
  const auto samples = mc_traces(c.ensemble, trace_run(c), c.alpha, c.epsilon);
  if (c.format == OutputFormat::kCsv) {
    std::vector<std::string> columns{"trial"};
    for (int k : c.k_list) columns.push_back("k" + std::to_string(k));
    CsvTable table(c, columns);
    for (std::size_t t = 0; t < samples.trials; ++t) {
      table.cell(static_cast<std::uint64_t>(t));
      for (std::size_t j = 0; j < samples.width(); ++j) table.cell(samples.at(t, j));
      table.end_row();
    }
    emit(c, table.str());
  } else {
    Json doc = document_header(c);
    doc["scaling_exponent"] = json_numbers(samples.exponents);
    doc["center"] = json_numbers(samples.center);
    doc["exact_centering"] = samples.exact_centering;
    Json rows = Json::array();
    for (std::size_t t = 0; t < samples.trials; ++t) {
      std::vector<double> row;
      for (std::size_t j = 0; j < samples.width(); ++j) row.push_back(samples.at(t, j));
      rows.push_back(json_numbers(row));
    }
    doc["samples"] = rows;
    emit(c, dump(doc));
  }
  return kExitOk;
}

LambdaParams target_params(const RunConfig& c) {
  LambdaParams p;
  if (c.target) {
    p.regime = *c.target;
  } else if (c.ensemble.model == Model::kBetaHermite) {
    p.regime = LambdaRegime::kBetaHermite;
  } else if (c.ensemble.iid_type()) {
    p.regime = LambdaRegime::kIidMc;
  } else {
    throw InvalidArgument("no default covariance target for this ensemble; set stats.target");
  }
  p.beta = c.ensemble.beta;
  p.degenerate = c.degenerate;
  p.spec = c.ensemble;
  p.replicas = c.replicas;
  p.seed = c.master_seed;
  p.workers = c.workers;
  return p;
}

// |x - target| within max(relative * |target|, sigmas * se).
bool within(double x, double target, double se, double relative, double sigmas) {
  return std::abs(x - target) <= std::max(relative * std::abs(target), sigmas * se);
}

void print_matrix(const std::string& title, const std::vector<int>& k_list, const Matrix& m) {
  std::cout << title << "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::cout << "  k=" << k_list[i] << ":";
    for (double v : m[i]) std::cout << " " << fmt(v);
    std::cout << "\n";
  }
}

int cmd_clt(const RunConfig& c) {
  prepare_types(c);
  const auto params = target_params(c);
  const auto target = covariance_target(c.k_list, params);
  const auto samples = mc_traces(c.ensemble, trace_run(c), c.alpha, c.epsilon);
  const auto report = normality_report(samples, target);
  bool accepted = true;
  Json checks = Json::array();
  for (std::size_t j = 0; j < c.k_list.size(); ++j) {
    const double se = std::hypot(report.variance_se[j], target.se[j][j]);
    const bool variance_ok = within(report.variance[j], target.value[j][j], se, 0.10, 4.0);
    const bool ks_ok = !(report.ks_distance[j] > report.ks_critical);
    accepted = accepted && variance_ok && ks_ok;
    Json check;
    check["k"] = c.k_list[j];
    check["variance_within_10pct_or_4se"] = variance_ok;
    check["ks_below_1pct_critical"] = ks_ok;
    checks.push_back(check);
    std::cout << "k=" << c.k_list[j] << " variance=" << fmt(report.variance[j]) << " (se "
              << fmt(report.variance_se[j], 3) << ") target=" << fmt(target.value[j][j])
              << " skew=" << fmt(report.skewness[j], 3)
              << " exkurt=" << fmt(report.excess_kurtosis[j], 3)
              << " ks=" << fmt(report.ks_distance[j], 4) << " (crit " << fmt(report.ks_critical, 4)
              << ")" << (variance_ok && ks_ok ? "" : "  REJECTED") << "\n";
  }
  if (c.format == OutputFormat::kCsv) {
    CsvTable table(c, {"k", "scaling_exponent", "mean", "mean_se", "variance", "variance_se",
                       "target_variance", "skewness", "skewness_se", "excess_kurtosis",
                       "excess_kurtosis_se", "ks_distance", "ks_critical_1pct"});
    for (std::size_t j = 0; j < c.k_list.size(); ++j) {
      table.cell(c.k_list[j]).cell(report.scaling_exponent[j]).cell(report.mean[j]);
      table.cell(report.mean_se[j]).cell(report.variance[j]).cell(report.variance_se[j]);
      table.cell(report.target_variance[j]).cell(report.skewness[j]).cell(report.skewness_se[j]);
      table.cell(report.excess_kurtosis[j]).cell(report.excess_kurtosis_se[j]);
      table.cell(report.ks_distance[j]).cell(report.ks_critical);
      table.end_row();
    }
    if (!c.output_path.empty()) write_text_file(c.output_path, table.str());
  } else if (!c.output_path.empty()) {
    Json doc = document_header(c);
    doc["target"] = to_json(target);
    doc["report"] = to_json(report);
    doc["checks"] = checks;
    doc["accepted"] = accepted;
    write_text_file(c.output_path, dump(doc));
  }
  return accepted ? kExitOk : kExitRejected;
}

int cmd_cov(const RunConfig& c) {
  prepare_types(c);
  const auto params = target_params(c);
  const auto target = covariance_target(c.k_list, params);
  const auto samples = mc_traces(c.ensemble, trace_run(c), c.alpha, c.epsilon);
  const auto empirical = empirical_target(samples);
  print_matrix("target (" + to_string(target.source) + "):", c.k_list, target.value);
  print_matrix("empirical:", c.k_list, empirical.value);
  bool accepted = true;
  const std::size_t r = c.k_list.size();
  Matrix ok = square_matrix(r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const double se = std::hypot(empirical.se[i][j], target.se[i][j]);
      const bool pass = within(empirical.value[i][j], target.value[i][j], se, 0.10, 4.0);
      ok[i][j] = pass ? 1.0 : 0.0;
      accepted = accepted && pass;
    }
  }
  std::cout << (accepted ? "all entries within max(10%, 4 se)\n" : "some entries REJECTED\n");
  if (!c.output_path.empty()) {
    if (c.format == OutputFormat::kCsv) {
      CsvTable table(c, {"k_i", "k_j", "target", "target_se", "empirical", "empirical_se", "ok"});
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
          table.cell(c.k_list[i]).cell(c.k_list[j]).cell(target.value[i][j]).cell(target.se[i][j]);
          table.cell(empirical.value[i][j]).cell(empirical.se[i][j]).cell(ok[i][j] > 0 ? 1 : 0);
          table.end_row();
        }
      }
      write_text_file(c.output_path, table.str());
    } else {
      Json doc = document_header(c);
      doc["target"] = to_json(target);
      doc["empirical"] = to_json(empirical);
      doc["accepted"] = accepted;
      write_text_file(c.output_path, dump(doc));
    }
  }
  return accepted ? kExitOk : kExitRejected;
}

int cmd_mdp(const RunConfig& c) {
  prepare_types(c);
  MdpOptions options;
  options.nu = c.nu;
  options.n_list = c.n_list;
  options.delta_list = c.delta_list;
  options.trials = c.trials;
  options.master_seed = c.master_seed;
  options.workers = c.workers;
  options.dk_replicas = c.replicas;
  const auto estimates = mdp_check(c.ensemble, c.k_list.front(), options);
  bool accepted = true;
  for (const auto& e : estimates) {
    const bool judged = !e.low_count && !e.zero_count && e.delta > 0.0;
    const bool pass = !judged || std::abs(e.empirical_rate - e.predicted_rate) <= 0.25 * e.predicted_rate;
    accepted = accepted && pass;
    std::cout << "n=" << e.n << " delta=" << fmt(e.delta) << " tail=" << e.tail_count << "/"
              << e.trials << " empirical=" << fmt(e.empirical_rate)
              << " predicted=" << fmt(e.predicted_rate)
              << (rate_flags(e).empty() ? "" : " [" + rate_flags(e) + "]")
              << (pass ? "" : "  REJECTED") << "\n";
  }
  if (!c.output_path.empty()) {
    if (c.format == OutputFormat::kCsv) {
      CsvTable table(c, {"n", "nu", "delta", "tail_prob", "empirical_rate", "predicted_rate",
                         "trials", "flags"});
      for (const auto& e : estimates) {
        table.cell(static_cast<std::uint64_t>(e.n)).cell(e.nu).cell(e.delta).cell(e.tail_prob);
        table.cell(e.empirical_rate).cell(e.predicted_rate).cell(static_cast<std::uint64_t>(e.trials));
        table.cell(rate_flags(e));
        table.end_row();
      }
      write_text_file(c.output_path, table.str());
    } else {
      Json doc = document_header(c);
      Json rows = Json::array();
      for (const auto& e : estimates) rows.push_back(to_json(e));
      doc["estimates"] = rows;
      doc["accepted"] = accepted;
      write_text_file(c.output_path, dump(doc));
    }
  }
  return accepted ? kExitOk : kExitRejected;
}

int cmd_cramer(const RunConfig& c) {
  const auto rate = cramer_rate_k1(c.cramer_law, c.x_grid, c.t_max);
  if (rate.any_boundary_hit()) {
    std::cerr << "warning: supremum reached |t| = t_max at some grid points; rate may be low\n";
  }
  if (c.format == OutputFormat::kCsv || c.output_path.empty()) {
    CsvTable table(c, {"x", "I"});
    for (std::size_t i = 0; i < rate.grid.size(); ++i) {
      table.cell(rate.grid[i]).cell(rate.rate[i]);
      table.end_row();
    }
    emit(c, table.str());
  } else {
    Json doc = document_header(c);
    doc["cramer"] = to_json(rate);
    emit(c, dump(doc));
  }
  return kExitOk;
}

int cmd_dump_sample(const RunConfig& c) {
  const auto q = sample_matrix(c.ensemble, c.n, c.master_seed);
  std::string content = "# tritrace " + std::string(kVersion) + "\n# config " + to_json(c).dump() +
                        "\n" + matrix_csv(q);
  emit(c, content);
  return kExitOk;
}

}  // namespace

int dispatch(const RunConfig& c) {
  if (c.command == "types") return cmd_types(c);
  if (c.command == "trace") return cmd_trace(c);
  if (c.command == "simulate") return cmd_simulate(c);
  if (c.command == "clt") return cmd_clt(c);
  if (c.command == "cov") return cmd_cov(c);
  if (c.command == "mdp") return cmd_mdp(c);
  if (c.command == "cramer") return cmd_cramer(c);
  if (c.command == "dump-sample") return cmd_dump_sample(c);
  throw InvalidArgument("unknown command '" + c.command + "'");
}

}  // namespace tritrace::cli
