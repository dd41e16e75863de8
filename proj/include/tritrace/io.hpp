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

// Serialization: JSON documents and CSV tables that carry the version and
// resolved configuration, JSON-lines type tables, and matrix CSV files.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tritrace/circuits.hpp"
#include "tritrace/config.hpp"
#include "tritrace/covariance.hpp"
#include "tritrace/deviations.hpp"
#include "tritrace/error.hpp"
#include "tritrace/laws.hpp"
#include "tritrace/normality.hpp"
#include "tritrace/tridiagonal.hpp"
#include "tritrace/version.hpp"

namespace tritrace {

using Json = nlohmann::ordered_json;

/// Non-finite values become strings ("inf", "-inf", "nan") so documents stay valid JSON.
inline Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline Json json_numbers(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(json_number(x));
  return out;
}

inline Json json_matrix(const Matrix& m) {
  Json out = Json::array();
  for (const auto& row : m) out.push_back(json_numbers(row));
  return out;
}

inline Json to_json(const EnsembleSpec& spec) {
  Json j;
  j["model"] = to_string(spec.model);
  j["symmetric"] = spec.symmetric;
  switch (spec.model) {
    case Model::kAnderson: j["d"] = to_string(spec.laws.d); break;
    case Model::kHatanoNelson:
      j["a"] = to_string(spec.laws.a);
      j["d"] = to_string(spec.laws.d);
      j["b"] = to_string(spec.laws.b);
      break;
    case Model::kBirthDeathKernel:
      j["kernel_variant"] = to_string(spec.kernel_variant);
      if (spec.kernel_variant == KernelVariant::kV) {
        j["v"] = to_string(spec.laws.v);
      } else {
        j["u"] = to_string(spec.laws.u);
      }
      break;
    case Model::kBirthDeathQ:
      j["a"] = to_string(spec.laws.a);
      if (!spec.symmetric) j["b"] = to_string(spec.laws.b);
      break;
    case Model::kBetaHermite: j["beta"] = json_number(spec.beta); break;
    case Model::kGenericIid:
      j["coupling"] = to_string(spec.coupling);
      j["a"] = to_string(spec.laws.a);
      if (!spec.symmetric) j["b"] = to_string(spec.laws.b);
      if (spec.coupling == Coupling::kDFromF) {
        j["f_offset"] = json_number(spec.f.offset);
        j["f_scale"] = json_number(spec.f.scale);
      } else {
        j["d"] = to_string(spec.laws.d);
      }
      break;
  }
  return j;
}

/// The resolved configuration as embedded in output files. Worker count and
/// output path are left out: they do not affect results.
inline Json to_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["ensemble"] = to_json(c.ensemble);
  j["k_list"] = c.k_list;
  j["n"] = c.n;
  j["n_list"] = c.n_list;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["alpha"] = json_number(c.alpha);
  j["epsilon"] = json_number(c.epsilon);
  j["format"] = to_string(c.format);
  j["k_max"] = c.k_max;
  if (!c.input_path.empty()) j["input"] = c.input_path;
  if (c.target) j["target"] = to_string(*c.target);
  j["replicas"] = c.replicas;
  if (c.target == LambdaRegime::kSymmetricDegenerate) {
    j["a"] = json_number(c.degenerate.a);
    j["var_eta"] = json_number(c.degenerate.var_eta);
    j["var_zeta"] = json_number(c.degenerate.var_zeta);
  }
  j["nu"] = json_number(c.nu);
  j["delta_list"] = json_numbers(c.delta_list);
  j["t_max"] = json_number(c.t_max);
  j["law"] = to_string(c.cramer_law);
  j["x_grid"] = json_numbers(c.x_grid);
  return j;
}

/// {"version": ..., "config": ...} header shared by every output document.
inline Json document_header(const RunConfig& c) {
  Json j;
  j["tritrace_version"] = kVersion;
  j["config"] = to_json(c);
  return j;
}

inline Json to_json(const CircuitType& t) {
  Json j;
  j["k"] = t.k;
  j["l"] = t.l;
  j["m"] = t.m;
  j["n"] = t.n;
  j["count"] = t.count;
  return j;
}

inline Json to_json(const MomentReport& r) {
  Json j;
  j["k_list"] = r.k_list;
  j["trials"] = r.trials;
  j["n"] = r.n;
  j["scaling_exponent"] = json_numbers(r.scaling_exponent);
  j["mean"] = json_numbers(r.mean);
  j["variance"] = json_numbers(r.variance);
  j["target_variance"] = json_numbers(r.target_variance);
  j["covariance"] = json_matrix(r.covariance);
  j["skewness"] = json_numbers(r.skewness);
  j["excess_kurtosis"] = json_numbers(r.excess_kurtosis);
  j["ks_distance"] = json_numbers(r.ks_distance);
  j["ks_critical_1pct"] = json_number(r.ks_critical);
  Json se;
  se["mean"] = json_numbers(r.mean_se);
  se["variance"] = json_numbers(r.variance_se);
  se["skewness"] = json_numbers(r.skewness_se);
  se["excess_kurtosis"] = json_numbers(r.excess_kurtosis_se);
  se["covariance"] = json_matrix(r.covariance_se);
  j["mc_standard_errors"] = se;
  return j;
}

inline Json to_json(const CovarianceTarget& t) {
  Json j;
  j["source"] = to_string(t.source);
  j["k_list"] = t.k_list;
  j["value"] = json_matrix(t.value);
  j["se"] = json_matrix(t.se);
  j["detail"] = t.detail;
  return j;
}

inline Json to_json(const RateEstimate& e) {
  Json j;
  j["n"] = e.n;
  j["nu"] = json_number(e.nu);
  j["delta"] = json_number(e.delta);
  j["tail_count"] = e.tail_count;
  j["tail_prob"] = json_number(e.tail_prob);
  j["empirical_rate"] = json_number(e.empirical_rate);
  j["predicted_rate"] = json_number(e.predicted_rate);
  j["trials"] = e.trials;
  j["low_count"] = e.low_count;
  j["zero_count"] = e.zero_count;
  return j;
}

inline std::string rate_flags(const RateEstimate& e) {
  std::string flags;
  if (e.low_count) flags += "low_count";
  if (e.zero_count) flags += flags.empty() ? "zero_count" : ";zero_count";
  return flags;
}

inline Json to_json(const CramerRate& c) {
  Json j;
  j["support_bounds"] = {json_number(c.support_lo), json_number(c.support_hi)};
  j["t_max"] = json_number(c.t_max);
  j["x"] = json_numbers(c.grid);
  j["rate"] = json_numbers(c.rate);
  j["t"] = json_numbers(c.mgf_grid);
  j["infinite"] = c.infinite;
  j["boundary_hit"] = c.boundary_hit;
  return j;
}

/// A CSV table whose first two lines are '#' comments carrying the version
/// and the resolved configuration.
class CsvTable {
 public:
  CsvTable(const RunConfig& config, std::vector<std::string> columns)
      : columns_(std::move(columns)) {
    out_ << "# tritrace " << kVersion << "\n";
    out_ << "# config " << to_json(config).dump() << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
    out_ << "\n";
  }

  CsvTable& cell(double x) { return raw(format_number(x)); }
  CsvTable& cell(std::uint64_t x) { return raw(std::to_string(x)); }
  CsvTable& cell(int x) { return raw(std::to_string(x)); }
  CsvTable& cell(const std::string& s) { return raw(s); }

  void end_row() {
    if (cells_ != columns_.size()) throw InvalidArgument("csv row has wrong number of cells");
    out_ << "\n";
    cells_ = 0;
  }

  std::string str() const { return out_.str(); }

 private:
  CsvTable& raw(const std::string& s) {
    out_ << (cells_ ? "," : "") << s;
    ++cells_;
    return *this;
  }

  std::vector<std::string> columns_;
  std::ostringstream out_;
  std::size_t cells_ = 0;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const auto temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << content;
    if (!out) throw InvalidArgument("write failed for '" + path + "'");
  }
  std::filesystem::rename(temp, target);
}

/// One JSON object per line, one line per type.
inline void write_type_table(std::ostream& out, const std::vector<CircuitType>& types) {
  for (const auto& t : types) out << to_json_line(t) << "\n";
}

inline std::vector<CircuitType> read_type_table(std::istream& in) {
  std::vector<CircuitType> types;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CircuitType t;
      t.k = j.at("k").get<int>();
      t.l = j.at("l").get<int>();
      t.m = j.at("m").get<std::vector<int>>();
      t.n = j.at("n").get<std::vector<int>>();
      t.count = j.at("count").get<std::uint64_t>();
      types.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(number, std::string("bad type record: ") + e.what());
    }
  }
  return types;
}

/// Matrix CSV: header "sub,diag,sup", row i holds a_{i-1}, d_i, b_i with the
/// first sub cell and the last sup cell empty.
inline std::string matrix_csv(const TridiagonalMatrix& q) {
  std::ostringstream out;
  out << "sub,diag,sup\n";
  const std::size_t n = q.size();
  for (std::size_t i = 1; i <= n; ++i) {
    out << (i > 1 ? format_number(q.a(i - 1)) : "") << "," << format_number(q.d(i)) << ","
        << (i < n ? format_number(q.b(i)) : "") << "\n";
  }
  return out.str();
}

inline TridiagonalMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  int number = 0;
  std::vector<double> sub, diag, sup;
  bool header = false;
  std::vector<std::array<std::string, 3>> rows;
  std::vector<int> lines;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "sub,diag,sup") throw ParseError(number, "expected header 'sub,diag,sup'");
      header = true;
      continue;
    }
    std::array<std::string, 3> cells;
    std::size_t start = 0;
    for (int c = 0; c < 3; ++c) {
      const auto comma = line.find(',', start);
      if ((c < 2) != (comma != std::string::npos)) throw ParseError(number, "expected three cells");
      cells[static_cast<std::size_t>(c)] = line.substr(start, c < 2 ? comma - start : std::string::npos);
      start = comma + 1;
    }
    rows.push_back(cells);
    lines.push_back(number);
  }
  if (!header) throw ParseError(std::max(number, 1), "empty matrix file");
  if (rows.empty()) throw ParseError(number, "matrix has no rows");
  const std::size_t n = rows.size();
  auto value = [&](std::size_t row, int col) {
    const std::string& s = rows[row][static_cast<std::size_t>(col)];
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
      throw ParseError(lines[row], "bad number '" + s + "'");
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 && !rows[i][0].empty()) throw ParseError(lines[i], "first sub cell must be empty");
    if (i + 1 == n && !rows[i][2].empty()) throw ParseError(lines[i], "last sup cell must be empty");
    if (i > 0) sub.push_back(value(i, 0));
    diag.push_back(value(i, 1));
    if (i + 1 < n) sup.push_back(value(i, 2));
  }
  try {
    return TridiagonalMatrix(std::move(sub), std::move(diag), std::move(sup));
  } catch (const InvalidArgument& e) {
    throw ParseError(lines.front(), e.what());
  }
}

}  // namespace tritrace
