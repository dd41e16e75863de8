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

// Monte Carlo over traces of sampled matrices: trial t uses the matrix
// sampled with seed trial_seed(master_seed, t), so every result is a
// function of the trial index alone.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tritrace/circuits.hpp"
#include "tritrace/compensated_sum.hpp"
#include "tritrace/ensembles.hpp"
#include "tritrace/error.hpp"
#include "tritrace/laws.hpp"
#include "tritrace/moments.hpp"
#include "tritrace/parallel.hpp"
#include "tritrace/rng.hpp"
#include "tritrace/tridiagonal.hpp"

namespace tritrace {

struct TraceRun {
  std::size_t n = 0;
  std::vector<int> k_list;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  unsigned workers = 0;  // 0 = auto
};

/// Scaled, centered traces: row t holds n^{-(alpha k + 1/2 - epsilon)} (Tr Q^k - mean)
/// for each k in k_list.
struct SampleMatrix {
  std::size_t n = 0;
  std::vector<int> k_list;
  std::size_t trials = 0;
  double alpha = 0.0;
  double epsilon = 0.0;
  std::vector<double> exponents;        // per k
  std::vector<bool> exact_centering;    // per k
  std::vector<double> center;           // per k, unscaled mean subtracted
  std::vector<double> values;           // trials x k_list.size(), row-major

  std::size_t width() const { return k_list.size(); }
  double at(std::size_t trial, std::size_t column) const { return values[trial * width() + column]; }
  std::vector<double> column(std::size_t column) const {
    std::vector<double> out(trials);
    for (std::size_t t = 0; t < trials; ++t) out[t] = at(t, column);
    return out;
  }
};

/// n^{-(alpha k + 1/2 - epsilon)} exponent value alpha k + 1/2 - epsilon.
inline double scaling_exponent(int k, double alpha, double epsilon) {
  return alpha * k + 0.5 - epsilon;
}

/// True when a law is symmetric about zero.
inline bool law_is_symmetric(const EntryLaw& entry_law) {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value == 0.0; },
                        [](const law::Uniform& u) { return u.lo == -u.hi; },
                        [](const law::Bernoulli& b) {
                          return (b.p == 0.5 && b.v0 == -b.v1) ||
                                 (b.p == 0.0 && b.v0 == 0.0) || (b.p == 1.0 && b.v1 == 0.0);
                        },
                        [](const law::Gaussian& g) { return g.mu == 0.0; },
                        [](const law::Rademacher&) { return true; },
                    },
                    entry_law);
}

/// E Tr Q_n^k when it is known in closed form: zero for the Anderson model
/// with symmetric diagonal law and odd k.
inline std::optional<double> exact_trace_mean(const EnsembleSpec& spec, int k) {
  if (spec.model == Model::kAnderson && k % 2 == 1 && law_is_symmetric(spec.laws.d)) return 0.0;
  return std::nullopt;
}

namespace detail {

inline void check_run(const EnsembleSpec& spec, const TraceRun& run, std::size_t min_trials) {
  validate(spec);
  if (run.k_list.empty()) throw InvalidArgument("k_list must not be empty");
  if (run.trials < min_trials) {
    throw InvalidArgument("trials must be >= " + std::to_string(min_trials));
  }
  if (run.n < 2) throw InvalidArgument("n must be >= 2");
  for (int k : run.k_list) {
    if (k < 1) throw InvalidArgument("powers in k_list must be >= 1");
    if (run.n < static_cast<std::size_t>(k / 2) + 1) {
      throw InvalidArgument("n=" + std::to_string(run.n) + " too small for k=" + std::to_string(k));
    }
  }
}

inline std::vector<const std::vector<CircuitType>*> type_tables(const std::vector<int>& k_list) {
  std::vector<const std::vector<CircuitType>*> tables;
  for (int k : k_list) tables.push_back(&circuit_types(k));
  return tables;
}

inline void trial_traces(const EnsembleSpec& spec, const TraceRun& run,
                         const std::vector<const std::vector<CircuitType>*>& tables,
                         std::size_t trial, std::span<double> out) {
  const auto q = sample_matrix(spec, run.n, trial_seed(run.master_seed, trial));
  for (std::size_t j = 0; j < run.k_list.size(); ++j) {
    out[j] = trace_power_expansion(q, run.k_list[j], *tables[j]);
  }
}

}  // namespace detail

/// Unscaled, uncentered Tr Q^k, trials x k_list.size(), ordered by trial.
inline std::vector<double> raw_traces(const EnsembleSpec& spec, const TraceRun& run) {
  detail::check_run(spec, run, 1);
  const auto tables = detail::type_tables(run.k_list);
  const std::size_t width = run.k_list.size();
  std::vector<double> values(run.trials * width);
  for_each_block(run.trials, run.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      detail::trial_traces(spec, run, tables, t, std::span<double>(values).subspan(t * width, width));
    }
  });
  return values;
}

/// The scaled centered sample matrix. Columns are centered by the exact mean
/// when known, otherwise by the across-trial mean.
inline SampleMatrix mc_traces(const EnsembleSpec& spec, const TraceRun& run, double alpha,
                              double epsilon) {
  detail::check_run(spec, run, 2);
  SampleMatrix out;
  out.n = run.n;
  out.k_list = run.k_list;
  out.trials = run.trials;
  out.alpha = alpha;
  out.epsilon = epsilon;
  out.values = raw_traces(spec, run);
  const std::size_t width = run.k_list.size();
  for (std::size_t j = 0; j < width; ++j) {
    const int k = run.k_list[j];
    const auto exact = exact_trace_mean(spec, k);
    double center = 0.0;
    if (exact) {
      center = *exact;
    } else {
      CompensatedSum<double> sum;
      for (std::size_t t = 0; t < run.trials; ++t) sum += out.values[t * width + j];
      center = sum.value() / static_cast<double>(run.trials);
    }
    const double exponent = scaling_exponent(k, alpha, epsilon);
    const double scale = std::pow(static_cast<double>(run.n), -exponent);
    for (std::size_t t = 0; t < run.trials; ++t) {
      double& v = out.values[t * width + j];
      v = (v - center) * scale;
    }
    out.exponents.push_back(exponent);
    out.exact_centering.push_back(exact.has_value());
    out.center.push_back(center);
  }
  return out;
}

/// Streaming variant: moment accumulator of the scaled traces without
/// retaining samples. One leaf per trial block, merged in block order.
inline MomentAccumulator mc_trace_moments(const EnsembleSpec& spec, const TraceRun& run,
                                          double alpha, double epsilon) {
  detail::check_run(spec, run, 2);
  const auto tables = detail::type_tables(run.k_list);
  const std::size_t width = run.k_list.size();
  std::vector<double> scale(width);
  for (std::size_t j = 0; j < width; ++j) {
    scale[j] = std::pow(static_cast<double>(run.n),
                        -scaling_exponent(run.k_list[j], alpha, epsilon));
  }
  const std::size_t blocks = (run.trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<MomentAccumulator> leaves(blocks, MomentAccumulator(width));
  for_each_block(run.trials, run.workers,
                 [&](std::size_t block, std::size_t begin, std::size_t end) {
                   std::vector<double> row(width);
                   for (std::size_t t = begin; t < end; ++t) {
                     detail::trial_traces(spec, run, tables, t, row);
                     for (std::size_t j = 0; j < width; ++j) row[j] *= scale[j];
                     leaves[block].add(row);
                   }
                 });
  return merge_tree(std::move(leaves));
}

}  // namespace tritrace
