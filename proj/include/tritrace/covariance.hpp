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

// Limiting variances D_k and covariances Lambda(i,j) of the standardized
// traces: window Monte Carlo for i.i.d.-type specs and the closed forms of
// the symmetric degenerate regime (with the beta-Hermite table as a case).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tritrace/circuits.hpp"
#include "tritrace/compensated_sum.hpp"
#include "tritrace/ensembles.hpp"
#include "tritrace/error.hpp"
#include "tritrace/montecarlo.hpp"
#include "tritrace/parallel.hpp"
#include "tritrace/rng.hpp"
#include "tritrace/summand.hpp"

namespace tritrace {

using Matrix = std::vector<std::vector<double>>;

inline Matrix square_matrix(std::size_t size, double fill = 0.0) {
  return Matrix(size, std::vector<double>(size, fill));
}

struct Estimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
};

/// Summands X_{k,2}, ..., X_{k,2+m} for each k, over independent windows
/// starting at site 1. Layout: replica-major, then k, then lag.
struct WindowSummands {
  std::vector<int> k_list;
  int m = 0;
  std::size_t replicas = 0;
  std::vector<double> values;

  double at(std::size_t replica, std::size_t k_index, int lag) const {
    return values[(replica * k_list.size() + k_index) * static_cast<std::size_t>(m + 1) +
                  static_cast<std::size_t>(lag)];
  }
};

inline WindowSummands sample_window_summands(const EnsembleSpec& spec,
                                             const std::vector<int>& k_list, int m,
                                             std::size_t replicas, std::uint64_t seed,
                                             unsigned workers = 1) {
  validate(spec);
  if (!spec.iid_type()) {
    throw InvalidArgument("window estimates need an i.i.d.-type spec, not " +
                          to_string(spec.model));
  }
  if (replicas < 2) throw InvalidArgument("replicas must be >= 2");
  if (k_list.empty()) throw InvalidArgument("k_list must not be empty");
  int k_max = 0;
  std::vector<const std::vector<CircuitType>*> tables;
  for (int k : k_list) {
    tables.push_back(&circuit_types(k));
    k_max = std::max(k_max, k);
  }
  WindowSummands out;
  out.k_list = k_list;
  out.m = m;
  out.replicas = replicas;
  const std::size_t stride = static_cast<std::size_t>(m + 1);
  const std::size_t width = k_list.size() * stride;
  out.values.resize(replicas * width);
  const std::size_t len = static_cast<std::size_t>(2 + m + k_max / 2);
  for_each_block(replicas, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto window = sample_window(spec, 1, len, trial_seed(seed, r));
      for (std::size_t j = 0; j < k_list.size(); ++j) {
        for (int h = 0; h <= m; ++h) {
          out.values[r * width + j * stride + static_cast<std::size_t>(h)] =
              site_summand(window, 2 + static_cast<std::uint64_t>(h), k_list[j], *tables[j]);
        }
      }
    }
  });
  return out;
}

/// Cov(X_{k_i,2}, X_{k_j,2}) + sum_{h=1..lags} [Cov(X_{k_i,2}, X_{k_j,2+h}) +
/// Cov(X_{k_i,2+h}, X_{k_j,2})] from window samples, with the standard
/// error of the sum of sample covariances.
inline Estimate window_covariance(const WindowSummands& w, std::size_t ki, std::size_t kj,
                                  int lags) {
  if (lags > w.m) throw InvalidArgument("window has fewer lags than requested");
  const std::size_t lagn = static_cast<std::size_t>(w.m + 1);
  const double count = static_cast<double>(w.replicas);
  std::vector<double> mean_i(lagn), mean_j(lagn);
  for (std::size_t h = 0; h < lagn; ++h) {
    CompensatedSum<double> si, sj;
    for (std::size_t r = 0; r < w.replicas; ++r) {
      si += w.at(r, ki, static_cast<int>(h));
      sj += w.at(r, kj, static_cast<int>(h));
    }
    mean_i[h] = si.value() / count;
    mean_j[h] = sj.value() / count;
  }
  std::vector<double> influence(w.replicas);
  CompensatedSum<double> total;
  for (std::size_t r = 0; r < w.replicas; ++r) {
    const double xi0 = w.at(r, ki, 0) - mean_i[0];
    const double xj0 = w.at(r, kj, 0) - mean_j[0];
    double y = xi0 * xj0;
    for (int h = 1; h <= lags; ++h) {
      y += xi0 * (w.at(r, kj, h) - mean_j[static_cast<std::size_t>(h)]);
      y += (w.at(r, ki, h) - mean_i[static_cast<std::size_t>(h)]) * xj0;
    }
    influence[r] = y;
    total += y;
  }
  const double mean_y = total.value() / count;
  double ss = 0.0;
  for (double y : influence) ss += (y - mean_y) * (y - mean_y);
  return {total.value() / (count - 1.0), std::sqrt(ss / (count - 1.0) / count)};
}

/// D_k = Var(X_{k,2}) + 2 sum_{j=1..m_k} Cov(X_{k,2}, X_{k,2+j}) by Monte
/// Carlo over `replicas` independent windows.
inline Estimate dk_iid(const EnsembleSpec& spec, int k, std::size_t replicas, std::uint64_t seed,
                       unsigned workers = 1) {
  const int m = DependenceRange::of(k, spec.symmetric).m;
  const auto w = sample_window_summands(spec, {k}, m, replicas, seed, workers);
  return window_covariance(w, 0, 0, m);
}

enum class CovarianceSource {
  kMcEstimate,
  kIidWindowFormula,
  kSymmetricDegenerateFormula,
  kBetaHermiteFormula
};

inline std::string to_string(CovarianceSource s) {
  switch (s) {
    case CovarianceSource::kMcEstimate: return "mc_estimate";
    case CovarianceSource::kIidWindowFormula: return "iid_window_formula";
    case CovarianceSource::kSymmetricDegenerateFormula: return "symmetric_degenerate_formula";
    case CovarianceSource::kBetaHermiteFormula: return "beta_hermite_formula";
  }
  return "unknown";
}

/// Parameters of the symmetric regime with growth exponents alpha, epsilon:
/// a_n ~ n^alpha a with fluctuation eta, d_n ~ n^epsilon zeta.
struct DegenerateParams {
  double a = 1.0;
  double var_eta = 0.0;
  double var_zeta = 0.0;
  double alpha = 0.5;
  double epsilon = 0.5;
};

inline DegenerateParams beta_hermite_params(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
  return {1.0, 1.0 / (2.0 * beta), 2.0 / beta, 0.5, 0.5};
}

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  double value = 1.0;
  for (int i = 1; i <= r; ++i) value = value * (n - r + i) / i;
  return std::round(value);
}

inline double symmetric_degenerate_lambda(int ki, int kj, const DegenerateParams& p) {
  if (ki < 1 || kj < 1) throw InvalidArgument("powers must be >= 1");
  if (!(p.alpha > 0.0) || !(p.epsilon > 0.0) || p.epsilon > p.alpha) {
    throw InvalidArgument("symmetric degenerate regime needs 0 < epsilon <= alpha");
  }
  if (!(p.var_eta >= 0.0) || !(p.var_zeta >= 0.0) || !std::isfinite(p.a)) {
    throw InvalidArgument("variances must be nonnegative and a finite");
  }
  const double kk = static_cast<double>(ki) * kj;
  const double a_power = ipow(p.a, ki + kj - 2);
  if (ki % 2 == 0 && kj % 2 == 0) {
    return a_power * p.var_eta / (p.alpha * (ki + kj) + 1.0 - 2.0 * p.epsilon) * kk *
           binomial(ki, ki / 2) * binomial(kj, kj / 2);
  }
  if (ki % 2 == 1 && kj % 2 == 1 && p.epsilon == p.alpha) {
    return a_power * p.var_zeta / (p.alpha * (ki + kj) + 1.0 - 2.0 * p.alpha) * kk *
           binomial(ki - 1, (ki - 1) / 2) * binomial(kj - 1, (kj - 1) / 2);
  }
  return 0.0;
}

/// The beta-Hermite covariance table.
inline double beta_hermite_lambda(int ki, int kj, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
  if (ki < 1 || kj < 1) throw InvalidArgument("powers must be >= 1");
  const double ratio = static_cast<double>(ki) * kj / (ki + kj);
  if (ki % 2 == 0 && kj % 2 == 0) {
    return ratio / beta * binomial(ki, ki / 2) * binomial(kj, kj / 2);
  }
  if (ki % 2 == 1 && kj % 2 == 1) {
    return 4.0 * ratio / beta * binomial(ki - 1, (ki - 1) / 2) * binomial(kj - 1, (kj - 1) / 2);
  }
  return 0.0;
}

enum class LambdaRegime { kIidMc, kSymmetricDegenerate, kBetaHermite };

inline std::string to_string(LambdaRegime r) {
  switch (r) {
    case LambdaRegime::kIidMc: return "iid_mc";
    case LambdaRegime::kSymmetricDegenerate: return "symmetric_degenerate";
    case LambdaRegime::kBetaHermite: return "beta_hermite";
  }
  return "unknown";
}

struct LambdaParams {
  LambdaRegime regime = LambdaRegime::kBetaHermite;
  double beta = 2.0;
  DegenerateParams degenerate;
  EnsembleSpec spec;
  std::size_t replicas = 100000;
  std::uint64_t seed = 0x5EED;
  unsigned workers = 1;
};

/// A covariance matrix over k_list with per-entry standard errors (zero for
/// closed forms) and a provenance note per entry.
struct CovarianceTarget {
  CovarianceSource source = CovarianceSource::kMcEstimate;
  std::vector<int> k_list;
  Matrix value;
  Matrix se;
  std::vector<std::vector<std::string>> detail;
};

/// Lambda(i,j) for powers k_i, k_j under a regime.
inline Estimate lambda_target(int ki, int kj, const LambdaParams& params) {
  switch (params.regime) {
    case LambdaRegime::kBetaHermite: return {beta_hermite_lambda(ki, kj, params.beta), 0.0};
    case LambdaRegime::kSymmetricDegenerate:
      return {symmetric_degenerate_lambda(ki, kj, params.degenerate), 0.0};
    case LambdaRegime::kIidMc: {
      const int m = DependenceRange::joint(ki, kj, params.spec.symmetric);
      const auto w = sample_window_summands(params.spec, {ki, kj}, m, params.replicas,
                                            params.seed, params.workers);
      return window_covariance(w, 0, 1, m);
    }
  }
  throw InvalidArgument("unknown regime");
}

namespace detail {

inline std::string parity_note(int ki, int kj) {
  if (ki % 2 == 0 && kj % 2 == 0) return "even-even";
  if (ki % 2 == 1 && kj % 2 == 1) return "odd-odd";
  return "mixed parity";
}

}  // namespace detail

/// Target covariance matrix for every pair in k_list. The i.i.d. regime
/// shares one set of windows across all pairs.
inline CovarianceTarget covariance_target(const std::vector<int>& k_list,
                                          const LambdaParams& params) {
  if (k_list.empty()) throw InvalidArgument("k_list must not be empty");
  const std::size_t r = k_list.size();
  CovarianceTarget out;
  out.k_list = k_list;
  out.value = square_matrix(r);
  out.se = square_matrix(r);
  out.detail.assign(r, std::vector<std::string>(r));

  if (params.regime == LambdaRegime::kIidMc) {
    out.source = CovarianceSource::kIidWindowFormula;
    int m = 0;
    for (int k : k_list) m = std::max(m, DependenceRange::of(k, params.spec.symmetric).m);
    const auto w = sample_window_summands(params.spec, k_list, m, params.replicas, params.seed,
                                          params.workers);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i; j < r; ++j) {
        const int lags = DependenceRange::joint(k_list[i], k_list[j], params.spec.symmetric);
        const auto e = window_covariance(w, i, j, lags);
        out.value[i][j] = out.value[j][i] = e.value;
        out.se[i][j] = out.se[j][i] = e.se;
        out.detail[i][j] = out.detail[j][i] =
            "window estimate, " + std::to_string(lags) + " lags, " +
            std::to_string(params.replicas) + " replicas";
      }
    }
    return out;
  }

  out.source = params.regime == LambdaRegime::kBetaHermite
                   ? CovarianceSource::kBetaHermiteFormula
                   : CovarianceSource::kSymmetricDegenerateFormula;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i; j < r; ++j) {
      const double v = lambda_target(k_list[i], k_list[j], params).value;
      out.value[i][j] = out.value[j][i] = v;
      out.detail[i][j] = out.detail[j][i] = to_string(params.regime) + ", " +
                                            detail::parity_note(k_list[i], k_list[j]);
    }
  }
  return out;
}

/// Empirical covariance of a sample matrix as a target.
inline CovarianceTarget empirical_target(const SampleMatrix& samples) {
  const std::size_t r = samples.width();
  CovarianceTarget out;
  out.source = CovarianceSource::kMcEstimate;
  out.k_list = samples.k_list;
  out.value = square_matrix(r);
  out.se = square_matrix(r);
  out.detail.assign(r, std::vector<std::string>(r, "empirical"));
  std::vector<std::vector<double>> columns;
  for (std::size_t j = 0; j < r; ++j) columns.push_back(samples.column(j));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i; j < r; ++j) {
      const auto c = sample_covariance(columns[i], columns[j]);
      out.value[i][j] = out.value[j][i] = c.value;
      out.se[i][j] = out.se[j][i] = c.se;
    }
  }
  return out;
}

}  // namespace tritrace
