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

// Deviation diagnostics: the moderate-deviation rate x^2/(2 D_k) against
// Monte Carlo tail probabilities, the k = 1 Cramer rate by numerical
// Legendre transform, and the deterministic boundary-term crossing point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tritrace/covariance.hpp"
#include "tritrace/ensembles.hpp"
#include "tritrace/error.hpp"
#include "tritrace/laws.hpp"
#include "tritrace/montecarlo.hpp"
#include "tritrace/summand.hpp"

namespace tritrace {

inline constexpr double kDegenerateRate = 1e-12;
inline constexpr double kMinTailCount = 50.0;

struct RateEstimate {
  std::size_t n = 0;
  double nu = 0.5;
  double delta = 0.0;
  std::size_t tail_count = 0;
  double tail_prob = 0.0;
  double empirical_rate = 0.0;
  double predicted_rate = 0.0;
  std::size_t trials = 0;
  bool low_count = false;   // expected tail count below kMinTailCount
  bool zero_count = false;  // no tail events: empirical rate is +inf
};

struct MdpOptions {
  double nu = 0.5;
  std::vector<std::size_t> n_list;
  std::vector<double> delta_list;  // empty: derived from D_k
  std::size_t trials = 100000;
  std::uint64_t master_seed = 0x5EED;
  unsigned workers = 0;
  std::optional<double> dk;        // override for D_k
  std::size_t dk_replicas = 100000;
};

inline double mdp_speed(std::size_t n, double nu) {
  return std::pow(static_cast<double>(n), -nu);
}

/// D_k in closed form where available: D_1 = Var(d) when the diagonal is
/// an independent i.i.d. stream.
inline std::optional<double> analytic_dk(const EnsembleSpec& spec, int k) {
  if (k != 1) return std::nullopt;
  switch (spec.model) {
    case Model::kAnderson:
    case Model::kHatanoNelson: return law_variance(spec.laws.d);
    case Model::kBirthDeathKernel: return 0.0;
    case Model::kGenericIid:
      if (spec.coupling == Coupling::kIndependentStreams) return law_variance(spec.laws.d);
      return std::nullopt;
    default: return std::nullopt;
  }
}

/// Thresholds whose predicted rates delta^2 / (2 D_k) are 0.3, 0.5, 0.8, 1.2.
inline std::vector<double> default_deltas(double dk) {
  std::vector<double> out;
  for (double rate : {0.3, 0.5, 0.8, 1.2}) out.push_back(std::sqrt(2.0 * dk * rate));
  return out;
}

inline double mdp_predicted_rate(double delta, double dk) {
  if (!(dk >= kDegenerateRate)) {
    throw DegenerateTarget("D_k = " + format_number(dk) + " is degenerate; no quadratic rate");
  }
  return delta * delta / (2.0 * dk);
}

/// Rate estimate from a tail count.
inline RateEstimate make_rate_estimate(std::size_t n, double nu, double delta,
                                       std::size_t tail_count, std::size_t trials, double dk) {
  RateEstimate e;
  e.n = n;
  e.nu = nu;
  e.delta = delta;
  e.tail_count = tail_count;
  e.trials = trials;
  e.tail_prob = static_cast<double>(tail_count) / static_cast<double>(trials);
  const double speed = mdp_speed(n, nu);
  e.predicted_rate = mdp_predicted_rate(delta, dk);
  if (tail_count == 0) {
    e.zero_count = true;
    e.empirical_rate = std::numeric_limits<double>::infinity();
  } else {
    e.empirical_rate = tail_count == trials ? 0.0 : -speed * std::log(e.tail_prob);
  }
  const double predicted_tail = std::exp(-e.predicted_rate / speed);
  e.low_count = predicted_tail * static_cast<double>(trials) < kMinTailCount;
  return e;
}

/// P(|sqrt(lambda_n / n) (Tr Q^k - E Tr Q^k)| >= delta) by Monte Carlo for each
/// n and delta, against the rate delta^2 / (2 D_k).
inline std::vector<RateEstimate> mdp_check(const EnsembleSpec& spec, int k,
                                           const MdpOptions& options) {
  validate(spec);
  if (!spec.bounded()) throw InvalidArgument("mdp_check needs a bounded spec");
  if (!(options.nu > 0.0 && options.nu < 1.0)) throw InvalidArgument("nu must lie in (0,1)");
  if (options.n_list.empty()) throw InvalidArgument("n_list must not be empty");
  if (options.trials < 2) throw InvalidArgument("trials must be >= 2");
  double dk = 0.0;
  if (options.dk) {
    dk = *options.dk;
  } else if (auto exact = analytic_dk(spec, k)) {
    dk = *exact;
  } else {
    dk = dk_iid(spec, k, options.dk_replicas, options.master_seed, options.workers).value;
  }
  if (!(dk >= kDegenerateRate)) {
    throw DegenerateTarget("D_" + std::to_string(k) + " = " + format_number(dk) +
                           " is degenerate; no quadratic rate");
  }
  const auto deltas = options.delta_list.empty() ? default_deltas(dk) : options.delta_list;
  for (double d : deltas) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidArgument("delta must be finite and >= 0");
  }

  std::vector<RateEstimate> out;
  for (std::size_t n : options.n_list) {
    TraceRun run{n, {k}, options.trials, options.master_seed, options.workers};
    const auto traces = raw_traces(spec, run);
    double center = 0.0;
    if (auto exact = exact_trace_mean(spec, k)) {
      center = *exact;
    } else {
      CompensatedSum<double> sum;
      for (double v : traces) sum += v;
      center = sum.value() / static_cast<double>(traces.size());
    }
    const double scale = std::sqrt(mdp_speed(n, options.nu) / static_cast<double>(n));
    for (double delta : deltas) {
      std::size_t count = 0;
      for (double v : traces) {
        if (std::abs(scale * (v - center)) >= delta) ++count;
      }
      out.push_back(make_rate_estimate(n, options.nu, delta, count, options.trials, dk));
    }
  }
  return out;
}

/// Least-squares slope of the finite empirical rates against log n.
inline double rate_slope_in_log_n(const std::vector<RateEstimate>& estimates) {
  std::vector<double> x, y;
  for (const auto& e : estimates) {
    if (std::isfinite(e.empirical_rate)) {
      x.push_back(std::log(static_cast<double>(e.n)));
      y.push_back(e.empirical_rate);
    }
  }
  if (x.size() < 2) return kNaN;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

/// One point of an empirical large-deviation curve: -(1/n) log P(|Tr Q^k -
/// mean| / n >= x).
struct LdpPoint {
  std::size_t n = 0;
  double x = 0.0;
  double tail_prob = 0.0;
  double rate = 0.0;  // +inf when no tail events were seen
};

inline std::vector<LdpPoint> ldp_empirical_curve(const EnsembleSpec& spec, int k,
                                                 const std::vector<std::size_t>& n_list,
                                                 const std::vector<double>& x_list,
                                                 std::size_t trials, std::uint64_t master_seed,
                                                 unsigned workers = 0) {
  std::vector<LdpPoint> out;
  for (std::size_t n : n_list) {
    const auto traces = raw_traces(spec, TraceRun{n, {k}, trials, master_seed, workers});
    double center = 0.0;
    if (auto exact = exact_trace_mean(spec, k)) {
      center = *exact;
    } else {
      CompensatedSum<double> sum;
      for (double v : traces) sum += v;
      center = sum.value() / static_cast<double>(traces.size());
    }
    for (double x : x_list) {
      std::size_t count = 0;
      for (double v : traces) {
        if (std::abs(v - center) / static_cast<double>(n) >= x) ++count;
      }
      LdpPoint p{n, x, static_cast<double>(count) / static_cast<double>(trials), 0.0};
      p.rate = count == 0 ? std::numeric_limits<double>::infinity()
                          : (count == trials ? 0.0 : -std::log(p.tail_prob) / static_cast<double>(n));
      out.push_back(p);
    }
  }
  return out;
}

struct CramerRate {
  std::vector<double> grid;
  std::vector<double> rate;      // +inf outside the support
  std::vector<double> mgf_grid;  // maximizing t per grid point
  std::vector<bool> infinite;
  std::vector<bool> boundary_hit;
  double support_lo = 0.0;
  double support_hi = 0.0;
  double t_max = 50.0;

  bool any_boundary_hit() const {
    return std::find(boundary_hit.begin(), boundary_hit.end(), true) != boundary_hit.end();
  }
};

/// I(x) = sup_{|t| <= t_max} (t x - log E e^{t d}) by golden-section search on
/// the concave objective.
inline CramerRate cramer_rate_k1(const EntryLaw& entry_law, const std::vector<double>& x_grid,
                                 double t_max = 50.0) {
  validate_law(entry_law);
  const auto support = law_support(entry_law);
  if (!support) throw InvalidArgument("cramer rate needs a law with compact support");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("t_max must be positive");
  CramerRate out;
  out.grid = x_grid;
  out.support_lo = support->lo;
  out.support_hi = support->hi;
  out.t_max = t_max;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;

  for (double x : x_grid) {
    if (!std::isfinite(x)) throw InvalidArgument("grid values must be finite");
    const bool outside = x < support->lo || x > support->hi ||
                         (support->lo == support->hi && x != support->lo);
    if (outside) {
      out.rate.push_back(std::numeric_limits<double>::infinity());
      out.mgf_grid.push_back(x > support->hi ? t_max : -t_max);
      out.infinite.push_back(true);
      out.boundary_hit.push_back(false);
      continue;
    }
    auto objective = [&](double t) { return t * x - log_mgf(entry_law, t); };
    double lo = -t_max, hi = t_max;
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double fc = objective(c), fd = objective(d);
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * (1.0 + std::abs(c)); ++iter) {
      if (fc >= fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - invphi * (hi - lo);
        fc = objective(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + invphi * (hi - lo);
        fd = objective(d);
      }
    }
    double t_best = 0.5 * (lo + hi);
    double best = objective(t_best);
    for (double t : {0.0, -t_max, t_max}) {
      const double v = objective(t);
      if (v > best) {
        best = v;
        t_best = t;
      }
    }
    out.rate.push_back(std::max(best, 0.0));
    out.mgf_grid.push_back(t_best);
    out.infinite.push_back(false);
    out.boundary_hit.push_back(std::abs(t_best) >= t_max * (1.0 - 1e-6));
  }
  return out;
}

/// Second differences of the rate on the grid are >= -tol (finite points only).
inline bool is_discretely_convex(const std::vector<double>& grid, const std::vector<double>& rate,
                                 double tol = 1e-9) {
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (!std::isfinite(rate[i - 1]) || !std::isfinite(rate[i]) || !std::isfinite(rate[i + 1])) {
      continue;
    }
    const double h1 = grid[i] - grid[i - 1];
    const double h2 = grid[i + 1] - grid[i];
    const double slope1 = (rate[i] - rate[i - 1]) / h1;
    const double slope2 = (rate[i + 1] - rate[i]) / h2;
    if (slope2 - slope1 < -tol) return false;
  }
  return true;
}

/// Smallest n with sqrt(n / lambda_n) delta > B, i.e. n^{(1+nu)/2} delta > B:
/// from there on sqrt(lambda_n / n) |boundary term| >= delta is impossible.
inline std::size_t boundary_crossing_n(double bound, double nu, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("nu must lie in (0,1)");
  if (!(bound >= 0.0)) throw InvalidArgument("bound must be nonnegative");
  const double root = std::pow(bound / delta, 2.0 / (1.0 + nu));
  auto n = static_cast<std::size_t>(std::floor(root)) + 1;
  while (n > 1 && std::pow(static_cast<double>(n - 1), 0.5 * (1.0 + nu)) * delta > bound) --n;
  while (!(std::pow(static_cast<double>(n), 0.5 * (1.0 + nu)) * delta > bound)) ++n;
  return n;
}

/// Largest |sum_{i<=n} X_{k,i} - Tr Q_n^k| and the count of trials with
/// sqrt(lambda_n / n) |.| >= delta, over seeded sequence truncations.
struct BoundaryTail {
  std::size_t n = 0;
  double max_abs = 0.0;
  std::size_t exceed_count = 0;
  std::size_t trials = 0;
};

inline BoundaryTail boundary_tail(const EnsembleSpec& spec, int k, std::size_t n, double nu,
                                  double delta, std::size_t trials, std::uint64_t master_seed) {
  const auto& types = circuit_types(k);
  BoundaryTail out;
  out.n = n;
  out.trials = trials;
  const double scale = std::sqrt(mdp_speed(n, nu) / static_cast<double>(n));
  const std::size_t len = n + static_cast<std::size_t>(k / 2);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto window = sample_window(spec, 1, len, trial_seed(master_seed, t));
    const double term = std::abs(boundary_correction(window, n, k, types));
    out.max_abs = std::max(out.max_abs, term);
    if (scale * term >= delta) ++out.exceed_count;
  }
  return out;
}

}  // namespace tritrace
