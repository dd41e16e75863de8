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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "tritrace/compensated_sum.hpp"
#include "tritrace/error.hpp"

namespace tritrace {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Asymptotic 1% critical value of the one-sample Kolmogorov distance.
inline double ks_critical_1pct(std::size_t samples) {
  return 1.63 / std::sqrt(static_cast<double>(samples));
}

/// sup_x |F_N(x) - Phi(x)| of the given values.
inline double ks_distance_normal(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("ks distance of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  double distance = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / count - cdf;
    const double below = cdf - static_cast<double>(i) / count;
    distance = std::max({distance, above, below});
  }
  return std::clamp(distance, 0.0, 1.0);
}

/// Statistics of one sample with delete-one jackknife standard errors.
struct SampleMoments {
  std::size_t count = 0;
  double mean = kNaN;
  double variance = kNaN;  // unbiased
  double skewness = kNaN;  // m3 / m2^{3/2}
  double excess_kurtosis = kNaN;  // m4 / m2^2 - 3
  double mean_se = kNaN;
  double variance_se = kNaN;
  double skewness_se = kNaN;
  double excess_kurtosis_se = kNaN;
};

namespace detail {

struct CentralMoments {
  double m2, m3, m4;
};

// Central moments of a sample of size `count` whose shifted power sums are
// s1..s4 (values y = x - shift).
inline CentralMoments central_from_sums(double count, double s1, double s2, double s3, double s4) {
  const double mu = s1 / count;
  const double e2 = s2 / count, e3 = s3 / count, e4 = s4 / count;
  const double m2 = e2 - mu * mu;
  const double m3 = e3 - 3.0 * mu * e2 + 2.0 * mu * mu * mu;
  const double m4 = e4 - 4.0 * mu * e3 + 6.0 * mu * mu * e2 - 3.0 * mu * mu * mu * mu;
  return {m2, m3, m4};
}

inline double jackknife_se(std::span<const double> leave_one_out) {
  const double count = static_cast<double>(leave_one_out.size());
  double mean = 0.0;
  for (double v : leave_one_out) mean += v;
  mean /= count;
  double ss = 0.0;
  for (double v : leave_one_out) ss += (v - mean) * (v - mean);
  return std::sqrt((count - 1.0) / count * ss);
}

}  // namespace detail

inline SampleMoments sample_moments(std::span<const double> x) {
  SampleMoments out;
  out.count = x.size();
  if (x.size() < 2) throw InvalidArgument("sample moments need at least two values");
  const double count = static_cast<double>(x.size());
  CompensatedSum<double> sum;
  for (double v : x) sum += v;
  const double shift = sum.value() / count;

  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (double v : x) {
    const double y = v - shift;
    const double y2 = y * y;
    s1 += y;
    s2 += y2;
    s3 += y2 * y;
    s4 += y2 * y2;
  }
  const auto full = detail::central_from_sums(count, s1, s2, s3, s4);
  out.mean = shift + s1 / count;
  out.variance = full.m2 * count / (count - 1.0);
  const bool spread = full.m2 > 0.0;
  if (spread) {
    out.skewness = full.m3 / std::pow(full.m2, 1.5);
    out.excess_kurtosis = full.m4 / (full.m2 * full.m2) - 3.0;
  }

  std::vector<double> loo_var(x.size()), loo_skew(x.size()), loo_kurt(x.size());
  const double reduced = count - 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = x[i] - shift;
    const double y2 = y * y;
    const auto c = detail::central_from_sums(reduced, s1 - y, s2 - y2, s3 - y2 * y, s4 - y2 * y2);
    loo_var[i] = c.m2 * reduced / (reduced - 1.0);
    if (spread && c.m2 > 0.0) {
      loo_skew[i] = c.m3 / std::pow(c.m2, 1.5);
      loo_kurt[i] = c.m4 / (c.m2 * c.m2) - 3.0;
    }
  }
  out.mean_se = std::sqrt(out.variance / count);
  out.variance_se = x.size() > 2 ? detail::jackknife_se(loo_var) : kNaN;
  if (spread) {
    out.skewness_se = detail::jackknife_se(loo_skew);
    out.excess_kurtosis_se = detail::jackknife_se(loo_kurt);
  }
  return out;
}

/// Unbiased sample covariance and the standard error of that estimate,
/// sd((x - xbar)(y - ybar)) / sqrt(N).
struct CovarianceEstimate {
  double value = kNaN;
  double se = kNaN;
};

inline CovarianceEstimate sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("covariance needs two equal-length samples of size >= 2");
  }
  const double count = static_cast<double>(x.size());
  CompensatedSum<double> sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx.value() / count, my = sy.value() / count;
  CompensatedSum<double> cross;
  for (std::size_t i = 0; i < x.size(); ++i) cross += (x[i] - mx) * (y[i] - my);
  const double mean_product = cross.value() / count;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (x[i] - mx) * (y[i] - my) - mean_product;
    ss += r * r;
  }
  return {cross.value() / (count - 1.0), std::sqrt(ss / (count - 1.0) / count)};
}

/// Streaming mean/co-moment accumulator over fixed-width rows. Merging is
/// the pairwise (Chan et al.) update, so a fixed reduction tree gives a
/// fixed result.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(std::size_t width)
      : width_(width), mean_(width, 0.0), comoment_(width * width, 0.0) {}

  std::size_t width() const { return width_; }
  std::size_t count() const { return count_; }
  std::span<const double> mean() const { return mean_; }

  void add(std::span<const double> row) {
    if (row.size() != width_) throw InvalidArgument("accumulator row width mismatch");
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    std::vector<double> delta(width_);
    for (std::size_t i = 0; i < width_; ++i) delta[i] = row[i] - mean_[i];
    for (std::size_t i = 0; i < width_; ++i) mean_[i] += delta[i] * inv;
    for (std::size_t i = 0; i < width_; ++i) {
      for (std::size_t j = 0; j < width_; ++j) {
        comoment_[i * width_ + j] += delta[i] * (row[j] - mean_[j]);
      }
    }
  }

  void merge(const MomentAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    if (other.width_ != width_) throw InvalidArgument("accumulator width mismatch");
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double total = na + nb;
    std::vector<double> delta(width_);
    for (std::size_t i = 0; i < width_; ++i) delta[i] = other.mean_[i] - mean_[i];
    for (std::size_t i = 0; i < width_; ++i) {
      for (std::size_t j = 0; j < width_; ++j) {
        comoment_[i * width_ + j] +=
            other.comoment_[i * width_ + j] + delta[i] * delta[j] * na * nb / total;
      }
    }
    for (std::size_t i = 0; i < width_; ++i) mean_[i] += delta[i] * nb / total;
    count_ += other.count_;
  }

  /// Unbiased covariance entry.
  double covariance(std::size_t i, std::size_t j) const {
    if (count_ < 2) return kNaN;
    return comoment_[i * width_ + j] / static_cast<double>(count_ - 1);
  }

 private:
  std::size_t width_ = 0;
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;
};

/// Merges accumulators pairwise in index order: (0,1), (2,3), ... then again
/// on the results, so the tree depends only on the number of leaves.
inline MomentAccumulator merge_tree(std::vector<MomentAccumulator> leaves) {
  if (leaves.empty()) return MomentAccumulator();
  while (leaves.size() > 1) {
    std::vector<MomentAccumulator> next;
    next.reserve((leaves.size() + 1) / 2);
    for (std::size_t i = 0; i < leaves.size(); i += 2) {
      MomentAccumulator merged = leaves[i];
      if (i + 1 < leaves.size()) merged.merge(leaves[i + 1]);
      next.push_back(std::move(merged));
    }
    leaves = std::move(next);
  }
  return std::move(leaves.front());
}

}  // namespace tritrace
