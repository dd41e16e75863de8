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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

#include "tritrace/covariance.hpp"
#include "tritrace/error.hpp"
#include "tritrace/moments.hpp"
#include "tritrace/montecarlo.hpp"

namespace tritrace {

/// Distributional statistics are reported only from this many trials on.
inline constexpr std::size_t kMinDistributionTrials = 100;

struct MomentReport {
  std::vector<int> k_list;
  std::size_t trials = 0;
  std::size_t n = 0;
  std::vector<double> scaling_exponent;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> skewness;
  std::vector<double> excess_kurtosis;
  std::vector<double> ks_distance;
  double ks_critical = kNaN;
  Matrix covariance;
  std::vector<double> target_variance;

  // Monte Carlo standard errors.
  std::vector<double> mean_se;
  std::vector<double> variance_se;
  std::vector<double> skewness_se;
  std::vector<double> excess_kurtosis_se;
  Matrix covariance_se;
};

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& m) {
  const auto size = static_cast<Eigen::Index>(m.size());
  if (size == 0) throw InvalidArgument("empty matrix");
  Eigen::MatrixXd e(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (m[static_cast<std::size_t>(i)].size() != m.size()) throw InvalidArgument("matrix not square");
    for (Eigen::Index j = 0; j < size; ++j) {
      e(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// Per-k moments with jackknife errors, the full covariance matrix, and the
/// KS distance of samples standardized by the target variance.
inline MomentReport normality_report(const SampleMatrix& samples, const CovarianceTarget& target) {
  const std::size_t r = samples.width();
  if (target.k_list != samples.k_list) throw InvalidArgument("target k_list does not match samples");
  if (samples.trials < 2) throw InvalidArgument("normality_report needs at least two trials");
  for (std::size_t j = 0; j < r; ++j) {
    const double v = target.value[j][j];
    if (!(v > 0.0)) {
      throw DegenerateTarget("target variance for k=" + std::to_string(samples.k_list[j]) +
                             " is " + format_number(v) + "; the limit law is degenerate");
    }
  }
  MomentReport out;
  out.k_list = samples.k_list;
  out.trials = samples.trials;
  out.n = samples.n;
  out.scaling_exponent = samples.exponents;
  const bool distribution = samples.trials >= kMinDistributionTrials;
  out.ks_critical = distribution ? ks_critical_1pct(samples.trials) : kNaN;

  std::vector<std::vector<double>> columns;
  for (std::size_t j = 0; j < r; ++j) {
    columns.push_back(samples.column(j));
    const auto m = sample_moments(columns.back());
    out.mean.push_back(m.mean);
    out.variance.push_back(m.variance);
    out.mean_se.push_back(m.mean_se);
    out.variance_se.push_back(m.variance_se);
    out.skewness.push_back(distribution ? m.skewness : kNaN);
    out.excess_kurtosis.push_back(distribution ? m.excess_kurtosis : kNaN);
    out.skewness_se.push_back(distribution ? m.skewness_se : kNaN);
    out.excess_kurtosis_se.push_back(distribution ? m.excess_kurtosis_se : kNaN);
    out.target_variance.push_back(target.value[j][j]);
    if (distribution) {
      const double sd = std::sqrt(target.value[j][j]);
      std::vector<double> standardized(columns.back());
      for (double& v : standardized) v /= sd;
      out.ks_distance.push_back(ks_distance_normal(standardized));
    } else {
      out.ks_distance.push_back(kNaN);
    }
  }
  out.covariance = square_matrix(r);
  out.covariance_se = square_matrix(r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i; j < r; ++j) {
      const auto c = i == j ? CovarianceEstimate{out.variance[i], out.variance_se[i]}
                            : sample_covariance(columns[i], columns[j]);
      out.covariance[i][j] = out.covariance[j][i] = c.value;
      out.covariance_se[i][j] = out.covariance_se[j][i] = c.se;
    }
  }
  return out;
}

}  // namespace tritrace
