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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tritrace/covariance.hpp"
#include "tritrace/montecarlo.hpp"
#include "tritrace/normality.hpp"
#include "tritrace/summand.hpp"

namespace tritrace {
namespace {

EntryWindow ones_window(std::size_t len) {
  std::vector<double> a(len + 1, 1.0);
  a[0] = 0.0;
  return EntryWindow(1, a, std::vector<double>(len, 1.0), std::vector<double>(len, 1.0));
}

TEST(DependenceRange, Values) {
  EXPECT_EQ(DependenceRange::of(5, false).m, 2);
  EXPECT_EQ(DependenceRange::of(5, true).m, 3);
  EXPECT_EQ(DependenceRange::joint(1, 4, false), 2);
  EXPECT_THROW(DependenceRange::of(0, false), InvalidArgument);
}

TEST(SiteSummand, AllOnes) {
  const auto w = ones_window(10);
  EXPECT_DOUBLE_EQ(site_summand(w, 3, 3), 7.0);
  EXPECT_DOUBLE_EQ(site_summand(w, 3, 4), 19.0);
}

TEST(SiteSummand, FirstPowerIsDiagonal) {
  const auto w = sample_window(EnsembleSpec::hatano_nelson(), 1, 12, 3);
  for (std::uint64_t i = 1; i <= 12; ++i) EXPECT_EQ(site_summand(w, i, 1), w.d(i));
}

TEST(SiteSummand, WindowTooShort) {
  const auto w = ones_window(5);
  EXPECT_THROW(site_summand(w, 4, 4), InvalidArgument);  // needs site 6
  EXPECT_NO_THROW(site_summand(w, 3, 4));
  EXPECT_THROW(site_summand(w, 0, 1), InvalidArgument);
}

TEST(SiteSummand, MatchesWalkEnumeration) {
  const auto w = sample_window(EnsembleSpec::hatano_nelson(), 3, 20, 17);
  auto a = [&](std::uint64_t s) { return w.a(s); };
  auto d = [&](std::uint64_t s) { return w.d(s); };
  auto b = [&](std::uint64_t s) { return w.b(s); };
  for (int k = 1; k <= 10; ++k) {
    const double oracle = testing::walk_summand(k, 5, a, d, b);
    EXPECT_NEAR(site_summand(w, 5, k), oracle, 1e-12 * (1.0 + std::abs(oracle))) << k;
  }
}

TEST(BoundaryCorrection, ClosesTheGapToTheTrace) {
  const std::vector<EnsembleSpec> specs = {EnsembleSpec::hatano_nelson(),
                                           EnsembleSpec::birth_death_q(),
                                           EnsembleSpec::beta_hermite(2.0)};
  for (const auto& spec : specs) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (int k = 1; k <= 8; ++k) {
        const std::size_t n = 60;
        const auto& types = circuit_types(k);
        const auto w = sample_window(spec, 1, n + k / 2, seed);
        const double sum = summand_sum(w, 1, n, k, types);
        const double trace = trace_power_expansion(w.truncate(n), k, types);
        const double correction = boundary_correction(w, n, k, types);
        EXPECT_NEAR(sum - trace, correction, 1e-9 * (1.0 + std::abs(trace)))
            << to_string(spec.model) << " k=" << k;
      }
    }
  }
}

TEST(BoundaryCorrection, BoundedIndependentlyOfN) {
  const auto spec = EnsembleSpec::hatano_nelson();
  for (int k = 2; k <= 6; ++k) {
    const double bound = boundary_bound(spec, k);
    for (std::size_t n : {100u, 1000u, 10000u}) {
      const auto w = sample_window(spec, 1, n + k / 2, 21);
      EXPECT_LE(std::abs(boundary_correction(w, n, k, circuit_types(k))), bound);
    }
  }
  EXPECT_THROW(boundary_bound(EnsembleSpec::beta_hermite(2), 3), InvalidArgument);
}

TEST(DkIid, GaussianDiagonal) {
  const auto spec = EnsembleSpec::anderson(law::Gaussian{0.0, 1.5});
  const auto e = dk_iid(spec, 1, 100000, 5);
  EXPECT_LE(std::abs(e.value - 2.25), 4.0 * e.se);
}

TEST(DkIid, RademacherDiagonal) {
  const auto e = dk_iid(EnsembleSpec::anderson(), 1, 100000, 6);
  EXPECT_LE(std::abs(e.value - 1.0), 4.0 * e.se);
}

TEST(DkIid, DegenerateSecondPower) {
  const auto spec = EnsembleSpec::generic_iid(law::Constant{1}, law::Rademacher{},
                                              law::Constant{1}, true);
  EXPECT_EQ(testing::exhaustive_dk(spec, 2), 0.0);
  const auto e = dk_iid(spec, 2, 1000, 7);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.se, 0.0);
}

TEST(DkIid, MatchesExhaustiveOracle) {
  const auto anderson = EnsembleSpec::anderson();
  EXPECT_NEAR(testing::exhaustive_dk(anderson, 1), 1.0, 1e-12);
  EXPECT_NEAR(testing::exhaustive_dk(anderson, 3), 49.0, 1e-9);
  const auto generic = EnsembleSpec::generic_iid(law::Bernoulli{0.3, 0.5, 1.5},
                                                 law::Rademacher{}, law::Constant{1}, true);
  for (int k = 1; k <= 4; ++k) {
    for (const auto& spec : {anderson, generic}) {
      const double exact = testing::exhaustive_dk(spec, k);
      const auto e = dk_iid(spec, k, 200000, 100 + k);
      EXPECT_LE(std::abs(e.value - exact), 4.0 * e.se + 1e-12) << "k=" << k;
    }
  }
}

TEST(DkIid, Errors) {
  EXPECT_THROW(dk_iid(EnsembleSpec::anderson(), 1, 1, 0), InvalidArgument);
  EXPECT_THROW(dk_iid(EnsembleSpec::beta_hermite(2), 1, 100, 0), InvalidArgument);
}

TEST(LambdaTarget, BetaHermiteTable) {
  LambdaParams p;
  p.regime = LambdaRegime::kBetaHermite;
  p.beta = 2.0;
  EXPECT_DOUBLE_EQ(lambda_target(2, 2, p).value, 2.0);
  EXPECT_DOUBLE_EQ(lambda_target(1, 1, p).value, 1.0);
  for (double beta : {0.5, 1.0, 4.0}) {
    p.beta = beta;
    EXPECT_EQ(lambda_target(1, 2, p).value, 0.0);
    EXPECT_EQ(lambda_target(3, 4, p).value, 0.0);
  }
  p.beta = 1.0;
  EXPECT_DOUBLE_EQ(lambda_target(1, 1, p).value, 2.0);
  p.beta = 0.0;
  EXPECT_THROW(lambda_target(1, 1, p), InvalidArgument);
}

TEST(LambdaTarget, BetaHermiteIsTheDegenerateRegimeCase) {
  for (double beta : {0.7, 1.0, 2.0, 4.0}) {
    const auto params = beta_hermite_params(beta);
    for (int i = 1; i <= 8; ++i) {
      for (int j = 1; j <= 8; ++j) {
        EXPECT_NEAR(beta_hermite_lambda(i, j, beta), symmetric_degenerate_lambda(i, j, params),
                    1e-12 * (1.0 + beta_hermite_lambda(i, j, beta)));
      }
    }
  }
}

TEST(LambdaTarget, DegenerateOddVanishesBelowAlpha) {
  DegenerateParams p{1.3, 0.4, 0.9, 0.5, 0.25};
  EXPECT_EQ(symmetric_degenerate_lambda(1, 3, p), 0.0);
  EXPECT_EQ(symmetric_degenerate_lambda(2, 3, p), 0.0);
  // Even-even: a^{k_i+k_j-2} Var(eta) k_i k_j C C / (alpha (k_i + k_j) + 1 - 2 epsilon).
  EXPECT_NEAR(symmetric_degenerate_lambda(2, 4, p),
              std::pow(1.3, 4) * 0.4 * 8.0 * 2.0 * 6.0 / (0.5 * 6 + 1 - 0.5), 1e-12);
  p.epsilon = 0.75;
  EXPECT_THROW(symmetric_degenerate_lambda(2, 2, p), InvalidArgument);
}

TEST(LambdaTarget, IidWindowMatchesExhaustive) {
  const auto spec = EnsembleSpec::anderson();
  LambdaParams p;
  p.regime = LambdaRegime::kIidMc;
  p.spec = spec;
  p.replicas = 200000;
  p.seed = 31;
  for (auto [i, j] : {std::pair{1, 3}, std::pair{3, 4}, std::pair{1, 2}}) {
    const double exact = testing::exhaustive_lambda(spec, i, j);
    const auto e = lambda_target(i, j, p);
    EXPECT_LE(std::abs(e.value - exact), 4.0 * e.se + 1e-12) << i << "," << j;
  }
  const auto target = covariance_target({1, 3}, p);
  EXPECT_EQ(target.value[0][1], target.value[1][0]);
  EXPECT_EQ(target.source, CovarianceSource::kIidWindowFormula);
}

// --------------------------------------------------------------- moments

TEST(Moments, KnownSample) {
  const std::vector<double> x = {1, 2, 3, 4, 10};
  const auto m = sample_moments(x);
  EXPECT_DOUBLE_EQ(m.mean, 4.0);
  EXPECT_DOUBLE_EQ(m.variance, 12.5);
  // Deviations -3,-2,-1,0,6: m2 = 10, m3 = 36, m4 = 278.8.
  EXPECT_NEAR(m.skewness, 36.0 / std::pow(10.0, 1.5), 1e-12);
  EXPECT_NEAR(m.excess_kurtosis, 278.8 / 100.0 - 3.0, 1e-12);
}

TEST(Moments, JackknifeVarianceErrorIsReasonable) {
  std::vector<double> x(20000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CounterStream s(3, 0, i);
    x[i] = standard_normal(s);
  }
  const auto m = sample_moments(x);
  // For normal data the variance has SE sqrt(2/N); skewness sqrt(6/N).
  EXPECT_NEAR(m.variance_se, std::sqrt(2.0 / x.size()), 0.1 * std::sqrt(2.0 / x.size()));
  EXPECT_NEAR(m.skewness_se, std::sqrt(6.0 / x.size()), 0.15 * std::sqrt(6.0 / x.size()));
}

TEST(Moments, StreamingMergeMatchesBatch) {
  const std::size_t count = 5000;
  std::vector<MomentAccumulator> leaves;
  MomentAccumulator all(2);
  std::vector<double> xs, ys;
  for (std::size_t b = 0; b < 7; ++b) leaves.emplace_back(2);
  for (std::size_t i = 0; i < count; ++i) {
    CounterStream s(4, 0, i);
    const double x = standard_normal(s);
    const double y = 0.5 * x + standard_normal(s);
    leaves[i % 7].add(std::vector<double>{x, y});
    all.add(std::vector<double>{x, y});
    xs.push_back(x);
    ys.push_back(y);
  }
  const auto merged = merge_tree(leaves);
  EXPECT_EQ(merged.count(), count);
  EXPECT_NEAR(merged.covariance(0, 1), all.covariance(0, 1), 1e-12);
  EXPECT_NEAR(merged.covariance(0, 1), sample_covariance(xs, ys).value, 1e-12);
  EXPECT_NEAR(merged.covariance(1, 1), sample_moments(ys).variance, 1e-12);
  // Fixed tree: identical bits on repeat.
  EXPECT_EQ(merge_tree(leaves).covariance(0, 1), merged.covariance(0, 1));
}

TEST(Normality, StandardNormalFixturePassesKs) {
  const std::size_t trials = 10000;
  SampleMatrix s;
  s.n = 1;
  s.k_list = {1};
  s.trials = trials;
  s.exponents = {0.5};
  for (std::size_t i = 0; i < trials; ++i) {
    CounterStream stream(2718, 0, i);
    s.values.push_back(standard_normal(stream));
  }
  CovarianceTarget t;
  t.k_list = {1};
  t.value = {{1.0}};
  t.se = {{0.0}};
  const auto r = normality_report(s, t);
  EXPECT_LT(r.ks_distance[0], r.ks_critical);
  EXPECT_DOUBLE_EQ(r.ks_critical, 1.63 / 100.0);
}

TEST(Normality, ConstantSamplesGiveExactDistance) {
  SampleMatrix s;
  s.n = 1;
  s.k_list = {2};
  s.trials = 200;
  s.exponents = {0.5};
  s.values.assign(200, 0.3);
  CovarianceTarget t;
  t.k_list = {2};
  t.value = {{1.0}};
  t.se = {{0.0}};
  const auto r = normality_report(s, t);
  const double phi = normal_cdf(0.3);
  EXPECT_NEAR(r.ks_distance[0], std::max(phi, 1.0 - phi), 1e-15);
  EXPECT_GT(r.ks_distance[0], r.ks_critical);
  t.value = {{0.0}};
  EXPECT_THROW(normality_report(s, t), DegenerateTarget);
}

TEST(McTraces, ZeroDiagonalAndersonFirstPower) {
  const auto s = mc_traces(EnsembleSpec::anderson(law::Constant{0}), TraceRun{50, {1}, 30, 1, 1},
                           0.0, 0.0);
  for (double v : s.values) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(s.exact_centering[0]);
}

TEST(McTraces, OrderIndependentOfWorkers) {
  const auto spec = EnsembleSpec::hatano_nelson();
  const auto a = mc_traces(spec, TraceRun{64, {1, 2, 3}, 3000, 9, 1}, 0.0, 0.0);
  const auto b = mc_traces(spec, TraceRun{64, {1, 2, 3}, 3000, 9, 4}, 0.0, 0.0);
  EXPECT_EQ(a.values, b.values);
  const auto ma = mc_trace_moments(spec, TraceRun{64, {1, 2}, 3000, 9, 1}, 0.0, 0.0);
  const auto mb = mc_trace_moments(spec, TraceRun{64, {1, 2}, 3000, 9, 3}, 0.0, 0.0);
  EXPECT_EQ(ma.covariance(0, 1), mb.covariance(0, 1));
}

TEST(McTraces, AndersonFirstPowerNormality) {
  const auto spec = EnsembleSpec::anderson();
  const auto s = mc_traces(spec, TraceRun{10000, {1}, 10000, 0x5EED, 0}, 0.0, 0.0);
  CovarianceTarget t;
  t.k_list = {1};
  t.value = {{1.0}};
  t.se = {{0.0}};
  const auto r = normality_report(s, t);
  EXPECT_LE(std::abs(r.variance[0] - 1.0), 0.05);
  EXPECT_LT(std::abs(r.skewness[0]), 0.1);
  EXPECT_LT(std::abs(r.excess_kurtosis[0]), 0.2);
}

TEST(McTraces, BetaHermiteFirstTwoPowers) {
  const auto s = mc_traces(EnsembleSpec::beta_hermite(2.0), TraceRun{4000, {1, 2}, 10000, 77, 0},
                           0.5, 0.5);
  const auto e = empirical_target(s);
  EXPECT_LE(std::abs(e.value[0][0] - 1.0), std::max(0.1, 4 * e.se[0][0]));
  EXPECT_LE(std::abs(e.value[1][1] - 2.0), std::max(0.2, 4 * e.se[1][1]));
  EXPECT_LE(std::abs(e.value[0][1]), 4 * e.se[0][1]);
  EXPECT_GE(min_eigenvalue(e.value), -5.0 * std::max(e.se[0][0], e.se[1][1]));
}

TEST(McTraces, Preconditions) {
  const auto spec = EnsembleSpec::anderson();
  EXPECT_THROW(mc_traces(spec, TraceRun{10, {1}, 1, 1, 1}, 0, 0), InvalidArgument);
  EXPECT_THROW(mc_traces(spec, TraceRun{3, {6}, 10, 1, 1}, 0, 0), InvalidArgument);
  EXPECT_THROW(mc_traces(spec, TraceRun{10, {}, 10, 1, 1}, 0, 0), InvalidArgument);
}

TEST(MinEigenvalue, SmallMatrix) {
  EXPECT_NEAR(min_eigenvalue({{2, 1}, {1, 2}}), 1.0, 1e-12);
  EXPECT_NEAR(min_eigenvalue({{1, 2}, {2, 1}}), -1.0, 1e-12);
}

}  // namespace
}  // namespace tritrace
