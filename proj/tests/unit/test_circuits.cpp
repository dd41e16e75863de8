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

#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "tritrace/circuits.hpp"
#include "tritrace/rng.hpp"
#include "tritrace/tridiagonal.hpp"

namespace tritrace {
namespace {

std::vector<std::uint64_t> counts_of(const std::vector<CircuitType>& types) {
  std::vector<std::uint64_t> out;
  for (const auto& t : types) out.push_back(t.count);
  return out;
}

TEST(EnumerateTypes, SingleLoopForFirstPower) {
  const auto types = enumerate_types(1);
  ASSERT_EQ(types.size(), 1u);
  EXPECT_EQ(types[0].l, 0);
  EXPECT_EQ(types[0].n, std::vector<int>{1});
  EXPECT_EQ(types[0].count, 1u);
}

TEST(EnumerateTypes, SecondPower) {
  const auto types = enumerate_types(2);
  ASSERT_EQ(types.size(), 2u);
  EXPECT_EQ(types[0].key(), (TypeKey{0, {}, {2}}));
  EXPECT_EQ(types[0].count, 1u);
  EXPECT_EQ(types[1].key(), (TypeKey{1, {1}, {0, 0}}));
  EXPECT_EQ(types[1].count, 2u);
}

TEST(EnumerateTypes, ThirdPowerMatchesPublishedCounts) {
  const auto types = enumerate_types(3);
  ASSERT_EQ(types.size(), 3u);
  EXPECT_EQ(types[0].key(), (TypeKey{0, {}, {3}}));
  EXPECT_EQ(types[1].key(), (TypeKey{1, {1}, {1, 0}}));
  EXPECT_EQ(types[2].key(), (TypeKey{1, {1}, {0, 1}}));
  EXPECT_EQ(counts_of(types), (std::vector<std::uint64_t>{1, 3, 3}));
}

TEST(EnumerateTypes, FourthPowerMatchesPublishedCounts) {
  const auto types = enumerate_types(4);
  ASSERT_EQ(types.size(), 6u);
  const std::vector<TypeKey> keys = {{0, {}, {4}},        {1, {1}, {2, 0}}, {1, {1}, {1, 1}},
                                     {1, {1}, {0, 2}},    {1, {2}, {0, 0}}, {2, {1, 1}, {0, 0, 0}}};
  for (std::size_t i = 0; i < keys.size(); ++i) EXPECT_EQ(types[i].key(), keys[i]) << i;
  EXPECT_EQ(counts_of(types), (std::vector<std::uint64_t>{1, 4, 4, 4, 2, 4}));
}

TEST(EnumerateTypes, RejectsOutOfRangePowers) {
  EXPECT_THROW(enumerate_types(0), InvalidArgument);
  EXPECT_THROW(enumerate_types(-3), InvalidArgument);
  EXPECT_THROW(enumerate_types(kDefaultMaxPower + 1), InvalidArgument);
  EXPECT_NO_THROW(enumerate_types(kDefaultMaxPower + 1, kDefaultMaxPower + 1));
}

TEST(EnumerateTypes, Deterministic) {
  for (int k = 1; k <= 10; ++k) EXPECT_EQ(enumerate_types(k), enumerate_types(k));
}

TEST(EnumerateTypes, EveryTypeIsAdmissible) {
  for (int k = 1; k <= kDefaultMaxPower; ++k) {
    for (const auto& t : enumerate_types(k)) {
      int weight = 0;
      for (int v : t.m) weight += 2 * v;
      for (int v : t.n) weight += v;
      EXPECT_EQ(weight, k);
      EXPECT_EQ(static_cast<int>(t.m.size()), t.l);
      EXPECT_EQ(static_cast<int>(t.n.size()), t.l + 1);
      EXPECT_LE(t.l, k / 2);
      for (int v : t.m) EXPECT_GE(v, 1);
      EXPECT_GE(t.count, 1u);
      EXPECT_TRUE(is_admissible(k, t.l, t.m, t.n));
    }
  }
}

TEST(Admissibility, CascadeRule) {
  // m_1 = 0 forces every later m and n_1.. to vanish.
  EXPECT_TRUE(is_admissible(2, 1, {0}, {2, 0}));
  EXPECT_FALSE(is_admissible(2, 1, {0}, {1, 1}));
  EXPECT_FALSE(is_admissible(4, 2, {0, 1}, {2, 0, 0}));
  EXPECT_FALSE(is_admissible(3, 1, {1}, {0, 0}));  // weight 2, not 3
}

TEST(BruteForce, SecondPower) {
  const auto counts = count_circuits_bruteforce(2);
  const std::map<TypeKey, std::uint64_t> expected = {{TypeKey{0, {}, {2}}, 1},
                                                     {TypeKey{1, {1}, {0, 0}}, 2}};
  EXPECT_EQ(counts, expected);
}

TEST(BruteForce, PublishedEntries) {
  EXPECT_EQ(count_circuits_bruteforce(3).at(TypeKey{1, {1}, {1, 0}}), 3u);
  EXPECT_EQ(count_circuits_bruteforce(4).at(TypeKey{1, {2}, {0, 0}}), 2u);
}

TEST(BruteForce, RangeChecked) {
  EXPECT_THROW(count_circuits_bruteforce(0), InvalidArgument);
  EXPECT_THROW(count_circuits_bruteforce(kBruteForceMaxPower + 1), InvalidArgument);
}

TEST(BruteForce, AgreesWithEnumerationThroughTwelve) {
  for (int k = 1; k <= kBruteForceMaxPower; ++k) {
    std::map<TypeKey, std::uint64_t> enumerated;
    for (const auto& t : enumerate_types(k)) enumerated[t.key()] = t.count;
    EXPECT_EQ(enumerated, count_circuits_bruteforce(k)) << "k=" << k;
  }
}

TEST(BruteForce, CountsSumToClosedWalkClasses) {
  // Each closed step sequence has exactly one placement with lowest vertex 0.
  for (int k = 1; k <= kBruteForceMaxPower; ++k) {
    std::uint64_t total = 0;
    for (const auto& t : enumerate_types(k)) total += t.count;
    EXPECT_EQ(total, testing::closed_walks(k).size()) << "k=" << k;
  }
}

TEST(TypeTableCache, InstallRejectsMalformedTables) {
  auto& cache = TypeTableCache::instance();
  auto table = enumerate_types(5);
  auto broken = table;
  broken[0].n[0] += 1;  // weight no longer 5
  EXPECT_FALSE(cache.install(5, broken));
  EXPECT_FALSE(cache.install(5, {}));
  EXPECT_TRUE(cache.install(5, table));
  EXPECT_EQ(circuit_types(5), table);
}

TEST(TypeJson, LineFormat) {
  EXPECT_EQ(to_json_line(enumerate_types(4)[4]), R"({"k":4,"l":1,"m":[2],"n":[0,0],"count":2})");
}

// ------------------------------------------------------------------ traces

TEST(TraceExpansion, AllOnesSquare) {
  const auto q = TridiagonalMatrix::filled(3, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(trace_power_expansion(q, 2), 7.0);
  EXPECT_DOUBLE_EQ(trace_power_direct(q, 2), 7.0);
}

TEST(TraceExpansion, AllOnesFourthPower) {
  const auto q = TridiagonalMatrix::filled(3, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(trace_power_expansion(q, 4), 35.0);
  EXPECT_DOUBLE_EQ(trace_power_dense(q, 4), 35.0);
}

TEST(TraceExpansion, ZeroDiagonalFirstPower) {
  const TridiagonalMatrix q({2.0, -3.0, 0.5}, {0.0, 0.0, 0.0, 0.0}, {1.0, 4.0, -1.0});
  EXPECT_EQ(trace_power_expansion(q, 1), 0.0);
}

TEST(TraceExpansion, ThirdPowerFormula) {
  const std::vector<double> d = {0.3, -1.2, 2.0, 0.7, -0.4};
  const TridiagonalMatrix q({1, 1, 1, 1}, d, {1, 1, 1, 1});
  double expected = 0.0;
  for (double v : d) expected += v * v * v;
  for (std::size_t i = 0; i < 4; ++i) expected += 3.0 * (d[i] + d[i + 1]);
  EXPECT_NEAR(trace_power_expansion(q, 3), expected, 1e-12);
}

TEST(TraceExpansion, DimensionTooSmall) {
  const auto q = TridiagonalMatrix::filled(2, 1.0, 1.0, 1.0);
  EXPECT_THROW(trace_power_expansion(q, 4), InvalidArgument);  // needs n >= 3
  EXPECT_NO_THROW(trace_power_expansion(q, 3));
}

TEST(TraceExpansion, OverflowIsReported) {
  const auto q = TridiagonalMatrix::filled(4, 1e200, 1e200, 1e200);
  EXPECT_THROW(trace_power_expansion(q, 4), NumericOverflow);
}

TEST(TraceExpansion, TypeTableMustMatchPower) {
  const auto q = TridiagonalMatrix::filled(6, 1.0, 1.0, 1.0);
  EXPECT_THROW(trace_power_expansion(q, 4, enumerate_types(3)), InvalidArgument);
}

TEST(TraceDirect, IdentityGivesDimension) {
  const auto q = TridiagonalMatrix::filled(17, 0.0, 1.0, 0.0);
  for (int k = 1; k <= 9; ++k) EXPECT_DOUBLE_EQ(trace_power_direct(q, k), 17.0);
}

TEST(TraceDirect, RejectsBadInput) {
  EXPECT_THROW(TridiagonalMatrix({1.0}, {1.0, 2.0, 3.0}, {1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(TridiagonalMatrix({1.0}, {1.0, NAN}, {1.0}), InvalidArgument);
  const auto q = TridiagonalMatrix::filled(4, 1.0, 1.0, 1.0);
  EXPECT_THROW(trace_power_direct(q, 0), InvalidArgument);
  EXPECT_THROW(trace_power_dense(TridiagonalMatrix::filled(200, 1.0, 1.0, 1.0), 2),
               InvalidArgument);
}

TEST(TraceDirect, MatchesWalkEnumeration) {
  CounterStream stream(99, 0, 0);
  std::vector<double> sub(7), diag(8), sup(7);
  for (auto& v : sub) v = 4.0 * stream.uniform() - 2.0;
  for (auto& v : diag) v = 4.0 * stream.uniform() - 2.0;
  for (auto& v : sup) v = 4.0 * stream.uniform() - 2.0;
  const TridiagonalMatrix q(sub, diag, sup);
  for (int k = 1; k <= 8; ++k) {
    const double walks = testing::walk_trace(q, k);
    EXPECT_NEAR(trace_power_direct(q, k), walks, 1e-10 * (1.0 + std::abs(walks))) << k;
  }
}

// Seeded random matrices, entries uniform on [-2, 2].
TridiagonalMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  CounterStream stream(seed, 7, n);
  std::vector<double> sub(n - 1), diag(n), sup(n - 1);
  for (auto& v : sub) v = 4.0 * stream.uniform() - 2.0;
  for (auto& v : diag) v = 4.0 * stream.uniform() - 2.0;
  for (auto& v : sup) v = 4.0 * stream.uniform() - 2.0;
  return TridiagonalMatrix(std::move(sub), std::move(diag), std::move(sup));
}

TEST(TraceExpansion, AgreesWithDirectOnSeededMatrices) {
  const std::size_t sizes[] = {8, 16, 32, 64};
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    for (std::size_t n : sizes) {
      const auto q = random_matrix(n, seed);
      for (int k = 1; k <= 10; ++k) {
        const double direct = trace_power_direct(q, k);
        const double expansion = trace_power_expansion(q, k);
        EXPECT_LE(std::abs(expansion - direct), 1e-9 * (1.0 + std::abs(direct)))
            << "seed=" << seed << " n=" << n << " k=" << k;
        if (n <= 32) {
          EXPECT_LE(std::abs(trace_power_dense(q, k) - direct), 1e-9 * (1.0 + std::abs(direct)));
        }
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 200);
}

TEST(TraceExpansion, IntegerAllOnesExact) {
  for (std::size_t n : {12u, 16u, 20u}) {
    const auto q = BasicTridiagonal<std::int64_t>::filled(n, 1, 1, 1);
    for (int k = 1; k <= static_cast<int>(std::min<std::size_t>(n, 12)); ++k) {
      EXPECT_EQ(trace_power_expansion(q, k), trace_power_direct(q, k)) << "n=" << n << " k=" << k;
    }
  }
}

}  // namespace
}  // namespace tritrace
