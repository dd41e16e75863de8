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

// Circuit types of closed walks on the integer path and their counts.
//
// A closed walk of length k with steps in {-1, 0, +1}, translated so that its
// leftmost vertex is 0, has a type (l, m, n): l is the span, m[j-1] is half
// the number of traversals of edge {j-1, j} (j = 1..l), and n[h] is the
// number of stay-steps (loops) at vertex h (h = 0..l). The count of a type is
// the number of closed walks (with any starting vertex) of that type.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tritrace/error.hpp"

namespace tritrace {

inline constexpr int kDefaultMaxPower = 16;
inline constexpr int kBruteForceMaxPower = 12;

/// (l, m, n) without the count; the map key of the brute-force oracle.
struct TypeKey {
  int l = 0;
  std::vector<int> m;
  std::vector<int> n;

  auto operator<=>(const TypeKey&) const = default;
};

struct CircuitType {
  int k = 0;
  int l = 0;
  std::vector<int> m;  // length l, every entry >= 1
  std::vector<int> n;  // length l + 1
  std::uint64_t count = 0;

  TypeKey key() const { return TypeKey{l, m, n}; }
  bool operator==(const CircuitType&) const = default;
};

/// Checks the admissibility rule, including the cascade condition on zero
/// edge multiplicities. Stored types additionally carry m_j >= 1.
inline bool is_admissible(int k, int l, const std::vector<int>& m,
                          const std::vector<int>& n) {
  if (k < 1 || l < 0 || l > k / 2) return false;
  if (static_cast<int>(m.size()) != l || static_cast<int>(n.size()) != l + 1) {
    return false;
  }
  int total = 0;
  for (int v : m) {
    if (v < 0) return false;
    total += 2 * v;
  }
  for (int v : n) {
    if (v < 0) return false;
    total += v;
  }
  if (total != k) return false;
  for (int p = 1; p <= l; ++p) {
    if (m[p - 1] != 0) continue;
    for (int j = p + 1; j <= l; ++j) {
      if (m[j - 1] != 0) return false;
    }
    for (int h = p; h <= l; ++h) {
      if (n[h] != 0) return false;
    }
  }
  return true;
}

inline bool is_stored_type(const CircuitType& t) {
  if (!is_admissible(t.k, t.l, t.m, t.n)) return false;
  if (t.count < 1) return false;
  return std::all_of(t.m.begin(), t.m.end(), [](int v) { return v >= 1; });
}

/// Table order: l ascending, m lexicographically ascending, n
/// lexicographically descending (the order in which the k = 3 and k = 4
/// tables are usually written).
inline bool type_order(const CircuitType& x, const CircuitType& y) {
  if (x.l != y.l) return x.l < y.l;
  if (x.m != y.m) return x.m < y.m;
  return x.n > y.n;
}

namespace detail {

inline void check_power(int k, int k_max) {
  if (k < 1 || k > k_max) {
    throw InvalidArgument("power k=" + std::to_string(k) +
                          " outside [1, " + std::to_string(k_max) + "]");
  }
}

// Number of closed walks on the path {0..l} that traverse edge {j-1, j}
// exactly 2 m[j-1] times and loop at h exactly n[h] times. Memoized over
// (position, residual multiplicities) for each starting vertex.
inline std::uint64_t count_closed_walks(const std::vector<int>& m,
                                        const std::vector<int>& n) {
  const int l = static_cast<int>(m.size());
  // Mixed-radix code of the residual counts: edges 1..l, then loops 0..l.
  std::vector<std::size_t> edge_stride(static_cast<std::size_t>(l) + 1, 0);
  std::vector<std::size_t> loop_stride(static_cast<std::size_t>(l) + 1, 0);
  std::size_t states = 1;
  for (int j = 1; j <= l; ++j) {
    edge_stride[j] = states;
    states *= static_cast<std::size_t>(2 * m[j - 1] + 1);
  }
  for (int h = 0; h <= l; ++h) {
    loop_stride[h] = states;
    states *= static_cast<std::size_t>(n[h] + 1);
  }
  std::size_t full = 0;
  for (int j = 1; j <= l; ++j) full += edge_stride[j] * (2 * m[j - 1]);
  for (int h = 0; h <= l; ++h) full += loop_stride[h] * n[h];

  auto digit = [&](std::size_t code, std::size_t stride, std::size_t radix) {
    return (code / stride) % radix;
  };

  const std::size_t positions = static_cast<std::size_t>(l) + 1;
  std::uint64_t total = 0;
  std::vector<std::int64_t> memo;
  for (int start = 0; start <= l; ++start) {
    memo.assign(states * positions, -1);
    std::function<std::uint64_t(int, std::size_t)> walks =
        [&](int pos, std::size_t code) -> std::uint64_t {
      if (code == 0) return pos == start ? 1 : 0;
      std::int64_t& slot = memo[code * positions + static_cast<std::size_t>(pos)];
      if (slot >= 0) return static_cast<std::uint64_t>(slot);
      std::uint64_t ways = 0;
      if (digit(code, loop_stride[pos], n[pos] + 1) > 0) {
        ways += walks(pos, code - loop_stride[pos]);
      }
      if (pos >= 1 &&
          digit(code, edge_stride[pos], 2 * m[pos - 1] + 1) > 0) {
        ways += walks(pos - 1, code - edge_stride[pos]);
      }
      if (pos < l &&
          digit(code, edge_stride[pos + 1], 2 * m[pos] + 1) > 0) {
        ways += walks(pos + 1, code - edge_stride[pos + 1]);
      }
      slot = static_cast<std::int64_t>(ways);
      return ways;
    };
    total += walks(start, full);
  }
  return total;
}

// Calls fn for every vector of `parts` integers >= `minimum` summing to total.
inline void for_each_composition(int total, int parts, int minimum,
                                 const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> current(static_cast<std::size_t>(parts), minimum);
  std::function<void(int, int)> rec = [&](int index, int remaining) {
    if (index == parts - 1) {
      current[index] = remaining;
      fn(current);
      return;
    }
    for (int v = minimum; remaining - v >= minimum * (parts - index - 1); ++v) {
      current[index] = v;
      rec(index + 1, remaining - v);
    }
  };
  if (parts == 0) {
    if (total == 0) fn(current);
    return;
  }
  if (total < minimum * parts) return;
  rec(0, total);
}

}  // namespace detail

/// The full type set for power k with counts, in table order.
inline std::vector<CircuitType> enumerate_types(int k,
                                                int k_max = kDefaultMaxPower) {
  detail::check_power(k, k_max);
  std::vector<CircuitType> types;
  types.push_back(CircuitType{k, 0, {}, {k}, 1});
  for (int l = 1; l <= k / 2; ++l) {
    for (int half_edges = l; 2 * half_edges <= k; ++half_edges) {
      detail::for_each_composition(half_edges, l, 1, [&](const std::vector<int>& m) {
        detail::for_each_composition(
            k - 2 * half_edges, l + 1, 0, [&](const std::vector<int>& n) {
              types.push_back(CircuitType{k, l, m, n, detail::count_closed_walks(m, n)});
            });
      });
    }
  }
  std::sort(types.begin(), types.end(), type_order);
  return types;
}

/// Independent oracle: classifies all 3^k step sequences that close up.
inline std::map<TypeKey, std::uint64_t> count_circuits_bruteforce(int k) {
  detail::check_power(k, kBruteForceMaxPower);
  std::uint64_t total = 1;
  for (int i = 0; i < k; ++i) total *= 3;

  std::map<TypeKey, std::uint64_t> counts;
  std::vector<int> steps(static_cast<std::size_t>(k));
  std::vector<int> path(static_cast<std::size_t>(k) + 1);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    int pos = 0;
    path[0] = 0;
    for (int s = 0; s < k; ++s) {
      steps[s] = static_cast<int>(c % 3) - 1;
      c /= 3;
      pos += steps[s];
      path[s + 1] = pos;
    }
    if (pos != 0) continue;
    const int lo = *std::min_element(path.begin(), path.end());
    const int hi = *std::max_element(path.begin(), path.end());
    TypeKey key;
    key.l = hi - lo;
    std::vector<int> edge_traversals(static_cast<std::size_t>(key.l), 0);
    key.n.assign(static_cast<std::size_t>(key.l) + 1, 0);
    for (int s = 0; s < k; ++s) {
      const int from = path[s] - lo;
      if (steps[s] == 0) {
        ++key.n[from];
      } else {
        ++edge_traversals[std::min(from, path[s + 1] - lo)];
      }
    }
    key.m.resize(edge_traversals.size());
    for (std::size_t j = 0; j < edge_traversals.size(); ++j) {
      key.m[j] = edge_traversals[j] / 2;
    }
    ++counts[key];
  }
  return counts;
}

/// Process-wide memo of type tables; safe to call from many threads.
class TypeTableCache {
 public:
  static TypeTableCache& instance() {
    static TypeTableCache cache;
    return cache;
  }

  const std::vector<CircuitType>& get(int k, int k_max = kDefaultMaxPower) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tables_.find(k);
    if (it == tables_.end()) {
      detail::check_power(k, k_max);
      it = tables_
               .emplace(k, std::make_shared<const std::vector<CircuitType>>(
                               enumerate_types(k, k_max)))
               .first;
    }
    return *it->second;
  }

  /// Installs a table obtained elsewhere (e.g. a disk cache) after checking
  /// it against the admissibility rule. Returns false if rejected. Tables
  /// already held for k are kept.
  bool install(int k, std::vector<CircuitType> table) {
    if (table.empty()) return false;
    for (const auto& t : table) {
      if (t.k != k || !is_stored_type(t)) return false;
    }
    if (!std::is_sorted(table.begin(), table.end(), type_order)) return false;
    std::lock_guard<std::mutex> lock(mutex_);
    // An existing table stays: references to it may be held elsewhere.
    tables_.emplace(k, std::make_shared<const std::vector<CircuitType>>(std::move(table)));
    return true;
  }

  bool contains(int k) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return tables_.count(k) != 0;
  }

 private:
  TypeTableCache() = default;

  mutable std::mutex mutex_;
  std::map<int, std::shared_ptr<const std::vector<CircuitType>>> tables_;
};

inline const std::vector<CircuitType>& circuit_types(int k) {
  return TypeTableCache::instance().get(k);
}

/// One JSON-lines record: {"k":..,"l":..,"m":[..],"n":[..],"count":..}
inline std::string to_json_line(const CircuitType& t) {
  auto list = [](const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    return s + "]";
  };
  return "{\"k\":" + std::to_string(t.k) + ",\"l\":" + std::to_string(t.l) +
         ",\"m\":" + list(t.m) + ",\"n\":" + list(t.n) +
         ",\"count\":" + std::to_string(t.count) + "}";
}

}  // namespace tritrace
