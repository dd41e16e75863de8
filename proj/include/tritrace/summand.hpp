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

// Per-site summands X_{k,i} of the trace expansion and the boundary term
// that separates sum_{i<=n} X_{k,i} from Tr Q_n^k.

#include <cstdint>
#include <span>
#include <string>

#include "tritrace/circuits.hpp"
#include "tritrace/compensated_sum.hpp"
#include "tritrace/ensembles.hpp"
#include "tritrace/error.hpp"
#include "tritrace/tridiagonal.hpp"

namespace tritrace {

/// Range m_k of the dependence of {X_{k,i}}: floor(k/2), plus one in the
/// symmetric case where d_i may depend on a_{i-1}.
struct DependenceRange {
  int k = 1;
  bool symmetric = false;
  int m = 0;

  static DependenceRange of(int k, bool symmetric) {
    if (k < 1) throw InvalidArgument("power k must be >= 1");
    return DependenceRange{k, symmetric, k / 2 + (symmetric ? 1 : 0)};
  }
  /// m_{ij} = max(m_{k_i}, m_{k_j}).
  static int joint(int k_i, int k_j, bool symmetric) {
    return std::max(of(k_i, symmetric).m, of(k_j, symmetric).m);
  }
};

namespace detail {

inline double product_at(const EntryWindow& w, const CircuitType& type, std::uint64_t i) {
  return representative_product<double>(
      type, i, [&](std::uint64_t s) { return w.a(s) * w.b(s); },
      [&](std::uint64_t s) { return w.d(s); });
}

}  // namespace detail

/// X_{k,i}: sum over types of count times the representative product at
/// leftmost site i. The window must cover sites i .. i + floor(k/2).
inline double site_summand(const EntryWindow& window, std::uint64_t i, int k,
                           std::span<const CircuitType> types) {
  detail::check_types_match(k, types);
  const std::uint64_t reach = i + static_cast<std::uint64_t>(k / 2);
  if (i < 1 || !window.covers(i) || !window.covers(reach)) {
    throw InvalidArgument("window [" + std::to_string(window.first_index()) + ", " +
                          std::to_string(window.last_index()) + "] too short for X_{" +
                          std::to_string(k) + "," + std::to_string(i) + "}");
  }
  CompensatedSum<double> total;
  for (const auto& type : types) {
    total += static_cast<double>(type.count) * detail::product_at(window, type, i);
  }
  return total.value();
}

inline double site_summand(const EntryWindow& window, std::uint64_t i, int k) {
  return site_summand(window, i, k, circuit_types(k));
}

/// sum_{i=first..last} X_{k,i}.
inline double summand_sum(const EntryWindow& window, std::uint64_t first, std::uint64_t last,
                          int k, std::span<const CircuitType> types) {
  CompensatedSum<double> total;
  for (std::uint64_t i = first; i <= last; ++i) total += site_summand(window, i, k, types);
  return total.value();
}

/// sum over types with l >= 1 of count * sum_{i=n-l+1..n} Q_{l,i}: the exact
/// amount by which sum_{i<=n} X_{k,i} exceeds Tr of the n-site truncation.
inline double boundary_correction(const EntryWindow& window, std::size_t n, int k,
                                  std::span<const CircuitType> types) {
  detail::check_types_match(k, types);
  if (window.first_index() != 1 || !window.covers(n + static_cast<std::uint64_t>(k / 2))) {
    throw InvalidArgument("boundary_correction needs sites 1..n+floor(k/2)");
  }
  CompensatedSum<double> total;
  for (const auto& type : types) {
    if (type.l == 0) continue;
    CompensatedSum<double> sites;
    for (std::size_t i = n - static_cast<std::size_t>(type.l) + 1; i <= n; ++i) {
      sites += detail::product_at(window, type, i);
    }
    total += static_cast<double>(type.count) * sites.value();
  }
  return total.value();
}

/// Deterministic bound B(spec, k) >= |sum_{i<=n} X_{k,i} - Tr Q_n^k| for the
/// sequence truncation, valid for every n. Requires a bounded spec.
inline double boundary_bound(const EnsembleSpec& spec, int k) {
  validate(spec);
  double ab = 0.0;  // sup |a_i b_i|
  double dd = 0.0;  // sup |d_i|
  switch (spec.model) {
    case Model::kAnderson:
      ab = 1.0;
      dd = law_abs_bound(spec.laws.d);
      break;
    case Model::kHatanoNelson:
      ab = law_abs_bound(spec.laws.a) *
           (spec.symmetric ? law_abs_bound(spec.laws.a) : law_abs_bound(spec.laws.b));
      dd = law_abs_bound(spec.laws.d);
      break;
    case Model::kBirthDeathKernel:
      ab = 1.0;
      dd = 0.0;
      break;
    case Model::kBirthDeathQ: {
      const double ma = law_abs_bound(spec.laws.a);
      const double mb = spec.symmetric ? ma : law_abs_bound(spec.laws.b);
      ab = ma * mb;
      dd = ma + mb;
      break;
    }
    case Model::kBetaHermite:
      throw InvalidArgument("boundary_bound needs a bounded spec; beta_hermite is unbounded");
    case Model::kGenericIid: {
      const double ma = law_abs_bound(spec.laws.a);
      const double mb = spec.symmetric ? ma : law_abs_bound(spec.laws.b);
      ab = ma * mb;
      dd = spec.coupling == Coupling::kDFromF
               ? std::abs(spec.f.offset) + 2.0 * std::abs(spec.f.scale) * ma
               : law_abs_bound(spec.laws.d);
      break;
    }
  }
  double bound = 0.0;
  for (const auto& type : circuit_types(k)) {
    if (type.l == 0) continue;
    int half_edges = 0;
    int loops = 0;
    for (int v : type.m) half_edges += v;
    for (int v : type.n) loops += v;
    bound += static_cast<double>(type.count) * type.l * ipow(ab, half_edges) * ipow(dd, loops);
  }
  return bound;
}

}  // namespace tritrace
