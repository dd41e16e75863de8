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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tritrace/circuits.hpp"
#include "tritrace/compensated_sum.hpp"
#include "tritrace/error.hpp"

namespace tritrace {

/// Tridiagonal matrix with sub-diagonal a_1..a_{n-1}, diagonal d_1..d_n and
/// super-diagonal b_1..b_{n-1}; row i reads (a_{i-1}, d_i, b_i).
template <class T>
class BasicTridiagonal {
 public:
  using value_type = T;

  BasicTridiagonal(std::vector<T> sub, std::vector<T> diag, std::vector<T> sup)
      : sub_(std::move(sub)), diag_(std::move(diag)), sup_(std::move(sup)) {
    if (diag_.empty()) throw InvalidArgument("tridiagonal matrix needs n >= 1");
    if (sub_.size() + 1 != diag_.size() || sup_.size() + 1 != diag_.size()) {
      throw InvalidArgument("tridiagonal matrix: sub/sup must have length n-1");
    }
    if constexpr (std::is_floating_point_v<T>) {
      auto finite = [](const std::vector<T>& v) {
        for (T x : v) {
          if (!std::isfinite(x)) return false;
        }
        return true;
      };
      if (!finite(sub_) || !finite(diag_) || !finite(sup_)) {
        throw InvalidArgument("tridiagonal matrix entries must be finite");
      }
    }
  }

  /// Constant-entry matrix; handy for oracle checks.
  static BasicTridiagonal filled(std::size_t n, T sub, T diag, T sup) {
    if (n == 0) throw InvalidArgument("tridiagonal matrix needs n >= 1");
    return BasicTridiagonal(std::vector<T>(n - 1, sub), std::vector<T>(n, diag),
                            std::vector<T>(n - 1, sup));
  }

  std::size_t size() const { return diag_.size(); }

  std::span<const T> sub() const { return sub_; }
  std::span<const T> diag() const { return diag_; }
  std::span<const T> sup() const { return sup_; }

  // 1-based accessors.
  T a(std::size_t i) const { return sub_[i - 1]; }
  T d(std::size_t i) const { return diag_[i - 1]; }
  T b(std::size_t i) const { return sup_[i - 1]; }

  /// Entry (row, col), 1-based; zero outside the band.
  T at(std::size_t row, std::size_t col) const {
    if (row == col) return diag_[row - 1];
    if (row == col + 1) return sub_[col - 1];
    if (col == row + 1) return sup_[row - 1];
    return T{};
  }

 private:
  std::vector<T> sub_;
  std::vector<T> diag_;
  std::vector<T> sup_;
};

using TridiagonalMatrix = BasicTridiagonal<double>;

template <class T>
T ipow(T base, int exponent) {
  T result{1};
  for (int e = 0; e < exponent; ++e) result *= base;
  return result;
}

namespace detail {

inline void check_types_match(int k, std::span<const CircuitType> types) {
  if (types.empty()) throw InvalidArgument("empty circuit type table");
  for (const auto& t : types) {
    if (t.k != k) {
      throw InvalidArgument("circuit type table is for k=" + std::to_string(t.k) +
                            ", expected k=" + std::to_string(k));
    }
  }
}

template <class T>
void check_finite(T value, const char* what) {
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw NumericOverflow(what);
  }
}

}  // namespace detail

/// Product a_{i+j} b_{i+j} and d_{i+j} powers of one type at leftmost site i.
/// `ab(s)` and `d(s)` are 1-based accessors.
template <class T, class AbFn, class DFn>
T representative_product(const CircuitType& type, std::size_t i, AbFn&& ab, DFn&& d) {
  T product{1};
  for (int j = 0; j < type.l; ++j) {
    product *= ipow<T>(ab(i + static_cast<std::size_t>(j)), type.m[j]);
  }
  for (int j = 0; j <= type.l; ++j) {
    if (type.n[j] > 0) product *= ipow<T>(d(i + static_cast<std::size_t>(j)), type.n[j]);
  }
  return product;
}

/// Tr Q^k by summing, over circuit types, count times the site sum of the
/// representative products for leftmost sites i = 1..n-l.
template <class T>
T trace_power_expansion(const BasicTridiagonal<T>& q, int k,
                        std::span<const CircuitType> types) {
  detail::check_types_match(k, types);
  const std::size_t n = q.size();
  if (n < static_cast<std::size_t>(k / 2) + 1) {
    throw InvalidArgument("dimension n=" + std::to_string(n) +
                          " too small for k=" + std::to_string(k));
  }
  std::vector<T> ab(n > 0 ? n - 1 : 0);
  for (std::size_t i = 1; i < n; ++i) ab[i - 1] = q.a(i) * q.b(i);
  auto ab_at = [&](std::size_t s) { return ab[s - 1]; };
  auto d_at = [&](std::size_t s) { return q.d(s); };

  CompensatedSum<T> total;
  for (const auto& type : types) {
    CompensatedSum<T> site_sum;
    const std::size_t last = n - static_cast<std::size_t>(type.l);
    for (std::size_t i = 1; i <= last; ++i) {
      site_sum += representative_product<T>(type, i, ab_at, d_at);
    }
    const T contribution = static_cast<T>(type.count) * site_sum.value();
    detail::check_finite(contribution, "trace expansion overflowed");
    total += contribution;
  }
  const T result = total.value();
  detail::check_finite(result, "trace expansion overflowed");
  return result;
}

template <class T>
T trace_power_expansion(const BasicTridiagonal<T>& q, int k) {
  return trace_power_expansion(q, k, circuit_types(k));
}

namespace detail {

// Row-major band storage of a square matrix with half-bandwidth w.
template <class T>
class BandMatrix {
 public:
  BandMatrix(std::size_t n, std::size_t w)
      : n_(n), w_(w), data_(n * (2 * w + 1), T{}) {}

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return w_; }

  bool in_band(std::size_t row, std::size_t col) const {
    return (row > col ? row - col : col - row) <= w_;
  }
  // 0-based; caller guarantees in_band.
  T& ref(std::size_t row, std::size_t col) { return data_[row * (2 * w_ + 1) + col + w_ - row]; }
  T get(std::size_t row, std::size_t col) const {
    if (col >= n_ || !in_band(row, col)) return T{};
    return data_[row * (2 * w_ + 1) + col + w_ - row];
  }

 private:
  std::size_t n_;
  std::size_t w_;
  std::vector<T> data_;
};

}  // namespace detail

/// Tr Q^k by repeated banded multiplication. The j-th power has half
/// bandwidth min(j, n-1); total cost O(n k^2) with no dense storage.
template <class T>
T trace_power_direct(const BasicTridiagonal<T>& q, int k) {
  if (k < 1) throw InvalidArgument("power k must be >= 1");
  const std::size_t n = q.size();
  // Q entries, 0-based: super(i) = Q(i, i+1), sub(i) = Q(i+1, i).
  auto qd = [&](std::size_t i) { return q.d(i + 1); };
  auto qsup = [&](std::size_t i) { return q.b(i + 1); };
  auto qsub = [&](std::size_t i) { return q.a(i + 1); };

  // P = Q^{k-1}; then Tr Q^k = sum_i sum_t P(i,t) Q(t,i).
  detail::BandMatrix<T> power(n, 0);
  for (std::size_t i = 0; i < n; ++i) power.ref(i, i) = T{1};
  for (int step = 1; step < k; ++step) {
    const std::size_t w = std::min(power.bandwidth() + 1, n - 1);
    detail::BandMatrix<T> next(n, w);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= w ? i - w : 0;
      const std::size_t hi = std::min(n - 1, i + w);
      for (std::size_t j = lo; j <= hi; ++j) {
        // (P Q)(i,j) = P(i,j-1) Q(j-1,j) + P(i,j) Q(j,j) + P(i,j+1) Q(j+1,j)
        T value = power.get(i, j) * qd(j);
        if (j >= 1) value += power.get(i, j - 1) * qsup(j - 1);
        if (j + 1 < n) value += power.get(i, j + 1) * qsub(j);
        next.ref(i, j) = value;
      }
    }
    power = std::move(next);
  }
  CompensatedSum<T> trace;
  for (std::size_t i = 0; i < n; ++i) {
    T value = power.get(i, i) * qd(i);
    if (i >= 1) value += power.get(i, i - 1) * qsup(i - 1);
    if (i + 1 < n) value += power.get(i, i + 1) * qsub(i);
    trace += value;
  }
  const T result = trace.value();
  detail::check_finite(result, "banded trace overflowed");
  return result;
}

inline constexpr std::size_t kDenseMaxDimension = 128;

/// Dense O(n^3 k) cross-check; refuses n above `max_n`.
template <class T>
T trace_power_dense(const BasicTridiagonal<T>& q, int k,
                    std::size_t max_n = kDenseMaxDimension) {
  if (k < 1) throw InvalidArgument("power k must be >= 1");
  const std::size_t n = q.size();
  if (n > max_n) {
    throw InvalidArgument("dense trace path limited to n <= " + std::to_string(max_n));
  }
  std::vector<T> dense(n * n, T{});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) dense[r * n + c] = q.at(r + 1, c + 1);
  }
  std::vector<T> power = dense;
  std::vector<T> scratch(n * n);
  for (int step = 1; step < k; ++step) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        T acc{};
        for (std::size_t t = 0; t < n; ++t) acc += power[r * n + t] * dense[t * n + c];
        scratch[r * n + c] = acc;
      }
    }
    std::swap(power, scratch);
  }
  CompensatedSum<T> trace;
  for (std::size_t i = 0; i < n; ++i) trace += power[i * n + i];
  return trace.value();
}

}  // namespace tritrace
