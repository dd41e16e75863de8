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
#include <type_traits>

namespace tritrace {

// Neumaier variant of Kahan summation. For integral T it degrades to a
// plain exact accumulator.
template <class T>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(T initial) : sum_(initial) {}

  CompensatedSum& operator+=(T value) {
    if constexpr (std::is_floating_point_v<T>) {
      const T t = sum_ + value;
      if (std::abs(sum_) >= std::abs(value)) {
        compensation_ += (sum_ - t) + value;
      } else {
        compensation_ += (value - t) + sum_;
      }
      sum_ = t;
    } else {
      sum_ += value;
    }
    return *this;
  }

  T value() const { return sum_ + compensation_; }

 private:
  T sum_{};
  T compensation_{};
};

}  // namespace tritrace
