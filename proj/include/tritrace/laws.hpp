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
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tritrace/error.hpp"
#include "tritrace/rng.hpp"

namespace tritrace {

namespace law {
struct Constant {
  double value = 0.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
/// Takes value v1 with probability p and v0 otherwise.
struct Bernoulli {
  double p = 0.5;
  double v0 = 0.0;
  double v1 = 1.0;
};
struct Gaussian {
  double mu = 0.0;
  double sigma = 1.0;
};
/// +1 or -1 with equal probability.
struct Rademacher {};
}  // namespace law

using EntryLaw = std::variant<law::Constant, law::Uniform, law::Bernoulli,
                              law::Gaussian, law::Rademacher>;

struct Interval {
  double lo;
  double hi;
};

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

inline void validate_law(const EntryLaw& entry_law) {
  auto finite = [](double x) { return std::isfinite(x); };
  std::visit(Overloaded{
                 [&](const law::Constant& c) {
                   if (!finite(c.value)) throw InvalidArgument("constant law: non-finite value");
                 },
                 [&](const law::Uniform& u) {
                   if (!finite(u.lo) || !finite(u.hi) || !(u.lo < u.hi)) {
                     throw InvalidArgument("uniform law needs finite lo < hi");
                   }
                 },
                 [&](const law::Bernoulli& b) {
                   if (!(b.p >= 0.0 && b.p <= 1.0) || !finite(b.v0) || !finite(b.v1)) {
                     throw InvalidArgument("bernoulli law needs p in [0,1] and finite values");
                   }
                 },
                 [&](const law::Gaussian& g) {
                   if (!finite(g.mu) || !finite(g.sigma) || g.sigma < 0.0) {
                     throw InvalidArgument("gaussian law needs finite mu and sigma >= 0");
                   }
                 },
                 [](const law::Rademacher&) {},
             },
             entry_law);
}

inline double law_mean(const EntryLaw& entry_law) {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value; },
                        [](const law::Uniform& u) { return 0.5 * (u.lo + u.hi); },
                        [](const law::Bernoulli& b) { return (1.0 - b.p) * b.v0 + b.p * b.v1; },
                        [](const law::Gaussian& g) { return g.mu; },
                        [](const law::Rademacher&) { return 0.0; },
                    },
                    entry_law);
}

inline double law_variance(const EntryLaw& entry_law) {
  return std::visit(Overloaded{
                        [](const law::Constant&) { return 0.0; },
                        [](const law::Uniform& u) {
                          const double w = u.hi - u.lo;
                          return w * w / 12.0;
                        },
                        [](const law::Bernoulli& b) {
                          const double gap = b.v1 - b.v0;
                          return b.p * (1.0 - b.p) * gap * gap;
                        },
                        [](const law::Gaussian& g) { return g.sigma * g.sigma; },
                        [](const law::Rademacher&) { return 1.0; },
                    },
                    entry_law);
}

/// Closed convex hull of the support; nullopt when unbounded.
inline std::optional<Interval> law_support(const EntryLaw& entry_law) {
  return std::visit(
      Overloaded{
          [](const law::Constant& c) -> std::optional<Interval> {
            return Interval{c.value, c.value};
          },
          [](const law::Uniform& u) -> std::optional<Interval> { return Interval{u.lo, u.hi}; },
          [](const law::Bernoulli& b) -> std::optional<Interval> {
            if (b.p == 0.0) return Interval{b.v0, b.v0};
            if (b.p == 1.0) return Interval{b.v1, b.v1};
            return Interval{std::min(b.v0, b.v1), std::max(b.v0, b.v1)};
          },
          [](const law::Gaussian& g) -> std::optional<Interval> {
            if (g.sigma == 0.0) return Interval{g.mu, g.mu};
            return std::nullopt;
          },
          [](const law::Rademacher&) -> std::optional<Interval> { return Interval{-1.0, 1.0}; },
      },
      entry_law);
}

inline bool law_is_bounded(const EntryLaw& entry_law) {
  return law_support(entry_law).has_value();
}

/// Largest |x| over the support; throws for unbounded laws.
inline double law_abs_bound(const EntryLaw& entry_law) {
  const auto support = law_support(entry_law);
  if (!support) throw InvalidArgument("law has unbounded support");
  return std::max(std::abs(support->lo), std::abs(support->hi));
}

inline bool law_is_constant(const EntryLaw& entry_law) {
  const auto support = law_support(entry_law);
  return support && support->lo == support->hi;
}

inline double sample_law(const EntryLaw& entry_law, CounterStream& stream) {
  return std::visit(Overloaded{
                        [](const law::Constant& c) { return c.value; },
                        [&](const law::Uniform& u) {
                          return u.lo + (u.hi - u.lo) * stream.uniform();
                        },
                        [&](const law::Bernoulli& b) {
                          return stream.uniform() < b.p ? b.v1 : b.v0;
                        },
                        [&](const law::Gaussian& g) {
                          return g.mu + g.sigma * standard_normal(stream);
                        },
                        [&](const law::Rademacher&) {
                          return (stream.next_u64() >> 63) ? 1.0 : -1.0;
                        },
                    },
                    entry_law);
}

namespace detail {

inline double log_sum_exp2(double x, double y) {
  const double m = std::max(x, y);
  if (m == -INFINITY) return -INFINITY;
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

}  // namespace detail

/// log E exp(t X), in closed form for every law in the enum.
inline double log_mgf(const EntryLaw& entry_law, double t) {
  return std::visit(
      Overloaded{
          [&](const law::Constant& c) { return t * c.value; },
          [&](const law::Uniform& u) {
            // log((e^{t hi} - e^{t lo}) / (t (hi - lo))), factoring out e^{t hi}
            // or e^{t lo} to stay finite at large |t|.
            const double w = u.hi - u.lo;
            const double s = t * w;
            if (std::abs(s) < 1e-8) return t * 0.5 * (u.lo + u.hi) + s * s / 24.0;
            if (s > 0) return t * u.hi + std::log(-std::expm1(-s) / s);
            return t * u.lo + std::log(std::expm1(s) / s);
          },
          [&](const law::Bernoulli& b) {
            const double l0 = b.p < 1.0 ? std::log1p(-b.p) + t * b.v0 : -INFINITY;
            const double l1 = b.p > 0.0 ? std::log(b.p) + t * b.v1 : -INFINITY;
            return detail::log_sum_exp2(l0, l1);
          },
          [&](const law::Gaussian& g) { return g.mu * t + 0.5 * g.sigma * g.sigma * t * t; },
          [&](const law::Rademacher&) {
            // log cosh t = |t| + log1p(e^{-2|t|}) - log 2
            const double a = std::abs(t);
            return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
          },
      },
      entry_law);
}

inline std::string format_number(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

inline std::string to_string(const EntryLaw& entry_law) {
  return std::visit(
      Overloaded{
          [](const law::Constant& c) { return "constant(" + format_number(c.value) + ")"; },
          [](const law::Uniform& u) {
            return "uniform(" + format_number(u.lo) + "," + format_number(u.hi) + ")";
          },
          [](const law::Bernoulli& b) {
            return "bernoulli(" + format_number(b.p) + "," + format_number(b.v0) + "," +
                   format_number(b.v1) + ")";
          },
          [](const law::Gaussian& g) {
            return "gaussian(" + format_number(g.mu) + "," + format_number(g.sigma) + ")";
          },
          [](const law::Rademacher&) { return std::string("rademacher"); },
      },
      entry_law);
}

/// Parses "rademacher", "constant(c)", "uniform(lo,hi)", "bernoulli(p)",
/// "bernoulli(p,v0,v1)" or "gaussian(mu,sigma)".
inline EntryLaw parse_law(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  const auto open = s.find('(');
  const std::string name = s.substr(0, open);
  std::vector<double> args;
  if (open != std::string::npos) {
    if (s.back() != ')') throw InvalidArgument("law '" + text + "': missing ')'");
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::size_t pos = 0;
    while (pos <= inner.size() && !inner.empty()) {
      const auto comma = inner.find(',', pos);
      const std::string token =
          inner.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(token, &used);
      } catch (const std::exception&) {
        throw InvalidArgument("law '" + text + "': bad number '" + token + "'");
      }
      if (used != token.size()) {
        throw InvalidArgument("law '" + text + "': bad number '" + token + "'");
      }
      args.push_back(value);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  auto need = [&](std::size_t count) {
    if (args.size() != count) {
      throw InvalidArgument("law '" + text + "' expects " + std::to_string(count) +
                            " argument(s)");
    }
  };
  EntryLaw result;
  if (name == "rademacher") {
    need(0);
    result = law::Rademacher{};
  } else if (name == "constant") {
    need(1);
    result = law::Constant{args[0]};
  } else if (name == "uniform") {
    need(2);
    result = law::Uniform{args[0], args[1]};
  } else if (name == "bernoulli") {
    if (args.size() == 1) {
      result = law::Bernoulli{args[0], 0.0, 1.0};
    } else {
      need(3);
      result = law::Bernoulli{args[0], args[1], args[2]};
    }
  } else if (name == "gaussian" || name == "normal") {
    need(2);
    result = law::Gaussian{args[0], args[1]};
  } else {
    throw InvalidArgument("unknown law '" + text + "'");
  }
  validate_law(result);
  return result;
}

}  // namespace tritrace
