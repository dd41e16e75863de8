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

// Named tridiagonal ensembles. Each spec defines an entry sequence
// a_1, a_2, ...; d_1, d_2, ...; b_1, b_2, ... (with a_0 = 0) as a
// deterministic function of a 64-bit seed and the site index, so a window at
// any offset reproduces the same values a full matrix would contain.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tritrace/error.hpp"
#include "tritrace/laws.hpp"
#include "tritrace/rng.hpp"
#include "tritrace/tridiagonal.hpp"

namespace tritrace {

enum class Model { kAnderson, kHatanoNelson, kBirthDeathKernel, kBirthDeathQ, kBetaHermite, kGenericIid };

enum class Coupling { kIndependentTriples, kDFromF, kIndependentStreams };

enum class KernelVariant { kV, kConductance };

struct EntryLaws {
  EntryLaw a = law::Uniform{0.5, 1.5};
  EntryLaw d = law::Rademacher{};
  EntryLaw b = law::Uniform{0.5, 1.5};
  EntryLaw v = law::Uniform{0.1, 0.9};   // birth-death kernel, V_i variant
  EntryLaw u = law::Uniform{0.5, 1.5};   // birth-death kernel, conductances
};

/// Linear coupling d_i = offset + scale * (a_{i-1} + a_i).
struct DiagonalCoupling {
  double offset = 0.0;
  double scale = -1.0;
};

struct EnsembleSpec {
  Model model = Model::kAnderson;
  bool symmetric = true;
  double beta = 2.0;
  EntryLaws laws;
  Coupling coupling = Coupling::kIndependentStreams;
  KernelVariant kernel_variant = KernelVariant::kV;
  DiagonalCoupling f;

  /// Every entry has compact support.
  bool bounded() const;
  /// (H.3)-type: i.i.d. site triples, or symmetric i.i.d. a with
  /// independent or f-coupled d.
  bool iid_type() const;

  static EnsembleSpec anderson(EntryLaw d = law::Rademacher{}) {
    EnsembleSpec s;
    s.model = Model::kAnderson;
    s.symmetric = true;
    s.laws.d = d;
    return s;
  }
  static EnsembleSpec hatano_nelson(EntryLaw a = law::Uniform{0.5, 1.5},
                                    EntryLaw d = law::Uniform{-1.0, 1.0},
                                    EntryLaw b = law::Uniform{0.5, 1.5}) {
    EnsembleSpec s;
    s.model = Model::kHatanoNelson;
    s.symmetric = false;
    s.laws.a = a;
    s.laws.d = d;
    s.laws.b = b;
    return s;
  }
  static EnsembleSpec birth_death_kernel(EntryLaw v = law::Uniform{0.1, 0.9}) {
    EnsembleSpec s;
    s.model = Model::kBirthDeathKernel;
    s.symmetric = false;
    s.laws.v = v;
    return s;
  }
  static EnsembleSpec birth_death_conductance(EntryLaw u = law::Uniform{0.5, 1.5}) {
    EnsembleSpec s = birth_death_kernel();
    s.kernel_variant = KernelVariant::kConductance;
    s.laws.u = u;
    return s;
  }
  static EnsembleSpec birth_death_q(EntryLaw a = law::Uniform{0.5, 1.5},
                                    EntryLaw b = law::Uniform{0.5, 1.5},
                                    bool symmetric = false) {
    EnsembleSpec s;
    s.model = Model::kBirthDeathQ;
    s.symmetric = symmetric;
    s.laws.a = a;
    s.laws.b = b;
    return s;
  }
  static EnsembleSpec beta_hermite(double beta) {
    EnsembleSpec s;
    s.model = Model::kBetaHermite;
    s.symmetric = true;
    s.beta = beta;
    return s;
  }
  static EnsembleSpec generic_iid(EntryLaw a, EntryLaw d, EntryLaw b, bool symmetric,
                                  Coupling coupling = Coupling::kIndependentStreams) {
    EnsembleSpec s;
    s.model = Model::kGenericIid;
    s.symmetric = symmetric;
    s.laws.a = a;
    s.laws.d = d;
    s.laws.b = b;
    s.coupling = coupling;
    return s;
  }
};

inline std::string to_string(Model model) {
  switch (model) {
    case Model::kAnderson: return "anderson";
    case Model::kHatanoNelson: return "hatano_nelson";
    case Model::kBirthDeathKernel: return "birth_death_kernel";
    case Model::kBirthDeathQ: return "birth_death_q";
    case Model::kBetaHermite: return "beta_hermite";
    case Model::kGenericIid: return "generic_iid";
  }
  return "unknown";
}

inline Model parse_model(const std::string& name) {
  for (Model m : {Model::kAnderson, Model::kHatanoNelson, Model::kBirthDeathKernel,
                  Model::kBirthDeathQ, Model::kBetaHermite, Model::kGenericIid}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown ensemble model '" + name + "'");
}

inline std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::kIndependentTriples: return "independent_triples";
    case Coupling::kDFromF: return "d_from_f";
    case Coupling::kIndependentStreams: return "independent_streams";
  }
  return "unknown";
}

inline Coupling parse_coupling(const std::string& name) {
  for (Coupling c : {Coupling::kIndependentTriples, Coupling::kDFromF,
                     Coupling::kIndependentStreams}) {
    if (to_string(c) == name) return c;
  }
  throw InvalidArgument("unknown coupling '" + name + "'");
}

inline std::string to_string(KernelVariant v) {
  return v == KernelVariant::kV ? "v" : "conductance";
}

inline KernelVariant parse_kernel_variant(const std::string& name) {
  if (name == "v") return KernelVariant::kV;
  if (name == "conductance") return KernelVariant::kConductance;
  throw InvalidArgument("unknown kernel variant '" + name + "'");
}

namespace detail {

inline void require_positive_support(const EntryLaw& l, const char* what) {
  const auto s = law_support(l);
  if (!s || !(s->lo > 0.0)) {
    throw InvalidArgument(std::string(what) + " law must have support in (0, inf)");
  }
}

}  // namespace detail

inline void validate(const EnsembleSpec& spec) {
  switch (spec.model) {
    case Model::kAnderson:
      if (!spec.symmetric) throw InvalidArgument("anderson model is symmetric");
      validate_law(spec.laws.d);
      break;
    case Model::kHatanoNelson: {
      validate_law(spec.laws.a);
      validate_law(spec.laws.d);
      validate_law(spec.laws.b);
      const auto sa = law_support(spec.laws.a);
      const auto sb = law_support(spec.laws.b);
      const bool positive = sa && sb && sa->lo > 0.0 && sb->lo > 0.0;
      const bool negative = sa && sb && sa->hi < 0.0 && sb->hi < 0.0;
      if (!positive && !negative) {
        throw InvalidArgument("hatano_nelson needs a_i/b_i > 0: a and b supports of one strict sign");
      }
      break;
    }
    case Model::kBirthDeathKernel:
      if (spec.symmetric) throw InvalidArgument("birth_death_kernel is not symmetric");
      if (spec.kernel_variant == KernelVariant::kV) {
        validate_law(spec.laws.v);
        const auto s = law_support(spec.laws.v);
        if (!s || s->lo < 0.0 || s->hi > 1.0) {
          throw InvalidArgument("birth_death_kernel V law must live on [0,1]");
        }
        if (!std::holds_alternative<law::Uniform>(spec.laws.v) && (s->lo <= 0.0 || s->hi >= 1.0)) {
          throw InvalidArgument("birth_death_kernel V atoms must lie in (0,1)");
        }
      } else {
        validate_law(spec.laws.u);
        detail::require_positive_support(spec.laws.u, "conductance");
      }
      break;
    case Model::kBirthDeathQ:
      validate_law(spec.laws.a);
      detail::require_positive_support(spec.laws.a, "birth_death_q a");
      if (!spec.symmetric) {
        validate_law(spec.laws.b);
        detail::require_positive_support(spec.laws.b, "birth_death_q b");
      }
      break;
    case Model::kBetaHermite:
      if (!spec.symmetric) throw InvalidArgument("beta_hermite requires symmetric = true");
      if (!(spec.beta > 0.0) || !std::isfinite(spec.beta)) {
        throw InvalidArgument("beta_hermite requires beta > 0");
      }
      break;
    case Model::kGenericIid:
      validate_law(spec.laws.a);
      validate_law(spec.laws.d);
      if (!spec.symmetric) validate_law(spec.laws.b);
      if (spec.coupling == Coupling::kDFromF) {
        if (!spec.symmetric) throw InvalidArgument("d_from_f coupling requires symmetric = true");
        if (!std::isfinite(spec.f.offset) || !std::isfinite(spec.f.scale)) {
          throw InvalidArgument("d_from_f coefficients must be finite");
        }
      }
      if (spec.coupling == Coupling::kIndependentTriples && spec.symmetric) {
        throw InvalidArgument("independent_triples coupling is for the non-symmetric case");
      }
      break;
  }
}

inline bool EnsembleSpec::bounded() const {
  switch (model) {
    case Model::kAnderson: return law_is_bounded(laws.d);
    case Model::kHatanoNelson:
      return law_is_bounded(laws.a) && law_is_bounded(laws.d) && law_is_bounded(laws.b);
    case Model::kBirthDeathKernel: return true;
    case Model::kBirthDeathQ:
      return law_is_bounded(laws.a) && (symmetric || law_is_bounded(laws.b));
    case Model::kBetaHermite: return false;
    case Model::kGenericIid:
      return law_is_bounded(laws.a) && (symmetric || law_is_bounded(laws.b)) &&
             (coupling == Coupling::kDFromF || law_is_bounded(laws.d));
  }
  return false;
}

inline bool EnsembleSpec::iid_type() const {
  if (model == Model::kBetaHermite) return false;
  if (model == Model::kBirthDeathKernel && kernel_variant == KernelVariant::kConductance) {
    return false;
  }
  return true;
}

/// Entries on sites first..first+len-1, plus a_{first-1} (zero when first = 1).
class EntryWindow {
 public:
  EntryWindow(std::uint64_t first_index, std::vector<double> a, std::vector<double> d,
              std::vector<double> b)
      : first_(first_index), a_(std::move(a)), d_(std::move(d)), b_(std::move(b)) {
    if (first_ < 1) throw InvalidArgument("window first_index must be >= 1");
    if (d_.empty() || b_.size() != d_.size() || a_.size() != d_.size() + 1) {
      throw InvalidArgument("window lengths inconsistent");
    }
    if (first_ == 1 && a_[0] != 0.0) throw InvalidArgument("window a_0 slot must be 0");
  }

  std::uint64_t first_index() const { return first_; }
  std::uint64_t last_index() const { return first_ + d_.size() - 1; }
  std::size_t length() const { return d_.size(); }

  bool covers(std::uint64_t site) const { return site >= first_ && site <= last_index(); }

  // Site-indexed accessors; a is valid on [first-1, last].
  double a(std::uint64_t i) const {
    if (i + 1 < first_ || i > last_index()) throw InvalidArgument("window: a index out of range");
    return a_[i + 1 - first_];
  }
  double d(std::uint64_t i) const {
    if (!covers(i)) throw InvalidArgument("window: d index out of range");
    return d_[i - first_];
  }
  double b(std::uint64_t i) const {
    if (!covers(i)) throw InvalidArgument("window: b index out of range");
    return b_[i - first_];
  }

  std::span<const double> a_values() const { return a_; }
  std::span<const double> d_values() const { return d_; }
  std::span<const double> b_values() const { return b_; }

  /// Q_n made of sites 1..n of the sequence (no model boundary overrides).
  TridiagonalMatrix truncate(std::size_t n) const {
    if (first_ != 1 || n < 1 || n > d_.size()) {
      throw InvalidArgument("truncate needs a window starting at site 1 covering n sites");
    }
    std::vector<double> sub(a_.begin() + 1, a_.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> diag(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> sup(b_.begin(), b_.begin() + static_cast<std::ptrdiff_t>(n - 1));
    return TridiagonalMatrix(std::move(sub), std::move(diag), std::move(sup));
  }

 private:
  std::uint64_t first_;
  std::vector<double> a_;
  std::vector<double> d_;
  std::vector<double> b_;
};

namespace detail {

enum Component : std::uint32_t { kA = 0, kD = 1, kB = 2, kV = 3, kU = 4, kTriple = 5 };
inline constexpr std::uint32_t kBitBlockFlag = 0x100;

// Values of `entry_law` at sites first..first+out.size()-1 of one component.
inline void fill_component(const EntryLaw& entry_law, std::uint64_t seed, std::uint32_t component,
                           std::uint64_t first, std::span<double> out) {
  if (const auto* c = std::get_if<law::Constant>(&entry_law)) {
    std::fill(out.begin(), out.end(), c->value);
    return;
  }
  if (std::holds_alternative<law::Rademacher>(entry_law)) {
    // 128 sites share one Philox block.
    std::uint64_t cached_block = ~std::uint64_t{0};
    std::array<std::uint64_t, 2> bits{};
    for (std::size_t j = 0; j < out.size(); ++j) {
      const std::uint64_t site = first + j;
      const std::uint64_t block = site >> 7;
      if (block != cached_block) {
        bits = CounterStream::bits(seed, component | kBitBlockFlag, block);
        cached_block = block;
      }
      const unsigned offset = static_cast<unsigned>(site & 127u);
      const std::uint64_t bit = (bits[offset >> 6] >> (offset & 63u)) & 1u;
      out[j] = bit ? 1.0 : -1.0;
    }
    return;
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    CounterStream stream(seed, component, first + j);
    out[j] = sample_law(entry_law, stream);
  }
}

// Sequence values on [first, last] (a also at first-1).
struct RawSequence {
  std::vector<double> a;  // sites first-1 .. last
  std::vector<double> d;  // sites first .. last
  std::vector<double> b;  // sites first .. last
};

inline RawSequence sample_sequence(const EnsembleSpec& spec, std::uint64_t first,
                                   std::size_t len, std::uint64_t seed) {
  RawSequence seq;
  seq.a.assign(len + 1, 0.0);
  seq.d.assign(len, 0.0);
  seq.b.assign(len, 0.0);
  const std::uint64_t a_first = first - 1;  // site of seq.a[0]

  // Fills seq.a over sites a_first..last from a per-site law, keeping a_0 = 0.
  auto fill_a = [&](const EntryLaw& l) {
    fill_component(l, seed, kA, a_first, seq.a);
    if (a_first == 0) seq.a[0] = 0.0;
  };

  switch (spec.model) {
    case Model::kAnderson:
      std::fill(seq.a.begin(), seq.a.end(), -1.0);
      if (a_first == 0) seq.a[0] = 0.0;
      std::fill(seq.b.begin(), seq.b.end(), -1.0);
      fill_component(spec.laws.d, seed, kD, first, seq.d);
      break;

    case Model::kHatanoNelson:
      fill_a(spec.laws.a);
      fill_component(spec.laws.d, seed, kD, first, seq.d);
      if (spec.symmetric) {
        std::copy(seq.a.begin() + 1, seq.a.end(), seq.b.begin());
      } else {
        fill_component(spec.laws.b, seed, kB, first, seq.b);
      }
      break;

    case Model::kBirthDeathKernel:
      if (spec.kernel_variant == KernelVariant::kV) {
        // b_1 = 1; for i >= 2: b_i = V_i and a_{i-1} = 1 - V_i; d_i = 0.
        std::vector<double> v(len + 1);
        fill_component(spec.laws.v, seed, kV, first, v);  // V at sites first..last+1
        for (std::size_t j = 0; j < len; ++j) {
          const std::uint64_t site = first + j;
          seq.b[j] = site == 1 ? 1.0 : v[j];
        }
        for (std::size_t j = 0; j <= len; ++j) {
          const std::uint64_t site = a_first + j;  // a_site = 1 - V_{site+1}
          seq.a[j] = site == 0 ? 0.0 : 1.0 - v[j];
        }
      } else {
        // U_i on edge (i, i+1); b_i = U_i/(U_i + U_{i-1}), a_{i-1} = U_{i-1}/(U_i + U_{i-1}).
        std::vector<double> u(len + 2);
        fill_component(spec.laws.u, seed, kU, a_first, u);  // U at sites first-1..last+1
        auto u_at = [&](std::uint64_t site) { return u[site - a_first]; };
        for (std::size_t j = 0; j < len; ++j) {
          const std::uint64_t site = first + j;
          seq.b[j] = site == 1 ? 1.0 : u_at(site) / (u_at(site) + u_at(site - 1));
        }
        for (std::size_t j = 0; j <= len; ++j) {
          const std::uint64_t site = a_first + j;
          seq.a[j] = site == 0 ? 0.0 : u_at(site) / (u_at(site + 1) + u_at(site));
        }
      }
      std::fill(seq.d.begin(), seq.d.end(), 0.0);
      break;

    case Model::kBirthDeathQ:
      fill_a(spec.laws.a);
      if (spec.symmetric) {
        std::copy(seq.a.begin() + 1, seq.a.end(), seq.b.begin());
      } else {
        fill_component(spec.laws.b, seed, kB, first, seq.b);
      }
      for (std::size_t j = 0; j < len; ++j) seq.d[j] = -(seq.a[j] + seq.b[j]);
      break;

    case Model::kBetaHermite: {
      const double inv_sqrt_beta = 1.0 / std::sqrt(spec.beta);
      const double d_sigma = std::sqrt(2.0 / spec.beta);
      for (std::size_t j = 0; j <= len; ++j) {
        const std::uint64_t site = a_first + j;
        if (site == 0) continue;
        CounterStream stream(seed, kA, site);
        seq.a[j] = chi_variate(stream, static_cast<double>(site) * spec.beta) * inv_sqrt_beta;
      }
      for (std::size_t j = 0; j < len; ++j) {
        CounterStream stream(seed, kD, first + j);
        seq.d[j] = d_sigma * standard_normal(stream);
      }
      std::copy(seq.a.begin() + 1, seq.a.end(), seq.b.begin());
      break;
    }

    case Model::kGenericIid:
      if (spec.coupling == Coupling::kIndependentTriples) {
        // One stream per site i yields (a_{i-1}, d_i, b_i) in that order.
        for (std::size_t j = 0; j <= len; ++j) {
          const std::uint64_t site = a_first + j + 1;  // triple owning a_{site-1}
          CounterStream stream(seed, kTriple, site);
          const double a_prev = sample_law(spec.laws.a, stream);
          const double d = sample_law(spec.laws.d, stream);
          const double b = sample_law(spec.laws.b, stream);
          seq.a[j] = (site == 1) ? 0.0 : a_prev;
          if (j < len) {
            seq.d[j] = d;
            seq.b[j] = b;
          }
        }
        break;
      }
      fill_a(spec.laws.a);
      if (spec.symmetric) {
        std::copy(seq.a.begin() + 1, seq.a.end(), seq.b.begin());
      } else {
        fill_component(spec.laws.b, seed, kB, first, seq.b);
      }
      if (spec.coupling == Coupling::kDFromF) {
        for (std::size_t j = 0; j < len; ++j) {
          seq.d[j] = spec.f.offset + spec.f.scale * (seq.a[j] + seq.a[j + 1]);
        }
      } else {
        fill_component(spec.laws.d, seed, kD, first, seq.d);
      }
      break;
  }
  return seq;
}

}  // namespace detail

/// Entries on a site window, deterministic in (spec, first_index, len, seed).
inline EntryWindow sample_window(const EnsembleSpec& spec, std::uint64_t first_index,
                                 std::size_t len, std::uint64_t seed) {
  validate(spec);
  if (first_index < 1) throw InvalidArgument("first_index must be >= 1");
  if (len < 1) throw InvalidArgument("window length must be >= 1");
  auto seq = detail::sample_sequence(spec, first_index, len, seed);
  return EntryWindow(first_index, std::move(seq.a), std::move(seq.d), std::move(seq.b));
}

/// Q_n for the spec, deterministic in (spec, n, seed). Equal to the first n
/// sites of the entry sequence except for model boundary rows (the
/// birth-death kernel sets a_{n-1} = 1 so the last row sums to one).
inline TridiagonalMatrix sample_matrix(const EnsembleSpec& spec, std::size_t n,
                                       std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("sample_matrix needs n >= 2");
  validate(spec);
  auto seq = detail::sample_sequence(spec, 1, n, seed);
  std::vector<double> sub(seq.a.begin() + 1, seq.a.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<double> sup(seq.b.begin(), seq.b.begin() + static_cast<std::ptrdiff_t>(n - 1));
  if (spec.model == Model::kBirthDeathKernel) sub.back() = 1.0;
  return TridiagonalMatrix(std::move(sub), std::move(seq.d), std::move(sup));
}

}  // namespace tritrace
