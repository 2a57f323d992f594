#pragma once

// Ground sets, subsets, and the set-function oracle handle.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace submod {

inline constexpr double kDefaultTolerance = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ground-set size or vector length does not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A constructor or operation received arguments outside its domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested constraint admits no feasible solution.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class GroundSet {
 public:
  explicit GroundSet(std::size_t n) : n_(n) {
    if (n == 0) throw InvalidArgument("ground set must have at least one element");
  }

  GroundSet(std::vector<std::string> labels) : n_(labels.size()), labels_(std::move(labels)) {
    if (n_ == 0) throw InvalidArgument("ground set must have at least one element");
    std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw InvalidArgument("ground set labels must be distinct");
  }

  std::size_t size() const noexcept { return n_; }
  bool has_labels() const noexcept { return !labels_.empty(); }

  std::string label(std::size_t i) const {
    if (i >= n_) throw DimensionError("label index out of range");
    return labels_.empty() ? std::to_string(i) : labels_[i];
  }

 private:
  std::size_t n_;
  std::vector<std::string> labels_;
};

/// Fixed-width bit-vector over a ground set of size n.
class Subset {
 public:
  Subset() = default;
  explicit Subset(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  Subset(std::size_t n, std::initializer_list<std::size_t> members) : Subset(n) {
    for (auto v : members) insert(v);
  }

  static Subset of(std::size_t n, std::span<const std::size_t> members) {
    Subset s(n);
    for (auto v : members) s.insert(v);
    return s;
  }

  static Subset full(std::size_t n) {
    Subset s(n);
    for (auto& w : s.words_) w = ~std::uint64_t{0};
    s.trim();
    return s;
  }

  /// Subset whose characteristic integer is `mask` (bit i <=> element i). Requires n <= 64.
  static Subset from_mask(std::size_t n, std::uint64_t mask) {
    if (n > 64) throw DimensionError("from_mask requires n <= 64");
    Subset s(n);
    if (n > 0) s.words_[0] = mask;
    s.trim();
    return s;
  }

  std::uint64_t mask() const {
    if (n_ > 64) throw DimensionError("mask requires n <= 64");
    return words_.empty() ? 0 : words_[0];
  }

  std::size_t ground_size() const noexcept { return n_; }

  bool contains(std::size_t v) const noexcept {
    return v < n_ && ((words_[v >> 6] >> (v & 63)) & 1U);
  }

  void insert(std::size_t v) {
    check_index(v);
    words_[v >> 6] |= std::uint64_t{1} << (v & 63);
  }

  void erase(std::size_t v) {
    check_index(v);
    words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
  }

  Subset with(std::size_t v) const {
    Subset s = *this;
    s.insert(v);
    return s;
  }

  Subset without(std::size_t v) const {
    Subset s = *this;
    s.erase(v);
    return s;
  }

  std::size_t cardinality() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool empty() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
  }

  Subset complement() const {
    Subset s(n_);
    for (std::size_t i = 0; i < words_.size(); ++i) s.words_[i] = ~words_[i];
    s.trim();
    return s;
  }

  bool is_subset_of(const Subset& other) const {
    same_ground(other);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~other.words_[i]) return false;
    return true;
  }

  bool intersects(const Subset& other) const {
    same_ground(other);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & other.words_[i]) return true;
    return false;
  }

  Subset& operator|=(const Subset& o) {
    same_ground(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  Subset& operator&=(const Subset& o) {
    same_ground(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  Subset& operator-=(const Subset& o) {
    same_ground(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }

  friend Subset operator|(Subset a, const Subset& b) { return a |= b; }
  friend Subset operator&(Subset a, const Subset& b) { return a &= b; }
  friend Subset operator-(Subset a, const Subset& b) { return a -= b; }

  friend bool operator==(const Subset& a, const Subset& b) = default;

  /// Calls fn(v) for every member in increasing order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(w));
        fn(wi * 64 + bit);
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    out.reserve(cardinality());
    for_each([&](std::size_t v) { out.push_back(v); });
    return out;
  }

  /// Ordering by characteristic integer sum_i 2^i [i in S]; used for deterministic tie-breaks.
  bool precedes(const Subset& other) const {
    same_ground(other);
    for (std::size_t i = words_.size(); i-- > 0;)
      if (words_[i] != other.words_[i]) return words_[i] < other.words_[i];
    return false;
  }

  std::size_t hash() const noexcept {
    std::size_t h = n_ * 0x9e3779b97f4a7c15ULL;
    for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

 private:
  void check_index(std::size_t v) const {
    if (v >= n_) throw DimensionError("element index " + std::to_string(v) + " out of range for n=" + std::to_string(n_));
  }
  void same_ground(const Subset& o) const {
    if (o.n_ != n_) throw DimensionError("subsets live on different ground sets");
  }
  void trim() {
    if (n_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

struct SubsetHash {
  std::size_t operator()(const Subset& s) const noexcept { return s.hash(); }
};

/// Capability claims attached to a handle. They are promises made by the
/// constructor; the analysis module is what verifies them.
struct Flags {
  bool monotone = false;
  bool normalized = false;
  bool symmetric = false;
  bool nonneg = false;

  friend bool operator==(const Flags&, const Flags&) = default;
};

/// Modular function m(A) = constant + sum_{a in A} weights[a].
struct ModularWeights {
  std::vector<double> weights;
  double constant = 0.0;

  std::size_t size() const noexcept { return weights.size(); }

  double operator()(const Subset& a) const {
    if (a.ground_size() != weights.size()) throw DimensionError("modular weights length does not match subset");
    double s = constant;
    a.for_each([&](std::size_t v) { s += weights[v]; });
    return s;
  }
};

using Oracle = std::function<double(const Subset&)>;

/// Immutable, shareable handle to a set function f : 2^V -> R.
///
/// Copies share identity and the evaluation counter. The oracle must be
/// deterministic and safe to call concurrently.
class SetFunction {
 public:
  SetFunction() = default;

  SetFunction(std::size_t n, Oracle oracle, Flags flags, std::string name = "custom")
      : state_(std::make_shared<State>(std::make_shared<const GroundSet>(n), std::move(oracle), flags, std::move(name))) {}

  SetFunction(std::shared_ptr<const GroundSet> ground, Oracle oracle, Flags flags, std::string name = "custom")
      : state_(std::make_shared<State>(std::move(ground), std::move(oracle), flags, std::move(name))) {}

  std::size_t ground_size() const { return state().ground->size(); }
  const GroundSet& ground() const { return *state().ground; }
  std::shared_ptr<const GroundSet> ground_ptr() const { return state().ground; }
  const Flags& flags() const { return state().flags; }
  const std::string& name() const { return state().name; }
  std::uint64_t eval_count() const { return state().calls.load(std::memory_order_relaxed); }
  const void* identity() const noexcept { return state_.get(); }
  bool valid() const noexcept { return static_cast<bool>(state_); }

  double operator()(const Subset& a) const {
    const State& s = state();
    if (a.ground_size() != s.ground->size())
      throw DimensionError("subset of size-" + std::to_string(a.ground_size()) + " ground set passed to function on n=" +
                           std::to_string(s.ground->size()));
    s.calls.fetch_add(1, std::memory_order_relaxed);
    return s.oracle(a);
  }

  /// Same oracle with different claims (shares nothing with the original).
  SetFunction with_flags(Flags flags, std::string name = {}) const {
    auto inner = *this;
    return SetFunction(ground_ptr(), [inner](const Subset& a) { return inner(a); }, flags,
                       name.empty() ? this->name() : std::move(name));
  }

 private:
  struct State {
    State(std::shared_ptr<const GroundSet> g, Oracle o, Flags f, std::string nm)
        : ground(std::move(g)), oracle(std::move(o)), flags(f), name(std::move(nm)) {}
    std::shared_ptr<const GroundSet> ground;
    Oracle oracle;
    Flags flags;
    std::string name;
    mutable std::atomic<std::uint64_t> calls{0};
  };

  const State& state() const {
    if (!state_) throw InvalidArgument("empty SetFunction handle");
    return *state_;
  }

  std::shared_ptr<const State> state_;
};

inline double evaluate(const SetFunction& f, const Subset& a) { return f(a); }

/// f(v | A) = f(A + v) - f(A); zero without oracle calls when v is already in A.
inline double marginal_gain(const SetFunction& f, std::size_t v, const Subset& a) {
  if (v >= f.ground_size()) throw DimensionError("element index out of range");
  if (a.contains(v)) return 0.0;
  return f(a.with(v)) - f(a);
}

/// f(B | A) = f(A u B) - f(A).
inline double set_gain(const SetFunction& f, const Subset& b, const Subset& a) { return f(a | b) - f(a); }

inline SetFunction modular(ModularWeights m) {
  const std::size_t n = m.size();
  if (n == 0) throw InvalidArgument("modular function needs at least one weight");
  Flags flags;
  flags.monotone = std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return w >= 0.0; });
  flags.normalized = m.constant == 0.0;
  flags.nonneg = flags.monotone && m.constant >= 0.0;
  flags.symmetric = std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return w == 0.0; });
  auto shared = std::make_shared<const ModularWeights>(std::move(m));
  return SetFunction(n, [shared](const Subset& a) { return (*shared)(a); }, flags, "modular");
}

// --- submodularity-preserving transforms -------------------------------------

/// g(A) = f(A | B) = f(A u B) - f(B).
inline SetFunction condition(const SetFunction& f, const Subset& b) {
  if (b.ground_size() != f.ground_size()) throw DimensionError("conditioning set outside ground set");
  const double fb = f(b);
  Flags fl;
  fl.monotone = f.flags().monotone;
  fl.normalized = true;
  fl.nonneg = f.flags().monotone;
  return SetFunction(f.ground_ptr(), [f, b, fb](const Subset& a) { return f(a | b) - fb; }, fl, "condition(" + f.name() + ")");
}

/// f restricted to the elements of W, re-indexed 0..|W|-1 in increasing order.
inline SetFunction restrict_to(const SetFunction& f, const Subset& w) {
  if (w.ground_size() != f.ground_size()) throw DimensionError("restriction set outside ground set");
  if (w.empty()) throw InvalidArgument("cannot restrict to the empty set");
  auto index = std::make_shared<const std::vector<std::size_t>>(w.members());
  const std::size_t n = f.ground_size();
  Flags fl = f.flags();
  fl.symmetric = fl.symmetric && index->size() == n;
  std::vector<std::string> labels;
  if (f.ground().has_labels())
    for (auto v : *index) labels.push_back(f.ground().label(v));
  auto ground = labels.empty() ? std::make_shared<const GroundSet>(index->size())
                               : std::make_shared<const GroundSet>(std::move(labels));
  return SetFunction(
      ground,
      [f, index, n](const Subset& a) {
        Subset lifted(n);
        a.for_each([&](std::size_t i) { lifted.insert((*index)[i]); });
        return f(lifted);
      },
      fl, "restrict(" + f.name() + ")");
}

/// Maps a subset of the restricted ground set back to the original indices.
inline Subset lift(const Subset& local, const Subset& w) {
  const auto index = w.members();
  if (local.ground_size() != index.size()) throw DimensionError("local subset does not match restriction");
  Subset out(w.ground_size());
  local.for_each([&](std::size_t i) { out.insert(index[i]); });
  return out;
}

/// g(A) = f(V \ A).
inline SetFunction reflect(const SetFunction& f) {
  Flags fl;
  fl.symmetric = f.flags().symmetric;
  fl.nonneg = f.flags().nonneg;
  fl.normalized = f.flags().symmetric && f.flags().normalized;
  return SetFunction(f.ground_ptr(), [f](const Subset& a) { return f(a.complement()); }, fl, "reflect(" + f.name() + ")");
}

/// g(A) = sum_i w_i f_i(A) with w_i >= 0.
inline SetFunction mixture(std::vector<std::pair<double, SetFunction>> terms) {
  if (terms.empty()) throw InvalidArgument("mixture needs at least one term");
  const std::size_t n = terms.front().second.ground_size();
  Flags fl{true, true, true, true};
  for (const auto& [w, g] : terms) {
    if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be nonnegative");
    if (g.ground_size() != n) throw DimensionError("mixture components live on different ground sets");
    if (w == 0.0) continue;
    fl.monotone &= g.flags().monotone;
    fl.normalized &= g.flags().normalized;
    fl.symmetric &= g.flags().symmetric;
    fl.nonneg &= g.flags().nonneg;
  }
  auto shared = std::make_shared<const std::vector<std::pair<double, SetFunction>>>(std::move(terms));
  return SetFunction(
      shared->front().second.ground_ptr(),
      [shared](const Subset& a) {
        double s = 0.0;
        for (const auto& [w, g] : *shared)
          if (w != 0.0) s += w * g(a);
        return s;
      },
      fl, "mixture");
}

/// f(A) + m(A) for a signed modular m; claims are kept only where m cannot break them.
inline SetFunction add_modular(const SetFunction& f, const ModularWeights& m) {
  if (m.size() != f.ground_size()) throw DimensionError("modular term length mismatch");
  const bool nonneg_w = std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return w >= 0.0; });
  Flags fl;
  fl.monotone = f.flags().monotone && nonneg_w;
  fl.normalized = f.flags().normalized && m.constant == 0.0;
  fl.nonneg = f.flags().nonneg && nonneg_w && m.constant >= 0.0;
  return SetFunction(f.ground_ptr(), [f, m](const Subset& a) { return f(a) + m(a); }, fl, f.name() + "+modular");
}

/// f(A) - f(empty).
inline SetFunction normalized(const SetFunction& f) {
  if (f.flags().normalized) return f;
  const double f0 = f(Subset(f.ground_size()));
  Flags fl = f.flags();
  fl.normalized = true;
  fl.nonneg = fl.monotone;
  return SetFunction(f.ground_ptr(), [f, f0](const Subset& a) { return f(a) - f0; }, fl, "normalized(" + f.name() + ")");
}

struct ConditionOn {
  Subset given;
};
struct RestrictTo {
  Subset keep;
};
struct Reflect {};
struct Mixture {
  std::vector<std::pair<double, SetFunction>> terms;
};

using TransformSpec = std::variant<ConditionOn, RestrictTo, Reflect, Mixture>;

/// Applies one transform descriptor. Mixture terms are used as given (f itself
/// is not implicitly included).
inline SetFunction derive_transform(const SetFunction& f, const TransformSpec& spec) {
  return std::visit(
      [&](const auto& t) -> SetFunction {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ConditionOn>) {
          return condition(f, t.given);
        } else if constexpr (std::is_same_v<T, RestrictTo>) {
          return restrict_to(f, t.keep);
        } else if constexpr (std::is_same_v<T, Reflect>) {
          return reflect(f);
        } else {
          for (const auto& term : t.terms)
            if (term.second.ground_size() != f.ground_size()) throw DimensionError("mixture term ground set mismatch");
          return mixture(t.terms);
        }
      },
      spec);
}

/// Every value f(S) for S encoded as a mask; built once per run (n <= 24).
class ValueTable {
 public:
  explicit ValueTable(const SetFunction& f) : n_(f.ground_size()) {
    if (n_ > 24) throw InvalidArgument("value table requires n <= 24");
    values_.resize(std::size_t{1} << n_);
    for (std::uint64_t m = 0; m < values_.size(); ++m) values_[m] = f(Subset::from_mask(n_, m));
  }

  std::size_t ground_size() const noexcept { return n_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::uint64_t mask) const { return values_[mask]; }
  double full() const { return values_.back(); }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

}  // namespace submod
