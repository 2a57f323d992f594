#pragma once

// Verification and characterization utilities: property checkers, curvature,
// semigradients, Shapley values, partition-function bounds, and brute force.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "submod/core.hpp"
#include "submod/maximize.hpp"
#include "submod/minimize.hpp"

namespace submod {

/// One failed inequality. For the four-points check, lhs = f(x | S) and
/// rhs = f(x | S + w); for monotonicity, lhs = f(S), rhs = f(S + x).
struct Violation {
  std::string kind;
  Subset context;
  std::size_t x = 0;
  std::optional<std::size_t> w;
  double lhs = 0.0;
  double rhs = 0.0;
  double deficit = 0.0;
};

struct CheckReport {
  bool verdict = true;
  std::vector<Violation> violations;  // worst first, capped at max_kept
  std::uint64_t violation_count = 0;
  std::uint64_t pairs_checked = 0;
};

enum class CheckMode { exhaustive, sampled };

struct CheckOptions {
  CheckMode mode = CheckMode::exhaustive;
  std::uint64_t seed = 0;
  std::size_t samples = 10000;
  double tolerance = kDefaultTolerance;
  std::size_t max_kept = 16;
};

namespace detail {

inline void record(CheckReport& report, Violation v, std::size_t max_kept) {
  ++report.violation_count;
  report.verdict = false;
  auto& vs = report.violations;
  auto pos = std::find_if(vs.begin(), vs.end(), [&](const Violation& o) { return o.deficit < v.deficit; });
  vs.insert(pos, std::move(v));
  if (vs.size() > max_kept) vs.pop_back();
}

inline Subset random_subset(std::size_t n, std::mt19937_64& rng) {
  Subset s(n);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t v = 0; v < n; ++v)
    if (coin(rng)) s.insert(v);
  return s;
}

}  // namespace detail

/// Re-evaluates a violation's witnesses and returns the reproduced deficit.
inline double replay(const SetFunction& f, const Violation& v) {
  if (v.kind == "four-points") {
    const Subset s = v.context;
    const Subset sw = s.with(*v.w);
    return (f(sw.with(v.x)) - f(sw)) - (f(s.with(v.x)) - f(s));
  }
  return f(v.context) - f(v.context.with(v.x));
}

/// Four-points check f(x | S) >= f(x | S + w). Exhaustive mode (n <= 14)
/// covers every S and unordered pair {x, w} outside S; sampled mode draws
/// `samples` seeded triples.
inline CheckReport check_submodular(const SetFunction& f, CheckOptions opt = {}) {
  const std::size_t n = f.ground_size();
  CheckReport report;
  auto test = [&](const Subset& s, std::size_t x, std::size_t w, double fs, double fsx, double fsw, double fsxw) {
    ++report.pairs_checked;
    const double lhs = fsx - fs;
    const double rhs = fsxw - fsw;
    const double deficit = rhs - lhs;
    if (deficit > opt.tolerance) detail::record(report, Violation{"four-points", s, x, w, lhs, rhs, deficit}, opt.max_kept);
  };
  if (opt.mode == CheckMode::exhaustive) {
    if (n > 14) throw InvalidArgument("exhaustive submodularity check requires n <= 14");
    const ValueTable t(f);
    for (std::uint64_t s = 0; s < t.size(); ++s)
      for (std::size_t x = 0; x < n; ++x) {
        const std::uint64_t bx = std::uint64_t{1} << x;
        if (s & bx) continue;
        for (std::size_t w = x + 1; w < n; ++w) {
          const std::uint64_t bw = std::uint64_t{1} << w;
          if (s & bw) continue;
          test(Subset::from_mask(n, s), x, w, t[s], t[s | bx], t[s | bw], t[s | bx | bw]);
        }
      }
    return report;
  }
  if (n < 2) return report;
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    Subset s = detail::random_subset(n, rng);
    const std::size_t x = pick(rng);
    std::size_t w = pick(rng);
    while (w == x) w = pick(rng);
    s.erase(x);
    s.erase(w);
    const double fs = f(s);
    test(s, x, w, fs, f(s.with(x)), f(s.with(w)), f(s.with(x).with(w)));
  }
  return report;
}

/// Classic-definition check f(X) + f(Y) >= f(X u Y) + f(X n Y) over all pairs (n <= 10).
inline bool check_submodular_classic(const SetFunction& f, double tol = kDefaultTolerance) {
  const std::size_t n = f.ground_size();
  if (n > 10) throw InvalidArgument("classic submodularity check requires n <= 10");
  const ValueTable t(f);
  for (std::uint64_t x = 0; x < t.size(); ++x)
    for (std::uint64_t y = 0; y < t.size(); ++y)
      if (t[x] + t[y] < t[x | y] + t[x & y] - tol) return false;
  return true;
}

/// Monotone non-decreasing check via single-element gains f(S + x) - f(S) >= -tol.
inline CheckReport check_monotone(const SetFunction& f, CheckOptions opt = {}) {
  const std::size_t n = f.ground_size();
  CheckReport report;
  auto test = [&](const Subset& s, std::size_t x, double fs, double fsx) {
    ++report.pairs_checked;
    const double deficit = fs - fsx;
    if (deficit > opt.tolerance) detail::record(report, Violation{"monotone", s, x, std::nullopt, fs, fsx, deficit}, opt.max_kept);
  };
  if (opt.mode == CheckMode::exhaustive) {
    if (n > 14) throw InvalidArgument("exhaustive monotonicity check requires n <= 14");
    const ValueTable t(f);
    for (std::uint64_t s = 0; s < t.size(); ++s)
      for (std::size_t x = 0; x < n; ++x) {
        const std::uint64_t bx = std::uint64_t{1} << x;
        if (!(s & bx)) test(Subset::from_mask(n, s), x, t[s], t[s | bx]);
      }
    return report;
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    Subset s = detail::random_subset(n, rng);
    const std::size_t x = pick(rng);
    s.erase(x);
    test(s, x, f(s), f(s.with(x)));
  }
  return report;
}

// --- curvature ---------------------------------------------------------------

struct CurvatureReport {
  double kappa = 0.0;
  std::size_t argmin = 0;
  double greedy_bound = 1.0;
  std::vector<std::size_t> pruned;
};

/// (1/kappa)(1 - e^{-kappa}), with the kappa -> 0 limit 1.
inline double curvature_bound(double kappa) {
  if (kappa < 1e-12) return 1.0;
  return -std::expm1(-kappa) / kappa;
}

/// (1/kappa)(1 - e^{-kappa (1 - kappa_g)}) for h = f + g with f submodular of
/// curvature kappa and g supermodular of curvature kappa_g.
inline double bp_bound(double kappa, double kappa_g) {
  if (kappa < 1e-12) return 1.0 - kappa_g;
  return -std::expm1(-kappa * (1.0 - kappa_g)) / kappa;
}

/// kappa = 1 - min_v f(v | V - v) / f(v) over elements with f(v) > 0.
inline CurvatureReport total_curvature(const SetFunction& f, double tol = kDefaultTolerance) {
  const std::size_t n = f.ground_size();
  const Subset empty(n);
  const Subset full = Subset::full(n);
  const double f_empty = f(empty);
  const double f_full = f(full);
  CurvatureReport r;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < n; ++v) {
    const double single = f(Subset(n, {v})) - f_empty;
    if (single <= tol) {
      r.pruned.push_back(v);
      continue;
    }
    const double last = f_full - f(full.without(v));
    const double ratio = last / single;
    if (ratio < min_ratio) {
      min_ratio = ratio;
      r.argmin = v;
    }
  }
  if (r.pruned.size() == n) throw InvalidArgument("every element has zero singleton value; curvature undefined");
  r.kappa = std::clamp(1.0 - min_ratio, 0.0, 1.0);
  r.greedy_bound = curvature_bound(r.kappa);
  return r;
}

/// kappa^g = 1 - min_v g(v) / g(v | V - v) for monotone supermodular g,
/// skipping elements with g(v | V - v) = 0.
inline CurvatureReport supermodular_curvature(const SetFunction& g, double tol = kDefaultTolerance) {
  const std::size_t n = g.ground_size();
  const Subset full = Subset::full(n);
  const double g_empty = g(Subset(n));
  const double g_full = g(full);
  CurvatureReport r;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < n; ++v) {
    const double last = g_full - g(full.without(v));
    if (last <= tol) {
      r.pruned.push_back(v);
      continue;
    }
    const double ratio = (g(Subset(n, {v})) - g_empty) / last;
    if (ratio < min_ratio) {
      min_ratio = ratio;
      r.argmin = v;
    }
  }
  if (r.pruned.size() == n) throw InvalidArgument("every element has zero last gain; supermodular curvature undefined");
  r.kappa = std::clamp(1.0 - min_ratio, 0.0, 1.0);
  r.greedy_bound = bp_bound(1.0, r.kappa);
  return r;
}

struct SubmodularityRatio {
  double gamma = 1.0;
  Subset x;
  Subset y;
};

/// gamma(h) = min over disjoint X, Y of sum_{v in Y} h(v | X) / h(Y | X),
/// skipping pairs with h(Y | X) <= tol. Values within tol of 1 or above are reported as 1.
inline SubmodularityRatio submodularity_ratio(const SetFunction& h, double tol = kDefaultTolerance) {
  const std::size_t n = h.ground_size();
  if (n > 10) throw InvalidArgument("submodularity ratio enumerates disjoint pairs and requires n <= 10");
  const ValueTable t(h);
  SubmodularityRatio r;
  r.x = Subset(n);
  r.y = Subset(n);
  double best = std::numeric_limits<double>::infinity();
  const std::uint64_t all = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t x = 0; x <= all; ++x) {
    const std::uint64_t rest = all & ~x;
    for (std::uint64_t y = rest; y != 0; y = (y - 1) & rest) {
      const double denom = t[x | y] - t[x];
      if (denom <= tol) continue;
      double num = 0.0;
      for (std::size_t v = 0; v < n; ++v)
        if (y >> v & 1U) num += t[x | (std::uint64_t{1} << v)] - t[x];
      const double ratio = num / denom;
      if (ratio < best) {
        best = ratio;
        r.x = Subset::from_mask(n, x);
        r.y = Subset::from_mask(n, y);
      }
    }
  }
  r.gamma = best >= 1.0 - tol ? 1.0 : best;
  return r;
}

// --- semigradients ---------------------------------------------------------------

struct SemigradientPair {
  Subset anchor;
  ModularWeights upper_intersection;  // f(A) - sum_{A\X} f(j | A - j) + sum_{X\A} f(j | empty)
  ModularWeights upper_union;  // f(A) - sum_{A\X} f(j | V - j) + sum_{X\A} f(j | A)
  ModularWeights lower;  // f(empty) + sum_{X} y_j, y a base vertex along a chain through A
  PermutationChain lower_chain;

  double upper(const Subset& x) const { return std::min(upper_intersection(x), upper_union(x)); }
};

/// Modular upper bounds from the union/intersection forms and a chain-based
/// lower bound, all tight at A.
inline SemigradientPair semigradient_bounds(const SetFunction& f, const Subset& a, std::uint64_t seed) {
  const std::size_t n = f.ground_size();
  if (a.ground_size() != n) throw DimensionError("anchor lives on a different ground set");
  const Subset empty(n);
  const Subset full = Subset::full(n);
  const double f_a = f(a);
  const double f_empty = f(empty);
  const double f_full = f(full);

  SemigradientPair p;
  p.anchor = a;
  p.upper_intersection.weights.resize(n);
  p.upper_union.weights.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (a.contains(j)) {
      const double drop = f_a - f(a.without(j));
      p.upper_intersection.weights[j] = drop;
      p.upper_union.weights[j] = f_full - f(full.without(j));
    } else {
      p.upper_intersection.weights[j] = f(Subset(n, {j})) - f_empty;
      p.upper_union.weights[j] = f(a.with(j)) - f_a;
    }
  }
  auto anchor_constant = [&](const ModularWeights& m) {
    double c = f_a;
    a.for_each([&](std::size_t j) { c -= m.weights[j]; });
    return c;
  };
  p.upper_intersection.constant = anchor_constant(p.upper_intersection);
  p.upper_union.constant = anchor_constant(p.upper_union);

  std::mt19937_64 rng(seed);
  auto inside = a.members();
  auto outside = a.complement().members();
  std::shuffle(inside.begin(), inside.end(), rng);
  std::shuffle(outside.begin(), outside.end(), rng);
  p.lower_chain.order = inside;
  p.lower_chain.order.insert(p.lower_chain.order.end(), outside.begin(), outside.end());
  const BasePolytopeVertex y = base_vertex(f, p.lower_chain);
  p.lower.weights = y.point;
  p.lower.constant = f_empty;
  return p;
}

// --- Shapley values ----------------------------------------------------------------

struct ShapleyResult {
  std::vector<double> values;
  std::vector<double> std_errors;  // zero in exact mode
  std::uint64_t samples = 0;
};

/// Exact Shapley values (n <= 20): the permutation average of f(v | sigma_{<v}),
/// computed by grouping permutations by the predecessor set,
/// phi_v = sum_{S not containing v} |S|! (n-|S|-1)! / n! * f(v | S).
inline ShapleyResult shapley_exact(const SetFunction& f) {
  const std::size_t n = f.ground_size();
  if (n > 20) throw InvalidArgument("exact Shapley values require n <= 20");
  const ValueTable t(f);
  // weight[s] = s! (n - s - 1)! / n!, built as a ratio to stay in range.
  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s) {
    // 1 / (n * C(n-1, s))
    double binom = 1.0;
    for (std::size_t i = 1; i <= s; ++i) binom = binom * static_cast<double>(n - 1 - s + i) / static_cast<double>(i);
    weight[s] = 1.0 / (static_cast<double>(n) * binom);
  }
  ShapleyResult r;
  r.values.assign(n, 0.0);
  r.std_errors.assign(n, 0.0);
  for (std::uint64_t s = 0; s < t.size(); ++s) {
    const auto size = static_cast<std::size_t>(std::popcount(s));
    if (size == n) continue;
    for (std::size_t v = 0; v < n; ++v) {
      const std::uint64_t bv = std::uint64_t{1} << v;
      if (s & bv) continue;
      r.values[v] += weight[size] * (t[s | bv] - t[s]);
    }
  }
  return r;
}

/// Monte Carlo Shapley values from `count` seeded random permutations.
inline ShapleyResult shapley_sampled(const SetFunction& f, std::uint64_t count, std::uint64_t seed) {
  const std::size_t n = f.ground_size();
  if (count < 2) throw InvalidArgument("need at least two sampled permutations");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  for (std::uint64_t i = 1; i <= count; ++i) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Subset s(n);
    double prev = f(s);
    for (auto v : perm) {
      s.insert(v);
      const double cur = f(s);
      const double gain = cur - prev;
      prev = cur;
      const double delta = gain - mean[v];
      mean[v] += delta / static_cast<double>(i);
      m2[v] += delta * (gain - mean[v]);
    }
  }
  ShapleyResult r;
  r.values = mean;
  r.samples = count;
  r.std_errors.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    r.std_errors[v] = std::sqrt(m2[v] / static_cast<double>(count - 1) / static_cast<double>(count));
  return r;
}

// --- partition function bounds --------------------------------------------------------

struct PartitionBounds {
  double log_lower = 0.0;
  double log_upper = 0.0;
  std::optional<double> exact;
};

/// log sum_X exp(m(X)) = c + sum_v log(1 + e^{m_v}) for modular m.
inline double modular_log_partition(const ModularWeights& m) {
  double s = m.constant;
  for (double w : m.weights) s += w > 0.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
  return s;
}

/// log Z for Z = sum_X exp(f(X)) by enumeration (n <= 24).
inline double log_partition_exact(const SetFunction& f) {
  const ValueTable t(f);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < t.size(); ++s) mx = std::max(mx, t[s]);
  double acc = 0.0;
  for (std::uint64_t s = 0; s < t.size(); ++s) acc += std::exp(t[s] - mx);
  return mx + std::log(acc);
}

/// Bounds on log Z from the semigradients at A; exact value attached when n <= 15.
inline PartitionBounds log_partition_bounds(const SetFunction& f, const Subset& anchor, std::uint64_t seed = 0) {
  const SemigradientPair p = semigradient_bounds(f, anchor, seed);
  PartitionBounds b;
  b.log_lower = modular_log_partition(p.lower);
  b.log_upper = std::min(modular_log_partition(p.upper_intersection), modular_log_partition(p.upper_union));
  if (f.ground_size() <= 15) b.exact = log_partition_exact(f);
  return b;
}

// --- brute force --------------------------------------------------------------------------

struct Unconstrained {};
struct AtMostK {
  std::size_t k;
};
struct ExactlyK {
  std::size_t k;
};
struct KnapsackBudget {
  std::vector<double> costs;
  double budget;
};
struct IndependentIn {
  PartitionMatroidSpec matroid;
};

using Constraint = std::variant<Unconstrained, AtMostK, ExactlyK, KnapsackBudget, IndependentIn>;

enum class Sense { maximize, minimize };

struct BruteForceResult {
  Subset set;
  double value = 0.0;
};

/// Exact optimum by enumeration; ties go to the smallest characteristic
/// integer. Unconstrained and general constraints need n <= 20; cardinality
/// constraints enumerate only the relevant combinations.
inline BruteForceResult brute_force_opt(const SetFunction& f, const Constraint& constraint, Sense sense) {
  const std::size_t n = f.ground_size();
  if (n > 24) throw InvalidArgument("brute force requires n <= 24");
  std::optional<BruteForceResult> best;
  auto consider = [&](std::uint64_t mask) {
    const Subset s = Subset::from_mask(n, mask);
    const double v = f(s);
    if (!best) {
      best = BruteForceResult{s, v};
      return;
    }
    const bool better = sense == Sense::maximize ? v > best->value : v < best->value;
    if (better || (v == best->value && s.precedes(best->set))) best = BruteForceResult{s, v};
  };
  auto by_size = [&](std::size_t k) {
    if (k > n) return;
    if (k == 0) {
      consider(0);
      return;
    }
    // Gosper's hack over all k-subsets.
    std::uint64_t m = (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (m < limit) {
      consider(m);
      const std::uint64_t c = m & (~m + 1);
      const std::uint64_t r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
  };
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ExactlyK>) {
          by_size(c.k);
        } else if constexpr (std::is_same_v<T, AtMostK>) {
          for (std::size_t k = 0; k <= std::min(c.k, n); ++k) by_size(k);
        } else {
          if (n > 20) throw InvalidArgument("unconstrained brute force requires n <= 20");
          std::optional<PartitionMatroid> pm;
          if constexpr (std::is_same_v<T, IndependentIn>) pm.emplace(c.matroid, n);
          for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
            if constexpr (std::is_same_v<T, KnapsackBudget>) {
              double cost = 0.0;
              for (std::size_t v = 0; v < n; ++v)
                if (m >> v & 1U) cost += c.costs[v];
              if (cost > c.budget + kDefaultTolerance) continue;
            } else if constexpr (std::is_same_v<T, IndependentIn>) {
              if (!pm->is_independent(Subset::from_mask(n, m))) continue;
            }
            consider(m);
          }
        }
      },
      constraint);
  if (!best) throw InfeasibleError("constraint admits no feasible set");
  return *best;
}

/// Smallest |X| with f(X) >= alpha - tol (ties by characteristic integer), by increasing size.
inline BruteForceResult brute_force_min_cover(const SetFunction& f, double alpha, double tol = kDefaultTolerance) {
  const std::size_t n = f.ground_size();
  for (std::size_t k = 0; k <= n; ++k) {
    const auto r = brute_force_opt(f, ExactlyK{k}, Sense::maximize);
    if (r.value >= alpha - tol) return r;
  }
  throw InfeasibleError("no subset reaches the target valuation");
}

}  // namespace submod
