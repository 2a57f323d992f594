#pragma once

// Constrained submodular maximization with per-run approximation certificates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "submod/core.hpp"

namespace submod {

struct Certificate {
  double guarantee_ratio = 1.0;
  std::string guarantee_kind;
  std::uint64_t oracle_calls = 0;
  std::optional<std::uint64_t> seed;
  /// Set-cover runs only: 1 + ln(f(V) / (f(V) - f(X_{i-1}))); |result| <= factor * |OPT|.
  std::optional<double> wolsey_factor;
};

struct SelectionResult {
  std::vector<std::size_t> order;
  std::vector<double> gains;
  double value = 0.0;
  Certificate certificate;

  Subset as_subset(std::size_t n) const { return Subset::of(n, order); }
};

struct CardinalityConstraint {
  std::size_t k = 1;
};

struct KnapsackConstraint {
  ModularWeights costs;  // all weights > 0, constant 0
  double budget = 0.0;
};

/// Blocks partition V; an independent set takes at most limits[i] elements of block i.
struct PartitionMatroidSpec {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> limits;
};

/// Independence oracle consumed by the matroid greedy.
class Matroid {
 public:
  virtual ~Matroid() = default;
  virtual bool can_add(const Subset& current, std::size_t v) const = 0;
  virtual std::size_t rank_upper_bound() const = 0;
};

class PartitionMatroid final : public Matroid {
 public:
  PartitionMatroid(const PartitionMatroidSpec& spec, std::size_t n) : block_of_(n, npos), limits_(spec.limits) {
    if (spec.blocks.size() != spec.limits.size()) throw InvalidArgument("one limit per block required");
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
      if (spec.blocks[b].empty()) throw InvalidArgument("partition blocks must be nonempty");
      for (auto v : spec.blocks[b]) {
        if (v >= n) throw InvalidArgument("partition block element out of range");
        if (block_of_[v] != npos) throw InvalidArgument("element appears in more than one block");
        block_of_[v] = b;
      }
    }
    if (std::find(block_of_.begin(), block_of_.end(), npos) != block_of_.end())
      throw InvalidArgument("partition blocks must cover the ground set");
    for (std::size_t b = 0; b < limits_.size(); ++b) rank_ += std::min(limits_[b], spec.blocks[b].size());
  }

  bool is_independent(const Subset& s) const {
    std::vector<std::size_t> used(limits_.size(), 0);
    bool ok = true;
    s.for_each([&](std::size_t v) { ok &= ++used[block_of_[v]] <= limits_[block_of_[v]]; });
    return ok;
  }

  bool can_add(const Subset& current, std::size_t v) const override {
    if (current.contains(v)) return false;
    const std::size_t b = block_of_.at(v);
    std::size_t used = 0;
    current.for_each([&](std::size_t u) { used += block_of_[u] == b; });
    return used < limits_[b];
  }

  std::size_t rank_upper_bound() const override { return rank_; }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> block_of_;
  std::vector<std::size_t> limits_;
  std::size_t rank_ = 0;
};

/// 1 - (1 - 1/k)^k, the cardinality-greedy guarantee (tends to 1 - 1/e).
inline double greedy_ratio(std::size_t k) {
  if (k == 0) return 1.0;
  return 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(k), static_cast<double>(k));
}

struct GreedyOptions {
  bool lazy = false;
  bool early_stop = false;  // stop once the best gain is <= tolerance
  double tolerance = kDefaultTolerance;
};

namespace detail {

// Elements eligible for the next greedy step.
template <typename Eligible>
std::optional<std::pair<std::size_t, double>> naive_best(const SetFunction& f, const Subset& current, double f_current,
                                                         Eligible&& eligible, double tol) {
  const std::size_t n = f.ground_size();
  std::vector<std::pair<std::size_t, double>> gains;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < n; ++v) {
    if (current.contains(v) || !eligible(current, v)) continue;
    const double g = f(current.with(v)) - f_current;
    gains.emplace_back(v, g);
    best = std::max(best, g);
  }
  if (gains.empty()) return std::nullopt;
  // Largest gain wins; gains within tol of the best resolve to the lowest index.
  for (const auto& [v, g] : gains)
    if (g >= best - tol) return std::make_pair(v, g);
  return std::nullopt;
}

// Minoux-style lazy evaluation. Stale gains act as upper bounds; the winner
// is selected with the same (gain, index) rule as naive_best.
class LazyGreedyQueue {
 public:
  LazyGreedyQueue(const SetFunction& f) : f_(f) {}

  void seed(std::size_t v, double bound) { heap_.push({bound, v, std::numeric_limits<std::size_t>::max()}); }

  template <typename Eligible>
  std::optional<std::pair<std::size_t, double>> pop_best(const Subset& current, double f_current, std::size_t round,
                                                         Eligible&& eligible, double tol) {
    std::vector<Entry> fresh;
    // Phase 1: find the first entry that is fresh and on top.
    while (!heap_.empty()) {
      Entry e = heap_.top();
      heap_.pop();
      if (current.contains(e.v)) continue;
      if (!eligible(current, e.v)) {
        parked_.push_back(e);
        continue;
      }
      if (e.round == round) {
        fresh.push_back(e);
        break;
      }
      e.bound = f_(current.with(e.v)) - f_current;
      e.round = round;
      heap_.push(e);
    }
    if (fresh.empty()) {
      restore();
      return std::nullopt;
    }
    const double best = fresh.front().bound;
    // Phase 2: every remaining entry whose bound reaches best - tol may tie.
    while (!heap_.empty() && heap_.top().bound >= best - tol) {
      Entry e = heap_.top();
      heap_.pop();
      if (current.contains(e.v)) continue;
      if (!eligible(current, e.v)) {
        parked_.push_back(e);
        continue;
      }
      if (e.round != round) {
        e.bound = f_(current.with(e.v)) - f_current;
        e.round = round;
      }
      fresh.push_back(e);
    }
    double top = best;
    for (const auto& e : fresh) top = std::max(top, e.bound);
    std::size_t winner = std::numeric_limits<std::size_t>::max();
    double gain = 0.0;
    for (const auto& e : fresh)
      if (e.bound >= top - tol && e.v < winner) {
        winner = e.v;
        gain = e.bound;
      }
    for (const auto& e : fresh)
      if (e.v != winner) heap_.push(e);
    restore();
    return std::make_pair(winner, gain);
  }

 private:
  struct Entry {
    double bound;
    std::size_t v;
    std::size_t round;
    bool operator<(const Entry& o) const {
      if (bound != o.bound) return bound < o.bound;
      return v > o.v;
    }
  };

  void restore() {
    for (const auto& e : parked_) heap_.push(e);
    parked_.clear();
  }

  const SetFunction& f_;
  std::priority_queue<Entry> heap_;
  std::vector<Entry> parked_;
};

// Runs greedy steps until `max_steps` picks, or no eligible element is left.
template <typename Eligible>
SelectionResult run_greedy(const SetFunction& f, std::size_t max_steps, const GreedyOptions& opt, Eligible&& eligible) {
  const std::size_t n = f.ground_size();
  const std::uint64_t calls0 = f.eval_count();
  SelectionResult out;
  Subset current(n);
  double f_current = f(current);
  const double f_empty = f_current;

  std::optional<LazyGreedyQueue> queue;
  if (opt.lazy) {
    queue.emplace(f);
    for (std::size_t v = 0; v < n; ++v) queue->seed(v, std::numeric_limits<double>::infinity());
  }

  for (std::size_t step = 0; step < max_steps; ++step) {
    auto pick = opt.lazy ? queue->pop_best(current, f_current, step, eligible, opt.tolerance)
                         : naive_best(f, current, f_current, eligible, opt.tolerance);
    if (!pick) break;
    if (opt.early_stop && pick->second <= opt.tolerance) break;
    current.insert(pick->first);
    out.order.push_back(pick->first);
    out.gains.push_back(pick->second);
    f_current = f(current);
  }
  out.value = out.order.empty() ? f_empty : f_current;
  out.certificate.oracle_calls = f.eval_count() - calls0;
  return out;
}

}  // namespace detail

/// Cardinality-constrained greedy: repeatedly add argmax_v f(v | X).
inline SelectionResult greedy_cardinality(const SetFunction& f, CardinalityConstraint c, GreedyOptions opt = {}) {
  const std::size_t n = f.ground_size();
  if (c.k < 1 || c.k > n) throw InvalidArgument("cardinality k must satisfy 1 <= k <= n");
  if (!f.flags().monotone) std::cerr << "warning: greedy_cardinality on a function not claimed monotone\n";
  auto out = detail::run_greedy(f, c.k, opt, [](const Subset&, std::size_t) { return true; });
  out.certificate.guarantee_ratio = greedy_ratio(c.k);
  out.certificate.guarantee_kind = f.flags().monotone ? "1-(1-1/k)^k" : "unverified:not-monotone";
  return out;
}

inline SelectionResult greedy_cardinality(const SetFunction& f, std::size_t k, bool lazy = false) {
  GreedyOptions opt;
  opt.lazy = lazy;
  return greedy_cardinality(f, CardinalityConstraint{k}, opt);
}

inline double modular_cost(const ModularWeights& costs, const std::vector<std::size_t>& items) {
  double c = costs.constant;
  for (auto v : items) c += costs.weights[v];
  return c;
}

struct KnapsackOptions {
  /// 0: cost-ratio greedy plus best singleton. 3: additionally seed the ratio
  /// greedy from every feasible set of size 3 (and keep all feasible sets of
  /// size <= 2), which is O(n^5) oracle calls.
  std::size_t enumeration_depth = 0;
  double tolerance = kDefaultTolerance;
};

namespace detail {

// Benefit/cost greedy starting from `start`; skips items that no longer fit.
inline SelectionResult ratio_greedy(const SetFunction& f, const KnapsackConstraint& kc, const std::vector<std::size_t>& start,
                                    double tol) {
  const std::size_t n = f.ground_size();
  SelectionResult out;
  Subset current(n);
  double f_current = f(current);
  double spent = 0.0;
  for (auto v : start) {
    current.insert(v);
    const double next = f(current);
    out.order.push_back(v);
    out.gains.push_back(next - f_current);
    f_current = next;
    spent += kc.costs.weights[v];
  }
  while (true) {
    std::vector<std::pair<std::size_t, double>> cands;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < n; ++v) {
      if (current.contains(v) || spent + kc.costs.weights[v] > kc.budget + tol) continue;
      const double gain = f(current.with(v)) - f_current;
      const double ratio = gain / kc.costs.weights[v];
      cands.emplace_back(v, ratio);
      best = std::max(best, ratio);
    }
    if (cands.empty()) break;
    std::size_t pick = cands.front().first;
    for (const auto& [v, r] : cands)
      if (r >= best - tol) {
        pick = v;
        break;
      }
    current.insert(pick);
    const double next = f(current);
    out.order.push_back(pick);
    out.gains.push_back(next - f_current);
    f_current = next;
    spent += kc.costs.weights[pick];
  }
  out.value = f_current;
  return out;
}

}  // namespace detail

/// Knapsack-constrained maximization: the better of the cost-ratio greedy and
/// the best feasible singleton, certified at (1 - 1/e) / 2.
inline SelectionResult greedy_knapsack(const SetFunction& f, const KnapsackConstraint& kc, KnapsackOptions opt = {}) {
  const std::size_t n = f.ground_size();
  if (kc.costs.size() != n) throw DimensionError("knapsack costs must have one entry per element");
  if (kc.costs.constant != 0.0) throw InvalidArgument("knapsack costs must have zero constant");
  for (double c : kc.costs.weights)
    if (!(c > 0.0)) throw InvalidArgument("knapsack costs must be strictly positive");
  if (!(kc.budget > 0.0)) throw InvalidArgument("knapsack budget must be positive");
  const std::uint64_t calls0 = f.eval_count();
  const double tol = opt.tolerance;

  const double f_empty = f(Subset(n));
  std::optional<std::size_t> best_single;
  double best_single_value = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < n; ++v) {
    if (kc.costs.weights[v] > kc.budget + tol) continue;
    const double val = f(Subset(n, {v}));
    if (!best_single || val > best_single_value + tol) {
      best_single = v;
      best_single_value = val;
    }
  }
  if (!best_single) throw InfeasibleError("no element fits within the knapsack budget");

  SelectionResult best = detail::ratio_greedy(f, kc, {}, tol);
  std::string kind = "ratio-greedy+singleton";
  double ratio = 0.5 * (1.0 - std::exp(-1.0));
  if (best_single_value > best.value + tol) {
    best = SelectionResult{};
    best.order = {*best_single};
    best.gains = {best_single_value - f_empty};
    best.value = best_single_value;
  }

  if (opt.enumeration_depth >= 3) {
    kind = "partial-enumeration-3";
    ratio = 1.0 - std::exp(-1.0);
    auto consider = [&](SelectionResult cand) {
      if (cand.value > best.value + tol) best = std::move(cand);
    };
    auto cost_of = [&](std::initializer_list<std::size_t> items) {
      double c = 0.0;
      for (auto v : items) c += kc.costs.weights[v];
      return c;
    };
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (cost_of({a, b}) > kc.budget + tol) continue;
        SelectionResult pair;
        pair.order = {a, b};
        const double fa = f(Subset(n, {a}));
        pair.value = f(Subset(n, {a, b}));
        pair.gains = {fa - f_empty, pair.value - fa};
        consider(std::move(pair));
        for (std::size_t c = b + 1; c < n; ++c) {
          if (cost_of({a, b, c}) > kc.budget + tol) continue;
          consider(detail::ratio_greedy(f, kc, {a, b, c}, tol));
        }
      }
  }

  best.certificate.guarantee_ratio = ratio;
  best.certificate.guarantee_kind = kind;
  best.certificate.oracle_calls = f.eval_count() - calls0;
  return best;
}

/// Greedy over a matroid: add the best element whose addition stays independent.
inline SelectionResult greedy_matroid(const SetFunction& f, const Matroid& m, GreedyOptions opt = {}) {
  return detail::run_greedy(f, std::min(f.ground_size(), m.rank_upper_bound()), opt,
                            [&m](const Subset& current, std::size_t v) { return m.can_add(current, v); });
}

/// Partition-matroid greedy, certified at 1/2 for monotone submodular f.
inline SelectionResult greedy_partition_matroid(const SetFunction& f, const PartitionMatroidSpec& pm, GreedyOptions opt = {}) {
  PartitionMatroid matroid(pm, f.ground_size());
  auto out = greedy_matroid(f, matroid, opt);
  out.certificate.guarantee_ratio = 0.5;
  out.certificate.guarantee_kind = "matroid-greedy-1/2";
  return out;
}

/// Smallest set with f(X) >= alpha, greedily; the certificate carries Wolsey's factor.
inline SelectionResult submodular_set_cover(const SetFunction& f, double alpha, double tol = kDefaultTolerance) {
  const std::size_t n = f.ground_size();
  const std::uint64_t calls0 = f.eval_count();
  const double f_full = f(Subset::full(n));
  if (alpha > f_full + tol) throw InfeasibleError("target valuation exceeds f(V)");
  SelectionResult out;
  Subset current(n);
  double f_current = f(current);
  double f_before_last = f_current;
  while (f_current < alpha - tol) {
    auto pick = detail::naive_best(f, current, f_current, [](const Subset&, std::size_t) { return true; }, tol);
    if (!pick) break;
    f_before_last = f_current;
    current.insert(pick->first);
    out.order.push_back(pick->first);
    out.gains.push_back(pick->second);
    f_current = f(current);
  }
  out.value = f_current;
  double factor = 1.0;
  if (!out.order.empty()) {
    const double slack = f_full - f_before_last;
    factor = slack > 0.0 ? 1.0 + std::log(f_full / slack) : std::numeric_limits<double>::infinity();
  }
  out.certificate.wolsey_factor = factor;
  out.certificate.guarantee_ratio = std::isfinite(factor) && factor >= 1.0 ? 1.0 / factor : 1.0;
  out.certificate.guarantee_kind = "wolsey-set-cover";
  out.certificate.oracle_calls = f.eval_count() - calls0;
  return out;
}

/// Randomized bidirectional greedy for unconstrained (non-monotone) maximization.
/// Each element, in a seeded random order, joins the growing set with
/// probability a+ / (a+ + b+) (1/2 when both are zero), otherwise it leaves
/// the shrinking set.
inline SelectionResult random_greedy_unconstrained(const SetFunction& f, std::uint64_t seed) {
  const std::size_t n = f.ground_size();
  const std::uint64_t calls0 = f.eval_count();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  Subset grow(n);
  Subset shrink = Subset::full(n);
  double f_grow = f(grow);
  double f_shrink = f(shrink);
  SelectionResult out;
  for (auto v : order) {
    const Subset grow_v = grow.with(v);
    const Subset shrink_v = shrink.without(v);
    const double f_grow_v = f(grow_v);
    const double f_shrink_v = f(shrink_v);
    const double a = std::max(f_grow_v - f_grow, 0.0);
    const double b = std::max(f_shrink_v - f_shrink, 0.0);
    const double p = (a + b) > 0.0 ? a / (a + b) : 0.5;
    const double u = coin(rng);
    if (u < p) {
      out.order.push_back(v);
      out.gains.push_back(f_grow_v - f_grow);
      grow = grow_v;
      f_grow = f_grow_v;
    } else {
      shrink = shrink_v;
      f_shrink = f_shrink_v;
    }
  }
  out.value = f_grow;
  out.certificate.guarantee_ratio = 0.5;
  out.certificate.guarantee_kind = "bidirectional-greedy-expected-1/2";
  out.certificate.seed = seed;
  out.certificate.oracle_calls = f.eval_count() - calls0;
  return out;
}

struct WelfareResult {
  std::vector<Subset> blocks;
  std::vector<std::size_t> assignment;
  double value = 0.0;
  std::uint64_t oracle_calls = 0;
};

/// Greedy submodular welfare: elements in index order go to the block with the
/// largest marginal gain (ties to the lowest block). A single function is
/// shared by all blocks.
inline WelfareResult welfare_partition_greedy(const std::vector<SetFunction>& fs, std::size_t m_blocks,
                                              double tol = kDefaultTolerance) {
  if (m_blocks < 1) throw InvalidArgument("need at least one block");
  if (fs.empty()) throw InvalidArgument("need at least one valuation");
  if (fs.size() != 1 && fs.size() != m_blocks) throw InvalidArgument("provide one valuation or one per block");
  const std::size_t n = fs.front().ground_size();
  for (const auto& f : fs)
    if (f.ground_size() != n) throw DimensionError("valuations live on different ground sets");
  auto fn = [&](std::size_t j) -> const SetFunction& { return fs.size() == 1 ? fs.front() : fs[j]; };
  std::uint64_t calls0 = 0;
  for (const auto& f : fs) calls0 += f.eval_count();

  WelfareResult out;
  out.blocks.assign(m_blocks, Subset(n));
  out.assignment.assign(n, 0);
  std::vector<double> values(m_blocks);
  for (std::size_t j = 0; j < m_blocks; ++j) values[j] = fn(j)(out.blocks[j]);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<double> next(m_blocks);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m_blocks; ++j) {
      next[j] = fn(j)(out.blocks[j].with(v));
      best = std::max(best, next[j] - values[j]);
    }
    std::size_t pick = 0;
    for (std::size_t j = 0; j < m_blocks; ++j)
      if (next[j] - values[j] >= best - tol) {
        pick = j;
        break;
      }
    out.blocks[pick].insert(v);
    out.assignment[v] = pick;
    values[pick] = next[pick];
  }
  out.value = std::accumulate(values.begin(), values.end(), 0.0);
  std::uint64_t calls1 = 0;
  for (const auto& f : fs) calls1 += f.eval_count();
  out.oracle_calls = calls1 - calls0;
  return out;
}

/// Maximizes a monotone non-increasing submodular f over sets of size k_prime
/// by running greedy on g(X) = f(V \ X) with k = n - k_prime and returning the
/// complement. The order lists the kept elements in increasing index.
inline SelectionResult maximize_monotone_decreasing(const SetFunction& f, std::size_t k_prime, GreedyOptions opt = {}) {
  const std::size_t n = f.ground_size();
  if (k_prime > n) throw InvalidArgument("k_prime exceeds ground set size");
  const std::uint64_t calls0 = f.eval_count();
  const std::size_t k = n - k_prime;
  Subset kept = Subset::full(n);
  double ratio = 1.0;
  if (k > 0) {
    Flags fl = f.flags();
    fl.monotone = true;
    const SetFunction g = reflect(f).with_flags(fl, "reflect(" + f.name() + ")");
    auto removed = greedy_cardinality(g, CardinalityConstraint{k}, opt);
    for (auto v : removed.order) kept.erase(v);
    ratio = removed.certificate.guarantee_ratio;
  }
  SelectionResult out;
  Subset prefix(n);
  double prev = f(prefix);
  for (auto v : kept.members()) {
    prefix.insert(v);
    const double cur = f(prefix);
    out.order.push_back(v);
    out.gains.push_back(cur - prev);
    prev = cur;
  }
  out.value = prev;
  out.certificate.guarantee_ratio = ratio;
  out.certificate.guarantee_kind = "reflected-greedy";
  out.certificate.oracle_calls = f.eval_count() - calls0;
  return out;
}

}  // namespace submod
