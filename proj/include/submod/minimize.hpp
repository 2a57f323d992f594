#pragma once

// Unconstrained submodular minimization and the polyhedral machinery behind it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "submod/core.hpp"

namespace submod {

/// A permutation sigma of the ground set; prefix i is {sigma_1, ..., sigma_i}.
struct PermutationChain {
  std::vector<std::size_t> order;

  bool valid(std::size_t n) const {
    if (order.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (auto v : order) {
      if (v >= n || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  Subset prefix(std::size_t n, std::size_t i) const {
    Subset s(n);
    for (std::size_t j = 0; j < i; ++j) s.insert(order[j]);
    return s;
  }
};

/// Chain that sorts x in descending order (ties by lowest index).
inline PermutationChain descending_chain(std::span<const double> x) {
  PermutationChain c;
  c.order.resize(x.size());
  std::iota(c.order.begin(), c.order.end(), 0);
  std::stable_sort(c.order.begin(), c.order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  return c;
}

/// Chain that sorts x in ascending order (ties by lowest index).
inline PermutationChain ascending_chain(std::span<const double> x) {
  PermutationChain c;
  c.order.resize(x.size());
  std::iota(c.order.begin(), c.order.end(), 0);
  std::stable_sort(c.order.begin(), c.order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  return c;
}

struct LovaszResult {
  double value = 0.0;
  PermutationChain chain;  // descending sort of x
  /// coefficients[i] multiplies f(S_{i+1}): x_{sigma_i} - x_{sigma_{i+1}}, and x_{sigma_n} for S_n = V.
  std::vector<double> coefficients;
  std::vector<double> prefix_values;  // f(S_1), ..., f(S_n)
};

/// Lovasz extension x_{s_n} f(V) + sum_{i<n} (x_{s_i} - x_{s_{i+1}}) f(S_i)
/// under the descending sort s of x. No f(empty) term appears, so the extension
/// matches f on the cube vertices whenever f is normalized.
inline LovaszResult lovasz_extension(const SetFunction& f, std::span<const double> x) {
  const std::size_t n = f.ground_size();
  if (x.size() != n) throw DimensionError("Lovasz extension argument has wrong length");
  LovaszResult r;
  r.chain = descending_chain(x);
  r.coefficients.resize(n);
  r.prefix_values.resize(n);
  Subset s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = r.chain.order[i];
    s.insert(v);
    r.prefix_values[i] = f(s);
    r.coefficients[i] = i + 1 < n ? x[v] - x[r.chain.order[i + 1]] : x[v];
    r.value += r.coefficients[i] * r.prefix_values[i];
  }
  return r;
}

struct BasePolytopeVertex {
  std::vector<double> point;
  PermutationChain chain;
  std::vector<double> prefix_values;  // f(S_0), f(S_1), ..., f(S_n)
};

/// Edmonds greedy vertex: y(sigma_i) = f(S_i) - f(S_{i-1}).
inline BasePolytopeVertex base_vertex(const SetFunction& f, const PermutationChain& chain) {
  const std::size_t n = f.ground_size();
  if (!chain.valid(n)) throw InvalidArgument("chain is not a permutation of the ground set");
  BasePolytopeVertex out;
  out.chain = chain;
  out.point.assign(n, 0.0);
  out.prefix_values.resize(n + 1);
  Subset s(n);
  out.prefix_values[0] = f(s);
  for (std::size_t i = 0; i < n; ++i) {
    s.insert(chain.order[i]);
    out.prefix_values[i + 1] = f(s);
    out.point[chain.order[i]] = out.prefix_values[i + 1] - out.prefix_values[i];
  }
  return out;
}

struct MinimizerCertificate {
  Subset min_set;
  double min_value = 0.0;
  std::vector<double> norm_point;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
};

/// Raised when the Wolfe loop hits its iteration cap; carries the best certificate so far.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, MinimizerCertificate best) : Error(what), best_(std::move(best)) {}
  const MinimizerCertificate& best() const noexcept { return best_; }

 private:
  MinimizerCertificate best_;
};

struct MinNormOptions {
  double tolerance = kDefaultTolerance;
  /// 0 selects the default cap of 100 n^2 major cycles.
  std::size_t max_major_cycles = 0;
};

namespace detail {

// Best prefix of the ascending order of x under normalized g, ties to the shorter prefix.
inline std::pair<Subset, double> best_level_set(const BasePolytopeVertex& q, std::size_t n) {
  std::size_t best_i = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (q.prefix_values[i] < q.prefix_values[best_i]) best_i = i;
  return {q.chain.prefix(n, best_i), q.prefix_values[best_i]};
}

inline double negative_part_sum(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::min(x(i), 0.0);
  return s;
}

}  // namespace detail

/// Fujishige-Wolfe minimum-norm-point minimization.
///
/// Finds the min-norm point x* of the base polytope with Wolfe's major/minor
/// cycles, using greedy base vertices as the linear oracle. The minimizer is
/// read off as the best level set {v : x*_v <= t} along the ascending order of
/// x*; this family contains both {x* < 0} and {x* <= 0}. Functions with
/// f(empty) != 0 are shifted internally; min_value is reported on f itself and
/// duality_gap = g(min_set) - sum_v min(x*_v, 0) for the shifted g.
inline MinimizerCertificate min_norm_point(const SetFunction& f, MinNormOptions opt = {}) {
  if (!(opt.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  const std::size_t n = f.ground_size();
  const double f_empty = f(Subset(n));
  const SetFunction g = f_empty == 0.0 ? f : normalized(f);
  const std::size_t cap = opt.max_major_cycles ? opt.max_major_cycles : 100 * n * n + 100;
  const auto N = static_cast<Eigen::Index>(n);

  auto to_vec = [&](const std::vector<double>& p) {
    Eigen::VectorXd v(N);
    for (Eigen::Index i = 0; i < N; ++i) v(i) = p[static_cast<std::size_t>(i)];
    return v;
  };
  auto oracle = [&](const Eigen::VectorXd& x) {
    std::vector<double> xs(x.data(), x.data() + x.size());
    return base_vertex(g, ascending_chain(xs));
  };

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  BasePolytopeVertex q0 = base_vertex(g, PermutationChain{identity});
  std::vector<Eigen::VectorXd> active{to_vec(q0.point)};
  std::vector<double> lambda{1.0};
  Eigen::VectorXd x = active.front();
  double max_sq = std::max(1.0, x.squaredNorm());

  auto certificate = [&](const BasePolytopeVertex& q, std::size_t iters) {
    auto [set, gval] = detail::best_level_set(q, n);
    MinimizerCertificate c;
    c.min_set = set;
    c.min_value = f_empty == 0.0 ? gval : f(set);
    c.norm_point.assign(x.data(), x.data() + x.size());
    c.duality_gap = gval - detail::negative_part_sum(x);
    c.iterations = iters;
    return c;
  };

  for (std::size_t major = 1; major <= cap; ++major) {
    BasePolytopeVertex q = oracle(x);
    const Eigen::VectorXd qv = to_vec(q.point);
    max_sq = std::max(max_sq, qv.squaredNorm());
    const double wolfe_gap = x.squaredNorm() - x.dot(qv);
    if (wolfe_gap <= opt.tolerance * max_sq) return certificate(q, major);
    bool repeated = false;
    for (const auto& s : active)
      if ((s - qv).lpNorm<Eigen::Infinity>() <= 1e-14 * std::sqrt(max_sq)) repeated = true;
    if (repeated) return certificate(q, major);
    active.push_back(qv);
    lambda.push_back(0.0);

    // Minor cycles: move toward the affine minimizer of the active set while
    // staying in its convex hull, dropping vertices whose weight reaches zero.
    for (std::size_t minor = 0; minor <= n + 2; ++minor) {
      const auto m = static_cast<Eigen::Index>(active.size());
      Eigen::VectorXd alpha(m);
      if (m == 1) {
        alpha(0) = 1.0;
      } else {
        Eigen::MatrixXd diffs(N, m - 1);
        for (Eigen::Index j = 1; j < m; ++j) diffs.col(j - 1) = active[static_cast<std::size_t>(j)] - active[0];
        const Eigen::VectorXd beta = diffs.colPivHouseholderQr().solve(-active[0]);
        alpha(0) = 1.0 - beta.sum();
        alpha.tail(m - 1) = beta;
      }
      Eigen::VectorXd y = Eigen::VectorXd::Zero(N);
      for (Eigen::Index j = 0; j < m; ++j) y += alpha(j) * active[static_cast<std::size_t>(j)];

      const double eps = 1e-12;
      if ((alpha.array() > eps).all()) {
        x = y;
        for (Eigen::Index j = 0; j < m; ++j) lambda[static_cast<std::size_t>(j)] = alpha(j);
        break;
      }
      double theta = 1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double lj = lambda[static_cast<std::size_t>(j)];
        if (alpha(j) <= eps && lj - alpha(j) > 0.0) theta = std::min(theta, lj / (lj - alpha(j)));
      }
      x = theta * y + (1.0 - theta) * x;
      std::vector<Eigen::VectorXd> kept;
      std::vector<double> kept_lambda;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double lj = theta * alpha(j) + (1.0 - theta) * lambda[static_cast<std::size_t>(j)];
        if (lj > eps) {
          kept.push_back(active[static_cast<std::size_t>(j)]);
          kept_lambda.push_back(lj);
        }
      }
      if (kept.empty()) {
        kept.push_back(active.back());
        kept_lambda.push_back(1.0);
      }
      const double total = std::accumulate(kept_lambda.begin(), kept_lambda.end(), 0.0);
      for (auto& l : kept_lambda) l /= total;
      active = std::move(kept);
      lambda = std::move(kept_lambda);
      x = Eigen::VectorXd::Zero(N);
      for (std::size_t j = 0; j < active.size(); ++j) x += lambda[j] * active[j];
    }
  }
  throw ConvergenceError("min-norm point did not converge within the iteration cap", certificate(oracle(x), cap));
}

struct QueyranneOptions {
  double tolerance = kDefaultTolerance;
  std::size_t symmetry_samples = 32;
  std::uint64_t symmetry_seed = 0x5eed;
  bool check_symmetry = true;
};

/// f failed the sampled symmetry test required by Queyranne's algorithm.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// Samples random subsets and checks f(A) = f(V \ A).
inline bool looks_symmetric(const SetFunction& f, std::size_t samples, std::uint64_t seed, double tol) {
  const std::size_t n = f.ground_size();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t t = 0; t < samples; ++t) {
    Subset a(n);
    for (std::size_t v = 0; v < n; ++v)
      if (coin(rng)) a.insert(v);
    const double fa = f(a);
    const double fc = f(a.complement());
    if (std::abs(fa - fc) > tol * std::max(1.0, std::abs(fa))) return false;
  }
  return true;
}

/// Queyranne's pendant-pair algorithm: the minimizer of a symmetric
/// submodular f over proper nonempty subsets, in O(n^3) oracle calls.
inline MinimizerCertificate queyranne_minimize(const SetFunction& f, QueyranneOptions opt = {}) {
  const std::size_t n = f.ground_size();
  if (n < 2) throw InvalidArgument("Queyranne's algorithm needs at least two elements");
  if (opt.check_symmetry && !looks_symmetric(f, opt.symmetry_samples, opt.symmetry_seed, opt.tolerance))
    throw SymmetryError("function is not symmetric: f(A) != f(V \\ A) on a sampled subset");

  std::vector<Subset> groups;
  for (std::size_t v = 0; v < n; ++v) groups.push_back(Subset(n, {v}));
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), 0);

  MinimizerCertificate best;
  best.min_value = std::numeric_limits<double>::infinity();
  std::size_t phases = 0;
  while (alive.size() >= 2) {
    ++phases;
    const std::size_t m = alive.size();
    std::vector<double> own(m);
    for (std::size_t i = 0; i < m; ++i) own[i] = f(groups[alive[i]]);

    // Order: start from the lowest-index group, then repeatedly append the
    // group u minimizing f(W + u) - f(u).
    std::vector<bool> used(m, false);
    std::vector<std::size_t> order{0};
    used[0] = true;
    Subset w = groups[alive[0]];
    for (std::size_t step = 1; step < m; ++step) {
      std::size_t pick = m;
      double best_key = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (used[i]) continue;
        const double key = f(w | groups[alive[i]]) - own[i];
        if (pick == m || key < best_key) {
          best_key = key;
          pick = i;
        }
      }
      used[pick] = true;
      order.push_back(pick);
      w |= groups[alive[pick]];
    }
    const std::size_t t = order[m - 2];
    const std::size_t u = order[m - 1];
    // {u} is a minimizer among sets separating the pendant pair (t, u).
    if (own[u] < best.min_value - opt.tolerance ||
        (std::abs(own[u] - best.min_value) <= opt.tolerance && groups[alive[u]].cardinality() < best.min_set.cardinality())) {
      best.min_value = own[u];
      best.min_set = groups[alive[u]];
    }
    groups[alive[t]] |= groups[alive[u]];
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(u));
  }
  best.min_value = f(best.min_set);
  best.iterations = phases;
  best.duality_gap = 0.0;
  return best;
}

struct DsResult {
  Subset set;
  double value = 0.0;
  std::vector<double> trace;  // h = f - g at the start and after each accepted step
  std::size_t rounds = 0;
};

/// Minimizes h = f - g for submodular f, g by repeatedly replacing g with a
/// modular lower bound tight at the current set (built from a seeded random
/// chain through it) and solving the resulting submodular problem exactly.
inline DsResult ds_minimize(const SetFunction& f, const SetFunction& g, const Subset& start, std::uint64_t seed,
                            MinNormOptions opt = {}) {
  const std::size_t n = f.ground_size();
  if (g.ground_size() != n || start.ground_size() != n) throw DimensionError("DS minimization inputs differ in ground set");
  std::mt19937_64 rng(seed);
  auto h = [&](const Subset& a) { return f(a) - g(a); };

  DsResult out;
  out.set = start;
  out.value = h(start);
  out.trace.push_back(out.value);
  const std::size_t max_rounds = 10 * n + 10;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    ++out.rounds;
    auto inside = out.set.members();
    auto outside = out.set.complement().members();
    std::shuffle(inside.begin(), inside.end(), rng);
    std::shuffle(outside.begin(), outside.end(), rng);
    PermutationChain chain;
    chain.order = inside;
    chain.order.insert(chain.order.end(), outside.begin(), outside.end());
    const BasePolytopeVertex lower = base_vertex(g, chain);

    ModularWeights minus_lower;
    minus_lower.weights.resize(n);
    for (std::size_t v = 0; v < n; ++v) minus_lower.weights[v] = -lower.point[v];
    const SetFunction surrogate = add_modular(f, minus_lower);
    const MinimizerCertificate inner = min_norm_point(surrogate, opt);
    const double candidate = h(inner.min_set);
    if (candidate < out.value - opt.tolerance * std::max(1.0, std::abs(out.value))) {
      out.set = inner.min_set;
      out.value = candidate;
      out.trace.push_back(candidate);
    } else {
      break;
    }
  }
  return out;
}

}  // namespace submod
