#pragma once

// Structured norms ||x||_f = f^(|x|) from the Lovasz extension of a polymatroid.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "submod/analysis.hpp"
#include "submod/core.hpp"
#include "submod/minimize.hpp"

namespace submod {

class NormHandle {
 public:
  /// Rejects f unless every singleton has f(v) > 0.
  explicit NormHandle(SetFunction f, double tol = kDefaultTolerance) : f_(std::move(f)) {
    const std::size_t n = f_.ground_size();
    const double f_empty = f_(Subset(n));
    for (std::size_t v = 0; v < n; ++v)
      if (!(f_(Subset(n, {v})) - f_empty > tol))
        throw InvalidArgument("norm needs f(v) > 0 for every element; element " + std::to_string(v) + " has zero value");
  }

  /// Skips the positivity check; only for diagnosing degenerate functions.
  static NormHandle unchecked(SetFunction f) { return NormHandle(std::move(f), Unchecked{}); }

  const SetFunction& function() const noexcept { return f_; }
  std::size_t size() const { return f_.ground_size(); }

 private:
  struct Unchecked {};
  NormHandle(SetFunction f, Unchecked) : f_(std::move(f)) {}
  SetFunction f_;
};

inline double norm_eval(const NormHandle& h, std::span<const double> x) {
  if (x.size() != h.size()) throw DimensionError("vector length does not match the norm's ground set");
  std::vector<double> abs_x(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) abs_x[i] = std::abs(x[i]);
  return lovasz_extension(h.function(), abs_x).value;
}

/// Seeded randomized test of the triangle inequality and absolute homogeneity,
/// plus definiteness on every basis vector.
inline CheckReport check_norm_axioms(const NormHandle& h, std::size_t trials, std::uint64_t seed,
                                     double tol = kDefaultTolerance) {
  if (trials < 1) throw InvalidArgument("need at least one trial");
  const std::size_t n = h.size();
  CheckReport report;
  auto fail = [&](std::string kind, std::size_t index, double lhs, double rhs) {
    Violation v;
    v.kind = std::move(kind);
    v.context = Subset(n);
    v.x = index;
    v.lhs = lhs;
    v.rhs = rhs;
    v.deficit = std::abs(lhs - rhs);
    detail::record(report, std::move(v), 16);
  };

  for (std::size_t v = 0; v < n; ++v) {
    std::vector<double> e(n, 0.0);
    e[v] = 1.0;
    ++report.pairs_checked;
    const double ne = norm_eval(h, e);
    if (!(ne > tol)) fail("definiteness", v, 0.0, ne);
  }
  {
    const std::vector<double> zero(n, 0.0);
    ++report.pairs_checked;
    const double nz = norm_eval(h, zero);
    if (std::abs(nz) > tol) fail("zero-vector", 0, std::abs(nz), 0.0);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale(-5.0, 5.0);
  std::vector<double> x(n), y(n), sum(n), scaled(n);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = gauss(rng);
      y[i] = gauss(rng);
      sum[i] = x[i] + y[i];
    }
    const double c = scale(rng);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = c * x[i];
    const double nx = norm_eval(h, x);
    const double ny = norm_eval(h, y);
    const double nsum = norm_eval(h, sum);
    const double nscaled = norm_eval(h, scaled);
    report.pairs_checked += 2;
    const double slack = tol * std::max(1.0, nx + ny);
    if (nsum > nx + ny + slack) fail("triangle", t, nsum, nx + ny);
    if (std::abs(nscaled - std::abs(c) * nx) > tol * std::max(1.0, std::abs(c) * nx))
      fail("homogeneity", t, nscaled, std::abs(c) * nx);
  }
  return report;
}

}  // namespace submod
