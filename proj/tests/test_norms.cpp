#include <gtest/gtest.h>

#include <cmath>

#include "submod/norms.hpp"
#include "support/instances.hpp"

using namespace submod;
using namespace submod::testing;

namespace {

std::vector<double> gaussian_vector(Rng& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

std::vector<SetFunction> polymatroids(Rng& rng, std::size_t n) {
  // log-det with ridge 1 keeps every singleton strictly positive
  return {random_facility_location(rng, n), sqrt_cardinality(n), random_coverage(rng, n), random_log_det(rng, n, 1.0),
          concave_of_cardinality(n, "log1p")};
}

}  // namespace

TEST(NormEval, CardinalityGivesL1) {
  const NormHandle h(modular(ModularWeights{std::vector<double>(5, 1.0), 0.0}));
  const std::vector<double> x{1.0, -2.5, 0.0, 3.0, -0.5};
  EXPECT_NEAR(norm_eval(h, x), 7.0, 1e-12);
}

TEST(NormEval, MinCardinalityOneGivesLInfinity) {
  const NormHandle h(concave_of_cardinality(4, "min_cap:1"));
  const std::vector<double> x{0.3, -2.0, 1.5, 0.0};
  EXPECT_NEAR(norm_eval(h, x), 2.0, 1e-12);
}

TEST(NormEval, ZeroVectorAndLengthCheck) {
  const NormHandle h(sqrt_cardinality(3));
  EXPECT_EQ(norm_eval(h, std::vector<double>(3, 0.0)), 0.0);
  EXPECT_THROW(norm_eval(h, std::vector<double>(2, 1.0)), DimensionError);
}

TEST(NormEval, HomogeneousUnderScaling) {
  Rng rng(71);
  for (const auto& f : polymatroids(rng, 6)) {
    const NormHandle h(f);
    for (int t = 0; t < 20; ++t) {
      auto x = gaussian_vector(rng, 6);
      const double base = norm_eval(h, x);
      for (auto& v : x) v *= 2.0;
      EXPECT_NEAR(norm_eval(h, x), 2.0 * base, 1e-12 * std::max(1.0, base));
    }
  }
}

TEST(NormEval, AgreesWithLovaszOnNonnegativeOrthant) {
  Rng rng(72);
  for (const auto& f : polymatroids(rng, 7)) {
    const NormHandle h(f);
    for (int t = 0; t < 20; ++t) {
      auto x = gaussian_vector(rng, 7);
      for (auto& v : x) v = std::abs(v);
      EXPECT_EQ(norm_eval(h, x), lovasz_extension(f, x).value);
    }
  }
}

TEST(NormHandle, RejectsZeroSingleton) {
  const auto f = modular(ModularWeights{{1.0, 0.0, 2.0}, 0.0});
  EXPECT_THROW(NormHandle{f}, InvalidArgument);
}

TEST(NormAxioms, ZooPolymatroidsPass) {
  Rng rng(73);
  for (const auto& f : polymatroids(rng, 8)) {
    const auto r = check_norm_axioms(NormHandle(f), 1000, 5);
    EXPECT_TRUE(r.verdict) << f.name();
    EXPECT_GE(r.pairs_checked, 2000u);
  }
  EXPECT_THROW(check_norm_axioms(NormHandle(sqrt_cardinality(3)), 0, 1), InvalidArgument);
}

TEST(NormAxioms, DefinitenessFailsAtZeroSingleton) {
  const auto f = modular(ModularWeights{{1.0, 0.0, 2.0}, 0.0});
  const auto h = NormHandle::unchecked(f);
  EXPECT_EQ(norm_eval(h, std::vector<double>{0.0, 1.0, 0.0}), 0.0);
  const auto r = check_norm_axioms(h, 50, 2);
  EXPECT_FALSE(r.verdict);
  ASSERT_FALSE(r.violations.empty());
  bool saw = false;
  for (const auto& v : r.violations)
    if (v.kind == "definiteness") {
      EXPECT_EQ(v.x, 1u);
      saw = true;
    }
  EXPECT_TRUE(saw);
}

TEST(NormAxioms, TriangleFailsForSupermodular) {
  const auto h = NormHandle::unchecked(planted_supermodular(4));
  EXPECT_FALSE(check_norm_axioms(h, 200, 3).verdict);
}

TEST(NormProperty, TriangleInequality) {
  Rng rng(74);
  for (const auto& f : polymatroids(rng, 9)) {
    const NormHandle h(f);
    for (int t = 0; t < 300; ++t) {
      const auto x = gaussian_vector(rng, 9);
      const auto y = gaussian_vector(rng, 9);
      std::vector<double> s(9);
      for (std::size_t i = 0; i < 9; ++i) s[i] = x[i] + y[i];
      EXPECT_LE(norm_eval(h, s), norm_eval(h, x) + norm_eval(h, y) + 1e-9) << f.name();
    }
  }
}

TEST(NormProperty, MonotoneInAbsoluteValue) {
  Rng rng(75);
  for (const auto& f : polymatroids(rng, 8)) {
    const NormHandle h(f);
    for (int t = 0; t < 200; ++t) {
      const auto y = gaussian_vector(rng, 8);
      std::vector<double> x(8);
      for (std::size_t i = 0; i < 8; ++i) x[i] = y[i] * uniform(rng, -1.0, 1.0);
      EXPECT_LE(norm_eval(h, x), norm_eval(h, y) + 1e-9) << f.name();
    }
  }
}
