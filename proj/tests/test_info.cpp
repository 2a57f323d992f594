#include <gtest/gtest.h>

#include <cmath>

#include "submod/info.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace submod;
using namespace submod::testing;

namespace {

struct Edge {
  std::size_t u, v;
  double w;
};

// One concept per edge, covered by either endpoint: I_f(A; V \ A) is the cut weight of A.
SetFunction edge_incidence(std::size_t n, const std::vector<Edge>& edges) {
  CoverageSpec spec;
  spec.membership = Matrix::Zero(static_cast<Eigen::Index>(edges.size()), static_cast<Eigen::Index>(n));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    spec.membership(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(edges[e].u)) = 1.0;
    spec.membership(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(edges[e].v)) = 1.0;
    spec.concept_weights.push_back(edges[e].w);
  }
  return build_coverage(std::move(spec));
}

std::vector<Edge> random_edges(Rng& rng, std::size_t n, double density = 0.4) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (uniform(rng) < density) edges.push_back({u, v, uniform(rng, 0.2, 1.0)});
  if (edges.empty()) edges.push_back({0, n - 1, 1.0});
  return edges;
}

double cut_weight(const std::vector<Edge>& edges, Mask a) {
  double s = 0.0;
  for (const auto& e : edges)
    if (((a >> e.u) & 1) != ((a >> e.v) & 1)) s += e.w;
  return s;
}

// Two triangles {0,1,2} and {3,4,5} with no edge between them.
std::vector<Edge> two_triangles() {
  return {{0, 1, 1.0}, {1, 2, 0.7}, {0, 2, 0.4}, {3, 4, 0.9}, {4, 5, 1.0}, {3, 5, 0.5}};
}

}  // namespace

TEST(Ccmi, ModularDisjointIsZero) {
  const auto f = modular(ModularWeights{{1.0, 2.0, 3.0, 4.0}, 0.0});
  EXPECT_NEAR(ccmi(f, CcmiQuery{Subset(4, {0, 1}), Subset(4, {2}), Subset(4)}), 0.0, 1e-15);
  EXPECT_NEAR(ccmi(f, CcmiQuery{Subset(4, {0}), Subset(4, {2}), Subset(4, {3})}), 0.0, 1e-15);
}

TEST(Ccmi, EmptyConditionIsMutualInformation) {
  Rng rng(31);
  const auto f = random_facility_location(rng, 7);
  for (int t = 0; t < 20; ++t) {
    const Subset a = random_subset(rng, 7), b = random_subset(rng, 7);
    EXPECT_NEAR(ccmi(f, CcmiQuery{a, b, Subset(7)}), f(a) + f(b) - f(a | b), 1e-12);
    EXPECT_NEAR(mutual_information(f, a, b), f(a) + f(b) - f(a | b), 1e-12);
  }
}

TEST(Ccmi, RejectsMismatchedGround) {
  const auto f = sqrt_cardinality(4);
  EXPECT_THROW(ccmi(f, CcmiQuery{Subset(4), Subset(5), Subset(4)}), DimensionError);
}

TEST(CcmiProperty, NonnegativeExhaustiveSmallN) {
  Rng rng(32);
  for (std::size_t fam = 0; fam < 3; ++fam) {
    const std::size_t n = 5;
    const auto f = random_monotone(rng, n, fam);
    const auto vals = all_values(f);
    for (Mask a = 0; a < 32; ++a)
      for (Mask b = 0; b < 32; ++b)
        for (Mask c = 0; c < 32; ++c) {
          const double i = vals[a | c] + vals[b | c] - vals[c] - vals[a | b | c];
          ASSERT_GE(i, -1e-9) << f.name();
        }
    // spot-check the library agrees with the table
    EXPECT_NEAR(ccmi(f, CcmiQuery{Subset::from_mask(n, 3), Subset::from_mask(n, 12), Subset::from_mask(n, 16)}),
                vals[19] + vals[28] - vals[16] - vals[31], 1e-12);
  }
}

TEST(CcmiProperty, NonnegativeOnAllPolymatroidsN6) {
  Rng rng(33);
  // every monotone family of the zoo: FL, feature-based, coverage, log-det with ridge >= 1, DSF
  std::vector<SetFunction> fs{random_facility_location(rng, 6), random_feature_based(rng, 6), random_coverage(rng, 6),
                              random_log_det(rng, 6, 1.0), random_dsf(rng, 6)};
  for (const auto& f : fs) {
    const auto vals = all_values(f);
    for (Mask a = 0; a < 64; ++a)
      for (Mask b = 0; b < 64; ++b)
        for (Mask c = 0; c < 64; c += 5) ASSERT_GE(vals[a | c] + vals[b | c] - vals[c] - vals[a | b | c], -1e-9) << f.name();
  }
}

TEST(CcmiProperty, NonnegativeRandomTriplesN12) {
  Rng rng(34);
  for (std::size_t fam = 0; fam < 3; ++fam) {
    const auto f = random_monotone(rng, 12, fam);
    for (int t = 0; t < 1000; ++t) {
      const CcmiQuery q{random_subset(rng, 12), random_subset(rng, 12), random_subset(rng, 12, 0.3)};
      ASSERT_GE(ccmi(f, q), -1e-9) << f.name();
    }
  }
}

TEST(FlClosedForm, Examples) {
  Rng rng(35);
  const auto sim = random_similarity(rng, 8);
  const auto f = build_facility_location(sim);
  for (int t = 0; t < 10; ++t) {
    const Subset a = random_subset(rng, 8);
    EXPECT_NEAR(fl_ccmi_closed_form(sim, CcmiQuery{a, Subset(8), random_subset(rng, 8)}), 0.0, 1e-15);
    EXPECT_NEAR(fl_ccmi_closed_form(sim, CcmiQuery{a, Subset::full(8), Subset(8)}), f(a), 1e-12);
  }
}

TEST(FlClosedForm, EqualsDefinitionOnRandomInstances) {
  Rng rng(36);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = uniform_int(rng, 1, 10);
    const auto sim = t % 2 ? random_similarity(rng, n) : random_asymmetric_similarity(rng, n);
    const auto f = build_facility_location(sim);
    const CcmiQuery q{random_subset(rng, n), random_subset(rng, n), random_subset(rng, n, 0.3)};
    EXPECT_NEAR(fl_ccmi_closed_form(sim, q), ccmi(f, q), 1e-9) << "instance " << t;
  }
}

TEST(FlClosedForm, SumInsideMinDiffersFromDefinition) {
  // With a sum over A inside the min, two copies of the same exemplar would count twice.
  Matrix s(3, 3);
  s << 1.0, 0.8, 0.8, 0.8, 1.0, 0.8, 0.8, 0.8, 1.0;
  const SimilarityMatrix sim(s);
  const auto f = build_facility_location(sim);
  const CcmiQuery q{Subset(3, {0, 1}), Subset(3, {2}), Subset(3)};
  double summed = 0.0;
  for (std::size_t v = 0; v < 3; ++v)
    summed += std::max(std::min(s(0, static_cast<Eigen::Index>(v)) + s(1, static_cast<Eigen::Index>(v)), s(2, static_cast<Eigen::Index>(v))), 0.0);
  EXPECT_NEAR(fl_ccmi_closed_form(sim, q), ccmi(f, q), 1e-12);
  EXPECT_GT(std::abs(summed - ccmi(f, q)), 0.1);
}

TEST(SymmetricInformation, SymmetricAndSubmodular) {
  Rng rng(37);
  for (std::size_t fam = 0; fam < 7; ++fam) {
    const std::size_t n = 7;
    const auto g = symmetric_information(random_submodular(rng, n, fam));
    const auto vals = all_values(g);
    for (Mask m = 0; m < vals.size(); ++m) EXPECT_EQ(vals[m], vals[full_mask(n) ^ m]);
    EXPECT_NEAR(vals[0], 0.0, 1e-12);
    EXPECT_TRUE(classic_submodular(vals));
    EXPECT_TRUE(g.flags().symmetric);
  }
}

TEST(SymmetricInformation, EdgeIncidenceGivesCut) {
  Rng rng(38);
  const auto edges = random_edges(rng, 7);
  const auto g = symmetric_information(edge_incidence(7, edges));
  for (Mask m = 0; m < 128; ++m) EXPECT_NEAR(g(Subset::from_mask(7, m)), cut_weight(edges, m), 1e-12);
}

TEST(QCluster, OneClusterIsEverything) {
  Rng rng(39);
  const auto tree = q_cluster(random_facility_location(rng, 6), 1);
  ASSERT_EQ(tree.leaves().size(), 1u);
  EXPECT_EQ(tree.leaves()[0], Subset::full(6));
}

TEST(QCluster, TwoComponentsSplitExactly) {
  const auto f = edge_incidence(6, two_triangles());
  const auto tree = q_cluster(f, 2);
  const auto leaves = tree.leaves();
  ASSERT_EQ(leaves.size(), 2u);
  const Subset a(6, {0, 1, 2}), b(6, {3, 4, 5});
  EXPECT_TRUE((leaves[0] == a && leaves[1] == b) || (leaves[0] == b && leaves[1] == a));
  EXPECT_NEAR(tree.nodes[0].split_value, 0.0, 1e-12);
}

TEST(QCluster, NClustersAreSingletons) {
  Rng rng(40);
  const auto tree = q_cluster(random_coverage(rng, 7), 7);
  const auto leaves = tree.leaves();
  ASSERT_EQ(leaves.size(), 7u);
  for (const auto& l : leaves) EXPECT_EQ(l.cardinality(), 1u);
}

TEST(QCluster, RejectsBadK) {
  const auto f = sqrt_cardinality(4);
  EXPECT_THROW(q_cluster(f, 0), InvalidArgument);
  EXPECT_THROW(q_cluster(f, 5), InvalidArgument);
}

TEST(QClusterProperty, LeavesPartitionGround) {
  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = uniform_int(rng, 2, 10);
    const std::size_t k = uniform_int(rng, 1, n);
    const auto tree = q_cluster(random_monotone(rng, n, static_cast<std::size_t>(t)), k);
    const auto leaves = tree.leaves();
    ASSERT_EQ(leaves.size(), k);
    Subset seen(n);
    for (const auto& l : leaves) {
      EXPECT_FALSE(l.empty());
      EXPECT_FALSE(seen.intersects(l));
      seen |= l;
    }
    EXPECT_EQ(seen, Subset::full(n));
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const auto& l = tree.nodes[static_cast<std::size_t>(node.left)].members;
      const auto& r = tree.nodes[static_cast<std::size_t>(node.right)].members;
      EXPECT_EQ(l | r, node.members);
      EXPECT_FALSE(l.intersects(r));
    }
  }
}

TEST(QClusterProperty, FirstSplitIsOptimal) {
  Rng rng(42);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = uniform_int(rng, 3, 9);
    const auto f = random_monotone(rng, n, static_cast<std::size_t>(t));
    const auto tree = q_cluster(f, 2);
    EXPECT_NEAR(tree.nodes[0].split_value, min_proper(all_values(symmetric_information(f))).value, 1e-9);
  }
}

TEST(LabelStrength, IsolatedNodes) {
  const auto f = edge_incidence(2, {{0, 1, 0.0}});
  const auto r = label_strength(f, Subset(2, {0}));
  EXPECT_NEAR(r.psi, 0.0, 1e-15);
  EXPECT_EQ(r.witness, Subset(2, {1}));
}

TEST(LabelStrength, PathGraph) {
  const auto f = edge_incidence(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto r = label_strength(f, Subset(3, {1}));
  EXPECT_NEAR(r.psi, 1.0, 1e-12);
  EXPECT_EQ(r.witness, Subset(3, {0}));  // all three candidates tie; smallest first
}

TEST(LabelStrength, FullLabelSetIsInfinite) {
  const auto r = label_strength(sqrt_cardinality(3), Subset::full(3));
  EXPECT_TRUE(std::isinf(r.psi));
  EXPECT_TRUE(r.witness.empty());
}

TEST(LabelStrength, MatchesBruteForceAndWitnessRatio) {
  Rng rng(43);
  for (int t = 0; t < 15; ++t) {
    const std::size_t n = uniform_int(rng, 3, 9);
    const auto edges = random_edges(rng, n);
    const auto f = edge_incidence(n, edges);
    Subset l = random_subset(rng, n, 0.3);
    if (l == Subset::full(n)) l.erase(0);
    const auto r = label_strength(f, l);
    double best = std::numeric_limits<double>::infinity();
    for (Mask m = 1; m < (Mask{1} << n); ++m)
      if ((m & l.mask()) == 0) best = std::min(best, cut_weight(edges, m) / popcount(m));
    EXPECT_NEAR(r.psi, best, 1e-12);
    EXPECT_FALSE(r.witness.empty());
    EXPECT_FALSE(r.witness.intersects(l));
    EXPECT_NEAR(r.psi, symmetric_information(f)(r.witness) / static_cast<double>(r.witness.cardinality()), 1e-9);
  }
}

TEST(SmoothestCompletion, FullyLabeledIsIdentity) {
  Rng rng(44);
  const auto f = random_coverage(rng, 5);
  const Subset ones(5, {1, 3});
  EXPECT_EQ(smoothest_completion(f, Subset::full(5), ones).ones, ones);
}

TEST(SmoothestCompletion, ComponentsFollowTheirAnchor) {
  const auto f = edge_incidence(6, two_triangles());
  const auto c = smoothest_completion(f, Subset(6, {1, 4}), Subset(6, {4}));
  EXPECT_EQ(c.ones, Subset(6, {3, 4, 5}));
  EXPECT_NEAR(c.value, 0.0, 1e-12);
}

TEST(SmoothestCompletion, RejectsLabelsOutsideL) {
  EXPECT_THROW(smoothest_completion(sqrt_cardinality(3), Subset(3, {0}), Subset(3, {1})), InvalidArgument);
}

TEST(SmoothestCompletion, BeatsRandomCompletions) {
  Rng rng(45);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = uniform_int(rng, 4, 10);
    const auto f = random_monotone(rng, n, static_cast<std::size_t>(t));
    const auto g = symmetric_information(f);
    const Subset l = random_subset(rng, n, 0.4);
    const Subset y_l = random_subset(rng, n) & l;
    const auto c = smoothest_completion(f, l, y_l);
    EXPECT_EQ(c.ones & l, y_l);
    for (int s = 0; s < 100; ++s) {
      const Subset ones = y_l | (random_subset(rng, n) - l);
      EXPECT_LE(c.value, g(ones) + 1e-12);
    }
  }
}

TEST(SmoothestCompletion, ErrorBoundFromStrength) {
  Rng rng(46);
  int checked = 0;
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = uniform_int(rng, 4, 10);
    const auto edges = random_edges(rng, n, 0.5);
    const auto f = edge_incidence(n, edges);
    Subset l = random_subset(rng, n, 0.4);
    if (l.empty()) l.insert(0);
    if (l == Subset::full(n)) l.erase(n - 1);
    const auto strength = label_strength(f, l);
    if (strength.psi <= 0.0) continue;
    const Subset truth = random_subset(rng, n);
    const auto c = smoothest_completion(f, l, truth & l);
    const double err = static_cast<double>(((truth - c.ones) | (c.ones - truth)).cardinality());
    EXPECT_LE(err, 2.0 * cut_weight(edges, truth.mask()) / strength.psi + 1e-9) << "instance " << t;
    ++checked;
  }
  EXPECT_GT(checked, 5);
}
