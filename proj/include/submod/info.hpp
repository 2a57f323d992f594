#pragma once

// Combinatorial information measures and the procedures built on them.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "submod/core.hpp"
#include "submod/minimize.hpp"
#include "submod/zoo.hpp"

namespace submod {

struct CcmiQuery {
  Subset a;
  Subset b;
  Subset c;  // may be empty

  /// True when any two of A, B, C overlap; the measure is still defined.
  bool overlapping() const { return a.intersects(b) || a.intersects(c) || b.intersects(c); }
};

/// I_f(A; B | C) = f(A u C) + f(B u C) - f(C) - f(A u B u C).
inline double ccmi(const SetFunction& f, const CcmiQuery& q) {
  const std::size_t n = f.ground_size();
  if (q.a.ground_size() != n || q.b.ground_size() != n || q.c.ground_size() != n)
    throw DimensionError("CCMI arguments must live on the function's ground set");
  return f(q.a | q.c) + f(q.b | q.c) - f(q.c) - f(q.a | q.b | q.c);
}

/// I_f(A; B) for C = empty.
inline double mutual_information(const SetFunction& f, const Subset& a, const Subset& b) {
  return ccmi(f, CcmiQuery{a, b, Subset(f.ground_size())});
}

/// Facility-location CCMI in closed form:
/// sum_v max(min(max_{a in A} sim(v,a), max_{b in B} sim(v,b)) - max_{c in C} sim(v,c), 0),
/// every empty maximum being 0. The similarity is read as sim(a, v), the same
/// orientation build_facility_location uses.
inline double fl_ccmi_closed_form(const SimilarityMatrix& sim, const CcmiQuery& q) {
  const std::size_t n = sim.size();
  if (q.a.ground_size() != n || q.b.ground_size() != n || q.c.ground_size() != n)
    throw DimensionError("CCMI arguments must match the similarity matrix");
  double total = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double ma = max_similarity(sim, q.a, v);
    const double mb = max_similarity(sim, q.b, v);
    const double mc = max_similarity(sim, q.c, v);
    total += std::max(std::min(ma, mb) - mc, 0.0);
  }
  return total;
}

/// g(A) = I_f(A; V \ A) = f(A) + f(V \ A) - f(empty) - f(V), symmetric and
/// submodular whenever f is submodular.
inline SetFunction symmetric_information(const SetFunction& f) {
  const std::size_t n = f.ground_size();
  const double offset = f(Subset(n)) + f(Subset::full(n));
  Flags fl;
  fl.symmetric = true;
  fl.normalized = true;
  fl.nonneg = f.flags().monotone || f.flags().nonneg;
  return SetFunction(
      f.ground_ptr(),
      [f, offset](const Subset& a) {
        // Evaluate the smaller-index side first so g(A) and g(V \ A) add the same terms in the same order.
        const Subset c = a.complement();
        const bool a_first = !c.precedes(a);
        const double fa = f(a);
        const double fc = f(c);
        return (a_first ? fa + fc : fc + fa) - offset;
      },
      fl, "I(" + f.name() + ")");
}

struct ClusterNode {
  Subset members;
  double split_value = 0.0;  // I_f(left; right) restricted to this node; 0 for leaves
  int left = -1;
  int right = -1;

  bool is_leaf() const noexcept { return left < 0; }
};

/// Binary tree of Q-clustering splits; node 0 is the root (all of V).
struct ClusterTree {
  std::vector<ClusterNode> nodes;

  std::vector<Subset> leaves() const {
    std::vector<Subset> out;
    for (const auto& node : nodes)
      if (node.is_leaf()) out.push_back(node.members);
    return out;
  }
};

/// Q-clustering: repeatedly bisect the largest leaf W by minimizing the
/// symmetric g_W(B) = I_f(B; W \ B) over proper subsets with Queyranne's
/// algorithm, until k leaves exist.
inline ClusterTree q_cluster(const SetFunction& f, std::size_t k, QueyranneOptions opt = {}) {
  const std::size_t n = f.ground_size();
  if (k < 1 || k > n) throw InvalidArgument("cluster count must satisfy 1 <= k <= n");
  ClusterTree tree;
  tree.nodes.push_back(ClusterNode{Subset::full(n)});
  std::size_t leaf_count = 1;
  while (leaf_count < k) {
    int target = -1;
    for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
      const auto& node = tree.nodes[static_cast<std::size_t>(i)];
      if (!node.is_leaf()) continue;
      if (target < 0) {
        target = i;
        continue;
      }
      const auto& cur = tree.nodes[static_cast<std::size_t>(target)];
      const auto sz = node.members.cardinality();
      const auto cur_sz = cur.members.cardinality();
      if (sz > cur_sz || (sz == cur_sz && node.members.members().front() < cur.members.members().front())) target = i;
    }
    const Subset block = tree.nodes[static_cast<std::size_t>(target)].members;
    const SetFunction local = symmetric_information(restrict_to(f, block));
    opt.check_symmetry = false;  // symmetric by construction
    const MinimizerCertificate cut = queyranne_minimize(local, opt);
    const Subset left = lift(cut.min_set, block);
    const Subset right = block - left;
    auto& parent = tree.nodes[static_cast<std::size_t>(target)];
    parent.split_value = cut.min_value;
    parent.left = static_cast<int>(tree.nodes.size());
    parent.right = parent.left + 1;
    tree.nodes.push_back(ClusterNode{left});
    tree.nodes.push_back(ClusterNode{right});
    ++leaf_count;
  }
  return tree;
}

struct StrengthReport {
  Subset labeled;
  double psi = std::numeric_limits<double>::infinity();
  Subset witness;  // empty when L = V
};

/// Psi(L) = min over nonempty T subset of V \ L of I_f(T) / |T| with
/// I_f(T) = I_f(T; V \ T), by enumeration (n <= 20). L = V yields +inf and an
/// empty witness. Ties go to the witness with the smallest characteristic integer.
inline StrengthReport label_strength(const SetFunction& f, const Subset& labeled) {
  const std::size_t n = f.ground_size();
  if (n > 20) throw InvalidArgument("label_strength enumerates subsets and requires n <= 20");
  if (labeled.ground_size() != n) throw DimensionError("labeled set lives on a different ground set");
  StrengthReport r;
  r.labeled = labeled;
  r.witness = Subset(n);
  const std::uint64_t free = labeled.complement().mask();
  if (free == 0) return r;
  const SetFunction info = symmetric_information(f);
  // Enumerate the nonempty submasks of `free` in increasing order.
  for (std::uint64_t t = 1; t <= free; ++t) {
    if ((t & ~free) != 0) continue;
    const Subset ts = Subset::from_mask(n, t);
    const double ratio = info(ts) / static_cast<double>(ts.cardinality());
    if (ratio < r.psi) {
      r.psi = ratio;
      r.witness = ts;
    }
  }
  return r;
}

struct Completion {
  Subset ones;  // V(y')
  double value = 0.0;  // I_f(V(y'))
};

/// y' = argmin over labelings agreeing with y_L on L of I_f(V(y)), by
/// enumeration (n <= 20). `labels_on_l` is the set of labeled nodes whose
/// label is 1. Ties go to the smallest characteristic integer of V(y').
inline Completion smoothest_completion(const SetFunction& f, const Subset& labeled, const Subset& labels_on_l) {
  const std::size_t n = f.ground_size();
  if (n > 20) throw InvalidArgument("smoothest_completion enumerates subsets and requires n <= 20");
  if (!labels_on_l.is_subset_of(labeled)) throw InvalidArgument("1-labels must lie inside the labeled set");
  const SetFunction info = symmetric_information(f);
  const std::uint64_t free = labeled.complement().mask();
  const std::uint64_t fixed = labels_on_l.mask();
  Completion best;
  best.value = std::numeric_limits<double>::infinity();
  // Walk submasks of `free` in increasing order.
  std::uint64_t sub = 0;
  while (true) {
    const Subset ones = Subset::from_mask(n, fixed | sub);
    const double v = info(ones);
    if (v < best.value) {
      best.value = v;
      best.ones = ones;
    }
    if (sub == free) break;
    sub = (sub - free) & free;
  }
  return best;
}

}  // namespace submod
