#pragma once

// Concrete submodular function families.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "submod/core.hpp"

namespace submod {

using Matrix = Eigen::MatrixXd;

/// The input matrix is not symmetric positive definite.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// Closed family of concave, nondecreasing functions with phi(0) = 0.
struct ConcaveSpec {
  enum class Kind { sqrt, power, log1p, min_cap, one_minus_exp, identity };

  Kind kind = Kind::sqrt;
  double param = 0.0;

  static ConcaveSpec sqrt() { return {Kind::sqrt, 0.0}; }
  static ConcaveSpec power(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("power exponent must lie in (0, 1)");
    return {Kind::power, p};
  }
  static ConcaveSpec log1p() { return {Kind::log1p, 0.0}; }
  static ConcaveSpec min_cap(double c) {
    if (!(c >= 0.0)) throw InvalidArgument("min_cap threshold must be >= 0");
    return {Kind::min_cap, c};
  }
  static ConcaveSpec one_minus_exp(double scale) {
    if (!(scale > 0.0)) throw InvalidArgument("one_minus_exp scale must be > 0");
    return {Kind::one_minus_exp, scale};
  }
  static ConcaveSpec identity() { return {Kind::identity, 0.0}; }

  double operator()(double x) const {
    switch (kind) {
      case Kind::sqrt: return std::sqrt(x);
      case Kind::power: return std::pow(x, param);
      case Kind::log1p: return std::log1p(x);
      case Kind::min_cap: return std::min(x, param);
      case Kind::one_minus_exp: return -std::expm1(-param * x);
      case Kind::identity: return x;
    }
    return x;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::sqrt: return "sqrt";
      case Kind::power: return "power:" + std::to_string(param);
      case Kind::log1p: return "log1p";
      case Kind::min_cap: return "min_cap:" + std::to_string(param);
      case Kind::one_minus_exp: return "one_minus_exp:" + std::to_string(param);
      case Kind::identity: return "identity";
    }
    return "?";
  }
};

/// Parses "sqrt", "power:0.5", "log1p", "min_cap:3", "one_minus_exp:1", "identity".
inline ConcaveSpec parse_concave(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const double arg = colon == std::string::npos ? 0.0 : std::stod(text.substr(colon + 1));
  if (head == "sqrt") return ConcaveSpec::sqrt();
  if (head == "power") return ConcaveSpec::power(arg);
  if (head == "log1p") return ConcaveSpec::log1p();
  if (head == "min_cap") return ConcaveSpec::min_cap(arg);
  if (head == "one_minus_exp") return ConcaveSpec::one_minus_exp(arg);
  if (head == "identity") return ConcaveSpec::identity();
  throw InvalidArgument("unknown concave function '" + text + "'");
}

namespace detail {

inline bool all_nonneg(const Matrix& m) { return (m.array() >= 0.0).all() && m.allFinite(); }

inline bool is_symmetric(const Matrix& m, double tol = 0.0) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

inline bool nonneg(const ModularWeights& m) {
  return m.constant >= 0.0 && std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return w >= 0.0; });
}

}  // namespace detail

inline SetFunction build_modular(ModularWeights m) { return modular(std::move(m)); }

// --- feature based -----------------------------------------------------------

/// f(A) = sum_u phi_u(sum_{a in A} m_u(a)) + bias(A).
struct FeatureBasedSpec {
  Matrix weights;  // U x n, nonnegative
  std::vector<ConcaveSpec> concave;  // one per feature (or a single shared entry)
  ModularWeights bias;  // may be empty
};

inline SetFunction build_feature_based(FeatureBasedSpec spec) {
  const auto n = static_cast<std::size_t>(spec.weights.cols());
  const auto U = static_cast<std::size_t>(spec.weights.rows());
  if (n == 0 || U == 0) throw InvalidArgument("feature matrix must be nonempty");
  if (!detail::all_nonneg(spec.weights)) throw InvalidArgument("feature weights must be nonnegative");
  if (spec.concave.size() == 1 && U > 1) spec.concave.assign(U, spec.concave.front());
  if (spec.concave.size() != U) throw DimensionError("need one concave function per feature");
  if (spec.bias.weights.empty()) spec.bias.weights.assign(n, 0.0);
  if (spec.bias.size() != n) throw DimensionError("bias length must equal n");

  Flags fl;
  fl.monotone = std::all_of(spec.bias.weights.begin(), spec.bias.weights.end(), [](double w) { return w >= 0.0; });
  fl.normalized = spec.bias.constant == 0.0;
  fl.nonneg = detail::nonneg(spec.bias);
  auto s = std::make_shared<const FeatureBasedSpec>(std::move(spec));
  return SetFunction(
      n,
      [s, U](const Subset& a) {
        const auto members = a.members();
        double total = s->bias(a);
        for (std::size_t u = 0; u < U; ++u) {
          double acc = 0.0;
          for (auto v : members) acc += s->weights(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
          total += s->concave[u](acc);
        }
        return total;
      },
      fl, "feature-based");
}

// --- facility location -------------------------------------------------------

/// Dense nonnegative n x n affinity matrix.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw DimensionError("similarity matrix must be square and nonempty");
    if (!detail::all_nonneg(m_)) throw InvalidArgument("similarity entries must be finite and nonnegative");
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t a, std::size_t v) const {
    return m_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(v));
  }
  const Matrix& matrix() const noexcept { return m_; }

 private:
  Matrix m_;
};

/// max_{a in A} sim(a, v), with the empty maximum defined as 0.
inline double max_similarity(const SimilarityMatrix& sim, const Subset& a, std::size_t v) {
  double best = 0.0;
  a.for_each([&](std::size_t i) { best = std::max(best, sim(i, v)); });
  return best;
}

/// f(A) = sum_{v in V} max_{a in A} sim(a, v).
inline SetFunction build_facility_location(SimilarityMatrix sim) {
  const std::size_t n = sim.size();
  auto s = std::make_shared<const SimilarityMatrix>(std::move(sim));
  return SetFunction(
      n,
      [s, n](const Subset& a) {
        const auto members = a.members();
        if (members.empty()) return 0.0;
        const Matrix& m = s->matrix();
        double total = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
          double best = 0.0;
          for (auto i : members) best = std::max(best, m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)));
          total += best;
        }
        return total;
      },
      Flags{true, true, false, true}, "facility-location");
}

// --- probabilistic coverage / set cover ----------------------------------------

struct CoverageSpec {
  Matrix membership;  // U x n, entries P[B_{u,v} = 1] in [0, 1]
  std::vector<double> concept_weights;  // length U, >= 0; empty means all ones
};

/// f(X) = sum_u w_u (1 - prod_{v in X} (1 - P_uv)).
inline SetFunction build_coverage(CoverageSpec spec) {
  const auto U = static_cast<std::size_t>(spec.membership.rows());
  const auto n = static_cast<std::size_t>(spec.membership.cols());
  if (U == 0 || n == 0) throw InvalidArgument("coverage matrix must be nonempty");
  if (!((spec.membership.array() >= 0.0).all() && (spec.membership.array() <= 1.0).all()))
    throw InvalidArgument("coverage probabilities must lie in [0, 1]");
  if (spec.concept_weights.empty()) spec.concept_weights.assign(U, 1.0);
  if (spec.concept_weights.size() != U) throw DimensionError("need one weight per concept");
  for (double w : spec.concept_weights)
    if (!(w >= 0.0)) throw InvalidArgument("concept weights must be nonnegative");
  auto s = std::make_shared<const CoverageSpec>(std::move(spec));
  return SetFunction(
      n,
      [s, U](const Subset& a) {
        const auto members = a.members();
        double total = 0.0;
        for (std::size_t u = 0; u < U; ++u) {
          double miss = 1.0;
          for (auto v : members) miss *= 1.0 - s->membership(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
          total += s->concept_weights[u] * (1.0 - miss);
        }
        return total;
      },
      Flags{true, true, false, true}, "coverage");
}

/// Set cover: element v covers the concepts listed in covers[v]; f(X) = |union|.
inline SetFunction build_set_cover(const std::vector<std::vector<std::size_t>>& covers, std::size_t concepts,
                                   std::vector<double> concept_weights = {}) {
  CoverageSpec spec;
  spec.membership = Matrix::Zero(static_cast<Eigen::Index>(concepts), static_cast<Eigen::Index>(covers.size()));
  for (std::size_t v = 0; v < covers.size(); ++v)
    for (auto u : covers[v]) {
      if (u >= concepts) throw DimensionError("concept index out of range");
      spec.membership(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
    }
  spec.concept_weights = std::move(concept_weights);
  return build_coverage(std::move(spec));
}

// --- graph cut -------------------------------------------------------------------

/// f(X) = sum_j min(C_j(X), alpha C_j(V)) - lambda sum_{i, j in X} w_ij with
/// C_j(X) = sum_{i in X} w_ij. lambda = alpha = 1 with symmetric w is the
/// classic cut sum_{i in X, j notin X} w_ij.
struct GraphCutSpec {
  Matrix weights;
  double lambda = 1.0;
  double alpha = 1.0;
};

inline SetFunction build_graph_cut(GraphCutSpec spec) {
  const auto n = static_cast<std::size_t>(spec.weights.rows());
  if (n == 0 || spec.weights.cols() != spec.weights.rows()) throw DimensionError("edge weight matrix must be square");
  if (!detail::all_nonneg(spec.weights)) throw InvalidArgument("edge weights must be nonnegative");
  if (!(spec.lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  spec.weights.diagonal().setZero();

  const bool sym = detail::is_symmetric(spec.weights);
  const bool classic = sym && spec.lambda == 1.0 && spec.alpha == 1.0;
  Flags fl;
  fl.symmetric = classic;
  fl.normalized = true;
  fl.nonneg = spec.lambda == 0.0 || (spec.lambda <= 1.0 && spec.alpha == 1.0);
  fl.monotone = spec.lambda == 0.0;

  auto s = std::make_shared<const GraphCutSpec>(std::move(spec));
  if (classic) {
    // Sum over unordered pairs in a fixed order so that f(X) and f(V \ X) are bit-identical.
    return SetFunction(
        n,
        [s, n](const Subset& a) {
          double total = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const bool in_i = a.contains(i);
            for (std::size_t j = i + 1; j < n; ++j)
              if (in_i != a.contains(j)) total += s->weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          }
          return total;
        },
        fl, "graph-cut");
  }

  Eigen::VectorXd column_totals = s->weights.colwise().sum().transpose();
  return SetFunction(
      n,
      [s, n, column_totals](const Subset& a) {
        const auto members = a.members();
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          double c = 0.0;
          for (auto i : members) c += s->weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          total += std::min(c, s->alpha * column_totals(static_cast<Eigen::Index>(j)));
        }
        if (s->lambda != 0.0) {
          double inner = 0.0;
          for (auto i : members)
            for (auto j : members) inner += s->weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          total -= s->lambda * inner;
        }
        return total;
      },
      fl, "graph-cut");
}

// --- log determinant -------------------------------------------------------------

struct LogDetSpec {
  Matrix matrix;
};

/// f(X) = log det(M_X) with f(empty) = 0.
inline SetFunction build_log_det(LogDetSpec spec) {
  const auto n = static_cast<std::size_t>(spec.matrix.rows());
  if (n == 0 || spec.matrix.cols() != spec.matrix.rows()) throw DimensionError("log-det matrix must be square");
  if (!detail::is_symmetric(spec.matrix, 1e-12)) throw NotPositiveDefinite("log-det matrix is not symmetric");
  Eigen::LLT<Matrix> llt(spec.matrix);
  if (llt.info() != Eigen::Success || (llt.matrixL().toDenseMatrix().diagonal().array() <= 0.0).any())
    throw NotPositiveDefinite("log-det matrix is not positive definite");
  auto s = std::make_shared<const LogDetSpec>(std::move(spec));
  return SetFunction(
      n,
      [s](const Subset& a) {
        const auto idx = a.members();
        if (idx.empty()) return 0.0;
        const auto k = static_cast<Eigen::Index>(idx.size());
        Matrix sub(k, k);
        for (Eigen::Index r = 0; r < k; ++r)
          for (Eigen::Index c = 0; c < k; ++c)
            sub(r, c) = s->matrix(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                                  static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
        Eigen::LLT<Matrix> chol(sub);
        if (chol.info() != Eigen::Success) throw NotPositiveDefinite("principal submatrix lost definiteness");
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) logdet += std::log(chol.matrixLLT()(i, i));
        return 2.0 * logdet;
      },
      Flags{false, true, false, false}, "log-det");
}

// --- deep submodular functions ------------------------------------------------------

/// One layer of a DSF: unit u computes phi_u(sum_j weights(u, j) * input_j).
/// The first layer reads ground-element indicators; later layers read the
/// previous layer's unit outputs.
struct DsfLayer {
  Matrix weights;  // units x inputs, nonnegative
  std::vector<ConcaveSpec> concave;  // per unit (or one shared entry)
};

struct DsfSpec {
  std::vector<DsfLayer> layers;
  std::vector<double> final_weights;  // nonneg mixture over last-layer units; empty means all ones
  ModularWeights final_modular;  // optional signed modular term
};

inline SetFunction build_dsf(DsfSpec spec) {
  if (spec.layers.empty()) throw InvalidArgument("DSF needs at least one layer");
  const auto n = static_cast<std::size_t>(spec.layers.front().weights.cols());
  if (n == 0) throw InvalidArgument("DSF ground set must be nonempty");
  Eigen::Index inputs = static_cast<Eigen::Index>(n);
  for (auto& layer : spec.layers) {
    if (layer.weights.cols() != inputs) throw DimensionError("DSF layer input width does not match previous layer");
    if (!detail::all_nonneg(layer.weights)) throw InvalidArgument("DSF internal weights must be nonnegative");
    const auto units = static_cast<std::size_t>(layer.weights.rows());
    if (units == 0) throw InvalidArgument("DSF layer needs at least one unit");
    if (layer.concave.size() == 1 && units > 1) layer.concave.assign(units, layer.concave.front());
    if (layer.concave.size() != units) throw DimensionError("need one concave function per DSF unit");
    inputs = layer.weights.rows();
  }
  if (spec.final_weights.empty()) spec.final_weights.assign(static_cast<std::size_t>(inputs), 1.0);
  if (spec.final_weights.size() != static_cast<std::size_t>(inputs)) throw DimensionError("final mixture width mismatch");
  for (double w : spec.final_weights)
    if (!(w >= 0.0)) throw InvalidArgument("DSF final weights must be nonnegative");
  if (spec.final_modular.weights.empty()) spec.final_modular.weights.assign(n, 0.0);
  if (spec.final_modular.size() != n) throw DimensionError("DSF modular term length mismatch");

  Flags fl;
  fl.monotone = std::all_of(spec.final_modular.weights.begin(), spec.final_modular.weights.end(),
                            [](double w) { return w >= 0.0; });
  fl.normalized = spec.final_modular.constant == 0.0;
  fl.nonneg = detail::nonneg(spec.final_modular);
  auto s = std::make_shared<const DsfSpec>(std::move(spec));
  return SetFunction(
      n,
      [s, n](const Subset& a) {
        Eigen::VectorXd act = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        a.for_each([&](std::size_t v) { act(static_cast<Eigen::Index>(v)) = 1.0; });
        for (const auto& layer : s->layers) {
          Eigen::VectorXd pre = layer.weights * act;
          for (Eigen::Index u = 0; u < pre.size(); ++u) pre(u) = layer.concave[static_cast<std::size_t>(u)](pre(u));
          act = std::move(pre);
        }
        double total = s->final_modular(a);
        for (Eigen::Index u = 0; u < act.size(); ++u) total += s->final_weights[static_cast<std::size_t>(u)] * act(u);
        return total;
      },
      fl, "dsf");
}

/// The six-element function min(min(|A n {a,b,c,d}|, 3) + min(|A n {c,d,e,f}|, 3), 5),
/// a DSF that no feature-based function can express.
inline DsfSpec dsf_two_overlapping_caps() {
  DsfLayer first;
  first.weights = Matrix::Zero(2, 6);
  first.weights.row(0) << 1, 1, 1, 1, 0, 0;
  first.weights.row(1) << 0, 0, 1, 1, 1, 1;
  first.concave = {ConcaveSpec::min_cap(3.0)};
  DsfLayer second;
  second.weights = Matrix::Ones(1, 2);
  second.concave = {ConcaveSpec::min_cap(5.0)};
  DsfSpec spec;
  spec.layers = {first, second};
  return spec;
}

// --- ROUGE-N recall ----------------------------------------------------------------------

using NgramCounts = std::map<std::string, int>;

struct RougeSpec {
  std::vector<NgramCounts> reference_counts;  // r_{e,i} per reference summary i
  std::vector<NgramCounts> candidate_counts;  // n-gram multiset per ground element (sentence)
};

/// Lowercased, whitespace-tokenized n-grams joined by single spaces.
inline NgramCounts count_ngrams(const std::string& text, std::size_t order) {
  if (order == 0) throw InvalidArgument("n-gram order must be >= 1");
  std::istringstream in(text);
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) {
    std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    tokens.push_back(std::move(tok));
  }
  NgramCounts counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t j = 1; j < order; ++j) gram += ' ' + tokens[i + j];
    ++counts[gram];
  }
  return counts;
}

inline RougeSpec rouge_spec_from_text(const std::vector<std::string>& references, const std::vector<std::string>& sentences,
                                      std::size_t order) {
  RougeSpec spec;
  for (const auto& r : references) spec.reference_counts.push_back(count_ngrams(r, order));
  for (const auto& s : sentences) spec.candidate_counts.push_back(count_ngrams(s, order));
  return spec;
}

/// f(S) = sum_i sum_e min(c_e(S), r_{e,i}) / sum_i sum_e r_{e,i}.
inline SetFunction build_rouge_n(const RougeSpec& spec) {
  const std::size_t n = spec.candidate_counts.size();
  if (n == 0) throw InvalidArgument("ROUGE needs at least one candidate sentence");
  if (spec.reference_counts.empty()) throw InvalidArgument("ROUGE needs at least one reference");

  // Intern n-grams; only those present in some reference can contribute.
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::vector<std::pair<std::size_t, int>>> refs;
  double denom = 0.0;
  for (const auto& r : spec.reference_counts) {
    std::vector<std::pair<std::size_t, int>> row;
    for (const auto& [gram, count] : r) {
      if (count < 0) throw InvalidArgument("reference counts must be nonnegative");
      auto [it, inserted] = ids.emplace(gram, ids.size());
      row.emplace_back(it->second, count);
      denom += count;
    }
    refs.push_back(std::move(row));
  }
  if (!(denom > 0.0)) throw InvalidArgument("ROUGE reference counts sum to zero");
  std::vector<std::vector<std::pair<std::size_t, int>>> cands(n);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& [gram, count] : spec.candidate_counts[v]) {
      if (count < 0) throw InvalidArgument("candidate counts must be nonnegative");
      if (auto it = ids.find(gram); it != ids.end()) cands[v].emplace_back(it->second, count);
    }
  const std::size_t vocab = ids.size();
  auto state = std::make_shared<const std::pair<decltype(refs), decltype(cands)>>(std::move(refs), std::move(cands));
  return SetFunction(
      n,
      [state, vocab, denom](const Subset& a) {
        std::vector<long long> c(vocab, 0);
        a.for_each([&](std::size_t v) {
          for (const auto& [id, count] : state->second[v]) c[id] += count;
        });
        long long matched = 0;
        for (const auto& row : state->first)
          for (const auto& [id, r] : row) matched += std::min<long long>(c[id], r);
        return static_cast<double>(matched) / denom;
      },
      Flags{true, true, false, true}, "rouge-n");
}

}  // namespace submod
