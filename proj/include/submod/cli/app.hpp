#pragma once

// The `submod` command-line tool. Every command writes one JSON report to the
// output stream; diagnostics go to the error stream.
//
// Exit codes: 0 ok, 1 input error, 2 infeasible constraint, 64 usage error.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "submod/analysis.hpp"
#include "submod/core.hpp"
#include "submod/dataset.hpp"
#include "submod/info.hpp"
#include "submod/io.hpp"
#include "submod/maximize.hpp"
#include "submod/minimize.hpp"
#include "submod/norms.hpp"
#include "submod/zoo.hpp"

namespace submod::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitUsage = 64;

/// Thrown for flag combinations CLI11 cannot express (e.g. a missing --seed).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string command;
  std::string function;
  std::string data;
  std::string kernel = "rbf:1.0";
  std::string id_column;
  std::string config;
  std::optional<std::uint64_t> seed;
  double lambda = 1.0;
  double ridge = 1.0;
  std::size_t k = 0;
  std::string update_given;
  std::string costs;
  std::optional<double> budget;
  bool enumerate = false;
  bool eager = false;
  bool symmetric = false;
  std::string mode;
  std::size_t samples = 0;
  std::string vector;
  std::size_t trials = 0;
  std::string scores;
  double weight = 1.0;
};

/// A loaded objective with display ids for its ground elements.
struct Problem {
  SetFunction f;
  std::vector<std::string> ids;
  std::optional<DatasetTable> table;
  std::vector<double> costs;
  std::vector<double> scores;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!io::trim(item).empty()) out.push_back(io::trim(item));
  return out;
}

inline std::vector<std::string> index_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

inline std::vector<double> column_values(const DatasetTable& t, const std::string& name) {
  const auto c = static_cast<Eigen::Index>(t.column_index(name));
  std::vector<double> out(t.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.values(static_cast<Eigen::Index>(i), c);
  return out;
}

/// Fills options left at their defaults from a JSON config file.
inline json apply_config(Options& o) {
  if (o.config.empty()) return json();
  json cfg;
  try {
    cfg = json::parse(io::read_file(o.config));
  } catch (const json::parse_error& e) {
    throw io::ParseError(o.config + ": " + e.what());
  }
  if (!cfg.is_object()) throw io::ParseError(o.config + ": config must be a JSON object");
  auto str = [&](const char* key, std::string& field) {
    if (field.empty() && cfg.contains(key)) field = cfg.at(key).get<std::string>();
  };
  if (cfg.contains("function") && cfg.at("function").is_string()) str("function", o.function);
  str("data", o.data);
  str("id_column", o.id_column);
  if (cfg.contains("kernel") && o.kernel == Options{}.kernel) o.kernel = cfg.at("kernel").get<std::string>();
  if (!o.seed && cfg.contains("seed")) o.seed = cfg.at("seed").get<std::uint64_t>();
  return cfg;
}

inline Problem load_problem(Options& o) {
  const json cfg = apply_config(o);
  Problem p;
  const std::filesystem::path base = o.config.empty() ? std::filesystem::path() : std::filesystem::path(o.config).parent_path();

  if (o.function.empty() && cfg.is_object() && cfg.contains("function") && cfg.at("function").is_object()) {
    p.f = io::function_from_json(cfg.at("function"), base);
    p.ids = index_ids(p.f.ground_size());
    return p;
  }
  if (o.function.empty()) throw UsageError("--function is required (or a config with a 'function' entry)");

  if (o.function.rfind("file:", 0) == 0) {
    const std::filesystem::path path = o.function.substr(5);
    if (path.extension() == ".json") {
      p.f = io::load_function_json(path);
    } else if (path.extension() == ".csv") {
      GraphCutSpec spec;
      spec.weights = io::load_dense_csv(path);
      spec.lambda = o.lambda;
      p.f = build_graph_cut(std::move(spec));
    } else {
      throw io::ParseError("function file must end in .json or .csv: '" + path.string() + "'");
    }
    p.ids = index_ids(p.f.ground_size());
    return p;
  }

  const KernelSpec kspec = parse_kernel(o.kernel);
  Matrix sim;
  if (o.data.empty()) {
    if (kspec.kind != KernelSpec::Kind::precomputed) throw UsageError("--data is required for --function " + o.function);
    sim = SimilarityMatrix(io::load_dense_csv(kspec.path)).matrix();
    p.ids = index_ids(static_cast<std::size_t>(sim.rows()));
  } else {
    DatasetTable t = ingest(o.data, o.id_column.empty() ? std::nullopt : std::optional<std::string>(o.id_column));
    if (!o.costs.empty()) {
      p.costs = column_values(t, o.costs);
      t = t.without_column(o.costs);
    }
    if (!o.scores.empty()) {
      p.scores = column_values(t, o.scores);
      t = t.without_column(o.scores);
    }
    if (t.columns.empty() && kspec.kind != KernelSpec::Kind::precomputed) throw io::ParseError("dataset has no feature columns");
    sim = build_kernel(t, kspec).matrix();
    for (std::size_t i = 0; i < t.rows(); ++i) p.ids.push_back(t.id_of(i));
    p.table = std::move(t);
  }

  if (o.function == "facility-location") {
    p.f = build_facility_location(SimilarityMatrix(std::move(sim)));
  } else if (o.function == "graph-cut") {
    GraphCutSpec spec;
    spec.weights = std::move(sim);
    spec.lambda = o.lambda;
    p.f = build_graph_cut(std::move(spec));
  } else if (o.function == "log-det") {
    sim.diagonal().array() += o.ridge;
    p.f = build_log_det(LogDetSpec{std::move(sim)});
  } else {
    throw UsageError("unknown --function '" + o.function + "' (facility-location, graph-cut, log-det, or file:<path>)");
  }
  return p;
}

inline Subset resolve_ids(const Problem& p, const std::string& list) {
  Subset s(p.f.ground_size());
  for (const auto& id : split_list(list)) {
    auto it = std::find(p.ids.begin(), p.ids.end(), id);
    if (it == p.ids.end()) throw InvalidArgument("unknown element id '" + id + "'");
    s.insert(static_cast<std::size_t>(it - p.ids.begin()));
  }
  return s;
}

inline json ids_of(const Problem& p, const Subset& s) {
  json out = json::array();
  s.for_each([&](std::size_t v) { out.push_back(p.ids[v]); });
  return out;
}

inline json certificate_json(const Certificate& c) {
  json j{{"guarantee_ratio", c.guarantee_ratio}, {"guarantee_kind", c.guarantee_kind}, {"oracle_calls", c.oracle_calls}};
  if (c.seed) j["seed"] = *c.seed;
  if (c.wolsey_factor) j["wolsey_factor"] = *c.wolsey_factor;
  return j;
}

inline json violations_json(const Problem& p, const CheckReport& r) {
  json vs = json::array();
  for (const auto& v : r.violations) {
    json j{{"kind", v.kind}, {"context", ids_of(p, v.context)}, {"x", p.ids[v.x]}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"deficit", v.deficit}};
    if (v.w) j["w"] = p.ids[*v.w];
    vs.push_back(std::move(j));
  }
  return json{{"verdict", r.verdict}, {"violation_count", r.violation_count}, {"pairs_checked", r.pairs_checked}, {"violations", vs}};
}

inline std::uint64_t require_seed(const Options& o, const std::string& why) {
  if (!o.seed) throw UsageError("--seed is required for " + why);
  return *o.seed;
}

inline json run_summarize(const Options& o, const Problem& p) {
  const Subset given = resolve_ids(p, o.update_given);
  const Subset rest = given.complement();
  if (rest.empty()) throw InfeasibleError("every element is in the given set");
  const SetFunction local = restrict_to(given.empty() ? p.f : condition(p.f, given), rest);
  const auto index = rest.members();

  SelectionResult r;
  if (o.budget) {
    if (p.costs.empty()) throw UsageError("--budget needs --costs <column>");
    KnapsackConstraint kc;
    for (auto v : index) kc.costs.weights.push_back(p.costs[v]);
    kc.budget = *o.budget;
    KnapsackOptions ko;
    ko.enumeration_depth = o.enumerate ? 3 : 0;
    r = greedy_knapsack(local, kc, ko);
  } else {
    if (o.k < 1) throw InvalidArgument("--k must be at least 1");
    if (o.k > index.size())
      throw InfeasibleError("--k " + std::to_string(o.k) + " exceeds the " + std::to_string(index.size()) + " selectable elements");
    GreedyOptions go;
    go.lazy = !o.eager;
    r = greedy_cardinality(local, CardinalityConstraint{o.k}, go);
  }

  json order = json::array(), ids = json::array();
  for (auto v : r.order) {
    order.push_back(index[v]);
    ids.push_back(p.ids[index[v]]);
  }
  return json{{"order", order}, {"ids", ids},          {"gains", r.gains},
              {"value", r.value}, {"given", ids_of(p, given)}, {"certificate", certificate_json(r.certificate)}};
}

inline json run_cluster(const Options& o, const Problem& p) {
  if (o.k < 1 || o.k > p.f.ground_size()) throw InfeasibleError("--k must satisfy 1 <= k <= n");
  const ClusterTree tree = q_cluster(p.f, o.k);
  json clusters = json::array(), nodes = json::array();
  for (const auto& leaf : tree.leaves()) clusters.push_back(ids_of(p, leaf));
  for (const auto& node : tree.nodes)
    nodes.push_back(json{{"members", ids_of(p, node.members)}, {"split_value", node.split_value}, {"left", node.left}, {"right", node.right}});
  return json{{"clusters", clusters}, {"tree", nodes}};
}

inline json run_minimize(const Options& o, const Problem& p) {
  MinimizerCertificate c;
  std::string method;
  if (o.symmetric) {
    QueyranneOptions qo;
    qo.symmetry_seed = o.seed.value_or(0);
    c = queyranne_minimize(p.f, qo);
    method = "queyranne";
  } else {
    c = min_norm_point(p.f);
    method = "min-norm-point";
  }
  return json{{"method", method},          {"min_set", ids_of(p, c.min_set)}, {"min_value", c.min_value},
              {"duality_gap", c.duality_gap}, {"iterations", c.iterations},      {"norm_point", c.norm_point}};
}

inline json run_check(const Options& o, const Problem& p) {
  CheckOptions co;
  if (o.mode == "exhaustive") {
    co.mode = CheckMode::exhaustive;
  } else if (o.mode == "sampled") {
    co.mode = CheckMode::sampled;
    co.seed = require_seed(o, "--mode sampled");
    if (o.samples > 0) co.samples = o.samples;
  } else {
    throw UsageError("--mode must be exhaustive or sampled");
  }
  return json{{"submodular", violations_json(p, check_submodular(p.f, co))}, {"monotone", violations_json(p, check_monotone(p.f, co))}};
}

inline json run_shapley(const Options& o, const Problem& p) {
  ShapleyResult r;
  if (o.mode == "exact") {
    r = shapley_exact(p.f);
  } else if (o.mode == "sampled") {
    if (o.samples < 2) throw UsageError("--mode sampled needs --samples >= 2");
    r = shapley_sampled(p.f, o.samples, require_seed(o, "--mode sampled"));
  } else {
    throw UsageError("--mode must be exact or sampled");
  }
  const std::size_t n = p.f.ground_size();
  double total = 0.0;
  for (double v : r.values) total += v;
  const double target = p.f(Subset::full(n)) - p.f(Subset(n));
  json values = json::object();
  for (std::size_t v = 0; v < n; ++v) values[p.ids[v]] = r.values[v];
  return json{{"values", values}, {"std_errors", r.std_errors}, {"samples", r.samples}, {"efficiency_residual", total - target}};
}

inline json run_norm(const Options& o, const Problem& p) {
  const NormHandle h(p.f);
  json out = json::object();
  if (!o.vector.empty()) {
    std::vector<double> x;
    for (const auto& s : split_list(o.vector)) {
      double v = 0.0;
      if (!io::parse_double(s, v)) throw InvalidArgument("--vector entry '" + s + "' is not a number");
      x.push_back(v);
    }
    out["value"] = norm_eval(h, x);
  }
  if (o.trials > 0) out["axioms"] = violations_json(p, check_norm_axioms(h, o.trials, require_seed(o, "--trials")));
  if (out.empty()) throw UsageError("norm needs --vector and/or --trials");
  return out;
}

inline json run_active_batch(const Options& o, const Problem& p) {
  if (p.scores.empty()) throw UsageError("active-batch needs --scores <column>");
  if (o.k < 1) throw InvalidArgument("--k must be at least 1");
  if (o.k > p.f.ground_size()) throw InfeasibleError("--k exceeds the number of candidates");
  if (!(o.weight >= 0.0)) throw InvalidArgument("--weight must be nonnegative");
  ModularWeights m;
  m.weights = p.scores;
  const SetFunction objective = add_modular(mixture({{o.weight, p.f}}), m);
  GreedyOptions go;
  go.lazy = !o.eager;
  const SelectionResult r = greedy_cardinality(objective, CardinalityConstraint{o.k}, go);
  json ids = json::array();
  for (auto v : r.order) ids.push_back(p.ids[v]);
  return json{{"order", r.order}, {"ids", ids}, {"gains", r.gains}, {"value", r.value}, {"certificate", certificate_json(r.certificate)}};
}

inline json config_echo(const Options& o) {
  json j{{"function", o.function}, {"kernel", o.kernel}};
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  put("data", o.data);
  put("id_column", o.id_column);
  put("config", o.config);
  put("update_given", o.update_given);
  put("costs", o.costs);
  put("mode", o.mode);
  put("vector", o.vector);
  put("scores", o.scores);
  if (o.k) j["k"] = o.k;
  if (o.budget) j["budget"] = *o.budget;
  if (o.samples) j["samples"] = o.samples;
  if (o.trials) j["trials"] = o.trials;
  j["lambda"] = o.lambda;
  j["ridge"] = o.ridge;
  j["weight"] = o.weight;
  j["enumerate"] = o.enumerate;
  j["eager"] = o.eager;
  j["symmetric"] = o.symmetric;
  return j;
}

}  // namespace detail

/// Runs one command given the arguments after the program name.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Submodular optimization toolkit", "submod"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed_value = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--function", o.function, "facility-location | graph-cut | log-det | file:<spec.json|weights.csv>");
    sub->add_option("--data", o.data, "dataset (.csv with header, or .json)");
    sub->add_option("--kernel", o.kernel, "rbf:<sigma> | cosine | dot | precomputed:<path>");
    sub->add_option("--id-column", o.id_column, "column holding element ids");
    sub->add_option("--config", o.config, "JSON config supplying defaults and function specs");
    sub->add_option("--seed", seed_value, "seed for randomized modes");
    sub->add_option("--lambda", o.lambda, "graph-cut penalty weight");
    sub->add_option("--ridge", o.ridge, "diagonal added to the kernel for log-det");
  };

  auto* summarize = app.add_subcommand("summarize", "greedy selection under a cardinality or knapsack constraint");
  common(summarize);
  summarize->add_option("--k", o.k, "number of elements to select");
  summarize->add_option("--update-given", o.update_given, "comma-separated ids already selected; the objective is conditioned on them");
  summarize->add_option("--costs", o.costs, "dataset column holding element costs");
  summarize->add_option("--budget", o.budget, "knapsack budget (requires --costs)");
  summarize->add_flag("--enumerate", o.enumerate, "partial enumeration over triples (knapsack only)");
  summarize->add_flag("--eager", o.eager, "re-evaluate every gain each step instead of lazy evaluation");

  auto* cluster = app.add_subcommand("cluster", "Q-clustering into k groups");
  common(cluster);
  cluster->add_option("--k", o.k, "number of clusters")->required();

  auto* minimize = app.add_subcommand("minimize", "unconstrained submodular minimization");
  common(minimize);
  minimize->add_flag("--symmetric", o.symmetric, "use Queyranne's algorithm (proper nonempty subsets)");

  auto* check = app.add_subcommand("check", "submodularity and monotonicity checks");
  common(check);
  check->add_option("--mode", o.mode, "exhaustive | sampled")->required();
  check->add_option("--samples", o.samples, "number of sampled (S, x, w) triples");

  auto* shapley = app.add_subcommand("shapley", "Shapley values of the ground elements");
  common(shapley);
  shapley->add_option("--mode", o.mode, "exact | sampled")->required();
  shapley->add_option("--samples", o.samples, "number of sampled permutations");

  auto* norm = app.add_subcommand("norm", "evaluate or test the norm induced by a polymatroid");
  common(norm);
  norm->add_option("--vector", o.vector, "comma-separated vector to evaluate");
  norm->add_option("--trials", o.trials, "randomized axiom trials (needs --seed)");

  auto* active = app.add_subcommand("active-batch", "uncertainty plus diversity batch selection");
  common(active);
  active->add_option("--scores", o.scores, "dataset column holding uncertainty scores")->required();
  active->add_option("--k", o.k, "batch size")->required();
  active->add_option("--weight", o.weight, "weight of the diversity term");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  o.command = sub->get_name();
  if (sub->count("--seed") > 0) o.seed = seed_value;

  const auto start = std::chrono::steady_clock::now();
  try {
    Problem p = detail::load_problem(o);
    const std::uint64_t calls0 = p.f.eval_count();
    json payload;
    if (o.command == "summarize") payload = detail::run_summarize(o, p);
    else if (o.command == "cluster") payload = detail::run_cluster(o, p);
    else if (o.command == "minimize") payload = detail::run_minimize(o, p);
    else if (o.command == "check") payload = detail::run_check(o, p);
    else if (o.command == "shapley") payload = detail::run_shapley(o, p);
    else if (o.command == "norm") payload = detail::run_norm(o, p);
    else payload = detail::run_active_batch(o, p);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json report{{"schema_version", kSchemaVersion},
                {"command", o.command},
                {"config", detail::config_echo(o)},
                {"seed", o.seed ? json(*o.seed) : json(nullptr)},
                {"payload", std::move(payload)},
                {"oracle_calls", p.f.eval_count() - calls0},
                {"wall_time", wall}};
    out << report.dump(2) << '\n';
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace submod::cli
