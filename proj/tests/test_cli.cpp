#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <unistd.h>

#include "submod/cli/app.hpp"
#include "support/oracles.hpp"

using namespace submod;
using submod::cli::json;

namespace {

std::string data(const std::string& name) {
  const char* env = std::getenv("SUBMOD_TEST_DATA");
  return (std::filesystem::path(env ? env : "tests/data") / name).string();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

json without_wall_time(json j) {
  j.erase("wall_time");
  return j;
}

class Scratch {
 public:
  Scratch() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() / ("submod_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~Scratch() { std::filesystem::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }

 private:
  std::filesystem::path dir_;
};

std::vector<std::string> summarize_args(std::size_t k) {
  return {"summarize", "--function", "facility-location", "--kernel", "rbf:1.0", "--data", data("small.csv"), "--id-column", "id", "--k",
          std::to_string(k)};
}

}  // namespace

TEST(Cli, SummarizeReportShape) {
  const auto r = run(summarize_args(10));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.report();
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["command"], "summarize");
  EXPECT_TRUE(j["seed"].is_null());
  EXPECT_EQ(j["config"]["function"], "facility-location");
  EXPECT_EQ(j["payload"]["ids"].size(), 10u);
  EXPECT_EQ(j["payload"]["gains"].size(), 10u);
  EXPECT_GT(j["oracle_calls"].get<std::uint64_t>(), 0u);
  EXPECT_TRUE(j.contains("wall_time"));
  const double ratio = j["payload"]["certificate"]["guarantee_ratio"];
  EXPECT_NEAR(ratio, 1.0 - std::pow(0.9, 10), 1e-12);
}

TEST(Cli, SummarizeIsDeterministicAndPrefixClosed) {
  const auto a = run(summarize_args(10)), b = run(summarize_args(10)), c = run(summarize_args(5));
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(without_wall_time(a.report()).dump(), without_wall_time(b.report()).dump());
  const auto big = a.report()["payload"]["ids"], small = c.report()["payload"]["ids"];
  ASSERT_EQ(small.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(small[i], big[i]);
}

TEST(Cli, SummarizeCertificateRecomputes) {
  const auto j = run(summarize_args(6)).report();
  const auto table = ingest(data("small.csv"), std::string("id"));
  const auto f = build_facility_location(build_kernel(table, parse_kernel("rbf:1.0"), nullptr));
  Subset s(f.ground_size());
  double prev = 0.0;
  const auto order = j["payload"]["order"].get<std::vector<std::size_t>>();
  const auto gains = j["payload"]["gains"].get<std::vector<double>>();
  for (std::size_t i = 0; i < order.size(); ++i) {
    s.insert(order[i]);
    const double now = f(s);
    EXPECT_NEAR(now - prev, gains[i], 1e-12);
    prev = now;
  }
  EXPECT_NEAR(prev, j["payload"]["value"].get<double>(), 1e-12);
  const auto lib = greedy_cardinality(f, 6, true);
  EXPECT_EQ(lib.order, order);
}

TEST(Cli, EagerMatchesLazy) {
  auto args = summarize_args(7);
  const auto lazy = run(args);
  args.push_back("--eager");
  const auto eager = run(args);
  EXPECT_EQ(lazy.report()["payload"]["ids"], eager.report()["payload"]["ids"]);
}

TEST(Cli, UpdateGivenConditionsTheObjective) {
  const auto first = run(summarize_args(3)).report()["payload"]["ids"];
  auto args = summarize_args(3);
  args.insert(args.end(), {"--update-given", first[0].get<std::string>()});
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = r.report()["payload"];
  EXPECT_EQ(p["given"], json::array({first[0]}));
  for (const auto& id : p["ids"]) EXPECT_NE(id, first[0]);
  // conditioned greedy continues the unconditioned run
  EXPECT_EQ(p["ids"][0], first[1]);
  EXPECT_EQ(p["ids"][1], first[2]);

  auto bad = summarize_args(3);
  bad.insert(bad.end(), {"--update-given", "nope"});
  EXPECT_EQ(run(bad).code, 1);
}

TEST(Cli, SummarizeKnapsack) {
  Scratch s;
  const auto path = s.write("items.csv", "id,x,y,cost\na,0,0,1\nb,0.1,0,1\nc,3,3,2\nd,3,3.1,5\ne,-3,2,1\n");
  const auto r = run({"summarize", "--function", "facility-location", "--data", path, "--id-column", "id", "--costs", "cost", "--budget", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ids = r.report()["payload"]["ids"].get<std::vector<std::string>>();
  double cost = 0.0;
  for (const auto& id : ids) cost += id == "c" ? 2.0 : id == "d" ? 5.0 : 1.0;
  EXPECT_LE(cost, 3.0);
  EXPECT_FALSE(ids.empty());
  EXPECT_EQ(run({"summarize", "--function", "facility-location", "--data", path, "--id-column", "id", "--budget", "3"}).code, 64);
}

TEST(Cli, InfeasibleExitsTwo) {
  auto args = summarize_args(41);
  const auto r = run(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("infeasible"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(run({"cluster", "--function", "file:" + data("graphcut.csv"), "--k", "7"}).code, 2);
}

TEST(Cli, UsageErrorsExit64) {
  EXPECT_EQ(run({"frobnicate"}).code, 64);
  EXPECT_EQ(run({}).code, 64);
  EXPECT_EQ(run({"summarize", "--bogus-flag"}).code, 64);
  EXPECT_EQ(run({"check", "--function", "file:" + data("dsf.json")}).code, 64);  // --mode required
  EXPECT_EQ(run({"check", "--function", "file:" + data("dsf.json"), "--mode", "sampled"}).code, 64);  // no seed
  EXPECT_EQ(run({"shapley", "--function", "file:" + data("dsf.json"), "--mode", "sampled", "--samples", "10"}).code, 64);
  EXPECT_EQ(run({"norm", "--function", "file:" + data("dsf.json"), "--trials", "5"}).code, 64);
  EXPECT_EQ(run({"summarize", "--k", "2"}).code, 64);  // no function
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, InputErrorsExit1) {
  Scratch s;
  const auto ragged = s.write("ragged.csv", "x,y\n1,2\n3\n");
  const auto r = run({"summarize", "--function", "facility-location", "--data", ragged, "--k", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("row 2"), std::string::npos) << r.err;
  EXPECT_EQ(run({"summarize", "--function", "facility-location", "--data", "/nonexistent.csv", "--k", "1"}).code, 1);
  EXPECT_EQ(run({"check", "--function", "file:/nonexistent.json", "--mode", "exhaustive"}).code, 1);
  EXPECT_EQ(run({"summarize", "--function", "facility-location", "--kernel", "rbf:0", "--data", data("small.csv"), "--k", "1"}).code, 1);
}

TEST(Cli, CheckDsfIsSubmodular) {
  const auto r = run({"check", "--function", "file:" + data("dsf.json"), "--mode", "exhaustive"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = r.report()["payload"];
  EXPECT_TRUE(p["submodular"]["verdict"].get<bool>());
  EXPECT_TRUE(p["monotone"]["verdict"].get<bool>());
  EXPECT_GT(p["submodular"]["pairs_checked"].get<std::uint64_t>(), 0u);
}

TEST(Cli, CheckReportsWitnessIds) {
  Scratch s;
  const auto path = s.write("sq.json", R"({"type":"log-det","matrix":[[1,0.9],[0.9,1]]})");
  const auto r = run({"check", "--function", "file:" + path, "--mode", "sampled", "--seed", "4", "--samples", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.report();
  EXPECT_EQ(j["seed"], 4);
  EXPECT_FALSE(j["payload"]["monotone"]["verdict"].get<bool>());
  EXPECT_TRUE(j["payload"]["monotone"]["violations"][0].contains("x"));
}

TEST(Cli, MinimizeSymmetricGraphCut) {
  const auto r = run({"minimize", "--function", "file:" + data("graphcut.csv"), "--symmetric"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = r.report()["payload"];
  EXPECT_EQ(p["method"], "queyranne");
  EXPECT_NEAR(p["min_value"].get<double>(), 0.0, 1e-12);
  const auto set = p["min_set"].get<std::vector<std::string>>();
  EXPECT_TRUE(set == (std::vector<std::string>{"0", "1", "2"}) || set == (std::vector<std::string>{"3", "4", "5"}));
}

TEST(Cli, MinimizeMinNorm) {
  Scratch s;
  const auto path = s.write("m.json", R"({"type":"modular","weights":[1,-2,0.5,-0.25]})");
  const auto p = run({"minimize", "--function", "file:" + path}).report()["payload"];
  EXPECT_EQ(p["method"], "min-norm-point");
  EXPECT_EQ(p["min_set"], json::array({"1", "3"}));
  EXPECT_NEAR(p["min_value"].get<double>(), -2.25, 1e-12);
  EXPECT_LE(p["duality_gap"].get<double>(), 1e-8);
}

TEST(Cli, ClusterTwoComponents) {
  // Graph-cut values are f(A) itself; clustering uses I_f(A; V \ A) = 2 cut(A) on it.
  const auto r = run({"cluster", "--function", "file:" + data("graphcut.csv"), "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto clusters = r.report()["payload"]["clusters"];
  ASSERT_EQ(clusters.size(), 2u);
  std::set<std::vector<std::string>> got{clusters[0].get<std::vector<std::string>>(), clusters[1].get<std::vector<std::string>>()};
  EXPECT_EQ(got, (std::set<std::vector<std::string>>{{"0", "1", "2"}, {"3", "4", "5"}}));
}

TEST(Cli, ShapleyExactAndSampled) {
  const auto exact = run({"shapley", "--function", "file:" + data("dsf.json"), "--mode", "exact"});
  ASSERT_EQ(exact.code, 0) << exact.err;
  EXPECT_NEAR(exact.report()["payload"]["efficiency_residual"].get<double>(), 0.0, 1e-9);
  EXPECT_EQ(exact.report()["payload"]["values"].size(), 6u);
  const std::vector<std::string> args{"shapley", "--function", "file:" + data("dsf.json"), "--mode", "sampled", "--samples", "200", "--seed", "8"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(without_wall_time(a.report()).dump(), without_wall_time(b.report()).dump());
}

TEST(Cli, NormValueAndAxioms) {
  Scratch s;
  const auto path = s.write("card.json", R"({"type":"modular","weights":[1,1,1]})");
  const auto r = run({"norm", "--function", "file:" + path, "--vector", "1,-2,0.5", "--trials", "20", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = r.report()["payload"];
  EXPECT_NEAR(p["value"].get<double>(), 3.5, 1e-12);
  EXPECT_TRUE(p["axioms"]["verdict"].get<bool>());
  const auto zero = s.write("zero.json", R"({"type":"modular","weights":[1,0]})");
  EXPECT_EQ(run({"norm", "--function", "file:" + zero, "--vector", "1,1"}).code, 1);
}

TEST(Cli, ActiveBatchUsesScores) {
  const auto r = run({"active-batch", "--function", "facility-location", "--data", data("small.csv"), "--id-column", "id", "--scores", "score",
                      "--k", "4", "--weight", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  // with zero diversity weight the batch is the top-4 scores
  const auto table = ingest(data("small.csv"), std::string("id"));
  const auto c = static_cast<Eigen::Index>(table.column_index("score"));
  std::vector<std::size_t> idx(table.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return table.values(static_cast<Eigen::Index>(a), c) > table.values(static_cast<Eigen::Index>(b), c);
  });
  const auto order = r.report()["payload"]["order"].get<std::vector<std::size_t>>();
  EXPECT_EQ(order, std::vector<std::size_t>(idx.begin(), idx.begin() + 4));
  const auto mixed = run({"active-batch", "--function", "facility-location", "--data", data("small.csv"), "--id-column", "id", "--scores", "score", "--k", "4"});
  EXPECT_EQ(mixed.code, 0) << mixed.err;
}

TEST(Cli, ConfigSuppliesFunctionAndSeed) {
  Scratch s;
  const auto cfg = s.write("cfg.json", R"({"function":{"type":"modular","weights":[0.5,-1,2]},"seed":11})");
  const auto r = run({"shapley", "--config", cfg, "--mode", "sampled", "--samples", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.report();
  EXPECT_EQ(j["seed"], 11);
  EXPECT_NEAR(j["payload"]["values"]["2"].get<double>(), 2.0, 1e-12);

  const auto cfg2 = s.write("cfg2.json", "{\"function\":\"facility-location\",\"data\":\"" + data("small.csv") + "\",\"id_column\":\"id\"}");
  const auto r2 = run({"summarize", "--config", cfg2, "--k", "3"});
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(r2.report()["payload"]["ids"], run(summarize_args(3)).report()["payload"]["ids"]);
  EXPECT_EQ(run({"summarize", "--config", s.write("bad.json", "[1,2"), "--k", "3"}).code, 1);
}
