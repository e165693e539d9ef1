#include "implylp/cli.hpp"
#include "implylp/compaction.hpp"
#include "implylp/ingest.hpp"
#include "implylp/oracle.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace implylp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "implylp");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    v.push_back(l);
  return v;
}

class Cli : public ::testing::Test {
protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("implylp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }

  std::string path(const std::string &name) const { return (dir / name).string(); }

  // Writes net1/net2/samples for a fixture and returns their paths.
  std::array<std::string, 3> write_fixture(const Fixture &f, const std::string &tag) {
    save_network(f.net1, path(tag + "_net1.json"));
    save_network(f.net2, path(tag + "_net2.json"));
    save_samples({{tag + "_center", f.center, f.label}}, path(tag + "_samples.json"));
    return {path(tag + "_net1.json"), path(tag + "_net2.json"), path(tag + "_samples.json")};
  }
};

} // namespace

TEST_F(Cli, VerifyIdenticalNetworksAtPoint) {
  const auto [n1, n2, s] = write_fixture(make_fixture(FixtureKind::RandomSmall, 4), "r");
  const Result r = run_cli({"verify", "--net1", n1, "--net2", n1, "--samples", s, "--delta", "0", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("net2 => net1: 100.00%"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("net1 => net2: 100.00%"), std::string::npos) << r.out;
  const json doc = json::parse(slurp(path("o/report.json")));
  EXPECT_EQ(doc["established"]["net2_implies_net1_pct"], 100.0);
  EXPECT_EQ(doc["reports"].size(), 1u);
  const auto csv = lines(slurp(path("o/summary.csv")));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0], "id,delta,implied,min_lower,max_upper,wall_ms");
  EXPECT_EQ(csv[1].rfind("r_center,0.0,true,", 0), 0u) << csv[1];
}

TEST_F(Cli, VerifyTwoInputScenarioBothDirections) {
  const Fixture f = make_fixture(FixtureKind::Figure1Style);
  const auto [n1, n2, s] = write_fixture(f, "fig");
  const Result r = run_cli({"verify", "--net1", n1, "--net2", n2, "--samples", s, "--delta", "0.15", "--out", path("o"), "--bounds", "lp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(slurp(path("o/report.json")));
  EXPECT_EQ(doc["reports"][0]["implied"], true);
  EXPECT_EQ(doc["reports"][0]["reverse_implied"], false);
  EXPECT_GT(doc["reports"][0]["min_lower"].get<double>(), 0.0);
}

TEST_F(Cli, MissingSamplesFileIsLoadError) {
  const auto [n1, n2, s] = write_fixture(make_fixture(FixtureKind::RandomSmall, 1), "r");
  const std::string missing = path("nope.json");
  const Result r = run_cli({"verify", "--net1", n1, "--net2", n2, "--samples", missing, "--delta", "0.1", "--out", path("o")});
  EXPECT_EQ(r.code, cli::kLoadError);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST_F(Cli, ConfigErrors) {
  const auto [n1, n2, s] = write_fixture(make_fixture(FixtureKind::RandomSmall, 1), "r");
  EXPECT_EQ(run_cli({"sweep", "--net1", n1, "--net2", n2, "--samples", s, "--delta", "0.1", "--out", path("o")}).code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"verify", "--net1", n1, "--net2", n2, "--samples", s, "--delta", "0.1", "--delta", "0.2", "--out", path("o")}).code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"compare", "--net1", n1, "--net2", n2, "--samples", s, "--delta", "0.1", "--variant", "pure", "--out", path("o")}).code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"verify", "--bounds", "exact", "--net1", n1, "--net2", n2, "--samples", s, "--delta", "0.1", "--out", path("o")}).code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"nonsense"}).code, cli::kConfigError);
}

TEST_F(Cli, SweepIdenticalNetworks) {
  const auto [n1, n2, s] = write_fixture(make_fixture(FixtureKind::RandomSmall, 2), "r");
  const Result r = run_cli({"sweep", "--net1", n1, "--net2", n1, "--samples", s, "--delta", "0", "--delta", "0.001", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(slurp(path("o/sweep.json")));
  ASSERT_EQ(doc["per_delta"].size(), 2u);
  for (const auto &row : doc["per_delta"]) {
    EXPECT_EQ(row["net2_implies_net1_pct"], 100.0);
    EXPECT_EQ(row["net1_implies_net2_pct"], 100.0);
  }
  EXPECT_EQ(doc["monotone"], true);
  EXPECT_EQ(lines(slurp(path("o/sweep.csv"))).size(), 3u);
}

TEST_F(Cli, CompareUniformHasNoImprovement) {
  const auto [n1, n2, s] = write_fixture(make_fixture(FixtureKind::UniformConstant, 5), "u");
  const Result r = run_cli({"compare", "--net1", n1, "--net2", n2, "--samples", s, "--delta", "0.1", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = lines(slurp(path("o/compare.csv")));
  ASSERT_GE(csv.size(), 4u);
  EXPECT_EQ(csv[0], "id,i,j,min_ind,min_joint,max_ind,max_joint,range_ind,range_joint,improvement_pct");
  EXPECT_EQ(csv[csv.size() - 2].rfind("mean,,,", 0), 0u);
  EXPECT_EQ(csv.back().rfind("std,,,", 0), 0u);
  const json doc = json::parse(slurp(path("o/compare.json")));
  for (const auto &row : doc["rows"]) {
    EXPECT_NEAR(row["min_joint"].get<double>(), row["min_ind"].get<double>(), 1e-9);
    EXPECT_NEAR(row["improvement_pct"].get<double>(), 0.0, 1e-9);
  }
}

TEST_F(Cli, CompactPruneAndQuantize) {
  const Fixture f = make_fixture(FixtureKind::RandomSmall, 3);
  const auto [n1, n2, s] = write_fixture(f, "r");
  ASSERT_EQ(run_cli({"compact", "--net1", n1, "--prune", "0", "--out", path("p0/net.json")}).code, 0);
  const Network same = load_network(path("p0/net.json"));
  for (std::size_t k = 0; k < same.num_layers(); ++k)
    EXPECT_EQ(same.layer(k).weights, f.net1.layer(k).weights);

  ASSERT_EQ(run_cli({"compact", "--net1", n1, "--prune", "0.5", "--out", path("p5.json")}).code, 0);
  EXPECT_EQ(parameter_stats(load_network(path("p5.json"))).zeros, parameter_stats(prune_mbp(f.net1, 0.5)).zeros);

  ASSERT_EQ(run_cli({"compact", "--net1", n1, "--quant", "int4", "--out", path("q4.json")}).code, 0);
  const std::string q4 = path("q4.json");
  const Result r = run_cli({"verify", "--net1", n1, "--net2", q4, "--samples", s, "--delta", "0.01", "--out", path("o"), "--allow-misclassified"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run_cli({"compact", "--net1", n1, "--out", path("x.json")}).code, cli::kConfigError);
}

TEST_F(Cli, AuditDeterministicAndFaultDetected) {
  const Result a = run_cli({"audit", "--trials", "5", "--seed", "7", "--oracle-samples", "2000", "--out", path("a")});
  const Result b = run_cli({"audit", "--trials", "5", "--seed", "7", "--oracle-samples", "2000", "--out", path("b"), "--jobs", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a/audit.json")), slurp(path("b/audit.json")));
  const json doc = json::parse(slurp(path("a/audit.json")));
  EXPECT_EQ(doc["passed"], true);
  const Result f = run_cli({"audit", "--trials", "10", "--seed", "7", "--oracle-samples", "2000", "--inject-fault", "--out", path("f")});
  EXPECT_EQ(f.code, cli::kAuditViolation);
}

TEST_F(Cli, ConfigFileAndJobsEnvironment) {
  const auto [n1, n2, s] = write_fixture(make_fixture(FixtureKind::RandomSmall, 6), "r");
  std::ofstream(path("cfg.json")) << json{{"net1", n1}, {"net2", n2}, {"samples", s}, {"delta", {0.02}}, {"out", path("o")},
                                          {"allow_misclassified", true}}.dump();
  ::setenv("IMPLYLP_JOBS", "2", 1);
  const Result r = run_cli({"verify", "--config", path("cfg.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("o/report.json")));
  ::setenv("IMPLYLP_JOBS", "many", 1);
  EXPECT_EQ(run_cli({"verify", "--config", path("cfg.json")}).code, cli::kConfigError);
  ::unsetenv("IMPLYLP_JOBS");
  std::ofstream(path("bad.json")) << R"({"colour": "red"})";
  const Result bad = run_cli({"verify", "--config", path("bad.json")});
  EXPECT_EQ(bad.code, cli::kConfigError);
  EXPECT_NE(bad.err.find("colour"), std::string::npos);
}

TEST_F(Cli, ExportLpWritesFiles) {
  const auto [n1, n2, s] = write_fixture(make_fixture(FixtureKind::Figure1Style), "fig");
  const Result r = run_cli({"verify", "--net1", n1, "--net2", n2, "--samples", s, "--delta", "0.15", "--out", path("o"),
                            "--export-lp", path("lp")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t n = 0;
  for (const auto &e : fs::directory_iterator(path("lp"))) {
    ++n;
    EXPECT_EQ(e.path().extension(), ".lp");
  }
  EXPECT_EQ(n, 2u);
}
