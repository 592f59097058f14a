#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mf/cli.h"
#include "mf/io.h"
#include "mf/reconstruct.h"
#include "mf/trace_moments.h"

using namespace mf;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result momfuse(std::vector<std::string> args) {
  args.insert(args.begin(), "momfuse");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mf_cli_" + std::string(::testing::UnitTest::GetInstance()
                                        ->current_test_info()
                                        ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string &name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kData = MF_TEST_DATA_DIR;

} // namespace

TEST_F(Cli, BuildMinimizeReachesTolerance) {
  const auto r = momfuse({"build-cubature", "--d", "3", "--k", "1", "--t", "2",
                          "--n", "6", "--method", "minimize", "--seed", "1",
                          "--out", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::read_json_file(path("r.json"));
  EXPECT_LE(j["gap"].get<double>(), 1e-10);
  const auto cfg = io::read_json_file(path("r.json.config.json"));
  EXPECT_EQ(cfg["command"], "build-cubature");
  EXPECT_EQ(cfg["seed"], 1);
}

TEST_F(Cli, BuildIsDeterministic) {
  for (const char *name : {"a.json", "b.json"})
    ASSERT_EQ(momfuse({"build-cubature", "--d", "4", "--k", "2", "--t", "2",
                       "--n", "60", "--method", "solve", "--seed", "9", "--out",
                       path(name)})
                  .code,
              0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, BuildProbabilisticGapOrder) {
  const auto r = momfuse({"build-cubature", "--d", "3", "--k", "1", "--t", "2",
                          "--n", "50", "--method", "probabilistic", "--out",
                          path("p.json")});
  ASSERT_EQ(r.code, 0);
  const double gap = io::read_json_file(path("p.json"))["gap"].get<double>();
  const double expected = (1 - lambda_t(1, 3, 2)) / 50;
  EXPECT_GT(gap, expected / 20);
  EXPECT_LT(gap, expected * 20);
}

TEST_F(Cli, BuildRejectsFullRank) {
  const auto r = momfuse({"build-cubature", "--d", "3", "--k", "3", "--t", "2",
                          "--n", "6", "--out", path("x.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("k < d"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("x.json")));
}

TEST_F(Cli, BuildNonConvergenceWritesFlaggedRule) {
  const auto r = momfuse({"build-cubature", "--d", "3", "--k", "1", "--t", "3",
                          "--n", "3", "--restarts", "2", "--max-iters", "20",
                          "--out", path("bad.json")});
  EXPECT_EQ(r.code, 2);
  const auto j = io::read_json_file(path("bad.json"));
  EXPECT_EQ(j["converged"], false);
  EXPECT_GT(j["gap"].get<double>(), 1e-8);
}

TEST_F(Cli, VerifyReportsEveryDegree) {
  ASSERT_EQ(momfuse({"build-cubature", "--d", "3", "--k", "1", "--t", "3",
                     "--n", "40", "--method", "solve", "--out", path("r.json")})
                .code,
            0);
  const auto r = momfuse({"verify-cubature", path("r.json"), "--t-all-below", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::parse(r.out);
  ASSERT_EQ(j["degrees"].size(), 3u);
  for (const auto &deg : j["degrees"]) {
    EXPECT_LE(std::abs(deg["gap"].get<double>()), 1e-8);
    EXPECT_LE(deg["epsilon"].get<double>(), 1e-4);
  }
  const auto human = momfuse({"verify-cubature", path("r.json")});
  EXPECT_NE(human.out.find("epsilon"), std::string::npos);
}

TEST_F(Cli, VerifyConjugatedRuleHasSameGap) {
  ASSERT_EQ(momfuse({"build-cubature", "--d", "4", "--k", "2", "--t", "2",
                     "--n", "20", "--method", "probabilistic", "--out",
                     path("r.json")})
                .code,
            0);
  CubatureRule rule = io::rule_from_json(io::read_json_file(path("r.json")));
  Rng rng(77);
  const Matrix u = haar_orthogonal(4, rng);
  for (auto &p : rule.nodes)
    p = p.conjugated(u);
  io::write_json_file(path("c.json"), io::to_json(rule));
  const auto a = io::parse(momfuse({"verify-cubature", path("r.json"), "--json"}).out);
  const auto b = io::parse(momfuse({"verify-cubature", path("c.json"), "--json"}).out);
  EXPECT_NEAR(a["degrees"][0]["gap"].get<double>(),
              b["degrees"][0]["gap"].get<double>(), 1e-12);
}

TEST_F(Cli, VerifyMalformedFile) {
  std::ofstream(path("m.json")) << "{\"d\": 3,";
  EXPECT_EQ(momfuse({"verify-cubature", path("m.json")}).code, 1);
  EXPECT_EQ(momfuse({"verify-cubature", path("missing.json")}).code, 1);
}

TEST_F(Cli, ProjectRejectsDimensionMismatch) {
  ASSERT_EQ(momfuse({"build-cubature", "--d", "4", "--k", "1", "--t", "1",
                     "--n", "8", "--method", "probabilistic", "--out",
                     path("r.json")})
                .code,
            0);
  const auto r = momfuse({"project", kData + "/demo_law.json", path("r.json"),
                          "--p", "2"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, ProjectFromCsvMatchesLaw) {
  std::ofstream(path("s.csv")) << "x1,x2,x3\n1,0,0\n0,1,0\n";
  std::ofstream(path("law.json"))
      << R"({"atoms": [[1, 0, 0], [0, 1, 0]], "probs": [0.5, 0.5]})";
  const auto a = momfuse({"project", path("s.csv"), kData + "/demo_rule.json",
                          "--p", "2", "--convention", "QX"});
  const auto b = momfuse({"project", path("law.json"), kData + "/demo_rule.json",
                          "--p", "2", "--convention", "QX"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, FuseReproducesGoldenOutput) {
  const auto r = momfuse({"fuse", kData + "/demo_projected.json",
                          kData + "/demo_rule.json", "--t", "3", "--mode",
                          "sphere", "--out", path("f.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("f.json")), slurp(kData + "/demo_expected.json"));
  const auto expected = io::moment_tensor_from_json(
      io::read_json_file(kData + "/demo_expected.json"));
  const auto truth =
      io::moment_tensor_from_json(io::read_json_file(kData + "/demo_truth.json"));
  EXPECT_LE(expected.max_abs_diff(truth, 1, 3), 1e-8);
}

TEST_F(Cli, ProjectReproducesGoldenInput) {
  const auto r = momfuse({"project", kData + "/demo_law.json",
                          kData + "/demo_rule.json", "--p", "3", "--convention",
                          "QX"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(kData + "/demo_projected.json"));
}

TEST_F(Cli, OutputsRoundTripByteIdentical) {
  const auto r = momfuse({"fuse", kData + "/demo_projected.json",
                          kData + "/demo_rule.json", "--mode", "general"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(io::dump(io::parse(r.out)), r.out);
  const std::string rule = slurp(kData + "/demo_rule.json");
  EXPECT_EQ(io::dump(io::to_json(io::rule_from_json(io::parse(rule)))), rule);
}

TEST_F(Cli, FuseModeChecks) {
  // Sphere mode needs sphere-flagged input.
  auto j = io::read_json_file(kData + "/demo_projected.json");
  j.erase("sphere");
  io::write_json_file(path("nosphere.json"), j);
  const auto s = momfuse({"fuse", path("nosphere.json"), kData + "/demo_rule.json",
                          "--mode", "sphere"});
  EXPECT_EQ(s.code, 1);
  EXPECT_NE(s.err.find("warning"), std::string::npos);

  ASSERT_EQ(momfuse({"build-cubature", "--d", "3", "--k", "2", "--t", "2",
                     "--n", "30", "--method", "solve", "--out", path("k2.json")})
                .code,
            0);
  EXPECT_EQ(momfuse({"fuse", kData + "/demo_projected.json", path("k2.json"),
                     "--mode", "rank1", "--t", "2"})
                .code,
            1);

  ASSERT_EQ(momfuse({"build-cubature", "--d", "3", "--k", "1", "--t", "2",
                     "--n", "30", "--method", "solve", "--out", path("t2.json")})
                .code,
            0);
  EXPECT_EQ(momfuse({"fuse", kData + "/demo_projected.json", path("t2.json"),
                     "--mode", "general", "--t", "3"})
                .code,
            1);
}

TEST_F(Cli, FuseSpanningEnsemble) {
  const auto ens = spanning_family(3, 3, 1);
  io::write_json_file(path("ens.json"), io::to_json(ens));
  ASSERT_EQ(momfuse({"project", kData + "/demo_law.json", path("ens.json"), "--p",
                     "3", "--convention", "QX", "--out", path("pq.json")})
                .code,
            0);
  const auto r = momfuse({"fuse", path("pq.json"), path("ens.json"), "--mode",
                          "spanning"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto truth =
      io::moment_tensor_from_json(io::read_json_file(kData + "/demo_truth.json"));
  EXPECT_LE(io::moment_tensor_from_json(io::parse(r.out)).max_abs_diff(truth, 1, 3),
            1e-9);
}

TEST_F(Cli, SimulateExactIsExact) {
  const auto r = momfuse({"simulate", "--law", "atoms", "--d", "4", "--k", "2",
                          "--t", "3", "--n-samples", "0", "--json", "--out",
                          path("sim.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::parse(r.out);
  EXPECT_LE(j["max_error_vs_truth"].get<double>(), 1e-8);
  EXPECT_EQ(io::read_json_file(path("sim.json")), j);
  EXPECT_TRUE(fs::exists(path("sim.json.config.json")));
}

TEST_F(Cli, SimulateSamplingErrorShrinks) {
  auto err_at = [&](const char *n) {
    const auto r = momfuse({"simulate", "--law", "uniform_sphere", "--d", "3",
                            "--k", "1", "--t", "2", "--n-samples", n, "--seed",
                            "3", "--json"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = io::parse(r.out);
    // Fusion of the sample's own moments is exact; the rest is sampling noise.
    EXPECT_LE(j["max_error_vs_sample_moments"].get<double>(), 1e-8);
    return j["max_error_vs_truth"].get<double>();
  };
  const double coarse = err_at("2000");
  const double fine = err_at("200000");
  EXPECT_LT(fine, coarse / 3);
}

TEST_F(Cli, OracleChecksPass) {
  for (const char *what : {"mu", "lambda", "identity"}) {
    const auto r = momfuse({"oracle", "--what", what, "--d", "4", "--k", "2",
                            "--t", "3", "--n", "100000"});
    EXPECT_EQ(r.code, 0) << what << r.out;
    EXPECT_TRUE(io::parse(r.out)["pass"].get<bool>());
  }
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(momfuse({}).code, 1);
  EXPECT_EQ(momfuse({"frobnicate"}).code, 1);
  EXPECT_EQ(momfuse({"fuse", "a", "b", "--mode", "bogus"}).code, 1);
  EXPECT_EQ(momfuse({"--help"}).code, 0);
}
