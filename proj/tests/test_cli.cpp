#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "learner/cli.hpp"
#include "learner/simulation.hpp"

using namespace learner;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "learner_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SimScenario s;
    s.p = 300;
    s.q = 30;
    s.r = 3;
    s.similarity = Similarity::Moderate;
    s.perturb_scale = 0.25;
    s.seed = 4;
    const SimDraw d = draw_rep(s, 0);
    write_matrix(d.y0, (dir_ / "y0.csv").string());
    write_matrix(d.y1, (dir_ / "y1.csv").string());
    Mask m = Mask::Constant(300, 30, true);
    for (Index i = 0; i < 300; i += 7) m(i, i % 30) = false;
    write_matrix(ObservedMatrix(d.y0, m), (dir_ / "y0_missing.csv").string());
    write_matrix(d.theta0.reconstruct(), (dir_ / "theta0.csv").string());
  }

  static std::string in(const std::string& name) { return (dir_ / name).string(); }
  static std::string out(const std::string& name) { return (dir_ / name).string(); }

  static fs::path dir_;
};

fs::path CliTest::dir_;

}  // namespace

TEST_F(CliTest, RankPrintsInteger) {
  const CliRun r = run({"rank", "--input", in("y1.csv"), "--upper-bound", "9", "--strategy", "screenot", "--out-dir",
                     out("rank")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "3\n");
  EXPECT_TRUE(fs::exists(out("rank") + "/manifest.json"));
}

TEST_F(CliTest, FitWritesArtifactsAndManifest) {
  const CliRun r = run({"fit", "--y0", in("y0.csv"), "--y1", in("y1.csv"), "--lambda1", "215.4", "--lambda2", "1",
                     "--step", "0.04", "--max-iter", "100", "--out-dir", out("fit")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"theta.csv", "u.csv", "v.csv", "trajectory.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(out("fit") + "/" + f)) << f;
  const ObservedMatrix theta = read_matrix(out("fit") + "/theta.csv");
  EXPECT_EQ(theta.rows(), 300);
  EXPECT_EQ(theta.cols(), 30);
  const json manifest = json::parse(slurp(out("fit") + "/manifest.json"));
  EXPECT_EQ(manifest["schema_version"], kSchemaVersion);
  EXPECT_EQ(manifest["command"], "fit");
  EXPECT_EQ(manifest["parameters"]["fit"]["lambda1_row"], 215.4);
  EXPECT_EQ(manifest["parameters"]["fit"]["step_size"], 0.04);
  EXPECT_EQ(manifest["parameters"]["fit"]["max_iter"], 100);
  EXPECT_EQ(manifest["parameters"]["fit"]["rank"], 3);
  EXPECT_EQ(manifest["generator"], std::string(Pcg32::name));
  EXPECT_EQ(slurp(out("fit") + "/trajectory.csv").rfind("t,objective\n0,", 0), 0u);
}

TEST_F(CliTest, StepPresetNames) {
  const CliRun r = run({"fit", "--y0", in("y0.csv"), "--y1", in("y1.csv"), "--lambda1", "1", "--step", "moderate",
                     "--rank", "3", "--out-dir", out("fit_preset")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json manifest = json::parse(slurp(out("fit_preset") + "/manifest.json"));
  EXPECT_EQ(manifest["parameters"]["fit"]["step_size"], 0.035);
  const CliRun bad = run({"fit", "--y0", in("y0.csv"), "--y1", in("y1.csv"), "--step", "fast"});
  EXPECT_EQ(bad.code, 2);
}

TEST_F(CliTest, CvFitTableIsConsistent) {
  const CliRun r = run({"cv-fit", "--y0", in("y0.csv"), "--y1", in("y1.csv"), "--lambda1-grid", "0:2:3",
                     "--lambda2-grid", "0.1,1", "--seed", "5", "--threads", "2", "--out-dir", out("cv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const ObservedMatrix table = parse_matrix(slurp(out("cv") + "/cv_table.csv"));
  EXPECT_EQ(table.rows(), 6);
  EXPECT_EQ(table.cols(), 3 + 4 + 1);
  Index arg = 0;
  table.values().col(7).minCoeff(&arg);
  const json summary = json::parse(r.out);
  EXPECT_EQ(summary["best"]["lambda1_row"].get<double>(), table(arg, 0));
  EXPECT_EQ(summary["best"]["lambda2"].get<double>(), table(arg, 2));

  const CliRun again = run({"cv-fit", "--y0", in("y0.csv"), "--y1", in("y1.csv"), "--lambda1-grid", "0:2:3",
                         "--lambda2-grid", "0.1,1", "--seed", "5", "--threads", "1", "--out-dir", out("cv1")});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(slurp(out("cv") + "/cv_table.csv"), slurp(out("cv1") + "/cv_table.csv"));
  EXPECT_EQ(slurp(out("cv") + "/theta.csv"), slurp(out("cv1") + "/theta.csv"));
}

TEST_F(CliTest, ExtFitAndSeparatePenalties) {
  const CliRun r = run({"ext-fit", "--y0", in("y0.csv"), "--y1", in("y1.csv"), "--y0-ext", in("theta0.csv"),
                     "--lambda1-grid", "1,100", "--lambda2-grid", "1", "--separate", "--out-dir", out("ext")});
  ASSERT_EQ(r.code, 0) << r.err;
  const ObservedMatrix table = parse_matrix(slurp(out("ext") + "/ext_table.csv"));
  EXPECT_EQ(table.rows(), 4);
}

TEST_F(CliTest, MissingEntriesStayMissingUnlessImputed) {
  const CliRun a = run({"dlearner", "--y0", in("y0_missing.csv"), "--y1", in("y1.csv"), "--rank", "3", "--out-dir",
                     out("dl")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(json::parse(slurp(out("dl") + "/manifest.json"))["parameters"]["completed"], true);
  const CliRun b = run({"dlearner", "--y0", in("y0_missing.csv"), "--y1", in("y1.csv"), "--rank", "3", "--impute-zero",
                     "--out-dir", out("dl0")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(json::parse(slurp(out("dl0") + "/manifest.json"))["parameters"]["completed"], false);
  EXPECT_NE(slurp(out("dl") + "/theta.csv"), slurp(out("dl0") + "/theta.csv"));

  const CliRun source = run({"rank", "--input", in("y0_missing.csv")});
  EXPECT_EQ(source.code, 2);
}

TEST_F(CliTest, AnalyzeOutputs) {
  const CliRun r = run({"analyze", "--input", in("y1.csv"), "--rank", "3", "--varimax", "--compare", in("y0.csv"),
                     "--subset-size", "20", "--seed", "1", "--out-dir", out("an")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"scree.csv", "scores_u.csv", "scores_v.csv", "top_u.csv", "top_v.csv", "varimax_v.csv",
                        "proj_u_input.csv", "proj_v_compare.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(out("an") + "/" + f)) << f;
  const ObservedMatrix scores = read_matrix(out("an") + "/scores_v.csv");
  for (Index k = 0; k < scores.cols(); ++k) EXPECT_NEAR(scores.values().col(k).sum(), 1.0, 1e-10);
  EXPECT_EQ(read_matrix(out("an") + "/proj_u_input.csv").rows(), 20);
}

TEST_F(CliTest, SimulateIsByteIdentical) {
  const std::vector<std::string> base{"simulate", "--preset", "desk-high", "--reps", "2", "--seed", "7"};
  auto a = base;
  a.insert(a.end(), {"--threads", "1", "--out-dir", out("sim_a")});
  auto b = base;
  b.insert(b.end(), {"--threads", "2", "--out-dir", out("sim_b")});
  const CliRun ra = run(a);
  const CliRun rb = run(b);
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_EQ(slurp(out("sim_a") + "/report.json"), slurp(out("sim_b") + "/report.json"));
  EXPECT_EQ(slurp(out("sim_a") + "/report.csv"), slurp(out("sim_b") + "/report.csv"));
  const json report = json::parse(slurp(out("sim_a") + "/report.json"));
  EXPECT_EQ(report["schema_version"], kSchemaVersion);
  EXPECT_EQ(report["methods"].size(), 3u);
}

TEST_F(CliTest, UsageAndDataErrors) {
  const CliRun unknown = run({"fit", "--y0", in("y0.csv"), "--y1", in("y1.csv"), "--lamda1", "3"});
  EXPECT_EQ(unknown.code, 2);
  const json err = json::parse(unknown.err);
  EXPECT_EQ(err["error"], "UsageError");
  EXPECT_EQ(err["exit_code"], 2);

  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);

  const CliRun missing = run({"rank", "--input", in("nope.csv")});
  EXPECT_EQ(missing.code, 3);
  EXPECT_EQ(json::parse(missing.err)["error"], "IoError");

  const CliRun bound = run({"rank", "--input", in("y1.csv"), "--upper-bound", "30"});
  EXPECT_EQ(bound.code, 2);
  EXPECT_EQ(json::parse(bound.err)["error"], "RankOutOfRange");

  const CliRun rho = run({"simulate", "--preset", "desk-high", "--rho", "1", "--out-dir", out("bad_rho")});
  EXPECT_EQ(rho.code, 2);
  EXPECT_EQ(json::parse(rho.err)["error"], "InvalidCorrelation");

  std::ofstream(in("ragged.csv")) << "1,2\n3\n";
  EXPECT_EQ(run({"rank", "--input", in("ragged.csv")}).code, 3);
}

TEST_F(CliTest, ConfigFile) {
  std::ofstream(in("good.toml")) << "[rank]\ninput = \"" << in("y1.csv") << "\"\nupper-bound = 9\n";
  const CliRun good = run({"--config", in("good.toml"), "rank"});
  EXPECT_EQ(good.code, 0) << good.err;
  EXPECT_EQ(good.out, "3\n");

  std::ofstream(in("bad.toml")) << "[rank]\ninput = \"" << in("y1.csv") << "\"\nupper-bund = 9\n";
  const CliRun bad = run({"--config", in("bad.toml"), "rank"});
  EXPECT_EQ(bad.code, 2);
}

TEST_F(CliTest, InputsAreNotModified) {
  const std::string before = slurp(in("y0_missing.csv"));
  run({"cv-fit", "--y0", in("y0_missing.csv"), "--y1", in("y1.csv"), "--lambda1-grid", "1", "--lambda2-grid", "1",
       "--out-dir", out("cv_missing")});
  EXPECT_EQ(slurp(in("y0_missing.csv")), before);
}
