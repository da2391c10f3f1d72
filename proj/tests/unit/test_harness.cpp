#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "geomc/errors.hpp"
#include "geomc/harness.hpp"

namespace geomc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("geomc_harness_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  ExperimentConfig banana_config(const std::string& sub = "out") const {
    ExperimentConfig cfg = parse_config(json{{"target", {{"id", "banana"}}},
                                             {"kernel", "lmrmhmc"},
                                             {"step_size", 0.1},
                                             {"k_max", 4},
                                             {"n_steps", 60}});
    cfg.out_dir = (dir_ / sub).string();
    return cfg;
  }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

std::string validation_message(const json& j) {
  try {
    parse_config(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST_F(HarnessTest, ValidationMessagesNameTheField) {
  const json base{{"target", {{"id", "banana"}}}};
  json j = base;
  j["n_steps"] = 0;
  EXPECT_EQ(validation_message(j), "n_steps must be ≥ 1");
  j = base;
  j["kernel"] = "nuts";
  EXPECT_NE(validation_message(j).find("kernel"), std::string::npos);
  j = base;
  j["alpha1"] = 1.5;
  EXPECT_NE(validation_message(j).find("alpha1"), std::string::npos);
  j = base;
  j["step_sise"] = 0.1;
  EXPECT_NE(validation_message(j).find("step_sise"), std::string::npos);
  j = base;
  j["target"]["sigma_y"] = "two";
  EXPECT_NE(validation_message(j).find("target.sigma_y"), std::string::npos);
  EXPECT_NE(validation_message(json{{"kernel", "ehmc"}}).find("target"), std::string::npos);

  ExperimentConfig cfg = banana_config();
  cfg.n_chains = 1;
  EXPECT_THROW(validate(cfg, Command::mmd_curve), ValidationError);
  try {
    validate(cfg, Command::mmd_curve);
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("n_chains"), std::string::npos);
  }
}

TEST_F(HarnessTest, EhmcNeedsConstantMetric) {
  ExperimentConfig cfg = banana_config();
  cfg.kernel = "ehmc";
  cfg.metric = "target";
  EXPECT_THROW(ChainSampler{cfg}, ValidationError);
  cfg.metric = "auto";
  EXPECT_NO_THROW(ChainSampler{cfg});
}

TEST_F(HarnessTest, ConfigRoundTrip) {
  ExperimentConfig cfg = banana_config();
  cfg.initial_point = std::vector<double>{0.1, 0.2};
  const json echo = to_json(cfg);
  EXPECT_EQ(to_json(parse_config(echo)), echo);
  EXPECT_DOUBLE_EQ(echo["alpha1"].get<double>(), 0.1);
  EXPECT_EQ(echo["langevin_variant"], "mmala");

  ExperimentConfig funnel = parse_config(json{{"target", {{"id", "funnel"}, {"n", 3}}}, {"kernel", "rmhmc"}});
  EXPECT_EQ(funnel.effective_alpha1(), 0.0);
  EXPECT_EQ(funnel.effective_langevin_variant(), "smala");
  EXPECT_EQ(funnel.chains_for(Command::run), 1);
  EXPECT_EQ(funnel.chains_for(Command::mmd_curve), kDefaultCurveChains);
  EXPECT_TRUE(to_json(funnel)["n_chains"].is_null());
}

TEST_F(HarnessTest, RunIsDeterministic) {
  const ExperimentConfig a = banana_config("a");
  const ExperimentConfig b = banana_config("b");
  const RunOutputs ra = run_chain(a);
  const RunOutputs rb = run_chain(b);
  EXPECT_EQ(slurp(ra.trace_files[0]), slurp(rb.trace_files[0]));
  const TraceData t = read_trace(ra.trace_files[0]);
  EXPECT_EQ(t.n_steps(), 60);
  EXPECT_EQ(t.q.cols(), 2);
}

TEST_F(HarnessTest, ChainsIndependentOfWorkerCount) {
  ExperimentConfig one = banana_config("one");
  one.n_chains = 3;
  ExperimentConfig three = banana_config("three");
  three.n_chains = 3;
  three.workers = 3;
  const RunOutputs r1 = run_chain(one);
  const RunOutputs r3 = run_chain(three);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(slurp(r1.trace_files[c]), slurp(r3.trace_files[c]));
  EXPECT_NE(slurp(r1.trace_files[0]), slurp(r1.trace_files[1]));
}

TEST_F(HarnessTest, TraceRoundTripIsExact) {
  const RunOutputs r = run_chain(banana_config());
  const TraceData t = read_trace(r.trace_files[0]);
  const std::string copy = (dir_ / "copy.csv").string();
  write_trace(copy, t);
  EXPECT_EQ(slurp(copy), slurp(r.trace_files[0]));
}

TEST_F(HarnessTest, AlphaOneHistogram) {
  ExperimentConfig cfg = banana_config();
  cfg.alpha1 = 1.0;
  const RunOutputs r = run_chain(cfg);
  const json m = json::parse(slurp(r.metrics_files[0]));
  EXPECT_EQ(m["branch_histogram"], (json{{"1", 60}}));
}

TEST_F(HarnessTest, DiagnoseMatchesInlineMetrics) {
  const RunOutputs r = run_chain(banana_config());
  const json inline_metrics = json::parse(slurp(r.metrics_files[0]));
  const json report = diagnose(r.trace_files, std::nullopt);
  const json& offline = report["traces"][0]["metrics"];
  ASSERT_FALSE(offline.empty());
  for (const auto& [key, value] : offline.items()) {
    ASSERT_TRUE(inline_metrics.contains(key)) << key;
    EXPECT_EQ(inline_metrics[key], value) << key;
  }
  EXPECT_TRUE(inline_metrics.contains("min_ess_per_sec"));
  EXPECT_TRUE(inline_metrics.contains("wall_time_sec"));
}

TEST_F(HarnessTest, DisjointTracesGiveKsOfOne) {
  TraceData t;
  t.branch = std::vector<int>(20, 1);
  t.accept_prob = std::vector<double>(20, 1.0);
  t.accepted = std::vector<int>(20, 1);
  t.sq_jump = std::vector<double>(20, 0.0);
  t.q = Matrix::Random(20, 2).array() + 100.0;
  const std::string t1 = (dir_ / "t1.csv").string();
  const std::string t2 = (dir_ / "t2.csv").string();
  write_trace(t1, t);
  t.q.array() += 5.0;
  write_trace(t2, t);
  const std::string ref = (dir_ / "ref.csv").string();
  write_samples_csv(ref, Matrix::Random(50, 2));
  const json report = diagnose({t1, t2}, ref, 100, 3);
  ASSERT_EQ(report["ks"]["statistics"].size(), 100u);
  // directions nearly orthogonal to the offset can mix the projections
  int ones = 0;
  for (double s : report["ks"]["statistics"]) ones += s == 1.0;
  EXPECT_GE(ones, 90);
  EXPECT_DOUBLE_EQ(report["ks"]["median"].get<double>(), 1.0);
}

TEST_F(HarnessTest, SchemaErrors) {
  const std::string empty = (dir_ / "empty.csv").string();
  std::ofstream(empty).close();
  EXPECT_THROW(read_trace(empty), SchemaError);
  EXPECT_THROW(diagnose({empty}, std::nullopt), SchemaError);

  const std::string header_only = (dir_ / "header.csv").string();
  std::ofstream(header_only) << "step,branch,accept_prob,accepted,sq_jump,q0\n";
  EXPECT_THROW(read_trace(header_only), SchemaError);

  const std::string wrong = (dir_ / "wrong.csv").string();
  std::ofstream(wrong) << "step,branch,accept_prob,accepted,sq_jump,q1\n1,1,1,1,0,0\n";
  EXPECT_THROW(read_trace(wrong), SchemaError);

  ExperimentConfig cfg = banana_config("two");
  const RunOutputs r2 = run_chain(cfg);
  ExperimentConfig st = parse_config(json{{"target", {{"id", "student_t"}, {"m", 3}}}, {"n_steps", 20}});
  st.out_dir = (dir_ / "three").string();
  const RunOutputs r3 = run_chain(st);
  EXPECT_THROW(diagnose({r2.trace_files[0], r3.trace_files[0]}, std::nullopt), SchemaError);
}

TEST_F(HarnessTest, MmdCurveRequiresReferenceSampler) {
  ExperimentConfig cfg =
      parse_config(json{{"target", {{"id", "logistic"}, {"n_obs", 30}, {"m", 3}}}, {"n_steps", 3}, {"n_chains", 4}});
  cfg.out_dir = (dir_ / "logit").string();
  EXPECT_THROW(mmd_curve(cfg), MissingReferenceSampler);
  EXPECT_THROW(reference(cfg), MissingReferenceSampler);
  // the logistic trace carries beta and alpha
  const RunOutputs r = run_chain(cfg);
  const TraceData t = read_trace(r.trace_files[0]);
  EXPECT_EQ(t.q.cols(), 4);
  for (Eigen::Index i = 0; i < t.q.rows(); ++i) EXPECT_GT(t.q(i, 3), 0.0);
}

TEST_F(HarnessTest, MmdCurveOutputs) {
  ExperimentConfig cfg = parse_config(json{{"target", {{"id", "student_t"}, {"m", 3}}},
                                           {"kernel", "lmrmhmc"},
                                           {"step_size", 0.5},
                                           {"k_max", 4},
                                           {"n_steps", 10},
                                           {"n_chains", 32},
                                           {"n_reference", 200},
                                           {"name", "st"}});
  cfg.out_dir = (dir_ / "curve").string();
  const std::string path = mmd_curve(cfg);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# bandwidth_mode: squared");
  std::getline(in, line);
  EXPECT_EQ(line, "step,mmd_u2_abs");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 10);
  const json summary = json::parse(slurp((dir_ / "curve" / "st_mmd_curve_summary.json").string()));
  EXPECT_EQ(summary["bandwidth_mode"], "squared");
  EXPECT_TRUE(summary.contains("r_squared"));

  const std::string ref_path = reference(cfg);
  const Matrix ref = read_samples_csv(ref_path);
  EXPECT_EQ(ref.rows(), 200);
  const ChainSampler sampler(cfg);
  EXPECT_EQ(ref, draw_reference(sampler, 200, cfg.base_seed));
}

TEST_F(HarnessTest, StationaryEnsembleStaysNearNull) {
  // Chains started at i.i.d. reference draws that never move: each curve
  // point is one draw from the estimator's null distribution.
  ExperimentConfig cfg = parse_config(json{{"target", {{"id", "student_t"}, {"m", 2}}}});
  const ChainSampler sampler(cfg);
  const int n_ref = 300, n_chains = 100;
  const Matrix ref = draw_reference(sampler, n_ref, 1);
  const double h = median_bandwidth(ref);
  const MmdAgainstReference mmd(ref, h);

  Rng rng(99);
  std::vector<double> null;
  for (int r = 0; r < 200; ++r) {
    Matrix y(n_chains, 2);
    for (int i = 0; i < n_chains; ++i) y.row(i) = sampler.sample_reference(rng).transpose();
    null.push_back(mmd(y));
  }
  double mean = 0.0, var = 0.0;
  for (double v : null) mean += v;
  mean /= null.size();
  for (double v : null) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (null.size() - 1));

  Matrix chains(n_chains, 2);
  for (int i = 0; i < n_chains; ++i) chains.row(i) = sampler.sample_reference(rng).transpose();
  for (int step = 0; step < 20; ++step) EXPECT_LT(std::abs(mmd(chains)), 3.0 * sd);
}

#ifdef GEOMC_CLI_PATH
int run_cli(const std::string& args) {
  const int status = std::system((std::string(GEOMC_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(HarnessTest, CliExitCodes) {
  const std::string good = (dir_ / "good.json").string();
  std::ofstream(good) << R"({"target": {"id": "banana"}, "n_steps": 20, "k_max": 3})";
  const std::string bad = (dir_ / "bad.json").string();
  std::ofstream(bad) << R"({"target": {"id": "banana"}, "n_steps": 0})";
  const std::string curve1 = (dir_ / "curve1.json").string();
  std::ofstream(curve1) << R"({"target": {"id": "banana"}, "n_chains": 1})";
  const std::string logit = (dir_ / "logit.json").string();
  std::ofstream(logit) << R"({"target": {"id": "logistic", "n_obs": 20, "m": 2}, "n_chains": 4, "n_steps": 2})";
  const std::string out = (dir_ / "cli").string();

  EXPECT_EQ(run_cli("run --config " + good + " --out-dir " + out + " --seed 4"), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "trace_chain0.csv"));
  EXPECT_EQ(run_cli("diagnose " + (fs::path(out) / "trace_chain0.csv").string()), 0);
  EXPECT_EQ(run_cli("run --config " + bad + " --out-dir " + out), 2);
  EXPECT_EQ(run_cli("mmd-curve --config " + curve1 + " --out-dir " + out), 2);
  EXPECT_EQ(run_cli("mmd-curve --config " + logit + " --out-dir " + out), 1);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}
#endif

}  // namespace
}  // namespace geomc
