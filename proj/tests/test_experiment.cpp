#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "asynciter/experiment.hpp"

using namespace asynciter;
using io::json;

namespace {

const fs::path kConfigs = fs::path(ASYNCITER_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("asynciter_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig config(const std::string& file, const std::string& out) {
  ExperimentConfig cfg = load_config((kConfigs / file).string());
  cfg.output = scratch(out);
  return cfg;
}

std::string input_error(const json& j) {
  try {
    config_from_json(j, kConfigs);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(RunExperiment, SmokeConfig) {
  const auto cfg = config("smoke.json", "smoke");
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.exit_status, kExitPass);
  std::istringstream csv(slurp(cfg.output / "seed_1" / "residuals.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("# asynciter", 0), 0u);
  std::getline(csv, line);
  EXPECT_EQ(line, "j,k,residual_umax,residual_l2,bound_rhs,macro_boundary_flag");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 6u);
    if (rows >= 1) {
      EXPECT_EQ(cells[2], "0") << line;
      EXPECT_EQ(cells[3], "0") << line;
    }
    ++rows;
  }
  EXPECT_EQ(rows, 21u);
  EXPECT_TRUE(fs::exists(cfg.output / "summary.json"));
}

TEST(RunExperiment, RateConfig) {
  const auto res = run_experiment(config("rate_lasso.json", "rate"));
  EXPECT_EQ(res.exit_status, kExitPass) << res.summary["failures"].dump();
  for (const auto& s : res.summary["seeds"]) {
    EXPECT_GE(s["macro_iterations"].get<std::size_t>(), 15u);
    EXPECT_LE(s["verifiers"]["rate_bound"]["worst_slack"].get<double>(), 1e-9);
  }
}

TEST(RunExperiment, FlexibleConfigWritesSidecar) {
  auto cfg = config("rate_box.json", "box");
  cfg.seeds = {2};
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.exit_status, kExitPass) << res.summary["failures"].dump();
  EXPECT_TRUE(fs::exists(cfg.output / "seed_2" / "exchanged.json"));
  EXPECT_TRUE(fs::exists(cfg.output / "seed_2" / "trace.csv"));
}

TEST(RunExperiment, CraftedScheduleNamesConditionA) {
  const auto cfg = config("bad_schedule.json", "bad");
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.exit_status, kExitFail);
  const json sum = json::parse(slurp(cfg.output / "summary.json"));
  EXPECT_FALSE(sum["pass"].get<bool>());
  EXPECT_EQ(sum["seeds"][0]["failures"][0], "condition_a");
  EXPECT_EQ(sum["seeds"][0]["validation"]["condition_a"]["first_violation"]["j"], 3);
}

TEST(RunExperiment, MalformedConfigNamesField) {
  EXPECT_NE(input_error(io::read_json_file((kConfigs / "malformed.json").string())).find("schedule.horizon"),
            std::string::npos);
  json j = json::parse(R"({"problem": {"preset": "scalar_quadratic"},
                           "schedule": {"kind": "bounded", "horizon": 10, "seeds": []}, "output": "x"})");
  EXPECT_NE(input_error(j).find("schedule.seeds"), std::string::npos);
  j["schedule"]["seeds"] = {1};
  j["schedule"]["kind"] = "sometimes";
  EXPECT_NE(input_error(j).find("sometimes"), std::string::npos);
  j["schedule"] = {{"file", "does/not/exist.json"}};
  EXPECT_NE(input_error(j).find("schedule.file"), std::string::npos);
  j.erase("problem");
  EXPECT_NE(input_error(j).find("problem"), std::string::npos);
}

TEST(RunExperiment, ByteIdenticalCsvAcrossRunsAndThreads) {
  auto a = config("rate_lasso.json", "det_a");
  auto b = config("rate_lasso.json", "det_b");
  a.seeds = b.seeds = {1, 2, 3};
  run_experiment(a);
  setenv("ASYNCITER_THREADS", "3", 1);
  run_experiment(b);
  unsetenv("ASYNCITER_THREADS");
  for (std::uint64_t s : a.seeds) {
    for (const char* f : {"residuals.csv", "trace.csv", "schedule.csv"}) {
      const std::string name = "seed_" + std::to_string(s);
      EXPECT_EQ(slurp(a.output / name / f), slurp(b.output / name / f)) << name << '/' << f;
    }
  }
  EXPECT_EQ(slurp(a.output / "summary.json"), slurp(b.output / "summary.json"));
}

TEST(RunExperiment, ThreadCapParsing) {
  setenv("ASYNCITER_THREADS", "zero", 1);
  EXPECT_THROW(thread_cap(), InputError);
  setenv("ASYNCITER_THREADS", "4", 1);
  EXPECT_EQ(thread_cap(), 4u);
  unsetenv("ASYNCITER_THREADS");
  EXPECT_EQ(thread_cap(), 1u);
}
