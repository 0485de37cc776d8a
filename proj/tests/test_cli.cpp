#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "poseprompt/coco_io.hpp"
#include "poseprompt/prompt.hpp"
#include "test_util.hpp"

namespace poseprompt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("poseprompt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kSuite = testing::fixture_path("sim_suite_gt.json");

TEST_F(CliTest, SelectMaxVis) {
  const CliResult r = cli_run({"select", "--gt", kSuite, "--n", "3", "--out", path("sel")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(read_file(path("sel/prompts.json")));
  const auto instances = sim_instances(load_gt(kSuite));
  ASSERT_EQ(doc["prompts"].size(), instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const PromptSet ps = max_vis(instances[i].pose, 3);
    const auto& pts = doc["prompts"][i]["points"];
    ASSERT_EQ(pts.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(pts[k]["keypoint"], std::string(keypoint_name(ps.points[k].keypoint_index)));
      EXPECT_EQ(pts[k]["x"].get<double>(), ps.points[k].position.x());
    }
  }
  EXPECT_TRUE(fs::exists(path("sel/config.json")));
}

TEST_F(CliTest, SelectSweepWritesOneFilePerN) {
  const CliResult r = cli_run({"select", "--gt", kSuite, "--n", "1,2,3,4,5,6", "--out", path("sweep")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int n = 1; n <= 6; ++n) EXPECT_TRUE(fs::exists(path("sweep/prompts_n" + std::to_string(n) + ".json")));
}

TEST_F(CliTest, SelectMaxSpreadMatchesLibrary) {
  const CliResult r = cli_run({"select", "--gt", kSuite, "--strategy", "max_spread", "--n", "6", "--min-score", "0.3",
                         "--negative", "least_visible", "--bbox-mode", "inflated_gt_box", "--out", path("ms")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(read_file(path("ms/prompts.json")));
  const auto instances = sim_instances(load_gt(kSuite));
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const PromptSet ps = max_spread(instances[i].pose, 6, ScoreField::Visibility, 0.3);
    const auto& pts = doc["prompts"][i]["points"];
    ASSERT_EQ(pts.size(), ps.points.size() + 1);
    for (std::size_t k = 0; k < ps.points.size(); ++k) {
      EXPECT_EQ(pts[k]["keypoint"], std::string(keypoint_name(ps.points[k].keypoint_index)));
    }
    EXPECT_EQ(pts.back()["label"], 0);
    EXPECT_EQ(doc["prompts"][i]["box"].size(), 4u);
  }
}

TEST_F(CliTest, SimulateIdentityOracle) {
  const CliResult r = cli_run({"simulate", "--gt", kSuite, "--erode", "0", "--drop-prob", "0", "--out", path("sim")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(read_file(path("sim/traces.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "instance_id,step,iou");
  int rows = 0;
  while (std::getline(csv, line)) {
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1.000000");
    ++rows;
  }
  EXPECT_GE(rows, 20);
  EXPECT_EQ(load_dets(path("sim/results.json")).size(), 20u);
}

TEST_F(CliTest, SimulateGoldenAndDeterministic) {
  const CliResult a = cli_run({"simulate", "--gt", kSuite, "--seed", "0", "--workers", "3", "--out", path("a")});
  const CliResult b = cli_run({"simulate", "--gt", kSuite, "--seed", "0", "--workers", "1", "--out", path("b")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(path("a/traces.csv")), read_file(testing::fixture_path("golden_traces.csv")));
  for (const char* f : {"traces.csv", "results.json", "mean_trace.csv"}) {
    EXPECT_EQ(read_file(path(std::string("a/") + f)), read_file(path(std::string("b/") + f))) << f;
  }
}

TEST_F(CliTest, ConfigFileAndReplay) {
  write_file(path("cfg.json"), R"({"simulate": {"sampler": "mask_refine", "seed": 5, "n": 4}})");
  const CliResult a = cli_run({"simulate", "--config", path("cfg.json"), "--gt", kSuite, "--n", "6", "--out", path("a")});
  ASSERT_EQ(a.code, 0) << a.err;
  const json snap = json::parse(read_file(path("a/config.json")));
  EXPECT_EQ(snap["simulate"]["sampler"], "mask_refine");
  EXPECT_EQ(snap["simulate"]["seed"], 5);
  EXPECT_EQ(snap["simulate"]["n"], 6);  // the flag wins

  // Replaying the snapshot reproduces the run.
  const CliResult b = cli_run({"simulate", "--config", path("a/config.json"), "--out", path("b")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(path("a/traces.csv")), read_file(path("b/traces.csv")));
}

TEST_F(CliTest, SimulateOverExternalProcess) {
  const std::string endpoint = std::string("exec:") + POSEPROMPT_CLI_PATH + " serve-oracle --gt " + kSuite;
  const CliResult a = cli_run({"simulate", "--gt", kSuite, "--endpoint", endpoint, "--workers", "2", "--out", path("ext")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(read_file(path("ext/traces.csv")), read_file(testing::fixture_path("golden_traces.csv")));
}

TEST_F(CliTest, SimulateWireFailureExitsWithFour) {
  const CliResult r = cli_run({"simulate", "--gt", kSuite, "--endpoint", "exec:/bin/cat", "--workers", "1",
                         "--timeout-ms", "2000", "--out", path("bad")});
  EXPECT_EQ(r.code, cli::kWireError) << r.err;
}

TEST_F(CliTest, Evaluate) {
  const std::string gt = testing::fixture_path("eval_gt.json");
  CliResult r = cli_run({"evaluate", "--gt", gt, "--dets", testing::fixture_path("eval_dets.json"), "--out", path("ev")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(read_file(path("ev/report.json")));
  const auto expected = testing::load_fixture("eval_expected.json")["coco"];
  EXPECT_NEAR(report["ap"].get<double>(), expected["ap"].get<double>(), 1e-6);

  r = cli_run({"evaluate", "--gt", gt, "--dets", testing::fixture_path("eval_dets.json"), "--exclude-small"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(json::parse(r.out).contains("ap_small"));

  write_file(path("empty.json"), "[]");
  r = cli_run({"evaluate", "--gt", gt, "--dets", path("empty.json")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["ap"], 0.0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, EvaluatePerfectDetections) {
  const auto gt = load_gt(kSuite);
  std::vector<DetInstance> dets;
  for (const auto& g : gt.instances) dets.push_back({g.image_id, g.category_id, g.rle(), 1.0});
  write_results(dets, path("perfect.json"));
  const CliResult r = cli_run({"evaluate", "--gt", kSuite, "--dets", path("perfect.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(json::parse(r.out)["ap"].get<double>(), 1.0);
}

TEST_F(CliTest, InflateBbox) {
  const CliResult r = cli_run({"inflate-bbox", "--box", "10", "20", "30", "40", "--inflate-factor", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["inflated"], json::array({-5.0, 0.0, 60.0, 80.0}));
  EXPECT_EQ(j["area_ratio"], 4.0);
  const CliResult c = cli_run({"inflate-bbox", "--box", "10", "20", "30", "40", "--image-size", "50", "50"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(json::parse(c.out)["clamped"], json::array({0.0, 0.0, 50.0, 50.0}));
}

TEST_F(CliTest, Crop) {
  const CliResult r = cli_run({"crop", "--gt", kSuite, "--crop-factor", "1.5", "--out", path("crop")});
  ASSERT_EQ(r.code, 0) << r.err;
  const GtDataset crops = load_gt(path("crop/crops.json"));
  const GtDataset src = load_gt(kSuite);
  ASSERT_EQ(crops.instances.size(), src.instances.size());
  for (std::size_t i = 0; i < crops.instances.size(); ++i) {
    EXPECT_EQ(crops.instances[i].rle().area(), src.instances[i].rle().area());
  }
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli_run({}).code, cli::kConfigError);
  EXPECT_EQ(cli_run({"simulate", "--gt", "/nonexistent.json"}).code, cli::kConfigError);
  EXPECT_EQ(cli_run({"simulate", "--gt", kSuite, "--sampler", "nope", "--out", path("x")}).code, cli::kConfigError);
  write_file(path("broken.json"), "{\"images\": [}");
  EXPECT_EQ(cli_run({"evaluate", "--gt", path("broken.json"), "--dets", path("broken.json")}).code, cli::kDataError);
  write_file(path("noimages.json"), "{\"annotations\": []}");
  EXPECT_EQ(cli_run({"crop", "--gt", path("noimages.json"), "--out", path("c")}).code, cli::kDataError);
  EXPECT_EQ(cli_run({"--help"}).code, 0);
}

}  // namespace
}  // namespace poseprompt
