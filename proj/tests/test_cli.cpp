#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crbgate/io.hpp"
#include "support/run.hpp"
#include "support/temp_dir.hpp"

using namespace crbgate;
using nlohmann::json;
using testing_support::run_cli;
using testing_support::slurp;
using testing_support::spit;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scene_ = (dir_.path() / "scene.json").string();
    ASSERT_EQ(run_cli("init-scene --out '" + scene_ + "'", dir_.path()).exit_code, 0);
  }

  std::string path(const std::string& name) const { return (dir_.path() / name).string(); }

  std::string write_measurements() {
    const Scene s = default_scene();
    std::string body;
    body += io::to_json(sample_measurements(s.anchors, {Vec2(5, 5)}, s.noise, 0.0, 1)).dump() + "\n";
    body += "{\"t\":0.1,\"rss\":{\"b00\":-60}}\n";
    body += io::to_json(sample_measurements(s.anchors, {Vec2(14, 9)}, s.noise, 0.2, 2)).dump() + "\n";
    spit(path("meas.jsonl"), body);
    return path("meas.jsonl");
  }

  testing_support::TempDir dir_;
  std::string scene_;
};

}  // namespace

TEST_F(CliTest, InitSceneIsTheDefaultScene) {
  EXPECT_EQ(json::parse(slurp(scene_)), io::to_json(default_scene()));
}

TEST_F(CliTest, SimulateIsByteDeterministic) {
  const std::string args = "simulate --scene '" + scene_ + "' --sigmas 3,7 --trials 40 --seed 4 --out ";
  ASSERT_EQ(run_cli(args + "'" + path("a.csv") + "' --json '" + path("a.json") + "'", dir_.path()).exit_code, 0);
  ASSERT_EQ(run_cli(args + "'" + path("b.csv") + "'", dir_.path()).exit_code, 0);
  const auto a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_EQ(a.substr(0, a.find('\n')), "sigma_dbm,rmse_m,crb_rmse_m,coverage,trials,failures");
  const json report = json::parse(slurp(path("a.json")));
  EXPECT_EQ(report["per_sigma"].size(), 2u);
}

TEST_F(CliTest, HeatmapCsv) {
  const auto r = run_cli("heatmap --scene '" + scene_ + "' --sigma 5 --grid 4x3 --out '" + path("h.csv") + "'", dir_.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(slurp(path("h.csv")), io::to_csv(crb_heatmap(default_scene().with_sigma(5), 4, 3)));
}

TEST_F(CliTest, CoveragePrintsJson) {
  const auto r = run_cli("coverage --scene '" + scene_ + "' --alpha 0.05 --trials 40 --seed 1", dir_.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["trials"], 40);
  EXPECT_GT(j["coverage"].get<double>(), 0.5);
}

TEST_F(CliTest, GateWritesOneLinePerFrame) {
  const std::string meas = write_measurements();
  const std::string args = "gate --scene '" + scene_ + "' --measurements '" + meas + "' --alpha 0.05 --out ";
  ASSERT_EQ(run_cli(args + "'" + path("g1.jsonl") + "'", dir_.path()).exit_code, 0);
  ASSERT_EQ(run_cli(args + "'" + path("g2.jsonl") + "'", dir_.path()).exit_code, 0);
  const std::string out = slurp(path("g1.jsonl"));
  EXPECT_EQ(out, slurp(path("g2.jsonl")));
  std::istringstream lines(out);
  std::vector<json> recs;
  for (std::string line; std::getline(lines, line);) recs.push_back(json::parse(line));
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_TRUE(recs[0]["error"].is_null());
  EXPECT_EQ(recs[1]["error"]["kind"], "insufficient_anchors");
  EXPECT_FALSE(recs[2]["regions"].empty());
}

TEST_F(CliTest, EvalPerfectPredictions) {
  std::string gt = "frame_index,x,y,w,h,present\n";
  for (int k = 0; k < 10; ++k) gt += std::to_string(k) + ",10,20,30,40,1\n";
  spit(path("gt.csv"), gt);
  spit(path("pred.csv"), gt);
  const auto r = run_cli("eval --pred '" + path("pred.csv") + "' --gt '" + path("gt.csv") + "' --out '" + path("ev") + "'",
                         dir_.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json s = json::parse(slurp(path("ev/summary.json")));
  EXPECT_NEAR(s["auc"].get<double>(), 0.995, 1e-12);
  EXPECT_EQ(s["recall"], 100.0);
  EXPECT_EQ(s["frames"], 10);
  const auto curve = slurp(path("ev/curve.csv"));
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 102);
}

TEST_F(CliTest, EvalReadsGateOutput) {
  const std::string meas = write_measurements();
  ASSERT_EQ(run_cli("gate --scene '" + scene_ + "' --measurements '" + meas + "' --out '" + path("g.jsonl") + "'",
                    dir_.path()).exit_code, 0);
  spit(path("gt.csv"), "0,600,400,10,10,1\n1,0,0,0,0,0\n2,600,400,10,10,1\n");
  const auto r = run_cli("eval --pred '" + path("g.jsonl") + "' --gt '" + path("gt.csv") + "' --out '" + path("ev") + "'",
                         dir_.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(json::parse(slurp(path("ev/summary.json")))["frames"], 3);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("simulate --scene '" + scene_ + "'", dir_.path()).exit_code, 2);  // --out missing
  EXPECT_EQ(run_cli("heatmap --scene '" + scene_ + "' --grid 4by4 --out x.csv", dir_.path()).exit_code, 2);
  EXPECT_EQ(run_cli("nonsense", dir_.path()).exit_code, 2);
  EXPECT_EQ(run_cli("simulate --scene '" + scene_ + "' --sigmas 3,abc --out '" + path("x.csv") + "'", dir_.path()).exit_code, 2);
}

TEST_F(CliTest, RuntimeErrorsExitOneWithJsonOnStderr) {
  spit(path("bad_scene.json"), "{\"anchors\": []}");
  auto r = run_cli("heatmap --scene '" + path("bad_scene.json") + "' --out '" + path("h.csv") + "'", dir_.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "parse_error");

  spit(path("backwards.jsonl"), "{\"t\":1,\"rss\":{}}\n{\"t\":0,\"rss\":{}}\n");
  r = run_cli("gate --scene '" + scene_ + "' --measurements '" + path("backwards.jsonl") + "' --out '" + path("g.jsonl") + "'",
              dir_.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "stream_order_violation");

  r = run_cli("coverage --scene '" + scene_ + "' --alpha 1.5 --trials 10", dir_.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "domain_error");
}
