// Copyright 2026 The oppdrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oppdrive/cli.hpp"
#include "support/mock_service.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace oppdrive;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args)
{
  args.insert(args.begin(), "oppdrive");
  std::vector<const char *> argv;
  for (const auto & a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    root_ = fs::temp_directory_path() /
            ("oppdrive_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
             std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    ::unsetenv(kEndpointEnvVar);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write(const std::string & name, const std::string & content)
  {
    const auto p = root_ / name;
    std::ofstream(p) << content;
    return p;
  }

  fs::path config(const std::string & reward = "kind = lord_opposite\nmodality = text\n")
  {
    return write("run.ini",
                 "[env]\nlane_count = 3\nvehicles_density = 1\nduration = 8\n\n[reward]\n" + reward +
                   "\n[ppo]\nrollout_length = 64\nminibatch_size = 32\nepochs_per_update = 1\n"
                   "total_env_steps = 128\nhidden_layers = [16]\nseed = 2\n\n[run]\nlog_every_episodes = 1\n");
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, UsageErrors)
{
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"fly"}).code, kExitUsage);
  EXPECT_EQ(run({"train"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, TrainWritesARunDirectory)
{
  const auto dir = root_ / "run";
  const auto r = run({"train", "--config", config().string(), "--out", dir.string(), "--quiet"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "update_000002.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "final.ckpt"));
  std::ifstream m(dir / "manifest.json");
  const auto manifest = nlohmann::json::parse(m);
  EXPECT_EQ(manifest["backends"][0]["name"], "reference-text");
  EXPECT_EQ(manifest["seed"], 2);

  // Refuses to overwrite.
  EXPECT_EQ(run({"train", "--config", config().string(), "--out", dir.string()}).code, kExitUsage);
}

TEST_F(CliTest, TrainIsReproducible)
{
  const auto a = root_ / "a";
  const auto b = root_ / "b";
  ASSERT_EQ(run({"train", "--config", config().string(), "--out", a.string(), "--quiet"}).code, kExitOk);
  ASSERT_EQ(run({"train", "--config", config().string(), "--out", b.string(), "--quiet"}).code, kExitOk);
  auto slurp = [](const fs::path & p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
}

TEST_F(CliTest, InvalidConfigLeavesNothingBehind)
{
  const auto dir = root_ / "bad";
  const auto r = run({"train", "--config", config("modality = text\n").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("reward.kind"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir));

  EXPECT_EQ(run({"train", "--config", (root_ / "missing.ini").string(), "--out", dir.string()}).code,
            kExitConfig);
  EXPECT_EQ(run({"train", "--config", config().string(), "--set", "ppo.gamma=2", "--out", dir.string()}).code,
            kExitConfig);
  EXPECT_FALSE(fs::exists(dir));
}

TEST_F(CliTest, EvaluateWritesOneReportPerSetting)
{
  const auto dir = root_ / "run";
  ASSERT_EQ(run({"train", "--config", config().string(), "--out", dir.string(), "--quiet"}).code, kExitOk);
  const auto reports = root_ / "reports";
  const auto r = run({"evaluate", "--checkpoint", (dir / "checkpoints" / "final.ckpt").string(), "--setting",
                      "lane-4-density-2", "--setting", "lane-5-density-2.5", "--setting", "lane-5-density-3",
                      "--out", reports.string(), "--workers", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char * s : {"lane-4-density-2", "lane-5-density-2.5", "lane-5-density-3"}) {
    EXPECT_TRUE(fs::exists(reports / (std::string(s) + ".csv")));
    EXPECT_TRUE(fs::exists(reports / (std::string(s) + ".txt")));
    EXPECT_NE(r.out.find(s), std::string::npos);
  }
  std::ifstream csv(reports / "lane-4-density-2.csv");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 1 + 17 + 1);
}

TEST_F(CliTest, EvaluateRejectsBadCheckpoints)
{
  const auto junk = write("junk.ckpt", "not a checkpoint");
  EXPECT_EQ(run({"evaluate", "--checkpoint", junk.string()}).code, kExitPersistence);
  EXPECT_EQ(run({"evaluate", "--checkpoint", (root_ / "none.ckpt").string()}).code, kExitPersistence);

  Rng rng(1);
  PolicyShape shape;
  shape.inputs = 40;
  shape.hidden = {4};
  save_checkpoint(PolicyParams::initialize(shape, rng), root_ / "small.ckpt");
  const auto r = run({"evaluate", "--checkpoint", (root_ / "small.ckpt").string()});
  EXPECT_EQ(r.code, kExitPersistence);
  EXPECT_NE(r.err.find("40-4-5"), std::string::npos) << r.err;

  save_checkpoint(PolicyParams::initialize(PolicyShape{}, rng), root_ / "ok.ckpt");
  EXPECT_EQ(run({"evaluate", "--checkpoint", (root_ / "ok.ckpt").string(), "--setting", "lane-x"}).code,
            kExitInput);
}

TEST_F(CliTest, AnalyzeAndRender)
{
  const auto dir = root_ / "run";
  ASSERT_EQ(run({"train", "--config", config().string(), "--out", dir.string(), "--quiet"}).code, kExitOk);
  const auto a = run({"analyze", "--run", dir.string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.out.find("mean_reward_collided"), std::string::npos);
  EXPECT_NE(a.out.find("difference_free_minus_collided"), std::string::npos);
  std::ifstream csv(dir / "landscape_lord_text.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "front_gap_m,speed_diff_mps,reward,collided");
  EXPECT_TRUE(fs::exists(dir / "landscape_lord_text_summary.txt"));
  EXPECT_EQ(run({"analyze", "--run", dir.string(), "--reward", "grad"}).code, kExitOk);
  EXPECT_EQ(run({"analyze", "--run", dir.string(), "--reward", "lord_video"}).code, kExitInput);

  const auto frames = root_ / "frames";
  const auto r = run({"render", "--run", dir.string(), "--episode", "0", "--out", frames.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(frames / "step_000.png"));
  EXPECT_TRUE(fs::exists(frames / "step_001.png"));
  EXPECT_TRUE(read_png((frames / "step_000.png").string()).has_standard_shape());
  EXPECT_TRUE(fs::exists(frames / "text.txt"));
  EXPECT_EQ(run({"render", "--run", dir.string(), "--episode", "9999"}).code, kExitInput);
}

TEST_F(CliTest, AnalyzeWithoutLogsIsAnInputError)
{
  const auto dir = root_ / "quiet";
  const auto cfg = write("nolog.ini",
                         "[env]\nlane_count = 3\nvehicles_density = 1\nduration = 8\n[reward]\nkind = grad\n"
                         "[ppo]\nrollout_length = 64\ntotal_env_steps = 64\nhidden_layers = [8]\n"
                         "[run]\nlog_every_episodes = 0\n");
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--out", dir.string(), "--quiet"}).code, kExitOk);
  EXPECT_EQ(run({"analyze", "--run", dir.string()}).code, kExitInput);
}

TEST_F(CliTest, EmbedProbeReference)
{
  const auto goal = write("goal.txt", "A collision is happening.\n");
  const auto r = run({"embed-probe", "--modality", "text", "--payload", goal.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("similarity: 1.000000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("reward: 0.000000"), std::string::npos) << r.out;

  write_png(goal_exemplar_frame(GoalPolarity::Opposite), (root_ / "crash.png").string());
  write_png(goal_exemplar_frame(GoalPolarity::Target), (root_ / "cruise.png").string());
  std::ostringstream o1, o2, e;
  const auto crash = cli::cmd_embed_probe({"image", (root_ / "crash.png").string(), "opposite", ""}, {o1, e});
  const auto cruise = cli::cmd_embed_probe({"image", (root_ / "cruise.png").string(), "opposite", ""}, {o2, e});
  EXPECT_NE(crash.reward, cruise.reward);
  EXPECT_LT(crash.reward, cruise.reward);

  fs::create_directories(root_ / "clip");
  for (int i = 0; i < 3; ++i) {
    write_png(goal_exemplar_frame(GoalPolarity::Target), (root_ / "clip" / ("f" + std::to_string(i) + ".png")).string());
  }
  EXPECT_EQ(run({"embed-probe", "--modality", "video", "--payload", (root_ / "clip").string(), "--polarity", "target"}).code,
            kExitOk);

  EXPECT_EQ(run({"embed-probe", "--modality", "smell", "--payload", goal.string()}).code, kExitUsage);
  EXPECT_EQ(run({"embed-probe", "--modality", "text", "--payload", goal.string(), "--polarity", "sideways"}).code,
            kExitUsage);
  EXPECT_EQ(run({"embed-probe", "--modality", "text", "--payload", (root_ / "none.txt").string()}).code, kExitInput);
}

TEST_F(CliTest, EmbedProbeRemote)
{
  mock::EmbedService svc;
  ::setenv(kEndpointEnvVar, svc.endpoint().c_str(), 1);
  const auto goal = write("goal.txt", "A collision is happening.");
  const auto r = run({"embed-probe", "--modality", "text", "--payload", goal.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("remote-text:mock"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("similarity: 1.000000"), std::string::npos) << r.out;

  ::setenv(kEndpointEnvVar, mock::dead_endpoint().c_str(), 1);
  EXPECT_EQ(run({"embed-probe", "--modality", "text", "--payload", goal.string()}).code, kExitAvailability);
  ::unsetenv(kEndpointEnvVar);
}
