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

#include "oppdrive/highway.hpp"
#include "oppdrive/reward.hpp"
#include "oppdrive/reward_model.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace oppdrive;

namespace
{

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector{std::move(v)}; }

EmbeddingVector random_vec(Rng & rng, int dim)
{
  EmbeddingVector e{std::vector<double>(dim)};
  for (auto & v : e.values) v = uniform(rng, -1.0, 1.0);
  return e;
}

WorldState cruising(double speed)
{
  EnvConfig cfg;
  cfg.spawn_count = 0;
  auto w = reset(cfg, 0);
  w.vehicles[0].speed = w.vehicles[0].target_speed = speed;
  return w;
}

}  // namespace

TEST(Cosine, Examples)
{
  EXPECT_EQ(cosine_similarity(vec({1, 0}), vec({1, 0})), 1.0);
  EXPECT_EQ(cosine_similarity(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_NEAR(cosine_similarity(vec({1, 1}), vec({1, 0})), 0.70710678, 1e-8);
  EXPECT_THROW(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), InputError);
  EXPECT_THROW(cosine_similarity(vec({0, 0}), vec({1, 0})), InputError);
}

TEST(GoalRewards, Examples)
{
  const auto g = vec({0.6, 0.8});
  EXPECT_NEAR(opposite_goal_reward(g, g), 0.0, 1e-15);
  EXPECT_EQ(opposite_goal_reward(vec({1, 0}), vec({0, 1})), 1.0);
  EXPECT_EQ(opposite_goal_reward(vec({-0.6, -0.8}), g), 2.0);
  EXPECT_NEAR(target_goal_reward(g, g), 1.0, 1e-15);
  EXPECT_EQ(target_goal_reward(vec({1, 0}), vec({0, 1})), 0.0);
}

TEST(GoalRewards, IdentityRangeAndScaleInvariance)
{
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_vec(rng, 16);
    const auto b = random_vec(rng, 16);
    const double lord = opposite_goal_reward(a, b);
    ASSERT_NEAR(lord + target_goal_reward(a, b), 1.0, 1e-12);
    ASSERT_GE(lord, 0.0);
    ASSERT_LE(lord, 2.0);
    auto sa = a;
    auto sb = b;
    const double alpha = std::exp(uniform(rng, -5, 5));
    const double beta = std::exp(uniform(rng, -5, 5));
    for (auto & v : sa.values) v *= alpha;
    for (auto & v : sb.values) v *= beta;
    ASSERT_NEAR(opposite_goal_reward(sa, sb), lord, 1e-9);
  }
}

TEST(KinematicRewards, Examples)
{
  EXPECT_DOUBLE_EQ(grad_reward(20, false), 0.2);
  EXPECT_DOUBLE_EQ(grad_reward(40, false), 1.0);
  EXPECT_DOUBLE_EQ(grad_reward(30, false), 0.6);
  EXPECT_DOUBLE_EQ(grad_reward(10, false), 0.2);
  EXPECT_DOUBLE_EQ(grad_reward(45, false), 1.0);
  EXPECT_EQ(grad_reward(35, true), 0.0);
  EXPECT_EQ(constant_reward(false), 0.2);
  EXPECT_EQ(constant_reward(true), 0.0);
  EXPECT_DOUBLE_EQ(speed_reward(25), 0.2);
  double episode = 0;
  for (int k = 0; k < 30; ++k) episode += constant_reward(false);
  EXPECT_NEAR(episode, 6.0, 1e-12);
}

TEST(CompositeReward, Examples)
{
  const std::vector<std::pair<double, double>> one{{0.5, 1.0}};
  EXPECT_EQ(composite_reward(one), 0.5);
  const std::vector<std::pair<double, double>> two{{0.9, 1.0}, {0.4, 1.0}};
  EXPECT_NEAR(composite_reward(two), 1.3, 1e-15);
  const std::vector<std::pair<double, double>> zero{{0.9, 0.0}, {0.4, 0.0}};
  EXPECT_EQ(composite_reward(zero), 0.0);
}

TEST(TextReward, CollisionSentencesScoreBelowAllClear)
{
  const std::string goal = "A collision is happening.";
  const auto g = embed_text_ref(goal);
  const std::string clear = no_collision_sentence();
  const double clear_reward = opposite_goal_reward(embed_text_ref(clear), g);
  EXPECT_NEAR(clear_reward, 1.0 - oracle::sparse_cosine(clear, goal), 1e-9);
  double previous = -1.0;
  for (double ttc : {1.0, 2.0, 3.0, 4.0}) {
    const auto s = same_lane_sentence(ttc);
    const double r = opposite_goal_reward(embed_text_ref(s), g);
    EXPECT_NEAR(r, 1.0 - oracle::sparse_cosine(s, goal), 1e-9);
    EXPECT_LT(r, clear_reward);
    EXPECT_GE(r, previous - 1e-12);
    previous = r;
  }
}

TEST(RewardSpec, NamesAndValidation)
{
  EXPECT_EQ(RewardSpec::opposite(Modality::Text).name(), "lord_text");
  EXPECT_EQ(RewardSpec::target(Modality::Video).name(), "target_video");
  EXPECT_EQ(RewardSpec::grad().name(), "grad");
  EXPECT_EQ(RewardSpec::composite({{RewardSpec::opposite(Modality::Image), 1.0}, {RewardSpec::speed(), 1.0}}).name(),
            "composite+lord_image+speed");
  auto bad = RewardSpec::opposite(Modality::Text);
  bad.goal.polarity = GoalPolarity::Target;
  EXPECT_THROW(bad.validate(), ConfigError);
  auto empty_goal = RewardSpec::target(Modality::Text);
  empty_goal.goal.goal_text.clear();
  EXPECT_THROW(empty_goal.validate(), ConfigError);
  EXPECT_THROW(RewardSpec::composite({}).validate(), ConfigError);
  EXPECT_THROW(RewardSpec::composite({{RewardSpec::grad(), NAN}}).validate(), ConfigError);
}

TEST(RewardSpec, ComponentListRoundTrip)
{
  const auto parts = parse_reward_components("lord_opposite/image*1.0, speed * 0.5,constant");
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].first.kind, RewardKind::OppositeGoal);
  EXPECT_EQ(parts[0].first.goal.modality, Modality::Image);
  EXPECT_EQ(parts[1].second, 0.5);
  EXPECT_EQ(parts[2].first.kind, RewardKind::Constant);
  const auto again = parse_reward_components(format_reward_components(parts));
  ASSERT_EQ(again.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(again[i].first.name(), parts[i].first.name());
    EXPECT_EQ(again[i].second, parts[i].second);
  }
  EXPECT_THROW(parse_reward_components("lord_opposite/smell"), ConfigError);
  EXPECT_THROW(parse_reward_components("composite"), ConfigError);
  EXPECT_THROW(parse_reward_components("grad*lots"), ConfigError);
}

TEST(RewardModel, KinematicModelsFollowTheFormulas)
{
  const auto factory = reference_embedders();
  auto grad = make_reward_model(RewardSpec::grad(), factory);
  auto constant = make_reward_model(RewardSpec::constant(), factory);
  EXPECT_EQ(grad->name(), "grad");
  for (double v : {15.0, 20.0, 27.5, 40.0}) {
    const auto w = cruising(v);
    EXPECT_DOUBLE_EQ(grad->evaluate(w, false), grad_reward(v, false));
    EXPECT_EQ(grad->evaluate(w, true), 0.0);
    EXPECT_EQ(constant->evaluate(w, false), 0.2);
  }
}

TEST(RewardModel, TextModelUsesTtcSentences)
{
  auto model = make_reward_model(RewardSpec::opposite(Modality::Text), reference_embedders());
  auto w = cruising(30.0);
  model->begin_episode(w);
  const double clear = model->evaluate(w, false);
  EXPECT_NEAR(clear, 1.0 - oracle::sparse_cosine(no_collision_sentence(), "A collision is happening."), 1e-9);

  VehicleState npc = w.ego();
  npc.id = 1;
  npc.is_ego = false;
  npc.x += 45.0;
  npc.speed = npc.target_speed = 20.0;
  w.vehicles.push_back(npc);
  const double threat = model->evaluate(w, false);
  EXPECT_NEAR(threat,
              1.0 - oracle::sparse_cosine("A collision will be happening in 4.0s.", "A collision is happening."),
              1e-9);
  EXPECT_LT(threat, clear);
}

TEST(RewardModel, VisualModelsScoreCrashBelowCruise)
{
  for (auto m : {Modality::Image, Modality::Video}) {
    auto model = make_reward_model(RewardSpec::opposite(m), reference_embedders());
    const auto crash = goal_exemplar_world(GoalPolarity::Opposite);
    const auto cruise = goal_exemplar_world(GoalPolarity::Target);
    model->begin_episode(crash);
    const double r_crash = model->evaluate(crash, true);
    model->begin_episode(cruise);
    const double r_cruise = model->evaluate(cruise, false);
    EXPECT_NEAR(r_crash, 0.0, 1e-12);
    EXPECT_GT(r_cruise, r_crash);
  }
}

TEST(RewardModel, CompositeSumsItsParts)
{
  const auto spec =
    RewardSpec::composite({{RewardSpec::opposite(Modality::Text), 1.0}, {RewardSpec::speed(), 2.0}});
  auto model = make_reward_model(spec, reference_embedders());
  auto text = make_reward_model(RewardSpec::opposite(Modality::Text), reference_embedders());
  const auto w = cruising(30.0);
  model->begin_episode(w);
  text->begin_episode(w);
  EXPECT_NEAR(model->evaluate(w, false), text->evaluate(w, false) + 2.0 * speed_reward(30.0), 1e-12);
  EXPECT_FALSE(model->wants_substeps());
  const auto video = RewardSpec::composite({{RewardSpec::opposite(Modality::Video), 1.0}});
  EXPECT_TRUE(make_reward_model(video, reference_embedders())->wants_substeps());
}
