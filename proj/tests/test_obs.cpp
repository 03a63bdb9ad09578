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

#include "oppdrive/frame.hpp"
#include "oppdrive/highway.hpp"
#include "oppdrive/kinematics_obs.hpp"
#include "oppdrive/text_obs.hpp"
#include "oppdrive/ttc.hpp"
#include "oppdrive/video.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace oppdrive;

namespace
{

WorldState ego_only(double speed = 30.0, int lane = 1, int observed = 33)
{
  EnvConfig cfg;
  cfg.spawn_count = 0;
  cfg.observed_vehicles = observed;
  auto w = reset(cfg, 0);
  auto & ego = w.vehicles[0];
  ego.lane_index = ego.target_lane = lane;
  ego.y = w.lane_center(lane);
  ego.x = 100.0;
  ego.speed = ego.target_speed = speed;
  return w;
}

void add_npc(WorldState & w, double dx, int lane, double speed, bool crashed = false)
{
  VehicleState v;
  v.id = static_cast<int>(w.vehicles.size());
  v.x = w.ego().x + dx;
  v.lane_index = v.target_lane = lane;
  v.y = w.lane_center(lane);
  v.speed = v.target_speed = speed;
  v.crashed = crashed;
  w.vehicles.push_back(v);
}

int count_color(const FrameImage & f, Rgb c)
{
  int n = 0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) n += f.pixel(x, y) == c;
  }
  return n;
}

FrameImage solid(std::uint8_t value)
{
  FrameImage f;
  std::fill(f.pixels.begin(), f.pixels.end(), value);
  return f;
}

}  // namespace

// --- kinematics -----------------------------------------------------------

TEST(Kinematics, EgoOnlyIsPadded)
{
  const auto obs = build_kinematics(ego_only());
  ASSERT_EQ(obs.rows, 33);
  ASSERT_EQ(obs.values.size(), 33u * 8u);
  EXPECT_EQ(obs.at(0, 0), 1.0);
  EXPECT_EQ(obs.at(0, 1), 0.0);
  EXPECT_EQ(obs.at(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(obs.at(0, 3), 30.0 / 40.0);
  EXPECT_EQ(obs.at(0, 5), 1.0);
  for (int r = 1; r < obs.rows; ++r) {
    for (double x : obs.row(r)) ASSERT_EQ(x, 0.0);
  }
}

TEST(Kinematics, RelativePositionScaling)
{
  auto w = ego_only();
  add_npc(w, 50.0, 1, 20.0);
  add_npc(w, -30.0, 2, 25.0);
  add_npc(w, 400.0, 0, 20.0);
  const auto obs = build_kinematics(w);
  // Rows follow distance: the rear npc (30 m) precedes the front one (50 m).
  EXPECT_DOUBLE_EQ(obs.at(1, 1), -0.3);
  EXPECT_DOUBLE_EQ(obs.at(1, 2), 0.04);
  EXPECT_DOUBLE_EQ(obs.at(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(obs.at(2, 2), 0.0);
  EXPECT_DOUBLE_EQ(obs.at(2, 3), 0.5);
  EXPECT_EQ(obs.at(3, 1), 1.0);  // clipped
  EXPECT_EQ(obs.at(3, 0), 1.0);
  EXPECT_EQ(obs.at(4, 0), 0.0);
}

TEST(Kinematics, KeepsTheNearestVehicles)
{
  auto w = ego_only();
  for (int i = 0; i < 40; ++i) {
    add_npc(w, (i % 2 ? -1.0 : 1.0) * (10.0 + 7.0 * i), i % 4, 20.0);
  }
  const auto obs = build_kinematics(w);
  ASSERT_EQ(obs.rows, 33);
  std::vector<double> seen;
  for (int r = 1; r < 33; ++r) {
    ASSERT_EQ(obs.at(r, 0), 1.0);
    if (std::abs(obs.at(r, 1)) < 1.0) seen.push_back(std::hypot(obs.at(r, 1), obs.at(r, 2)));
  }
  EXPECT_EQ(seen.size(), 13u);
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  // npc i sits at 10 + 7 i metres; the 32 nearest are i = 0..31.
  EXPECT_LE(std::abs(obs.at(32, 1)), (10.0 + 7.0 * 31) / 100.0 + 1e-12);
  EXPECT_EQ(obs.at(32, 1), -1.0);  // i = 31, 227 m behind, clipped
}

TEST(Kinematics, HeadingFeatures)
{
  auto w = ego_only();
  w.vehicles[0].heading = std::numbers::pi / 2;
  const auto obs = build_kinematics(w);
  EXPECT_NEAR(obs.at(0, 3), 0.0, 1e-12);
  EXPECT_NEAR(obs.at(0, 4), 0.75, 1e-12);
  EXPECT_NEAR(obs.at(0, 6), 1.0, 1e-12);
  EXPECT_NEAR(obs.at(0, 7), 0.5, 1e-12);
}

// --- frames ---------------------------------------------------------------

TEST(Frame, DeterministicAndStandardShape)
{
  EnvConfig cfg;
  const auto a = reset(cfg, 11);
  const auto f1 = render_frame(a);
  EXPECT_TRUE(f1.has_standard_shape());
  EXPECT_EQ(f1, render_frame(reset(cfg, 11)));
}

TEST(Frame, EgoGlyphAreaAndCentre)
{
  const auto f = render_frame(ego_only());
  const int white = count_color(f, palette::kEgo);
  EXPECT_NEAR(white, 1000, 100);
  double sx = 0, sy = 0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      if (f.pixel(x, y) == palette::kEgo) {
        sx += x;
        sy += y;
      }
    }
  }
  EXPECT_NEAR(sx / white, 111.5, 1.0);
  EXPECT_NEAR(sy / white, 111.5, 1.0);
  EXPECT_EQ(count_color(f, palette::kNpc), 0);
  EXPECT_GT(count_color(f, palette::kLaneLine), 0);
}

TEST(Frame, EgoCentreHoldsOnRandomWorlds)
{
  EnvConfig cfg;
  for (int seed = 0; seed < 20; ++seed) {
    auto w = reset(cfg, seed);
    for (int k = 0; k < 3 && !w.ended; ++k) advance(w, MetaAction::LaneLeft);
    const auto f = render_frame(w);
    EXPECT_EQ(f.pixel(112, 112), palette::kEgo) << seed;
  }
}

TEST(Frame, ColorSemantics)
{
  auto w = ego_only();
  add_npc(w, 8.0, 1, 20.0);
  add_npc(w, -8.0, 1, 20.0, true);
  const auto f = render_frame(w);
  EXPECT_GT(count_color(f, palette::kNpc), 800);
  EXPECT_GT(count_color(f, palette::kCrashed), 800);
}

TEST(Frame, PngRoundTrip)
{
  EnvConfig cfg;
  const auto f = render_frame(reset(cfg, 5));
  const auto bytes = encode_png(f);
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(bytes[1], 'P');
  EXPECT_EQ(decode_png(bytes), f);
  EXPECT_THROW(decode_png({1, 2, 3}), InputError);
}

// --- video ----------------------------------------------------------------

TEST(Video, PaddingAndSliding)
{
  FrameHistory h;
  auto clip = stack_video(h, solid(1));
  ASSERT_EQ(clip.frames.size(), kClipLength);
  for (const auto & f : clip.frames) EXPECT_EQ(f, solid(1));

  for (int i = 2; i <= 30; ++i) clip = stack_video(h, solid(static_cast<std::uint8_t>(i)));
  for (std::size_t i = 0; i < kClipLength; ++i) {
    EXPECT_EQ(clip.frames[i].pixels[0], i + 1);
  }
  clip = stack_video(h, solid(31));
  EXPECT_EQ(clip.frames.front().pixels[0], 2);
  EXPECT_EQ(clip.frames.back().pixels[0], 31);
  EXPECT_EQ(h.size(), kClipLength);

  FrameHistory partial;
  partial.push(solid(7));
  partial.push(solid(8));
  const auto p = partial.clip();
  EXPECT_EQ(p.frames[27].pixels[0], 7);
  EXPECT_EQ(p.frames[28].pixels[0], 7);
  EXPECT_EQ(p.frames[29].pixels[0], 8);
}

// --- ttc ------------------------------------------------------------------

TEST(Ttc, FrontVehicleArithmetic)
{
  auto w = ego_only(30.0);
  add_npc(w, 45.0, 1, 20.0);
  const auto r = compute_ttc(w);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(r.entries[0].ttc, 4.0);
  EXPECT_DOUBLE_EQ(r.entries[0].gap, 40.0);
  EXPECT_DOUBLE_EQ(r.entries[0].speed_diff, -10.0);
  EXPECT_EQ(r.entries[0].relation, LaneRelation::Same);
}

TEST(Ttc, NonClosingIsInfinite)
{
  for (double v : {30.0, 35.0}) {
    auto w = ego_only(30.0);
    add_npc(w, 45.0, 1, v);
    EXPECT_TRUE(std::isinf(compute_ttc(w).entries.at(0).ttc));
  }
  auto rear_same = ego_only(30.0);
  add_npc(rear_same, -20.0, 1, 40.0);
  EXPECT_TRUE(std::isinf(compute_ttc(rear_same).entries.at(0).ttc));
}

TEST(Ttc, AttentionRadiusAndLaneFilter)
{
  auto w = ego_only(30.0);
  add_npc(w, 160.0, 1, 10.0);
  add_npc(w, 140.0, 1, 10.0);
  add_npc(w, 20.0, 3, 10.0);  // two lanes away
  const auto r = compute_ttc(w);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].vehicle_id, 2);
}

TEST(Ttc, AdjacentRearThreatAndGapFloor)
{
  auto w = ego_only(25.0);
  add_npc(w, -15.0, 0, 35.0);
  add_npc(w, 3.0, 2, 20.0);
  const auto r = compute_ttc(w);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].relation, LaneRelation::Left);
  EXPECT_DOUBLE_EQ(r.entries[0].ttc, 1.0);
  EXPECT_EQ(r.entries[1].relation, LaneRelation::Right);
  EXPECT_DOUBLE_EQ(r.entries[1].gap, kMinGap);
  EXPECT_DOUBLE_EQ(r.entries[1].ttc, kMinGap / 5.0);
}

TEST(Ttc, ShrinkingGapNeverIncreasesTtc)
{
  double previous = INFINITY;
  for (double dx = 140.0; dx >= 5.0; dx -= 2.5) {
    auto w = ego_only(30.0);
    add_npc(w, dx, 1, 22.0);
    const double ttc = compute_ttc(w).entries.at(0).ttc;
    EXPECT_LE(ttc, previous);
    EXPECT_GT(ttc, 0.0);
    previous = ttc;
  }
}

// --- text -----------------------------------------------------------------

TEST(Text, GoldenSentences)
{
  EXPECT_EQ(describe_text({}), "No foreseeable collision in 5s.");
  TtcReport same{{TtcEntry{1, LaneRelation::Same, 4.0, 40.0, -10.0, true}}};
  EXPECT_EQ(describe_text(same), "A collision will be happening in 4.0s.");
  TtcReport left{{TtcEntry{1, LaneRelation::Left, 2.5, 10.0, -4.0, true}}};
  EXPECT_EQ(describe_text(left),
            "No foreseeable collision in 5s. A collision would happen in 2.5s if ego makes a left lane change.");
}

TEST(Text, OrderingAndThreshold)
{
  TtcReport r{{
    TtcEntry{1, LaneRelation::Right, 1.25, 5, -4, true},
    TtcEntry{2, LaneRelation::Same, 4.94, 5, -1, true},
    TtcEntry{3, LaneRelation::Left, 3.0, 5, -1, true},
    TtcEntry{4, LaneRelation::Same, 2.0, 5, -1, true},
    TtcEntry{5, LaneRelation::Left, 0.5, 5, 2, false},
    TtcEntry{6, LaneRelation::Right, 5.0, 5, -1, true},
  }};
  EXPECT_EQ(describe_text(r),
            "A collision will be happening in 2.0s. "
            "A collision would happen in 0.5s if ego makes a left lane change. "
            "A collision would happen in 3.0s if ego makes a left lane change. "
            "A collision would happen in 1.2s if ego makes a right lane change.");
  TtcReport boundary{{TtcEntry{1, LaneRelation::Same, 5.0, 5, -1, true}}};
  EXPECT_EQ(describe_text(boundary), no_collision_sentence());
  TtcReport below{{TtcEntry{1, LaneRelation::Same, 4.99, 5, -1, true}}};
  EXPECT_EQ(describe_text(below), "A collision will be happening in 5.0s.");
}

TEST(Text, ParseRoundTrip)
{
  for (const auto & s : text_grammar_corpus()) {
    // Lane-change sentences only ever follow a same-lane sentence.
    const bool lane_change = s.find("lane change") != std::string::npos;
    const auto text = lane_change ? no_collision_sentence() + " " + s : s;
    EXPECT_NO_THROW(parse_text(text)) << text;
  }
  const std::string text =
    "A collision will be happening in 2.0s. "
    "A collision would happen in 0.5s if ego makes a left lane change. "
    "A collision would happen in 1.2s if ego makes a right lane change.";
  const auto parsed = parse_text(text);
  EXPECT_EQ(parsed.same_lane, 2.0);
  EXPECT_EQ(parsed.left, std::vector<double>{0.5});
  EXPECT_EQ(parsed.right, std::vector<double>{1.2});

  EnvConfig cfg;
  for (int seed = 0; seed < 30; ++seed) {
    auto w = reset(cfg, seed);
    for (int k = 0; k < 5 && !w.ended; ++k) {
      const auto report = compute_ttc(w);
      const auto p = parse_text(describe_text(report));
      std::optional<double> same;
      std::size_t left = 0;
      std::size_t right = 0;
      for (const auto & e : report.entries) {
        if (!(e.ttc < kTtcThreshold)) continue;
        if (e.relation == LaneRelation::Same && e.ahead) same = same ? std::min(*same, e.ttc) : e.ttc;
        left += e.relation == LaneRelation::Left;
        right += e.relation == LaneRelation::Right;
      }
      ASSERT_EQ(p.same_lane.has_value(), same.has_value());
      if (same) EXPECT_NEAR(*p.same_lane, *same, 0.05 + 1e-12);
      EXPECT_EQ(p.left.size(), left);
      EXPECT_EQ(p.right.size(), right);
      advance(w, MetaAction::Faster);
    }
  }
}

TEST(Text, ParserRejectsForeignText)
{
  EXPECT_THROW(parse_text(""), InputError);
  EXPECT_THROW(parse_text("All good."), InputError);
  EXPECT_THROW(parse_text("A collision would happen in 1.0s if ego makes a left lane change."), InputError);
  EXPECT_THROW(parse_text("No foreseeable collision in 5s.  A collision would happen in 1.0s if ego "
                          "makes a left lane change."),
               InputError);
  EXPECT_THROW(parse_text("No foreseeable collision in 5s. No foreseeable collision in 5s."), InputError);
}
