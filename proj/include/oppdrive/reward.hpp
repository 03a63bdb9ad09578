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

#ifndef OPPDRIVE__REWARD_HPP_
#define OPPDRIVE__REWARD_HPP_

#include "oppdrive/embedding.hpp"
#include "oppdrive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>

namespace oppdrive
{

/// (a . b) / (|a| |b|), clamped to [-1, 1] against rounding.
inline double cosine_similarity(const EmbeddingVector & a, const EmbeddingVector & b)
{
  if (a.dim() != b.dim()) {
    throw InputError(
      "cosine_similarity: dim mismatch " + std::to_string(a.dim()) + " vs " +
      std::to_string(b.dim()));
  }
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ab += a.values[i] * b.values[i];
    aa += a.values[i] * a.values[i];
    bb += b.values[i] * b.values[i];
  }
  if (!(aa > 0.0) || !(bb > 0.0)) {
    throw InputError("cosine_similarity: zero-norm embedding");
  }
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

/// Reward for staying away from an undesired goal: 1 - cos(obs, goal), in [0, 2].
inline double opposite_goal_reward(const EmbeddingVector & obs, const EmbeddingVector & goal)
{
  return 1.0 - cosine_similarity(obs, goal);
}

/// Reward for approaching a desired goal: cos(obs, goal).
inline double target_goal_reward(const EmbeddingVector & obs, const EmbeddingVector & goal)
{
  return cosine_similarity(obs, goal);
}

inline constexpr double kSurvivalReward = 0.2;
inline constexpr double kSpeedRewardMax = 0.8;
inline constexpr double kSpeedRewardLow = 20.0;   // m/s
inline constexpr double kSpeedRewardHigh = 40.0;  // m/s

/// Speed linearly mapped from [20, 40] m/s to [0, 0.8], clamped.
inline double speed_reward(double ego_speed)
{
  const double t = (ego_speed - kSpeedRewardLow) / (kSpeedRewardHigh - kSpeedRewardLow);
  return kSpeedRewardMax * std::clamp(t, 0.0, 1.0);
}

/// Survival constant plus speed term; zero on the crash step.
inline double grad_reward(double ego_speed, bool crashed)
{
  return crashed ? 0.0 : kSurvivalReward + speed_reward(ego_speed);
}

inline double constant_reward(bool crashed) { return crashed ? 0.0 : kSurvivalReward; }

/// Sum of weight * value.
inline double composite_reward(std::span<const std::pair<double, double>> value_weight)
{
  double total = 0.0;
  for (const auto & [value, weight] : value_weight) {
    total += weight * value;
  }
  return total;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__REWARD_HPP_
