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

#ifndef OPPDRIVE__GAE_HPP_
#define OPPDRIVE__GAE_HPP_

#include "oppdrive/errors.hpp"
#include "oppdrive/vehicle.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace oppdrive
{

struct Transition
{
  std::vector<double> state;  // flattened KinematicsObs
  MetaAction action = MetaAction::Idle;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

/// Consecutive transitions from one environment plus V(s_T) of the state
/// following the last one.
struct RolloutBuffer
{
  std::vector<Transition> transitions;
  double bootstrap_value = 0.0;
};

struct GaeResult
{
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// delta_t = r_t + gamma v_{t+1} (1 - done_t) - v_t,
/// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}.
inline GaeResult compute_gae(
  std::span<const double> rewards, std::span<const double> values, std::span<const std::uint8_t> dones,
  double bootstrap_value, double gamma, double lambda)
{
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw InputError("compute_gae: rewards, values and dones must have equal length");
  }
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_advantage = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_advantage = delta + gamma * lambda * live * next_advantage;
    out.advantages[i] = next_advantage;
    out.returns[i] = next_advantage + values[i];
    next_value = values[i];
  }
  return out;
}

inline GaeResult compute_gae(const RolloutBuffer & buffer, double gamma, double lambda)
{
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  for (const auto & t : buffer.transitions) {
    rewards.push_back(t.reward);
    values.push_back(t.value);
    dones.push_back(t.done ? 1 : 0);
  }
  return compute_gae(rewards, values, dones, buffer.bootstrap_value, gamma, lambda);
}

}  // namespace oppdrive

#endif  // OPPDRIVE__GAE_HPP_
