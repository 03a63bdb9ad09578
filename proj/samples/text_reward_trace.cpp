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

// Drives a random policy on a three-lane road and prints, per step, the text
// observation next to the text and kinematic rewards.

#include "oppdrive/highway.hpp"
#include "oppdrive/reward_model.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char ** argv)
{
  using namespace oppdrive;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;

  EnvConfig env;
  env.lane_count = 3;
  env.vehicles_density = 1.5;
  env.duration = 20;
  auto world = reset(env, seed);

  auto lord = make_reward_model(RewardSpec::opposite(Modality::Text), reference_embedders());
  auto grad = make_reward_model(RewardSpec::grad(), reference_embedders());
  lord->begin_episode(world);
  grad->begin_episode(world);

  Rng rng(seed);
  while (!world.ended) {
    const auto flags = advance(world, action_from_index(static_cast<int>(uniform_index(rng, kActionCount))));
    const double r_lord = lord->evaluate(world, flags.collided);
    const double r_grad = grad->evaluate(world, flags.collided);
    std::printf("%2d  lord_text %.3f  grad %.3f  | %s\n", world.step_index, r_lord, r_grad,
                describe_text(compute_ttc(world)).c_str());
  }
  return 0;
}
