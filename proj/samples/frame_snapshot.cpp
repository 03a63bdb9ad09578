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

// Renders one reset world to a PNG and reports the image reward of the frame
// against the crash goal.

#include "oppdrive/frame.hpp"
#include "oppdrive/highway.hpp"
#include "oppdrive/reward.hpp"
#include "oppdrive/embedding.hpp"

#include <cstdio>

int main(int argc, char ** argv)
{
  using namespace oppdrive;
  const char * path = argc > 1 ? argv[1] : "frame.png";

  EnvConfig env;
  const auto world = reset(env, 42);
  const auto frame = render_frame(world);
  write_png(frame, path);

  auto embedder = make_reference_embedder(Modality::Image);
  const auto goal = embed_goal(*embedder, GoalSpec::defaults(Modality::Image, GoalPolarity::Opposite));
  const auto obs = embedder->embed(frame);
  std::printf("wrote %s\nimage reward vs crash goal: %.4f\n", path, opposite_goal_reward(obs, goal));
  return 0;
}
