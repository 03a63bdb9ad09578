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

#ifndef OPPDRIVE__KINEMATICS_OBS_HPP_
#define OPPDRIVE__KINEMATICS_OBS_HPP_

#include "oppdrive/highway.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace oppdrive
{

/// V x 8 policy input. Columns: presence, x, y, vx, vy, cos_h, sin_h, heading.
struct KinematicsObs
{
  static constexpr int kFeatures = 8;
  static constexpr double kPositionScale = 100.0;  // m
  static constexpr double kSpeedScale = 40.0;      // m/s

  int rows = 0;
  std::vector<double> values;  // row-major

  double at(int row, int col) const { return values[row * kFeatures + col]; }
  std::span<const double> flat() const { return values; }
  std::span<const double> row(int r) const
  {
    return std::span<const double>(values).subspan(r * kFeatures, kFeatures);
  }
};

inline KinematicsObs build_kinematics(const WorldState & world)
{
  const int rows = world.config.observed_vehicles;
  KinematicsObs obs{rows, std::vector<double>(rows * KinematicsObs::kFeatures, 0.0)};
  const auto & ego = world.ego();

  auto write = [&](int r, const VehicleState & v) {
    auto clip = [](double a) { return std::clamp(a, -1.0, 1.0); };
    double * row = obs.values.data() + r * KinematicsObs::kFeatures;
    row[0] = 1.0;
    row[1] = v.is_ego ? 0.0 : clip((v.x - ego.x) / KinematicsObs::kPositionScale);
    row[2] = v.is_ego ? 0.0 : clip((v.y - ego.y) / KinematicsObs::kPositionScale);
    row[3] = clip(v.speed * std::cos(v.heading) / KinematicsObs::kSpeedScale);
    row[4] = clip(v.speed * std::sin(v.heading) / KinematicsObs::kSpeedScale);
    row[5] = std::cos(v.heading);
    row[6] = std::sin(v.heading);
    row[7] = clip(std::remainder(v.heading, 2.0 * std::numbers::pi) / std::numbers::pi);
  };
  write(0, ego);

  struct Ranked
  {
    double dist2;
    int id;
    const VehicleState * v;
  };
  std::vector<Ranked> others;
  others.reserve(world.vehicles.size());
  for (const auto & v : world.vehicles) {
    if (v.is_ego) {
      continue;
    }
    const double dx = v.x - ego.x;
    const double dy = v.y - ego.y;
    others.push_back({dx * dx + dy * dy, v.id, &v});
  }
  const std::size_t keep = std::min<std::size_t>(others.size(), rows - 1);
  std::partial_sort(others.begin(), others.begin() + keep, others.end(), [](auto & a, auto & b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
  });
  for (std::size_t i = 0; i < keep; ++i) {
    write(static_cast<int>(i) + 1, *others[i].v);
  }
  return obs;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__KINEMATICS_OBS_HPP_
