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

#ifndef OPPDRIVE__EPISODE_HPP_
#define OPPDRIVE__EPISODE_HPP_

#include "oppdrive/config_file.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/highway.hpp"
#include "oppdrive/kinematics_obs.hpp"
#include "oppdrive/policy.hpp"
#include "oppdrive/random.hpp"
#include "oppdrive/reward_model.hpp"
#include "oppdrive/ttc.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace oppdrive
{

/// Decision rule seen by the environment loop. Only the kinematics
/// observation reaches it.
using Policy = std::function<MetaAction(const KinematicsObs &, Rng &)>;

inline Policy constant_policy(MetaAction action)
{
  return [action](const KinematicsObs &, Rng &) { return action; };
}

inline Policy uniform_random_policy()
{
  return [](const KinematicsObs &, Rng & rng) {
    return action_from_index(static_cast<int>(uniform_index(rng, kActionCount)));
  };
}

/// Samples a ~ pi(.|s), as during training.
inline Policy sampling_policy(std::shared_ptr<const PolicyParams> params)
{
  return [params = std::move(params)](const KinematicsObs & obs, Rng & rng) {
    const auto out = policy_forward(*params, obs);
    return action_from_index(sample_action(out.probs, rng).action);
  };
}

struct FrontVehicle
{
  double gap = std::numeric_limits<double>::infinity();  // bumper-to-bumper [m]
  double speed_diff = 0.0;                                // v_front - v_ego [m/s]
};

/// Nearest vehicle ahead on the ego lane; (+inf, 0) when there is none.
inline FrontVehicle front_vehicle(const WorldState & world)
{
  const auto & ego = world.ego();
  FrontVehicle out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto & v : world.vehicles) {
    if (v.is_ego || v.lane_index != ego.lane_index) {
      continue;
    }
    const double dx = v.x - ego.x;
    if (dx >= 0.0 && dx < best) {
      best = dx;
      out.gap = bumper_gap(dx, world.config.vehicle_length);
      out.speed_diff = v.speed - ego.speed;
    }
  }
  return out;
}

struct EpisodeRecord
{
  int step = 0;
  double ego_x = 0.0;
  double ego_speed = 0.0;
  MetaAction action = MetaAction::Idle;
  std::vector<double> rewards;  // aligned with EpisodeLog::reward_names
  double front_gap = std::numeric_limits<double>::infinity();
  double speed_diff = 0.0;
  bool collided = false;

  bool operator==(const EpisodeRecord &) const = default;
};

struct EpisodeLog
{
  std::uint64_t seed = 0;
  double initial_ego_x = 0.0;
  std::vector<std::string> reward_names;
  std::vector<EpisodeRecord> records;
  bool terminated = false;
  bool truncated = false;

  bool operator==(const EpisodeLog &) const = default;

  bool collided() const { return !records.empty() && records.back().collided; }
  int steps() const { return static_cast<int>(records.size()); }

  double traveled_distance() const
  {
    return records.empty() ? 0.0 : records.back().ego_x - initial_ego_x;
  }

  /// Column index of a logged reward, or -1.
  int reward_column(const std::string & name) const
  {
    const auto it = std::find(reward_names.begin(), reward_names.end(), name);
    return it == reward_names.end() ? -1 : static_cast<int>(it - reward_names.begin());
  }

  double reward_sum(const std::string & name) const
  {
    const int col = reward_column(name);
    if (col < 0) {
      throw InputError("episode log has no reward named '" + name + "'");
    }
    double s = 0.0;
    for (const auto & r : records) s += r.rewards[col];
    return s;
  }
};

/// Per-step callback after the transition (trace dumps).
using StepObserver = std::function<void(const WorldState &, const EpisodeRecord &)>;

/// Roll `world` forward until collision or time limit. Rewards from every
/// model are logged; none of them influences the policy.
inline EpisodeLog run_episode(
  WorldState world, const Policy & policy, const std::vector<RewardModel *> & rewards,
  Rng & policy_rng, const StepObserver & observer = {})
{
  EpisodeLog log;
  log.initial_ego_x = world.ego().x;
  for (auto * m : rewards) {
    log.reward_names.push_back(m->name());
    m->begin_episode(world);
  }
  SubstepHook hook;
  if (std::any_of(rewards.begin(), rewards.end(), [](auto * m) { return m->wants_substeps(); })) {
    hook = [&](const WorldState & w) {
      for (auto * m : rewards) m->observe_substep(w);
    };
  }
  while (!world.ended) {
    const auto action = policy(build_kinematics(world), policy_rng);
    const auto flags = advance(world, action, hook);
    EpisodeRecord rec;
    rec.step = world.step_index;
    rec.ego_x = world.ego().x;
    rec.ego_speed = world.ego().speed;
    rec.action = action;
    rec.collided = flags.collided;
    const auto front = front_vehicle(world);
    rec.front_gap = front.gap;
    rec.speed_diff = front.speed_diff;
    for (auto * m : rewards) rec.rewards.push_back(m->evaluate(world, flags.collided));
    if (observer) observer(world, rec);
    log.records.push_back(std::move(rec));
    log.terminated = flags.terminated;
    log.truncated = flags.truncated;
  }
  return log;
}

// ---------------------------------------------------------------------------
// CSV persistence

inline void write_episode_log(const EpisodeLog & log, std::ostream & out)
{
  out << "# seed=" << log.seed << " initial_ego_x=" << format_real(log.initial_ego_x)
      << " terminated=" << log.terminated << " truncated=" << log.truncated << '\n';
  out << "step,ego_x,ego_speed,action,front_gap_m,speed_diff_mps,collided";
  for (const auto & n : log.reward_names) out << ",reward_" << n;
  out << '\n';
  for (const auto & r : log.records) {
    out << r.step << ',' << format_real(r.ego_x) << ',' << format_real(r.ego_speed) << ','
        << to_string(r.action) << ',' << format_real(r.front_gap) << ','
        << format_real(r.speed_diff) << ',' << (r.collided ? 1 : 0);
    for (double v : r.rewards) out << ',' << format_real(v);
    out << '\n';
  }
}

inline void save_episode_log(const EpisodeLog & log, const std::string & path)
{
  std::ofstream out(path);
  write_episode_log(log, out);
  if (!out) {
    throw PersistenceError("cannot write episode log '" + path + "'");
  }
}

inline EpisodeLog read_episode_log(std::istream & in)
{
  auto fail = [](const std::string & m) -> void { throw InputError("episode log: " + m); };
  EpisodeLog log;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) fail("missing header comment");
  {
    std::istringstream ss(line.substr(2));
    std::string kv;
    while (ss >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) fail("bad header field '" + kv + "'");
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      if (key == "seed") log.seed = parse_unsigned(key, value);
      else if (key == "initial_ego_x") log.initial_ego_x = parse_real(key, value);
      else if (key == "terminated") log.terminated = parse_bool(key, value);
      else if (key == "truncated") log.truncated = parse_bool(key, value);
    }
  }
  if (!std::getline(in, line)) fail("missing column header");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  const std::vector<std::string> fixed{"step", "ego_x", "ego_speed", "action", "front_gap_m",
                                       "speed_diff_mps", "collided"};
  if (cols.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), cols.begin())) {
    fail("unexpected columns");
  }
  for (std::size_t i = fixed.size(); i < cols.size(); ++i) {
    if (cols[i].rfind("reward_", 0) != 0) fail("unexpected column '" + cols[i] + "'");
    log.reward_names.push_back(cols[i].substr(7));
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f.size() != cols.size()) fail("row has " + std::to_string(f.size()) + " fields");
    EpisodeRecord r;
    r.step = static_cast<int>(parse_integer("step", f[0]));
    r.ego_x = parse_real("ego_x", f[1]);
    r.ego_speed = parse_real("ego_speed", f[2]);
    r.action = action_from_string(f[3]);
    r.front_gap = parse_real("front_gap_m", f[4]);
    r.speed_diff = parse_real("speed_diff_mps", f[5]);
    r.collided = parse_bool("collided", f[6]);
    for (std::size_t i = fixed.size(); i < f.size(); ++i) r.rewards.push_back(parse_real(cols[i], f[i]));
    log.records.push_back(std::move(r));
  }
  return log;
}

inline EpisodeLog load_episode_log(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open episode log '" + path + "'");
  }
  return read_episode_log(in);
}

}  // namespace oppdrive

#endif  // OPPDRIVE__EPISODE_HPP_
