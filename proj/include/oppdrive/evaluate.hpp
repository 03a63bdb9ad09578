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

#ifndef OPPDRIVE__EVALUATE_HPP_
#define OPPDRIVE__EVALUATE_HPP_

#include "oppdrive/env_config.hpp"
#include "oppdrive/episode.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/reward.hpp"
#include "oppdrive/reward_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace oppdrive
{

/// Pinned evaluation seeds (17 episodes per setting).
inline const std::vector<std::uint64_t> & default_eval_seeds()
{
  static const std::vector<std::uint64_t> seeds{
    5838, 2421, 7294, 9650, 4176, 6382, 8765, 1348, 4213,
    2572, 5678, 8587, 512, 7523, 6321, 5214, 31};
  return seeds;
}

struct EvalSetting
{
  std::string name;
  EnvConfig config;
};

/// "lane-<n>-density-<d>" -> 30-step testing configuration.
inline EvalSetting parse_setting(const std::string & name)
{
  static const std::regex pattern(R"(lane-(\d+)-density-(\d+(?:\.\d+)?))");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) {
    throw InputError("unknown setting '" + name + "' (expected lane-<n>-density-<d>)");
  }
  EvalSetting s{name, testing_config(static_cast<int>(parse_integer("lane", m[1].str())),
                                     parse_real("density", m[2].str()))};
  s.config.validate();
  return s;
}

inline std::string setting_name(const EnvConfig & cfg)
{
  std::ostringstream os;
  os << "lane-" << cfg.lane_count << "-density-" << format_real(cfg.vehicles_density);
  return os.str();
}

inline constexpr const char * kGradRewardName = "grad";

struct SeedResult
{
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;
  double traveled_distance = 0.0;
  double reward_sum = 0.0;  // sum of grad rewards
};

struct EvalReport
{
  std::string setting;
  std::vector<std::uint64_t> seeds;
  double success_rate = 0.0;  // percent
  double mean_traveled_distance = 0.0;
  double mean_rewards = 0.0;
  std::vector<SeedResult> rows;
};

/// Success: `duration` collision-free steps.
inline bool episode_succeeded(const EpisodeLog & log, int duration)
{
  return !log.collided() && log.steps() >= duration;
}

inline EvalReport summarize(const std::string & setting, int duration, const std::vector<EpisodeLog> & logs)
{
  EvalReport report;
  report.setting = setting;
  int successes = 0;
  for (const auto & log : logs) {
    SeedResult row;
    row.seed = log.seed;
    row.success = episode_succeeded(log, duration);
    row.steps = log.steps();
    row.traveled_distance = log.traveled_distance();
    row.reward_sum = log.reward_sum(kGradRewardName);
    successes += row.success ? 1 : 0;
    report.mean_traveled_distance += row.traveled_distance;
    report.mean_rewards += row.reward_sum;
    report.seeds.push_back(log.seed);
    report.rows.push_back(row);
  }
  if (!logs.empty()) {
    const double n = static_cast<double>(logs.size());
    report.success_rate = 100.0 * successes / n;
    report.mean_traveled_distance /= n;
    report.mean_rewards /= n;
  }
  return report;
}

struct EvalOptions
{
  int workers = 1;
  /// Extra reward specs logged next to grad (never used for control).
  std::vector<RewardSpec> logged_rewards;
  EmbedderFactory embedders = reference_embedders();
};

/// Policy rng stream for an evaluation episode.
inline Rng eval_policy_rng(std::uint64_t seed) { return Rng(mix_seed(seed, 0x65766131ULL)); }

inline EpisodeLog run_seeded_episode(
  const EnvConfig & config, std::uint64_t seed, const Policy & policy,
  const std::vector<RewardSpec> & specs, const EmbedderFactory & embedders,
  const StepObserver & observer = {})
{
  std::vector<std::unique_ptr<RewardModel>> owned;
  std::vector<RewardModel *> models;
  for (const auto & s : specs) {
    owned.push_back(make_reward_model(s, embedders));
    models.push_back(owned.back().get());
  }
  Rng rng = eval_policy_rng(seed);
  auto log = run_episode(reset(config, seed), policy, models, rng, observer);
  log.seed = seed;
  return log;
}

/// Run one episode per seed; episodes are spread over worker threads and
/// collected in seed order, so the result does not depend on `workers`.
inline std::vector<EpisodeLog> run_episodes(
  const Policy & policy, const EnvConfig & config, const std::vector<std::uint64_t> & seeds,
  const EvalOptions & options = {})
{
  std::vector<RewardSpec> specs{RewardSpec::grad()};
  specs.insert(specs.end(), options.logged_rewards.begin(), options.logged_rewards.end());
  std::vector<EpisodeLog> logs(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        logs[i] = run_seeded_episode(config, seeds[i], policy, specs, options.embedders);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(options.workers, static_cast<int>(seeds.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto & t : pool) t.join();
  }
  for (auto & e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return logs;
}

inline EvalReport evaluate(
  const Policy & policy, const EvalSetting & setting,
  const std::vector<std::uint64_t> & seeds = default_eval_seeds(), const EvalOptions & options = {},
  std::vector<EpisodeLog> * logs_out = nullptr)
{
  auto logs = run_episodes(policy, setting.config, seeds, options);
  auto report = summarize(setting.name, setting.config.duration, logs);
  if (logs_out != nullptr) *logs_out = std::move(logs);
  return report;
}

// ---------------------------------------------------------------------------
// Report output

inline std::string format_fixed(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline void write_report_csv(const EvalReport & r, std::ostream & out)
{
  out << "seed,success,steps,traveled_distance_m,rewards\n";
  for (const auto & row : r.rows) {
    out << row.seed << ',' << (row.success ? 1 : 0) << ',' << row.steps << ','
        << format_real(row.traveled_distance) << ',' << format_real(row.reward_sum) << '\n';
  }
  out << "mean," << format_real(r.success_rate / 100.0) << ",," << format_real(r.mean_traveled_distance)
      << ',' << format_real(r.mean_rewards) << '\n';
}

/// Method rows, one SR/TD/RE column group per setting.
inline std::string format_report_table(
  const std::vector<std::pair<std::string, std::vector<EvalReport>>> & methods)
{
  if (methods.empty()) return {};
  const auto & settings = methods.front().second;
  std::size_t name_w = 6;
  for (const auto & m : methods) name_w = std::max(name_w, m.first.size());
  constexpr int kCell = 8;
  const int group_w = 3 * kCell + 2;
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_w)) << "Method";
  for (const auto & s : settings) os << " | " << std::setw(group_w) << s.setting;
  os << '\n' << std::setw(static_cast<int>(name_w)) << "";
  for (std::size_t i = 0; i < settings.size(); ++i) {
    os << " | " << std::right << std::setw(kCell) << "SR" << ' ' << std::setw(kCell) << "TD" << ' '
       << std::setw(kCell) << "RE" << std::left;
  }
  os << '\n';
  for (const auto & [name, reports] : methods) {
    os << std::left << std::setw(static_cast<int>(name_w)) << name;
    for (const auto & r : reports) {
      os << " | " << std::right << std::setw(kCell) << format_fixed(r.success_rate, 2) << ' '
         << std::setw(kCell) << format_fixed(r.mean_traveled_distance, 2) << ' '
         << std::setw(kCell) << format_fixed(r.mean_rewards, 2) << std::left;
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Reward landscape

struct LandscapeRow
{
  double front_gap = 0.0;
  double speed_diff = 0.0;
  double reward = 0.0;
  bool collided = false;
};

/// One row per logged step with a front vehicle.
inline std::vector<LandscapeRow> reward_landscape(
  const std::vector<EpisodeLog> & logs, const std::string & reward_name)
{
  std::vector<LandscapeRow> rows;
  for (const auto & log : logs) {
    const int col = log.reward_column(reward_name);
    if (col < 0) {
      throw InputError("reward '" + reward_name + "' is not logged");
    }
    for (const auto & r : log.records) {
      if (!std::isfinite(r.front_gap)) continue;
      rows.push_back({r.front_gap, r.speed_diff, r.rewards[col], r.collided});
    }
  }
  return rows;
}

inline void write_landscape_csv(const std::vector<LandscapeRow> & rows, std::ostream & out)
{
  out << "front_gap_m,speed_diff_mps,reward,collided\n";
  for (const auto & r : rows) {
    out << format_real(r.front_gap) << ',' << format_real(r.speed_diff) << ','
        << format_real(r.reward) << ',' << (r.collided ? 1 : 0) << '\n';
  }
}

struct LandscapeSummary
{
  std::size_t collided_rows = 0;
  std::size_t free_rows = 0;
  double mean_collided = std::numeric_limits<double>::quiet_NaN();
  double mean_free = std::numeric_limits<double>::quiet_NaN();
  double difference() const { return mean_free - mean_collided; }
};

inline LandscapeSummary summarize_landscape(const std::vector<LandscapeRow> & rows)
{
  LandscapeSummary s;
  double sc = 0.0;
  double sf = 0.0;
  for (const auto & r : rows) {
    if (r.collided) {
      sc += r.reward;
      ++s.collided_rows;
    } else {
      sf += r.reward;
      ++s.free_rows;
    }
  }
  if (s.collided_rows > 0) s.mean_collided = sc / static_cast<double>(s.collided_rows);
  if (s.free_rows > 0) s.mean_free = sf / static_cast<double>(s.free_rows);
  return s;
}

inline std::string format_landscape_summary(const std::string & reward_name, const LandscapeSummary & s)
{
  std::ostringstream os;
  os << "reward: " << reward_name << '\n'
     << "collided_rows: " << s.collided_rows << '\n'
     << "collision_free_rows: " << s.free_rows << '\n'
     << "mean_reward_collided: " << format_real(s.mean_collided) << '\n'
     << "mean_reward_collision_free: " << format_real(s.mean_free) << '\n'
     << "difference_free_minus_collided: " << format_real(s.difference()) << '\n';
  return os.str();
}

}  // namespace oppdrive

#endif  // OPPDRIVE__EVALUATE_HPP_
