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

#ifndef OPPDRIVE__TRAINER_HPP_
#define OPPDRIVE__TRAINER_HPP_

#include "oppdrive/checkpoint.hpp"
#include "oppdrive/env_config.hpp"
#include "oppdrive/episode.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/frame.hpp"
#include "oppdrive/gae.hpp"
#include "oppdrive/highway.hpp"
#include "oppdrive/kinematics_obs.hpp"
#include "oppdrive/policy.hpp"
#include "oppdrive/ppo.hpp"
#include "oppdrive/random.hpp"
#include "oppdrive/reward_model.hpp"
#include "oppdrive/text_obs.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace oppdrive
{

namespace fs = std::filesystem;

struct TraceOptions
{
  int every_episodes = 0;  // 0 disables tracing
  bool frames = true;
  bool text = true;
};

struct MetricsRow
{
  int update = 0;
  long long env_steps = 0;
  long long episodes = 0;
  double mean_reward = 0.0;
  double mean_episode_len = std::numeric_limits<double>::quiet_NaN();
  double mean_return = std::numeric_limits<double>::quiet_NaN();
  UpdateStats stats;
};

inline constexpr const char * kMetricsHeader =
  "update,env_steps,episodes,mean_reward,mean_episode_len,mean_return,policy_loss,value_loss,entropy,"
  "clip_fraction,approx_kl";

inline std::string format_metrics_row(const MetricsRow & m)
{
  std::string s = std::to_string(m.update) + ',' + std::to_string(m.env_steps) + ',' +
                  std::to_string(m.episodes);
  for (double v : {m.mean_reward, m.mean_episode_len, m.mean_return, m.stats.policy_loss,
                   m.stats.value_loss, m.stats.entropy, m.stats.clip_fraction, m.stats.approx_kl}) {
    s += ',' + format_real(v);
  }
  return s;
}

struct TrainProgress
{
  const MetricsRow & metrics;
  int total_updates;
};

struct TrainOptions
{
  EmbedderFactory embedders = reference_embedders();
  /// Keep the log of every n-th finished episode per worker (0: none).
  int log_every_episodes = 10;
  TraceOptions trace;
  std::function<void(const TrainProgress &)> progress;
};

struct TrainResult
{
  PolicyParams params;
  std::vector<MetricsRow> metrics;
  long long env_steps = 0;
  fs::path final_checkpoint;
};

inline PolicyShape policy_shape_for(const EnvConfig & env, const PpoConfig & ppo)
{
  PolicyShape s;
  s.inputs = env.observed_vehicles * KinematicsObs::kFeatures;
  s.hidden = ppo.hidden_layers;
  return s;
}

/// Seed of the k-th episode run by `worker`.
inline std::uint64_t training_episode_seed(std::uint64_t env_seed, int worker, long long k)
{
  return mix_seed(mix_seed(env_seed, static_cast<std::uint64_t>(worker) + 1), static_cast<std::uint64_t>(k));
}

inline std::string episode_file_name(int worker, long long k)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "episode_w%02d_%06lld.csv", worker, k);
  return buf;
}

namespace detail
{

/// One environment with its reward models; persists across rollouts.
class TrainWorker
{
public:
  TrainWorker(
    int index, const EnvConfig & env, const RewardSpec & spec, const PpoConfig & ppo,
    const TrainOptions & options, const fs::path & run_dir)
  : index_(index), env_(env), options_(options), run_dir_(run_dir), gamma_(ppo.gamma),
    policy_rng_(mix_seed(ppo.seed, 0x1000 + static_cast<std::uint64_t>(index)))
  {
    models_.push_back(make_reward_model(spec, options.embedders));
    if (models_.front()->name() != "grad") {
      models_.push_back(make_reward_model(RewardSpec::grad(), options.embedders));
    }
    for (auto & m : models_) {
      if (m->wants_substeps()) needs_hook_ = true;
    }
    begin_episode();
  }

  struct Finished
  {
    int length;
    double ret;
  };

  /// Collect `steps` transitions with a frozen parameter snapshot.
  RolloutBuffer collect(const PolicyParams & params, int steps, std::vector<Finished> & finished)
  {
    RolloutBuffer buf;
    buf.transitions.reserve(steps);
    SubstepHook hook;
    if (needs_hook_) {
      hook = [this](const WorldState & w) {
        for (auto & m : models_) m->observe_substep(w);
      };
    }
    for (int s = 0; s < steps; ++s) {
      const auto obs = build_kinematics(world_);
      const auto out = policy_forward(params, obs);
      const auto sample = sample_action(out.probs, policy_rng_);
      const auto action = action_from_index(sample.action);
      const auto flags = advance(world_, action, hook);

      std::vector<double> rewards;
      for (auto & m : models_) rewards.push_back(m->evaluate(world_, flags.collided));
      if (!std::isfinite(rewards.front())) {
        throw NumericalError("non-finite reward from '" + models_.front()->name() + "'");
      }

      Transition t;
      t.state = obs.values;
      t.action = action;
      t.log_prob = sample.log_prob;
      t.reward = rewards.front();
      t.value = out.value;
      t.done = world_.ended;
      if (flags.truncated) {
        // Time limits are not part of the state: bootstrap through them.
        t.reward += gamma_ * policy_forward(params, build_kinematics(world_)).value;
      }
      buf.transitions.push_back(std::move(t));

      episode_return_ += rewards.front();
      record_step(action, flags.collided, rewards);
      if (world_.ended) {
        finished.push_back({world_.step_index, episode_return_});
        end_episode();
        begin_episode();
      }
    }
    buf.bootstrap_value = policy_forward(params, build_kinematics(world_)).value;
    return buf;
  }

private:
  bool logging() const
  {
    return options_.log_every_episodes > 0 && episode_ % options_.log_every_episodes == 0;
  }

  bool tracing() const
  {
    return options_.trace.every_episodes > 0 && episode_ % options_.trace.every_episodes == 0;
  }

  void begin_episode()
  {
    const auto seed = training_episode_seed(env_.seed, index_, episode_);
    world_ = reset(env_, seed);
    for (auto & m : models_) m->begin_episode(world_);
    episode_return_ = 0.0;
    log_ = EpisodeLog{};
    log_.seed = seed;
    log_.initial_ego_x = world_.ego().x;
    for (auto & m : models_) log_.reward_names.push_back(m->name());
    if (tracing()) {
      trace_dir_ = run_dir_ / "trace" / fs::path(episode_file_name(index_, episode_)).stem();
      fs::create_directories(trace_dir_);
      trace_step(0);
    }
  }

  void record_step(MetaAction action, bool collided, const std::vector<double> & rewards)
  {
    if (tracing()) trace_step(world_.step_index);
    if (!logging()) return;
    EpisodeRecord rec;
    rec.step = world_.step_index;
    rec.ego_x = world_.ego().x;
    rec.ego_speed = world_.ego().speed;
    rec.action = action;
    rec.rewards = rewards;
    const auto front = front_vehicle(world_);
    rec.front_gap = front.gap;
    rec.speed_diff = front.speed_diff;
    rec.collided = collided;
    log_.records.push_back(std::move(rec));
    log_.terminated = world_.ended && collided;
    log_.truncated = world_.ended && !collided;
  }

  void trace_step(int step)
  {
    char name[32];
    std::snprintf(name, sizeof(name), "step_%03d", step);
    if (options_.trace.frames) write_png(render_frame(world_), (trace_dir_ / (std::string(name) + ".png")).string());
    if (options_.trace.text) {
      std::ofstream out(trace_dir_ / "text.txt", std::ios::app);
      out << step << '\t' << describe_text(compute_ttc(world_)) << '\n';
    }
  }

  void end_episode()
  {
    if (logging()) {
      const auto dir = run_dir_ / "episodes";
      fs::create_directories(dir);
      const auto file = episode_file_name(index_, episode_);
      save_episode_log(log_, (dir / file).string());
      std::ofstream index(dir / "index.csv", std::ios::app);
      std::string actions;
      for (const auto & r : log_.records) {
        if (!actions.empty()) actions += ' ';
        actions += std::to_string(action_index(r.action));
      }
      index << file << ',' << log_.seed << ',' << log_.steps() << ',' << (log_.collided() ? 1 : 0) << ','
            << actions << '\n';
    }
    ++episode_;
  }

  int index_;
  EnvConfig env_;
  const TrainOptions & options_;
  fs::path run_dir_;
  double gamma_;
  Rng policy_rng_;
  std::vector<std::unique_ptr<RewardModel>> models_;
  bool needs_hook_ = false;
  WorldState world_;
  long long episode_ = 0;
  double episode_return_ = 0.0;
  EpisodeLog log_;
  fs::path trace_dir_;
};

inline void write_error_record(const fs::path & run_dir, const std::exception & e, long long env_steps)
{
  nlohmann::json j;
  j["error"] = e.what();
  j["env_steps"] = env_steps;
  std::ofstream out(run_dir / "error.json");
  out << j.dump(2) << '\n';
}

}  // namespace detail

inline constexpr const char * kEpisodeIndexHeader = "file,seed,steps,collided,actions";

/// PPO training loop. Writes metrics.csv, checkpoints/ and episodes/ under
/// `run_dir`; on failure writes error.json and rethrows.
inline TrainResult train(
  const EnvConfig & env, const RewardSpec & reward, const PpoConfig & ppo, const fs::path & run_dir,
  const TrainOptions & options = {})
{
  env.validate();
  reward.validate();
  ppo.validate();
  fs::create_directories(run_dir / "checkpoints");
  if (options.log_every_episodes > 0) {
    fs::create_directories(run_dir / "episodes");
    std::ofstream(run_dir / "episodes" / "index.csv") << kEpisodeIndexHeader << '\n';
  }

  TrainResult result;
  try {
    Rng init_rng(mix_seed(ppo.seed, 0x1417));
    Rng update_rng(mix_seed(ppo.seed, 0x0bda7e));
    result.params = PolicyParams::initialize(policy_shape_for(env, ppo), init_rng);
    PpoUpdater updater(result.params, ppo);

    std::vector<std::unique_ptr<detail::TrainWorker>> workers;
    for (int i = 0; i < ppo.num_envs; ++i) {
      workers.push_back(std::make_unique<detail::TrainWorker>(i, env, reward, ppo, options, run_dir));
    }
    const int per_worker = ppo.rollout_length / ppo.num_envs;
    const int updates = static_cast<int>(ppo.total_env_steps / ppo.rollout_length);

    std::ofstream metrics(run_dir / "metrics.csv");
    metrics << kMetricsHeader << '\n';
    long long episodes = 0;
    for (int u = 1; u <= updates; ++u) {
      std::vector<RolloutBuffer> buffers(workers.size());
      std::vector<std::vector<detail::TrainWorker::Finished>> finished(workers.size());
      std::vector<std::exception_ptr> errors(workers.size());
      auto run = [&](std::size_t i) {
        try {
          buffers[i] = workers[i]->collect(result.params, per_worker, finished[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      };
      if (workers.size() == 1) {
        run(0);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers.size(); ++i) pool.emplace_back(run, i);
        for (auto & t : pool) t.join();
      }
      for (auto & e : errors) {
        if (e) std::rethrow_exception(e);
      }
      result.env_steps += ppo.rollout_length;

      MetricsRow row;
      row.update = u;
      row.env_steps = result.env_steps;
      double reward_sum = 0.0;
      for (const auto & b : buffers) {
        for (const auto & t : b.transitions) reward_sum += t.reward;
      }
      row.mean_reward = reward_sum / ppo.rollout_length;
      double len = 0.0;
      double ret = 0.0;
      long long n = 0;
      for (const auto & f : finished) {
        for (const auto & e : f) {
          len += e.length;
          ret += e.ret;
          ++n;
        }
      }
      episodes += n;
      row.episodes = episodes;
      if (n > 0) {
        row.mean_episode_len = len / n;
        row.mean_return = ret / n;
      }

      row.stats = updater.update(result.params, make_batch(buffers, ppo.gamma, ppo.gae_lambda), update_rng);
      metrics << format_metrics_row(row) << '\n' << std::flush;
      result.metrics.push_back(row);

      if (u % ppo.checkpoint_interval == 0 || u == updates) {
        char name[48];
        std::snprintf(name, sizeof(name), "update_%06d.ckpt", u);
        save_checkpoint(result.params, run_dir / "checkpoints" / name);
      }
      if (options.progress) options.progress({row, updates});
    }
    result.final_checkpoint = run_dir / "checkpoints" / "final.ckpt";
    save_checkpoint(result.params, result.final_checkpoint);
  } catch (const std::exception & e) {
    detail::write_error_record(run_dir, e, result.env_steps);
    throw;
  }
  return result;
}

inline std::vector<MetricsRow> read_metrics_csv(const fs::path & path)
{
  std::ifstream in(path);
  if (!in) throw InputError("cannot open metrics log '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f.size() != 11) throw InputError("metrics row has " + std::to_string(f.size()) + " fields");
    MetricsRow m;
    m.update = static_cast<int>(parse_integer("update", f[0]));
    m.env_steps = parse_integer("env_steps", f[1]);
    m.episodes = parse_integer("episodes", f[2]);
    m.mean_reward = parse_real("mean_reward", f[3]);
    m.mean_episode_len = parse_real("mean_episode_len", f[4]);
    m.mean_return = parse_real("mean_return", f[5]);
    m.stats.policy_loss = parse_real("policy_loss", f[6]);
    m.stats.value_loss = parse_real("value_loss", f[7]);
    m.stats.entropy = parse_real("entropy", f[8]);
    m.stats.clip_fraction = parse_real("clip_fraction", f[9]);
    m.stats.approx_kl = parse_real("approx_kl", f[10]);
    rows.push_back(m);
  }
  return rows;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__TRAINER_HPP_
