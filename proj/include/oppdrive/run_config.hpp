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

#ifndef OPPDRIVE__RUN_CONFIG_HPP_
#define OPPDRIVE__RUN_CONFIG_HPP_

#include "oppdrive/config_file.hpp"
#include "oppdrive/embedding.hpp"
#include "oppdrive/env_config.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/ppo.hpp"
#include "oppdrive/remote_embedder.hpp"
#include "oppdrive/reward_model.hpp"
#include "oppdrive/trainer.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifndef OPPDRIVE_VERSION
#define OPPDRIVE_VERSION "0.1.0"
#endif

namespace oppdrive
{

struct BackendConfig
{
  BackendKind kind = BackendKind::Reference;
  RemoteOptions remote;
};

/// Everything a training run depends on. File layout:
///   [env] [reward] [ppo] [backend] [trace] [run]
struct RunConfig
{
  EnvConfig env;
  RewardSpec reward;
  PpoConfig ppo;
  BackendConfig backend;
  TraceOptions trace;
  int log_every_episodes = 10;
  std::string run_dir;  // empty: runs/<run id>
  std::string run_id;   // empty: derived from reward and seed
};

inline void set_ppo_field(PpoConfig & c, const std::string & key, const std::string & value)
{
  const std::string f = "ppo." + key;
  if (key == "gamma") c.gamma = parse_real(f, value);
  else if (key == "gae_lambda") c.gae_lambda = parse_real(f, value);
  else if (key == "clip_epsilon") c.clip_epsilon = parse_real(f, value);
  else if (key == "learning_rate") c.learning_rate = parse_real(f, value);
  else if (key == "rollout_length") c.rollout_length = static_cast<int>(parse_integer(f, value));
  else if (key == "epochs_per_update") c.epochs_per_update = static_cast<int>(parse_integer(f, value));
  else if (key == "minibatch_size") c.minibatch_size = static_cast<int>(parse_integer(f, value));
  else if (key == "entropy_coef") c.entropy_coef = parse_real(f, value);
  else if (key == "value_coef") c.value_coef = parse_real(f, value);
  else if (key == "max_grad_norm") c.max_grad_norm = parse_real(f, value);
  else if (key == "total_env_steps") c.total_env_steps = parse_integer(f, value);
  else if (key == "seed") c.seed = parse_unsigned(f, value);
  else if (key == "num_envs") c.num_envs = static_cast<int>(parse_integer(f, value));
  else if (key == "checkpoint_interval") c.checkpoint_interval = static_cast<int>(parse_integer(f, value));
  else if (key == "hidden_layers") {
    c.hidden_layers.clear();
    for (double h : parse_real_list(f, value)) {
      if (h != std::floor(h)) throw ConfigError("field 'ppo.hidden_layers': widths must be integers");
      c.hidden_layers.push_back(static_cast<int>(h));
    }
  } else {
    throw ConfigError("unknown ppo config key '" + key + "'");
  }
}

inline std::map<std::string, std::string> ppo_config_fields(const PpoConfig & c)
{
  std::vector<double> hidden(c.hidden_layers.begin(), c.hidden_layers.end());
  return {
    {"gamma", format_real(c.gamma)},
    {"gae_lambda", format_real(c.gae_lambda)},
    {"clip_epsilon", format_real(c.clip_epsilon)},
    {"learning_rate", format_real(c.learning_rate)},
    {"rollout_length", std::to_string(c.rollout_length)},
    {"epochs_per_update", std::to_string(c.epochs_per_update)},
    {"minibatch_size", std::to_string(c.minibatch_size)},
    {"entropy_coef", format_real(c.entropy_coef)},
    {"value_coef", format_real(c.value_coef)},
    {"max_grad_norm", format_real(c.max_grad_norm)},
    {"total_env_steps", std::to_string(c.total_env_steps)},
    {"seed", std::to_string(c.seed)},
    {"num_envs", std::to_string(c.num_envs)},
    {"checkpoint_interval", std::to_string(c.checkpoint_interval)},
    {"hidden_layers", format_real_list(hidden)},
  };
}

namespace detail
{

inline const ConfigTree * section(const ConfigTree & tree, const std::string & name)
{
  const auto it = tree.find(name);
  return it == tree.not_found() ? nullptr : &it->second;
}

inline std::map<std::string, std::string> flat_keys(const ConfigTree & node, const std::string & name)
{
  std::map<std::string, std::string> out;
  for (const auto & [key, child] : node) {
    if (!child.empty()) throw ConfigError("nested section '" + key + "' in [" + name + "]");
    out[key] = child.data();
  }
  return out;
}

inline RewardSpec reward_from_keys(std::map<std::string, std::string> keys)
{
  auto take = [&](const std::string & k) -> std::optional<std::string> {
    auto it = keys.find(k);
    if (it == keys.end()) return std::nullopt;
    auto v = it->second;
    keys.erase(it);
    return v;
  };
  const auto kind_text = take("kind");
  if (!kind_text) throw ConfigError("missing required field 'reward.kind'");
  const auto kind = parse_reward_kind(trim(*kind_text));
  if (!kind) throw ConfigError("field 'reward.kind': unknown reward kind '" + *kind_text + "'");

  Modality modality = Modality::Text;
  if (auto m = take("modality")) {
    const auto parsed = parse_modality(trim(*m));
    if (!parsed) throw ConfigError("field 'reward.modality': unknown modality '" + *m + "'");
    modality = *parsed;
  }
  RewardSpec spec{*kind, {}, {}};
  if (*kind == RewardKind::OppositeGoal) spec = RewardSpec::opposite(modality);
  if (*kind == RewardKind::TargetGoal) spec = RewardSpec::target(modality);
  if (auto g = take("goal")) {
    if (!spec.uses_embedding()) throw ConfigError("field 'reward.goal' only applies to embedding rewards");
    spec.goal.goal_text = trim(*g);
  }
  if (auto c = take("components")) {
    if (*kind != RewardKind::Composite) throw ConfigError("field 'reward.components' only applies to composite");
    spec.components = parse_reward_components(*c);
  }
  if (!keys.empty()) throw ConfigError("unknown reward config key '" + keys.begin()->first + "'");
  spec.validate();
  return spec;
}

inline BackendConfig backend_from_keys(const std::map<std::string, std::string> & keys)
{
  BackendConfig b;
  for (const auto & [key, value] : keys) {
    const std::string f = "backend." + key;
    if (key == "kind") {
      const auto v = trim(value);
      if (v == "reference") b.kind = BackendKind::Reference;
      else if (v == "remote") b.kind = BackendKind::Remote;
      else throw ConfigError("field 'backend.kind': expected reference or remote, got '" + v + "'");
    } else if (key == "endpoint") {
      b.remote.endpoint = trim(value);
    } else if (key == "max_retries") {
      b.remote.max_retries = static_cast<int>(parse_integer(f, value));
    } else if (key == "timeout_ms") {
      b.remote.read_timeout = std::chrono::milliseconds(parse_integer(f, value));
    } else if (key == "pool_size") {
      b.remote.pool_size = static_cast<std::size_t>(parse_integer(f, value));
    } else {
      throw ConfigError("unknown backend config key '" + key + "'");
    }
  }
  return b;
}

inline TraceOptions trace_from_keys(const std::map<std::string, std::string> & keys)
{
  TraceOptions t;
  for (const auto & [key, value] : keys) {
    const std::string f = "trace." + key;
    if (key == "every_episodes") t.every_episodes = static_cast<int>(parse_integer(f, value));
    else if (key == "frames") t.frames = parse_bool(f, value);
    else if (key == "text") t.text = parse_bool(f, value);
    else throw ConfigError("unknown trace config key '" + key + "'");
  }
  if (t.every_episodes < 0) throw ConfigError("field 'trace.every_episodes' must be >= 0");
  return t;
}

}  // namespace detail

/// Apply "section.key=value" on top of a parsed file.
inline void apply_override(ConfigTree & tree, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  const auto sec = trim(assignment.substr(0, dot));
  const auto key = trim(assignment.substr(dot + 1, eq - dot - 1));
  if (sec.empty() || key.empty()) throw ConfigError("override '" + assignment + "' has an empty name");
  tree.put_child(ConfigTree::path_type(sec + "/" + key, '/'), ConfigTree(trim(assignment.substr(eq + 1))));
}

inline RunConfig run_config_from_tree(const ConfigTree & tree)
{
  static const std::set<std::string> known{"env", "reward", "ppo", "backend", "trace", "run"};
  for (const auto & [name, node] : tree) {
    if (!known.count(name)) {
      throw ConfigError(
        node.empty() ? "key '" + name + "' outside of a section" : "unknown section [" + name + "]");
    }
  }
  RunConfig rc;
  if (const auto * env = detail::section(tree, "env")) rc.env = env_config_from_tree(*env);
  const auto * reward = detail::section(tree, "reward");
  if (reward == nullptr) throw ConfigError("missing required field 'reward.kind'");
  rc.reward = detail::reward_from_keys(detail::flat_keys(*reward, "reward"));
  if (const auto * ppo = detail::section(tree, "ppo")) {
    for (const auto & [k, v] : detail::flat_keys(*ppo, "ppo")) set_ppo_field(rc.ppo, k, v);
  }
  rc.ppo.validate();
  if (const auto * b = detail::section(tree, "backend")) {
    rc.backend = detail::backend_from_keys(detail::flat_keys(*b, "backend"));
  }
  if (const auto * t = detail::section(tree, "trace")) {
    rc.trace = detail::trace_from_keys(detail::flat_keys(*t, "trace"));
  }
  if (const auto * r = detail::section(tree, "run")) {
    for (const auto & [key, value] : detail::flat_keys(*r, "run")) {
      if (key == "dir") rc.run_dir = trim(value);
      else if (key == "id") rc.run_id = trim(value);
      else if (key == "log_every_episodes") {
        rc.log_every_episodes = static_cast<int>(parse_integer("run.log_every_episodes", value));
        if (rc.log_every_episodes < 0) throw ConfigError("field 'run.log_every_episodes' must be >= 0");
      } else {
        throw ConfigError("unknown run config key '" + key + "'");
      }
    }
  }
  return rc;
}

inline RunConfig load_run_config(const std::string & path, const std::vector<std::string> & overrides = {})
{
  auto tree = load_config_file(path);
  for (const auto & o : overrides) apply_override(tree, o);
  return run_config_from_tree(tree);
}

inline RunConfig parse_run_config(std::istream & in, const std::vector<std::string> & overrides = {})
{
  auto tree = parse_config_text(in);
  for (const auto & o : overrides) apply_override(tree, o);
  return run_config_from_tree(tree);
}

/// Resolved config in file syntax; parses back to an equal RunConfig.
inline std::string format_run_config(const RunConfig & rc)
{
  std::ostringstream os;
  os << "[env]\n" << format_env_config(rc.env);
  os << "\n[reward]\nkind = " << to_string(rc.reward.kind) << '\n';
  if (rc.reward.uses_embedding()) {
    os << "modality = " << to_string(rc.reward.goal.modality) << '\n'
       << "goal = " << rc.reward.goal.goal_text << '\n';
  }
  if (rc.reward.kind == RewardKind::Composite) {
    os << "components = " << format_reward_components(rc.reward.components) << '\n';
  }
  os << "\n[ppo]\n";
  for (const auto & [k, v] : ppo_config_fields(rc.ppo)) os << k << " = " << v << '\n';
  os << "\n[backend]\nkind = " << (rc.backend.kind == BackendKind::Remote ? "remote" : "reference") << '\n';
  if (rc.backend.kind == BackendKind::Remote) {
    os << "endpoint = " << rc.backend.remote.endpoint << '\n'
       << "max_retries = " << rc.backend.remote.max_retries << '\n'
       << "timeout_ms = " << rc.backend.remote.read_timeout.count() << '\n'
       << "pool_size = " << rc.backend.remote.pool_size << '\n';
  }
  os << "\n[trace]\nevery_episodes = " << rc.trace.every_episodes << '\n'
     << "frames = " << (rc.trace.frames ? "true" : "false") << '\n'
     << "text = " << (rc.trace.text ? "true" : "false") << '\n';
  os << "\n[run]\nlog_every_episodes = " << rc.log_every_episodes << '\n';
  if (!rc.run_id.empty()) os << "id = " << rc.run_id << '\n';
  if (!rc.run_dir.empty()) os << "dir = " << rc.run_dir << '\n';
  return os.str();
}

/// Reference embedders, or remote ones sharing one connection pool.
inline EmbedderFactory make_embedder_factory(const BackendConfig & backend)
{
  if (backend.kind == BackendKind::Reference) return reference_embedders();
  auto client = std::make_shared<RemoteClient>(backend.remote);
  return [client](Modality m) -> std::shared_ptr<Embedder> { return std::make_shared<RemoteEmbedder>(client, m); };
}

/// Embedding modalities a reward spec touches.
inline std::vector<Modality> reward_modalities(const RewardSpec & spec)
{
  std::vector<Modality> out;
  auto add = [&](Modality m) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  };
  if (spec.uses_embedding()) add(spec.goal.modality);
  for (const auto & [c, w] : spec.components) {
    for (auto m : reward_modalities(c)) add(m);
  }
  return out;
}

inline std::string default_run_id(const RunConfig & rc)
{
  return rc.run_id.empty() ? rc.reward.name() + "-seed" + std::to_string(rc.ppo.seed) : rc.run_id;
}

inline std::string utc_timestamp()
{
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json manifest_json(
  const RunConfig & rc, const std::vector<BackendDescriptor> & backends, const std::string & created_at)
{
  nlohmann::json j;
  j["run_id"] = default_run_id(rc);
  j["created_at"] = created_at;
  j["code_version"] = OPPDRIVE_VERSION;
  j["seed"] = rc.ppo.seed;
  j["env_seed"] = rc.env.seed;
  j["config"] = format_run_config(rc);
  nlohmann::json env;
  for (const auto & [k, v] : env_config_fields(rc.env)) env[k] = v;
  nlohmann::json ppo;
  for (const auto & [k, v] : ppo_config_fields(rc.ppo)) ppo[k] = v;
  j["env"] = env;
  j["ppo"] = ppo;
  j["reward"] = {{"kind", to_string(rc.reward.kind)}, {"name", rc.reward.name()}};
  if (rc.reward.uses_embedding()) {
    j["reward"]["modality"] = to_string(rc.reward.goal.modality);
    j["reward"]["goal"] = rc.reward.goal.goal_text;
  }
  if (rc.reward.kind == RewardKind::Composite) {
    j["reward"]["components"] = format_reward_components(rc.reward.components);
  }
  j["backends"] = nlohmann::json::array();
  for (const auto & b : backends) {
    j["backends"].push_back({{"name", b.name},
                             {"modality", to_string(b.modality)},
                             {"dim", b.dim},
                             {"kind", b.kind == BackendKind::Remote ? "remote" : "reference"}});
  }
  return j;
}

/// Parse the resolved config stored in a run's manifest.json.
inline RunConfig load_manifest_config(const std::filesystem::path & run_dir)
{
  std::ifstream in(run_dir / "manifest.json");
  if (!in) throw InputError("no manifest.json in '" + run_dir.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception & e) {
    throw InputError("manifest.json: " + std::string(e.what()));
  }
  if (!j.contains("config") || !j["config"].is_string()) throw InputError("manifest.json has no config");
  std::istringstream cfg(j["config"].get<std::string>());
  return parse_run_config(cfg);
}

}  // namespace oppdrive

#endif  // OPPDRIVE__RUN_CONFIG_HPP_
