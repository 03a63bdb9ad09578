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

#ifndef OPPDRIVE__CLI_HPP_
#define OPPDRIVE__CLI_HPP_

#include "oppdrive/checkpoint.hpp"
#include "oppdrive/embedding.hpp"
#include "oppdrive/episode.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/evaluate.hpp"
#include "oppdrive/frame.hpp"
#include "oppdrive/remote_embedder.hpp"
#include "oppdrive/reward.hpp"
#include "oppdrive/run_config.hpp"
#include "oppdrive/text_obs.hpp"
#include "oppdrive/trainer.hpp"
#include "oppdrive/video.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace oppdrive
{

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitInput = 4,
  kExitPersistence = 5,
  kExitAvailability = 6,
  kExitNumerical = 7,
};

inline int exit_code_for(const std::exception & e)
{
  if (dynamic_cast<const UsageError *>(&e)) return kExitUsage;
  if (dynamic_cast<const ConfigError *>(&e)) return kExitConfig;
  if (dynamic_cast<const InputError *>(&e)) return kExitInput;
  if (dynamic_cast<const PersistenceError *>(&e)) return kExitPersistence;
  if (dynamic_cast<const AvailabilityError *>(&e)) return kExitAvailability;
  if (dynamic_cast<const NumericalError *>(&e)) return kExitNumerical;
  return kExitFailure;
}

inline std::string error_label(const std::exception & e)
{
  switch (exit_code_for(e)) {
    case kExitUsage: return "usage error";
    case kExitConfig: return "config error";
    case kExitInput: return "input error";
    case kExitPersistence: return "persistence error";
    case kExitAvailability: return "availability error";
    case kExitNumerical: return "numerical error";
    default: return "error";
  }
}

namespace cli
{

namespace fs = std::filesystem;

struct Streams
{
  std::ostream & out;
  std::ostream & err;
};

inline bool dir_has_entries(const fs::path & p)
{
  return fs::exists(p) && (!fs::is_directory(p) || !fs::is_empty(p));
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs
{
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  bool quiet = false;
};

inline fs::path cmd_train(const TrainArgs & args, Streams io)
{
  // Everything that can fail on bad input happens before the run dir exists.
  auto rc = load_run_config(args.config, args.overrides);
  const auto factory = make_embedder_factory(rc.backend);
  std::vector<BackendDescriptor> backends;
  for (auto m : reward_modalities(rc.reward)) backends.push_back(factory(m)->descriptor());
  const fs::path dir = !args.out.empty() ? fs::path(args.out)
                       : !rc.run_dir.empty() ? fs::path(rc.run_dir)
                                             : fs::path("runs") / default_run_id(rc);
  if (dir_has_entries(dir)) {
    throw UsageError("run directory '" + dir.string() + "' already exists and is not empty");
  }
  fs::create_directories(dir);
  {
    std::ofstream m(dir / "manifest.json");
    m << manifest_json(rc, backends, utc_timestamp()).dump(2) << '\n';
  }
  TrainOptions opts;
  opts.embedders = factory;
  opts.log_every_episodes = rc.log_every_episodes;
  opts.trace = rc.trace;
  if (!args.quiet) {
    opts.progress = [&io](const TrainProgress & p) {
      io.out << "update " << p.metrics.update << '/' << p.total_updates << "  env_steps "
             << p.metrics.env_steps << "  mean_episode_len " << format_fixed(p.metrics.mean_episode_len, 2)
             << "  mean_reward " << format_fixed(p.metrics.mean_reward, 4) << '\n'
             << std::flush;
    };
  }
  const auto result = train(rc.env, rc.reward, rc.ppo, dir, opts);
  io.out << "run directory: " << dir.string() << '\n'
         << "final checkpoint: " << result.final_checkpoint.string() << '\n';
  return dir;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs
{
  std::string checkpoint;
  std::vector<std::string> settings;
  std::vector<std::uint64_t> seeds;
  std::string out = "eval";
  std::string method = "policy";
  int workers = 1;
};

inline std::vector<EvalReport> cmd_evaluate(const EvaluateArgs & args, Streams io)
{
  std::vector<EvalSetting> settings;
  for (const auto & s : args.settings) settings.push_back(parse_setting(s));
  if (settings.empty()) settings.push_back(parse_setting("lane-4-density-2"));
  const auto seeds = args.seeds.empty() ? default_eval_seeds() : args.seeds;
  auto params = std::make_shared<PolicyParams>(load_checkpoint(args.checkpoint));
  for (const auto & s : settings) {
    const int expected = s.config.observed_vehicles * KinematicsObs::kFeatures;
    if (params->actor.input_size() != expected || params->actor.output_size() != kActionCount) {
      throw PersistenceError(
        "checkpoint shape " + detail::shape_string(params->actor.sizes()) + " does not fit setting '" +
        s.name + "' (needs " + std::to_string(expected) + " inputs, " + std::to_string(kActionCount) +
        " actions)");
    }
  }
  const auto policy = sampling_policy(params);
  fs::create_directories(args.out);
  EvalOptions opts;
  opts.workers = args.workers;
  std::vector<EvalReport> reports;
  for (const auto & s : settings) {
    auto report = evaluate(policy, s, seeds, opts);
    std::ofstream csv(fs::path(args.out) / (s.name + ".csv"));
    write_report_csv(report, csv);
    std::ofstream txt(fs::path(args.out) / (s.name + ".txt"));
    txt << format_report_table({{args.method, {report}}});
    reports.push_back(std::move(report));
  }
  io.out << format_report_table({{args.method, reports}});
  return reports;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs
{
  std::string run;
  std::string reward;  // empty: the training reward
};

inline std::vector<EpisodeLog> load_run_episodes(const fs::path & run)
{
  const auto dir = run / "episodes";
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto & e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (name.rfind("episode_", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
    }
  }
  if (files.empty()) {
    throw InputError("run '" + run.string() + "' has no episode logs (episode logging disabled?)");
  }
  std::sort(files.begin(), files.end());
  std::vector<EpisodeLog> logs;
  for (const auto & f : files) logs.push_back(load_episode_log(f.string()));
  return logs;
}

inline LandscapeSummary cmd_analyze(const AnalyzeArgs & args, Streams io)
{
  const fs::path run(args.run);
  const auto logs = load_run_episodes(run);
  const auto name = args.reward.empty() ? logs.front().reward_names.front() : args.reward;
  const auto rows = reward_landscape(logs, name);
  const auto summary = summarize_landscape(rows);
  const auto csv_path = run / ("landscape_" + name + ".csv");
  {
    std::ofstream csv(csv_path);
    write_landscape_csv(rows, csv);
  }
  const auto text = format_landscape_summary(name, summary);
  std::ofstream(run / ("landscape_" + name + "_summary.txt")) << text;
  io.out << "episodes: " << logs.size() << '\n' << text << "landscape csv: " << csv_path.string() << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// render

struct RenderArgs
{
  std::string run;
  std::string episode;  // row number in episodes/index.csv or a log file name
  std::string out;
};

struct IndexEntry
{
  std::string file;
  std::uint64_t seed = 0;
  std::vector<MetaAction> actions;
};

inline std::vector<IndexEntry> read_episode_index(const fs::path & run)
{
  std::ifstream in(run / "episodes" / "index.csv");
  if (!in) throw InputError("run '" + run.string() + "' has no episodes/index.csv");
  std::string line;
  std::getline(in, line);
  std::vector<IndexEntry> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f.size() < 4) throw InputError("malformed episode index row '" + line + "'");
    IndexEntry e;
    e.file = f[0];
    e.seed = parse_unsigned("seed", f[1]);
    std::istringstream acts(f.size() > 4 ? f[4] : "");
    std::string a;
    while (acts >> a) e.actions.push_back(action_from_index(static_cast<int>(parse_integer("actions", a))));
    out.push_back(std::move(e));
  }
  return out;
}

/// Replay an episode from its seed and action list and dump frames + text.
inline fs::path cmd_render(const RenderArgs & args, Streams io)
{
  const fs::path run(args.run);
  const auto rc = load_manifest_config(run);
  const auto index = read_episode_index(run);
  const IndexEntry * entry = nullptr;
  for (const auto & e : index) {
    if (e.file == args.episode || fs::path(e.file).stem() == args.episode) entry = &e;
  }
  if (entry == nullptr) {
    long long n = -1;
    try {
      n = parse_integer("episode", args.episode);
    } catch (const ConfigError &) {
    }
    if (n < 0 || n >= static_cast<long long>(index.size())) {
      throw InputError(
        "episode '" + args.episode + "' not found (" + std::to_string(index.size()) + " logged episodes)");
    }
    entry = &index[static_cast<std::size_t>(n)];
  }
  const auto log = load_episode_log((run / "episodes" / entry->file).string());
  const fs::path out = args.out.empty() ? run / "render" / fs::path(entry->file).stem() : fs::path(args.out);
  fs::create_directories(out);

  auto world = reset(rc.env, entry->seed);
  std::ofstream text(out / "text.txt");
  auto dump = [&](int step) {
    char name[32];
    std::snprintf(name, sizeof(name), "step_%03d.png", step);
    write_png(render_frame(world), (out / name).string());
    text << step << '\t' << describe_text(compute_ttc(world)) << '\n';
  };
  dump(0);
  for (std::size_t i = 0; i < entry->actions.size(); ++i) {
    advance(world, entry->actions[i]);
    if (i < log.records.size() && world.ego().x != log.records[i].ego_x) {
      throw PersistenceError("replay of '" + entry->file + "' diverged at step " + std::to_string(i + 1));
    }
    dump(world.step_index);
  }
  io.out << "rendered " << entry->actions.size() + 1 << " frames to " << out.string() << '\n';
  return out;
}

// ---------------------------------------------------------------------------
// embed-probe

struct ProbeArgs
{
  std::string modality;
  std::string payload;
  std::string polarity = "opposite";
  std::string goal;  // empty: default goal for modality and polarity
};

struct ProbeResult
{
  double similarity = 0.0;
  double reward = 0.0;
  BackendDescriptor backend;
};

inline Observation load_probe_payload(Modality m, const fs::path & path)
{
  if (!fs::exists(path)) throw InputError("payload '" + path.string() + "' does not exist");
  switch (m) {
    case Modality::Text: {
      std::ifstream in(path);
      std::stringstream ss;
      ss << in.rdbuf();
      return trim(ss.str());
    }
    case Modality::Image:
      return read_png(path.string());
    case Modality::Video: {
      // A directory of PNG frames in name order.
      if (!fs::is_directory(path)) throw InputError("video payload must be a directory of PNG frames");
      std::vector<fs::path> frames;
      for (const auto & e : fs::directory_iterator(path)) {
        if (e.path().extension() == ".png") frames.push_back(e.path());
      }
      if (frames.empty()) throw InputError("video payload directory has no PNG frames");
      std::sort(frames.begin(), frames.end());
      FrameHistory h;
      for (const auto & f : frames) h.push(read_png(f.string()));
      return h.clip();
    }
  }
  throw InputError("unsupported modality");
}

inline ProbeResult cmd_embed_probe(const ProbeArgs & args, Streams io)
{
  const auto modality = parse_modality(args.modality);
  if (!modality) throw UsageError("unknown modality '" + args.modality + "' (text, image or video)");
  const auto polarity = parse_polarity(args.polarity);
  if (!polarity) throw UsageError("unknown polarity '" + args.polarity + "' (opposite or target)");
  auto goal = GoalSpec::defaults(*modality, *polarity);
  if (!args.goal.empty()) goal.goal_text = args.goal;

  BackendConfig backend;
  if (const auto endpoint = endpoint_from_environment()) {
    backend.kind = BackendKind::Remote;
    backend.remote.endpoint = *endpoint;
  }
  auto embedder = make_embedder_factory(backend)(*modality);
  const auto obs = load_probe_payload(*modality, args.payload);
  const auto g = embed_goal(*embedder, goal);
  const auto o = embedder->embed(obs);
  ProbeResult r;
  r.backend = embedder->descriptor();
  r.similarity = cosine_similarity(o, g);
  r.reward = *polarity == GoalPolarity::Opposite ? opposite_goal_reward(o, g) : target_goal_reward(o, g);
  io.out << "backend: " << r.backend.name << " (dim " << r.backend.dim << ")\n"
         << "goal: " << goal.goal_text << " [" << to_string(*polarity) << "]\n"
         << "similarity: " << format_fixed(r.similarity, 6) << '\n'
         << "reward: " << format_fixed(r.reward, 6) << '\n';
  return r;
}

}  // namespace cli

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char * const * argv, std::ostream & out = std::cout, std::ostream & err = std::cerr)
{
  CLI::App app{"Highway driving RL with opposite-goal embedding rewards"};
  app.require_subcommand(1);

  cli::TrainArgs train_args;
  auto * train = app.add_subcommand("train", "Train a PPO policy from a run config");
  train->add_option("--config", train_args.config, "Run config file")->required();
  train->add_option("--set", train_args.overrides, "Override section.key=value")->take_all();
  train->add_option("--out", train_args.out, "Run directory (overrides [run] dir)");
  train->add_flag("--quiet", train_args.quiet, "No per-update progress");

  cli::EvaluateArgs eval_args;
  std::string seeds_text;
  auto * eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on traffic settings");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
  eval->add_option("--setting", eval_args.settings, "lane-<n>-density-<d>, repeatable");
  eval->add_option("--seeds", seeds_text, "Comma-separated seeds (default: 17 pinned seeds)");
  eval->add_option("--out", eval_args.out, "Report directory")->capture_default_str();
  eval->add_option("--method", eval_args.method, "Row label in the table")->capture_default_str();
  eval->add_option("--workers", eval_args.workers, "Parallel episodes")->check(CLI::PositiveNumber);

  cli::AnalyzeArgs analyze_args;
  auto * analyze = app.add_subcommand("analyze", "Reward landscape of a run's episode logs");
  analyze->add_option("--run", analyze_args.run, "Run directory")->required();
  analyze->add_option("--reward", analyze_args.reward, "Logged reward name (default: training reward)");

  cli::RenderArgs render_args;
  auto * render = app.add_subcommand("render", "Replay a logged episode to PNG frames");
  render->add_option("--run", render_args.run, "Run directory")->required();
  render->add_option("--episode", render_args.episode, "Index row or episode file name")->required();
  render->add_option("--out", render_args.out, "Output directory");

  cli::ProbeArgs probe_args;
  auto * probe = app.add_subcommand("embed-probe", "Similarity and reward of one payload");
  probe->add_option("--modality", probe_args.modality, "text, image or video")->required();
  probe->add_option("--payload", probe_args.payload, "Text file, PNG, or directory of PNGs")->required();
  probe->add_option("--polarity", probe_args.polarity, "opposite or target")->capture_default_str();
  probe->add_option("--goal", probe_args.goal, "Goal text override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  cli::Streams io{out, err};
  try {
    if (*train) {
      cli::cmd_train(train_args, io);
    } else if (*eval) {
      if (!seeds_text.empty()) {
        std::stringstream ss(seeds_text);
        std::string s;
        while (std::getline(ss, s, ',')) {
          eval_args.seeds.push_back(parse_unsigned("seeds", trim(s)));
        }
      }
      cli::cmd_evaluate(eval_args, io);
    } else if (*analyze) {
      cli::cmd_analyze(analyze_args, io);
    } else if (*render) {
      cli::cmd_render(render_args, io);
    } else if (*probe) {
      cli::cmd_embed_probe(probe_args, io);
    }
  } catch (const std::exception & e) {
    err << error_label(e) << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__CLI_HPP_
