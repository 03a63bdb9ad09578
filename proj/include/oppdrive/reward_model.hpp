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

#ifndef OPPDRIVE__REWARD_MODEL_HPP_
#define OPPDRIVE__REWARD_MODEL_HPP_

#include "oppdrive/config_file.hpp"
#include "oppdrive/embedding.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/frame.hpp"
#include "oppdrive/highway.hpp"
#include "oppdrive/reward.hpp"
#include "oppdrive/text_obs.hpp"
#include "oppdrive/ttc.hpp"
#include "oppdrive/video.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oppdrive
{

enum class RewardKind { OppositeGoal, TargetGoal, Grad, Constant, Speed, Composite };

inline std::string_view to_string(RewardKind k)
{
  switch (k) {
    case RewardKind::OppositeGoal:
      return "lord_opposite";
    case RewardKind::TargetGoal:
      return "target_goal";
    case RewardKind::Grad:
      return "grad";
    case RewardKind::Constant:
      return "constant";
    case RewardKind::Speed:
      return "speed";
    case RewardKind::Composite:
      return "composite";
  }
  return "?";
}

inline std::optional<RewardKind> parse_reward_kind(std::string_view s)
{
  for (auto k : {RewardKind::OppositeGoal, RewardKind::TargetGoal, RewardKind::Grad,
                 RewardKind::Constant, RewardKind::Speed, RewardKind::Composite}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  return std::nullopt;
}

struct RewardSpec
{
  RewardKind kind = RewardKind::Grad;
  GoalSpec goal;  // embedding kinds only
  std::vector<std::pair<RewardSpec, double>> components;  // composite only

  bool uses_embedding() const
  {
    return kind == RewardKind::OppositeGoal || kind == RewardKind::TargetGoal;
  }

  static RewardSpec opposite(Modality m)
  {
    return {RewardKind::OppositeGoal, GoalSpec::defaults(m, GoalPolarity::Opposite), {}};
  }
  static RewardSpec target(Modality m)
  {
    return {RewardKind::TargetGoal, GoalSpec::defaults(m, GoalPolarity::Target), {}};
  }
  static RewardSpec grad() { return {RewardKind::Grad, {}, {}}; }
  static RewardSpec constant() { return {RewardKind::Constant, {}, {}}; }
  static RewardSpec speed() { return {RewardKind::Speed, {}, {}}; }
  static RewardSpec composite(std::vector<std::pair<RewardSpec, double>> parts)
  {
    return {RewardKind::Composite, {}, std::move(parts)};
  }

  /// Column-friendly identifier, e.g. "lord_text", "grad".
  std::string name() const
  {
    switch (kind) {
      case RewardKind::OppositeGoal:
        return "lord_" + std::string(to_string(goal.modality));
      case RewardKind::TargetGoal:
        return "target_" + std::string(to_string(goal.modality));
      case RewardKind::Composite: {
        std::string out = "composite";
        for (const auto & [spec, w] : components) {
          out += "+" + spec.name();
        }
        return out;
      }
      default:
        return std::string(to_string(kind));
    }
  }

  void validate() const
  {
    if (kind == RewardKind::Composite) {
      if (components.empty()) {
        throw ConfigError("composite reward needs at least one component");
      }
      for (const auto & [spec, w] : components) {
        if (!std::isfinite(w)) {
          throw ConfigError("composite reward weight must be finite");
        }
        spec.validate();
      }
    }
    if (uses_embedding() && goal.goal_text.empty()) {
      throw ConfigError("embedding reward needs a goal text");
    }
    if (kind == RewardKind::OppositeGoal && goal.polarity != GoalPolarity::Opposite) {
      throw ConfigError("lord_opposite reward needs an opposite goal");
    }
    if (kind == RewardKind::TargetGoal && goal.polarity != GoalPolarity::Target) {
      throw ConfigError("target_goal reward needs a target goal");
    }
  }
};

/// Parse "kind[/modality][*weight]" component lists, e.g.
/// "lord_opposite/text*1.0, speed*1.0".
inline std::vector<std::pair<RewardSpec, double>> parse_reward_components(const std::string & text)
{
  std::vector<std::pair<RewardSpec, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      continue;
    }
    double weight = 1.0;
    if (auto star = item.find('*'); star != std::string::npos) {
      weight = parse_real("reward.components", item.substr(star + 1));
      item = trim(item.substr(0, star));
    }
    Modality modality = Modality::Text;
    if (auto slash = item.find('/'); slash != std::string::npos) {
      const auto m = parse_modality(trim(item.substr(slash + 1)));
      if (!m) {
        throw ConfigError("reward.components: unknown modality in '" + item + "'");
      }
      modality = *m;
      item = trim(item.substr(0, slash));
    }
    const auto kind = parse_reward_kind(item);
    if (!kind || *kind == RewardKind::Composite) {
      throw ConfigError("reward.components: unsupported component kind '" + item + "'");
    }
    RewardSpec spec{*kind, {}, {}};
    if (*kind == RewardKind::OppositeGoal) spec = RewardSpec::opposite(modality);
    if (*kind == RewardKind::TargetGoal) spec = RewardSpec::target(modality);
    out.emplace_back(std::move(spec), weight);
  }
  return out;
}

inline std::string format_reward_components(const std::vector<std::pair<RewardSpec, double>> & parts)
{
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto & [spec, w] = parts[i];
    out += (i ? ", " : "") + std::string(to_string(spec.kind));
    if (spec.uses_embedding()) {
      out += "/" + std::string(to_string(spec.goal.modality));
    }
    out += "*" + format_real(w);
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Stateful per-episode reward evaluator. One instance per environment.
class RewardModel
{
public:
  explicit RewardModel(std::string name) : name_(std::move(name)) {}
  virtual ~RewardModel() = default;

  const std::string & name() const { return name_; }

  virtual void begin_episode(const WorldState &) {}
  virtual bool wants_substeps() const { return false; }
  virtual void observe_substep(const WorldState &) {}

  /// Reward for arriving in `world`; `collided` marks the crash step.
  virtual double evaluate(const WorldState & world, bool collided) = 0;

private:
  std::string name_;
};

using EmbedderFactory = std::function<std::shared_ptr<Embedder>(Modality)>;

inline EmbedderFactory reference_embedders()
{
  return [](Modality m) { return make_reference_embedder(m); };
}

/// Observation of the goal's modality for the current world.
inline Observation observe(Modality modality, const WorldState & world, const FrameHistory * history)
{
  switch (modality) {
    case Modality::Text:
      return describe_text(compute_ttc(world));
    case Modality::Image:
      return render_frame(world);
    case Modality::Video:
      if (history != nullptr && !history->empty()) {
        return history->clip();
      }
      {
        FrameHistory h;
        h.push(render_frame(world));
        return h.clip();
      }
  }
  throw InputError("unknown modality");
}

class EmbeddingRewardModel final : public RewardModel
{
public:
  EmbeddingRewardModel(const RewardSpec & spec, std::shared_ptr<Embedder> embedder)
  : RewardModel(spec.name()),
    embedder_(std::move(embedder)),
    modality_(spec.goal.modality),
    opposite_(spec.kind == RewardKind::OppositeGoal)
  {
    goal_embedding_ = embed_goal(*embedder_, spec.goal);
  }

  void begin_episode(const WorldState & world) override
  {
    history_.clear();
    if (modality_ == Modality::Video) {
      history_.push(render_frame(world));
    }
  }

  bool wants_substeps() const override { return modality_ == Modality::Video; }

  void observe_substep(const WorldState & world) override
  {
    if (modality_ == Modality::Video) {
      history_.push(render_frame(world));
    }
  }

  double evaluate(const WorldState & world, bool) override
  {
    const auto e = embedder_->embed(observe(modality_, world, &history_));
    if (e.dim() != goal_embedding_.dim()) {
      throw InterfaceError("observation and goal embeddings differ in dim");
    }
    return opposite_ ? opposite_goal_reward(e, goal_embedding_)
                     : target_goal_reward(e, goal_embedding_);
  }

  const EmbeddingVector & goal_embedding() const { return goal_embedding_; }

private:
  std::shared_ptr<Embedder> embedder_;
  Modality modality_;
  bool opposite_;
  EmbeddingVector goal_embedding_;
  FrameHistory history_;
};

class KinematicRewardModel final : public RewardModel
{
public:
  explicit KinematicRewardModel(RewardKind kind) : RewardModel(RewardSpec{kind, {}, {}}.name()), kind_(kind) {}

  double evaluate(const WorldState & world, bool collided) override
  {
    switch (kind_) {
      case RewardKind::Grad:
        return grad_reward(world.ego().speed, collided);
      case RewardKind::Constant:
        return constant_reward(collided);
      case RewardKind::Speed:
        return speed_reward(world.ego().speed);
      default:
        throw InputError("not a kinematic reward kind");
    }
  }

private:
  RewardKind kind_;
};

inline std::unique_ptr<RewardModel> make_reward_model(
  const RewardSpec & spec, const EmbedderFactory & factory);

class CompositeRewardModel final : public RewardModel
{
public:
  CompositeRewardModel(const RewardSpec & spec, const EmbedderFactory & factory)
  : RewardModel(spec.name())
  {
    for (const auto & [part, weight] : spec.components) {
      parts_.emplace_back(make_reward_model(part, factory), weight);
    }
  }

  void begin_episode(const WorldState & world) override
  {
    for (auto & [m, w] : parts_) m->begin_episode(world);
  }

  bool wants_substeps() const override
  {
    for (const auto & [m, w] : parts_) {
      if (m->wants_substeps()) return true;
    }
    return false;
  }

  void observe_substep(const WorldState & world) override
  {
    for (auto & [m, w] : parts_) m->observe_substep(world);
  }

  double evaluate(const WorldState & world, bool collided) override
  {
    std::vector<std::pair<double, double>> values;
    values.reserve(parts_.size());
    for (auto & [m, w] : parts_) {
      values.emplace_back(m->evaluate(world, collided), w);
    }
    return composite_reward(values);
  }

private:
  std::vector<std::pair<std::unique_ptr<RewardModel>, double>> parts_;
};

inline std::unique_ptr<RewardModel> make_reward_model(
  const RewardSpec & spec, const EmbedderFactory & factory)
{
  spec.validate();
  switch (spec.kind) {
    case RewardKind::OppositeGoal:
    case RewardKind::TargetGoal:
      return std::make_unique<EmbeddingRewardModel>(spec, factory(spec.goal.modality));
    case RewardKind::Composite:
      return std::make_unique<CompositeRewardModel>(spec, factory);
    default:
      return std::make_unique<KinematicRewardModel>(spec.kind);
  }
}

}  // namespace oppdrive

#endif  // OPPDRIVE__REWARD_MODEL_HPP_
