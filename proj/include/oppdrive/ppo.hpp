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

#ifndef OPPDRIVE__PPO_HPP_
#define OPPDRIVE__PPO_HPP_

#include "oppdrive/errors.hpp"
#include "oppdrive/gae.hpp"
#include "oppdrive/mlp.hpp"
#include "oppdrive/policy.hpp"
#include "oppdrive/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace oppdrive
{

struct PpoConfig
{
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  int rollout_length = 2048;
  int epochs_per_update = 10;
  int minibatch_size = 64;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  long long total_env_steps = 200000;
  std::uint64_t seed = 0;
  std::vector<int> hidden_layers{256, 256};
  int num_envs = 1;
  int checkpoint_interval = 10;  // updates between checkpoints

  bool operator==(const PpoConfig &) const = default;

  void validate() const
  {
    auto fail = [](const std::string & m) { throw ConfigError("invalid ppo config: " + m); };
    if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must be in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must be in [0, 1]");
    if (!(clip_epsilon > 0.0)) fail("clip_epsilon must be > 0");
    if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
    if (rollout_length < 1) fail("rollout_length must be >= 1");
    if (epochs_per_update < 1) fail("epochs_per_update must be >= 1");
    if (minibatch_size < 1) fail("minibatch_size must be >= 1");
    if (total_env_steps < rollout_length) fail("total_env_steps must be >= rollout_length");
    if (num_envs < 1) fail("num_envs must be >= 1");
    if (rollout_length % num_envs != 0) fail("rollout_length must be divisible by num_envs");
    if (checkpoint_interval < 1) fail("checkpoint_interval must be >= 1");
    for (int h : hidden_layers) {
      if (h < 1) fail("hidden layer widths must be >= 1");
    }
  }
};

/// Flattened training batch; one column per sample.
struct PpoBatch
{
  Eigen::MatrixXd states;
  std::vector<int> actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return states.cols(); }

  PpoBatch gather(std::span<const int> idx) const
  {
    PpoBatch out;
    const auto n = static_cast<Eigen::Index>(idx.size());
    out.states.resize(states.rows(), n);
    out.actions.resize(idx.size());
    out.old_log_probs.resize(n);
    out.advantages.resize(n);
    out.returns.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.states.col(i) = states.col(idx[i]);
      out.actions[i] = actions[idx[i]];
      out.old_log_probs(i) = old_log_probs(idx[i]);
      out.advantages(i) = advantages(idx[i]);
      out.returns(i) = returns(idx[i]);
    }
    return out;
  }
};

/// GAE per buffer, concatenated in buffer order.
inline PpoBatch make_batch(const std::vector<RolloutBuffer> & buffers, double gamma, double lambda)
{
  Eigen::Index total = 0;
  Eigen::Index features = 0;
  for (const auto & b : buffers) {
    total += static_cast<Eigen::Index>(b.transitions.size());
    if (!b.transitions.empty()) features = static_cast<Eigen::Index>(b.transitions.front().state.size());
  }
  PpoBatch batch;
  batch.states.resize(features, total);
  batch.actions.reserve(total);
  batch.old_log_probs.resize(total);
  batch.advantages.resize(total);
  batch.returns.resize(total);
  Eigen::Index col = 0;
  for (const auto & b : buffers) {
    const auto gae = compute_gae(b, gamma, lambda);
    for (std::size_t i = 0; i < b.transitions.size(); ++i, ++col) {
      const auto & t = b.transitions[i];
      batch.states.col(col) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), features);
      batch.actions.push_back(action_index(t.action));
      batch.old_log_probs(col) = t.log_prob;
      batch.advantages(col) = gae.advantages[i];
      batch.returns(col) = gae.returns[i];
    }
  }
  return batch;
}

/// Shift to mean 0 and scale to (population) std 1.
inline void normalize_advantages(Eigen::VectorXd & adv)
{
  if (adv.size() == 0) return;
  const double mean = adv.mean();
  adv.array() -= mean;
  const double std = std::sqrt(adv.squaredNorm() / static_cast<double>(adv.size()));
  if (std > 1e-12) {
    adv /= std;
  }
}

inline double clipped_surrogate(double ratio, double advantage, double epsilon)
{
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

struct PolicyHeadTerms
{
  double policy_loss = 0.0;  // -mean clipped surrogate
  double entropy = 0.0;      // mean
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  Eigen::MatrixXd grad_logits;  // d(policy_loss - entropy_coef * entropy) / d logits
};

inline PolicyHeadTerms policy_head_terms(
  const Eigen::MatrixXd & logits, std::span<const int> actions, const Eigen::VectorXd & old_log_probs,
  const Eigen::VectorXd & advantages, double clip_epsilon, double entropy_coef)
{
  const Eigen::Index n = logits.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd logp = log_softmax_columns(logits);
  const Eigen::MatrixXd p = logp.array().exp().matrix();

  PolicyHeadTerms out;
  out.grad_logits = Eigen::MatrixXd::Zero(logits.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = actions[i];
    const double log_ratio = logp(a, i) - old_log_probs(i);
    const double ratio = std::exp(log_ratio);
    const double adv = advantages(i);
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * adv;
    out.policy_loss -= std::min(unclipped, clipped) * inv_n;
    if (std::abs(ratio - 1.0) > clip_epsilon) out.clip_fraction += inv_n;
    out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;

    if (unclipped <= clipped) {
      const double g = -adv * ratio * inv_n;  // d loss / d logp(a)
      out.grad_logits.col(i) -= g * p.col(i);
      out.grad_logits(a, i) += g;
    }

    const double h = -(p.col(i).array() * logp.col(i).array()).sum();
    out.entropy += h * inv_n;
    out.grad_logits.col(i) +=
      (entropy_coef * inv_n) * (p.col(i).array() * (logp.col(i).array() + h)).matrix();
  }
  return out;
}

struct LossTerms
{
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

/// Clipped-surrogate objective as a loss to minimize:
/// policy + value_coef * mse(V, R) - entropy_coef * entropy.
/// Writes the parameter gradient to `grad` when given.
inline LossTerms ppo_loss(
  const PolicyParams & params, const PpoBatch & batch, const PpoConfig & config,
  PolicyParams * grad = nullptr)
{
  Mlp::Cache actor_cache;
  Mlp::Cache critic_cache;
  const Eigen::MatrixXd logits = params.actor.forward(batch.states, grad ? &actor_cache : nullptr);
  const Eigen::MatrixXd values = params.critic.forward(batch.states, grad ? &critic_cache : nullptr);

  auto head = policy_head_terms(
    logits, batch.actions, batch.old_log_probs, batch.advantages, config.clip_epsilon,
    config.entropy_coef);
  const Eigen::RowVectorXd err = values.row(0) - batch.returns.transpose();
  const double n = static_cast<double>(batch.size());

  LossTerms t;
  t.policy = head.policy_loss;
  t.value = err.squaredNorm() / n;
  t.entropy = head.entropy;
  t.clip_fraction = head.clip_fraction;
  t.approx_kl = head.approx_kl;
  t.total = t.policy + config.value_coef * t.value - config.entropy_coef * t.entropy;

  if (grad) {
    grad->actor = params.actor.backward(actor_cache, head.grad_logits);
    const Eigen::MatrixXd dv = (2.0 * config.value_coef / n) * err;
    grad->critic = params.critic.backward(critic_cache, dv);
  }
  return t;
}

struct UpdateStats
{
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
};

/// Holds optimizer state across updates.
class PpoUpdater
{
public:
  PpoUpdater(const PolicyParams & params, PpoConfig config)
  : config_(std::move(config)), actor_adam_(params.actor), critic_adam_(params.critic)
  {
  }

  /// Normalizes advantages, then epochs of shuffled minibatch Adam steps.
  /// Throws NumericalError (leaving `params` untouched) on a non-finite loss.
  UpdateStats update(PolicyParams & params, PpoBatch batch, Rng & rng)
  {
    normalize_advantages(batch.advantages);
    PolicyParams work = params;
    AdamState actor_adam = actor_adam_;
    AdamState critic_adam = critic_adam_;

    const int n = static_cast<int>(batch.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    UpdateStats stats;
    PolicyParams grad;
    for (int epoch = 0; epoch < config_.epochs_per_update; ++epoch) {
      for (int i = n - 1; i > 0; --i) {
        std::swap(order[i], order[uniform_index(rng, static_cast<std::size_t>(i) + 1)]);
      }
      for (int start = 0; start < n; start += config_.minibatch_size) {
        const int count = std::min(config_.minibatch_size, n - start);
        const auto mb = batch.gather(std::span<const int>(order).subspan(start, count));
        const auto terms = ppo_loss(work, mb, config_, &grad);
        if (!std::isfinite(terms.total) || !grad.actor.all_finite() || !grad.critic.all_finite()) {
          throw NumericalError("non-finite PPO loss; update aborted");
        }
        const double norm = std::sqrt(grad.actor.squared_norm() + grad.critic.squared_norm());
        if (config_.max_grad_norm > 0.0 && norm > config_.max_grad_norm) {
          grad.actor.scale(config_.max_grad_norm / norm);
          grad.critic.scale(config_.max_grad_norm / norm);
        }
        actor_adam.step(work.actor, grad.actor, config_.learning_rate);
        critic_adam.step(work.critic, grad.critic, config_.learning_rate);

        stats.policy_loss += terms.policy;
        stats.value_loss += terms.value;
        stats.entropy += terms.entropy;
        stats.clip_fraction += terms.clip_fraction;
        stats.approx_kl += terms.approx_kl;
        ++stats.minibatches;
      }
    }
    if (!work.actor.all_finite() || !work.critic.all_finite()) {
      throw NumericalError("non-finite parameters after update; update aborted");
    }
    params = std::move(work);
    actor_adam_ = std::move(actor_adam);
    critic_adam_ = std::move(critic_adam);
    if (stats.minibatches > 0) {
      const double k = 1.0 / stats.minibatches;
      stats.policy_loss *= k;
      stats.value_loss *= k;
      stats.entropy *= k;
      stats.clip_fraction *= k;
      stats.approx_kl *= k;
    }
    return stats;
  }

private:
  PpoConfig config_;
  AdamState actor_adam_;
  AdamState critic_adam_;
};

}  // namespace oppdrive

#endif  // OPPDRIVE__PPO_HPP_
