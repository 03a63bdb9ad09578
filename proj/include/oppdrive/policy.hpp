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

#ifndef OPPDRIVE__POLICY_HPP_
#define OPPDRIVE__POLICY_HPP_

#include "oppdrive/errors.hpp"
#include "oppdrive/kinematics_obs.hpp"
#include "oppdrive/mlp.hpp"
#include "oppdrive/random.hpp"
#include "oppdrive/vehicle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace oppdrive
{

struct PolicyShape
{
  int inputs = 33 * KinematicsObs::kFeatures;
  std::vector<int> hidden{256, 256};
  int actions = kActionCount;

  bool operator==(const PolicyShape &) const = default;

  std::vector<int> actor_sizes() const
  {
    std::vector<int> s{inputs};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(actions);
    return s;
  }

  std::vector<int> critic_sizes() const
  {
    std::vector<int> s{inputs};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(1);
    return s;
  }
};

/// Separate actor (logits) and critic (state value) networks.
struct PolicyParams
{
  Mlp actor;
  Mlp critic;

  bool operator==(const PolicyParams &) const = default;

  PolicyShape shape() const
  {
    const auto a = actor.sizes();
    PolicyShape s;
    s.inputs = a.front();
    s.hidden.assign(a.begin() + 1, a.end() - 1);
    s.actions = a.back();
    return s;
  }

  static PolicyParams zeros(const PolicyShape & shape)
  {
    return {Mlp(shape.actor_sizes()), Mlp(shape.critic_sizes())};
  }

  static PolicyParams initialize(const PolicyShape & shape, Rng & rng)
  {
    PolicyParams p;
    p.actor = Mlp::glorot(shape.actor_sizes(), rng, 0.01);
    p.critic = Mlp::glorot(shape.critic_sizes(), rng, 1.0);
    return p;
  }
};

/// Column-wise softmax, max-shifted.
inline Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd & logits)
{
  Eigen::MatrixXd out = logits;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double m = out.col(c).maxCoeff();
    out.col(c) = (out.col(c).array() - m).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

inline Eigen::MatrixXd log_softmax_columns(const Eigen::MatrixXd & logits)
{
  Eigen::MatrixXd out = logits;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double m = out.col(c).maxCoeff();
    const double lse = m + std::log((out.col(c).array() - m).exp().sum());
    out.col(c).array() -= lse;
  }
  return out;
}

struct PolicyOutput
{
  std::vector<double> probs;
  double value = 0.0;
};

inline PolicyOutput policy_forward(const PolicyParams & params, std::span<const double> state)
{
  if (static_cast<int>(state.size()) != params.actor.input_size()) {
    throw InputError(
      "policy expects " + std::to_string(params.actor.input_size()) + " state features, got " +
      std::to_string(state.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(state.data(), static_cast<Eigen::Index>(state.size()));
  const Eigen::MatrixXd input = x;
  const Eigen::MatrixXd probs = softmax_columns(params.actor.forward(input));
  PolicyOutput out;
  out.probs.assign(probs.data(), probs.data() + probs.size());
  out.value = params.critic.forward(input)(0, 0);
  return out;
}

inline PolicyOutput policy_forward(const PolicyParams & params, const KinematicsObs & state)
{
  return policy_forward(params, state.flat());
}

struct SampledAction
{
  int action = 0;
  double log_prob = 0.0;
};

/// Inverse-CDF categorical draw; zero-probability actions are never chosen.
inline SampledAction sample_action(std::span<const double> probs, Rng & rng)
{
  const double u = uniform01(rng);
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) {
      continue;
    }
    last_positive = static_cast<int>(i);
    cumulative += probs[i];
    if (u < cumulative) {
      return {static_cast<int>(i), std::log(probs[i])};
    }
  }
  return {last_positive, std::log(probs[last_positive])};
}

}  // namespace oppdrive

#endif  // OPPDRIVE__POLICY_HPP_
