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

// Finite-difference check of the PPO loss gradient on a small network.

#ifndef OPPDRIVE_TESTS__GRADIENT_CHECK_HPP_
#define OPPDRIVE_TESTS__GRADIENT_CHECK_HPP_

#include "oppdrive/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gradcheck
{

struct Problem
{
  oppdrive::PolicyParams params;
  oppdrive::PpoBatch batch;
  oppdrive::PpoConfig config;
};

/// 4 inputs, 3 actions, one hidden layer of 6; old log-probs jittered so
/// that some samples sit on the clipped branch.
inline Problem tiny_problem(std::uint64_t seed, int samples = 12)
{
  using namespace oppdrive;
  Rng rng(seed);
  Problem p;
  PolicyShape shape;
  shape.inputs = 4;
  shape.hidden = {6};
  shape.actions = 3;
  p.params.actor = Mlp::glorot(shape.actor_sizes(), rng, 1.0);
  p.params.critic = Mlp::glorot(shape.critic_sizes(), rng, 1.0);
  p.config.clip_epsilon = 0.2;
  p.config.entropy_coef = 0.01;
  p.config.value_coef = 0.5;

  p.batch.states.resize(4, samples);
  for (Eigen::Index i = 0; i < p.batch.states.size(); ++i) p.batch.states.data()[i] = uniform(rng, -1, 1);
  const Eigen::MatrixXd logp = log_softmax_columns(p.params.actor.forward(p.batch.states));
  p.batch.old_log_probs.resize(samples);
  p.batch.advantages.resize(samples);
  p.batch.returns.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const int a = static_cast<int>(uniform_index(rng, 3));
    p.batch.actions.push_back(a);
    p.batch.old_log_probs(i) = logp(a, i) + uniform(rng, -0.5, 0.5);
    p.batch.advantages(i) = uniform(rng, -2, 2);
    p.batch.returns(i) = uniform(rng, -1, 1);
  }
  return p;
}

inline std::vector<double> flatten(oppdrive::PolicyParams p)
{
  std::vector<double> out;
  p.actor.for_each_parameter([&](double & v) { out.push_back(v); });
  p.critic.for_each_parameter([&](double & v) { out.push_back(v); });
  return out;
}

/// ||g_analytic - g_numeric|| / max(||g_analytic||, ||g_numeric||), central
/// differences with step h.
inline double relative_error(const Problem & prob, double h = 1e-6)
{
  using namespace oppdrive;
  PolicyParams grad;
  ppo_loss(prob.params, prob.batch, prob.config, &grad);
  const auto analytic = flatten(grad);

  std::vector<double> numeric;
  PolicyParams probe = prob.params;
  auto visit = [&](Mlp & net) {
    net.for_each_parameter([&](double & w) {
      const double saved = w;
      w = saved + h;
      const double up = ppo_loss(probe, prob.batch, prob.config).total;
      w = saved - h;
      const double down = ppo_loss(probe, prob.batch, prob.config).total;
      w = saved;
      numeric.push_back((up - down) / (2 * h));
    });
  };
  visit(probe.actor);
  visit(probe.critic);

  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-300});
}

}  // namespace gradcheck

#endif  // OPPDRIVE_TESTS__GRADIENT_CHECK_HPP_
