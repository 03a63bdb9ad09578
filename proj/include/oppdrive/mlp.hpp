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

#ifndef OPPDRIVE__MLP_HPP_
#define OPPDRIVE__MLP_HPP_

#include "oppdrive/errors.hpp"
#include "oppdrive/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace oppdrive
{

struct DenseLayer
{
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  bool operator==(const DenseLayer & o) const { return weight == o.weight && bias == o.bias; }
};

/// Fully connected network, tanh on hidden layers, linear output.
/// Inputs and outputs are column-major batches (features x batch).
class Mlp
{
public:
  struct Cache
  {
    std::vector<Eigen::MatrixXd> activations;  // input, then every layer output
  };

  Mlp() = default;

  /// Zero-initialized network with the given layer widths.
  explicit Mlp(const std::vector<int> & sizes)
  {
    if (sizes.size() < 2) {
      throw InputError("an MLP needs at least input and output sizes");
    }
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      layers_.push_back({Eigen::MatrixXd::Zero(sizes[i + 1], sizes[i]),
                         Eigen::VectorXd::Zero(sizes[i + 1])});
    }
  }

  /// Glorot-uniform weights, zero biases; the last layer is scaled by `output_gain`.
  static Mlp glorot(const std::vector<int> & sizes, Rng & rng, double output_gain = 1.0)
  {
    Mlp net(sizes);
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
      auto & w = net.layers_[l].weight;
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols())) *
                           (l + 1 == net.layers_.size() ? output_gain : 1.0);
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          w(r, c) = uniform(rng, -limit, limit);
        }
      }
    }
    return net;
  }

  bool operator==(const Mlp &) const = default;

  std::vector<DenseLayer> & layers() { return layers_; }
  const std::vector<DenseLayer> & layers() const { return layers_; }

  int input_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
  int output_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

  std::vector<int> sizes() const
  {
    std::vector<int> out;
    if (!layers_.empty()) out.push_back(input_size());
    for (const auto & l : layers_) out.push_back(static_cast<int>(l.weight.rows()));
    return out;
  }

  Eigen::MatrixXd forward(const Eigen::MatrixXd & x, Cache * cache = nullptr) const
  {
    if (x.rows() != input_size()) {
      throw InputError(
        "network expects " + std::to_string(input_size()) + " inputs, got " + std::to_string(x.rows()));
    }
    if (cache) {
      cache->activations.clear();
      cache->activations.push_back(x);
    }
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::MatrixXd z = layers_[l].weight * h;
      z.colwise() += layers_[l].bias;
      if (l + 1 < layers_.size()) {
        z = z.array().tanh().matrix();
      }
      if (cache) {
        cache->activations.push_back(z);
      }
      h = std::move(z);
    }
    return h;
  }

  /// Parameter gradient (same shape as *this) given dLoss/dOutput.
  Mlp backward(const Cache & cache, const Eigen::MatrixXd & grad_output) const
  {
    Mlp grad;
    grad.layers_.resize(layers_.size());
    Eigen::MatrixXd delta = grad_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto & input = cache.activations[l];
      grad.layers_[l].weight = delta * input.transpose();
      grad.layers_[l].bias = delta.rowwise().sum();
      if (l > 0) {
        Eigen::MatrixXd back = layers_[l].weight.transpose() * delta;
        delta = (back.array() * (1.0 - input.array().square())).matrix();
      }
    }
    return grad;
  }

  double squared_norm() const
  {
    double s = 0.0;
    for (const auto & l : layers_) s += l.weight.squaredNorm() + l.bias.squaredNorm();
    return s;
  }

  bool all_finite() const
  {
    for (const auto & l : layers_) {
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
  }

  void scale(double s)
  {
    for (auto & l : layers_) {
      l.weight *= s;
      l.bias *= s;
    }
  }

  std::size_t parameter_count() const
  {
    std::size_t n = 0;
    for (const auto & l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  /// Visit every scalar parameter in a fixed order.
  template <typename F>
  void for_each_parameter(F && f)
  {
    for (auto & l : layers_) {
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) f(l.weight.data()[i]);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) f(l.bias.data()[i]);
    }
  }

private:
  std::vector<DenseLayer> layers_;
};

/// Adam moments for one network.
struct AdamState
{
  Mlp m;
  Mlp v;
  long long t = 0;

  explicit AdamState(const Mlp & like = {}) : m(like.sizes().size() >= 2 ? Mlp(like.sizes()) : Mlp()), v(m) {}

  void step(Mlp & params, const Mlp & grad, double lr, double beta1 = 0.9, double beta2 = 0.999,
            double eps = 1e-8)
  {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t l = 0; l < params.layers().size(); ++l) {
      auto update = [&](auto & p, const auto & g, auto & m1, auto & m2) {
        m1 = beta1 * m1 + (1.0 - beta1) * g;
        m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseProduct(g);
        p.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
      };
      update(params.layers()[l].weight, grad.layers()[l].weight, m.layers()[l].weight, v.layers()[l].weight);
      update(params.layers()[l].bias, grad.layers()[l].bias, m.layers()[l].bias, v.layers()[l].bias);
    }
  }
};

}  // namespace oppdrive

#endif  // OPPDRIVE__MLP_HPP_
