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

// Reference computations written independently of the library, used as
// test oracles. Nothing here calls into oppdrive except for plain types.

#ifndef OPPDRIVE_TESTS__ORACLES_HPP_
#define OPPDRIVE_TESTS__ORACLES_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oracle
{

struct Rect
{
  double x, y, heading, length, width;
};

/// Is (px, py) inside r (closed)? Local frame by explicit rotation.
inline bool rect_contains(const Rect & r, double px, double py)
{
  const double dx = px - r.x;
  const double dy = py - r.y;
  const double c = std::cos(r.heading);
  const double s = std::sin(r.heading);
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  const double eps = 1e-12;
  return std::abs(u) <= r.length / 2 + eps && std::abs(v) <= r.width / 2 + eps;
}

/// Points on the boundary of r, `per_metre` samples per metre of edge.
inline std::vector<std::pair<double, double>> boundary_samples(const Rect & r, int per_metre)
{
  std::vector<std::pair<double, double>> pts;
  const double c = std::cos(r.heading);
  const double s = std::sin(r.heading);
  auto world = [&](double u, double v) { return std::make_pair(r.x + c * u - s * v, r.y + s * u + c * v); };
  const double hl = r.length / 2;
  const double hw = r.width / 2;
  const int nl = static_cast<int>(r.length * per_metre);
  const int nw = static_cast<int>(r.width * per_metre);
  for (int i = 0; i <= nl; ++i) {
    const double u = -hl + r.length * i / nl;
    pts.push_back(world(u, -hw));
    pts.push_back(world(u, hw));
  }
  for (int i = 0; i <= nw; ++i) {
    const double v = -hw + r.width * i / nw;
    pts.push_back(world(-hl, v));
    pts.push_back(world(hl, v));
  }
  return pts;
}

/// Two convex sets intersect iff a boundary point of one lies in the other.
inline bool sampled_overlap(const Rect & a, const Rect & b, int per_metre = 400)
{
  for (const auto & [x, y] : boundary_samples(a, per_metre)) {
    if (rect_contains(b, x, y)) return true;
  }
  for (const auto & [x, y] : boundary_samples(b, per_metre)) {
    if (rect_contains(a, x, y)) return true;
  }
  return false;
}

/// Intelligent Driver Model, written out term by term.
inline double idm(double v, double v0, double a_max, double b, double s0, double T, double gap, double dv)
{
  const double s_star = s0 + v * T + v * dv / (2.0 * std::sqrt(a_max * b));
  return a_max * (1.0 - std::pow(v / v0, 4.0) - (s_star / gap) * (s_star / gap));
}

/// Tokens: lowercase, punctuation dropped except a '.' between two digits.
inline std::vector<std::string> tokens(const std::string & text)
{
  std::string kept;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char ch = static_cast<unsigned char>(text[i]);
    const bool digit_before = i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
    const bool digit_after = i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (std::isalpha(ch) || std::isdigit(ch)) kept += static_cast<char>(std::tolower(ch));
    else if (std::isspace(ch)) kept += ' ';
    else if (ch == '.' && digit_before && digit_after) kept += '.';
  }
  std::istringstream in(kept);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

/// Unigram + bigram counts keyed by the token strings themselves.
inline std::map<std::string, double> token_counts(const std::string & text)
{
  const auto w = tokens(text);
  std::map<std::string, double> counts;
  for (std::size_t i = 0; i < w.size(); ++i) {
    counts["1:" + w[i]] += 1.0;
    if (i + 1 < w.size()) counts["2:" + w[i] + "|" + w[i + 1]] += 1.0;
  }
  return counts;
}

inline double sparse_cosine(const std::string & a, const std::string & b)
{
  const auto ca = token_counts(a);
  const auto cb = token_counts(b);
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto & [k, v] : ca) {
    na += v * v;
    if (auto it = cb.find(k); it != cb.end()) dot += v * it->second;
  }
  for (const auto & [k, v] : cb) nb += v * v;
  return dot / std::sqrt(na * nb);
}

/// A_t = sum_k (gamma lambda)^(k-t) delta_k, truncated at the first done.
inline std::vector<double> gae_nested_sum(
  const std::vector<double> & r, const std::vector<double> & v, const std::vector<int> & done,
  double bootstrap, double gamma, double lambda)
{
  const std::size_t n = r.size();
  std::vector<double> delta(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double next_v = k + 1 < n ? v[k + 1] : bootstrap;
    delta[k] = r[k] + gamma * next_v * (done[k] ? 0.0 : 1.0) - v[k];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += weight * delta[k];
      if (done[k]) break;
      weight *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace oracle

#endif  // OPPDRIVE_TESTS__ORACLES_HPP_
