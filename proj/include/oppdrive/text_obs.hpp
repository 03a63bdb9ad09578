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

#ifndef OPPDRIVE__TEXT_OBS_HPP_
#define OPPDRIVE__TEXT_OBS_HPP_

#include "oppdrive/config_file.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/ttc.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace oppdrive
{

inline constexpr double kTtcThreshold = 5.0;

/// One decimal digit, e.g. 4 -> "4.0".
inline std::string format_ttc(double ttc)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", ttc);
  return buf;
}

inline std::string same_lane_sentence(double ttc)
{
  return "A collision will be happening in " + format_ttc(ttc) + "s.";
}

inline std::string no_collision_sentence(double threshold = kTtcThreshold)
{
  return "No foreseeable collision in " + format_real(threshold) + "s.";
}

inline std::string lane_change_sentence(double ttc, LaneRelation side)
{
  return "A collision would happen in " + format_ttc(ttc) + "s if ego makes a " +
         std::string(to_string(side)) + " lane change.";
}

/// Same-lane sentence first (nearest threat or the all-clear), then left,
/// then right lane-change threats, each side by increasing ttc.
inline std::string describe_text(const TtcReport & report, double threshold = kTtcThreshold)
{
  std::optional<double> same;
  std::vector<double> left;
  std::vector<double> right;
  for (const auto & e : report.entries) {
    if (!(e.ttc < threshold)) {
      continue;
    }
    switch (e.relation) {
      case LaneRelation::Same:
        if (e.ahead) {
          same = same ? std::min(*same, e.ttc) : e.ttc;
        }
        break;
      case LaneRelation::Left:
        left.push_back(e.ttc);
        break;
      case LaneRelation::Right:
        right.push_back(e.ttc);
        break;
    }
  }
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());

  std::string text = same ? same_lane_sentence(*same) : no_collision_sentence(threshold);
  for (double t : left) {
    text += ' ' + lane_change_sentence(t, LaneRelation::Left);
  }
  for (double t : right) {
    text += ' ' + lane_change_sentence(t, LaneRelation::Right);
  }
  return text;
}

/// Structured content of a text observation.
struct ParsedText
{
  std::optional<double> same_lane;  // empty for the all-clear sentence
  std::vector<double> left;
  std::vector<double> right;

  bool operator==(const ParsedText &) const = default;
};

/// Inverse of describe_text. Throws InputError on text outside the grammar.
inline ParsedText parse_text(std::string_view text)
{
  static const std::regex sentence(
    R"(A collision will be happening in (\d+\.\d)s\.|No foreseeable collision in ([0-9.]+)s\.|A collision would happen in (\d+\.\d)s if ego makes a (left|right) lane change\.)");
  ParsedText out;
  bool first = true;
  std::size_t pos = 0;
  const std::string s(text);
  while (pos < s.size()) {
    if (!first) {
      if (s[pos] != ' ') {
        throw InputError("text observation: expected single space at offset " + std::to_string(pos));
      }
      ++pos;
    }
    std::smatch m;
    if (!std::regex_search(s.cbegin() + pos, s.cend(), m, sentence,
                           std::regex_constants::match_continuous)) {
      throw InputError("text observation: unrecognized sentence at offset " + std::to_string(pos));
    }
    if (first) {
      if (m[1].matched) {
        out.same_lane = std::stod(m[1].str());
      } else if (!m[2].matched) {
        throw InputError("text observation must start with the same-lane sentence");
      }
    } else {
      if (!m[3].matched) {
        throw InputError("text observation: same-lane sentence out of order");
      }
      (m[4].str() == "left" ? out.left : out.right).push_back(std::stod(m[3].str()));
    }
    pos += static_cast<std::size_t>(m.length(0));
    first = false;
  }
  if (first) {
    throw InputError("text observation is empty");
  }
  return out;
}

/// Every single template sentence for ttc in {0.1, ..., 5.0}.
inline std::vector<std::string> text_grammar_corpus()
{
  std::vector<std::string> out{no_collision_sentence()};
  for (int k = 1; k <= 50; ++k) {
    const double ttc = k / 10.0;
    out.push_back(same_lane_sentence(ttc));
    out.push_back(lane_change_sentence(ttc, LaneRelation::Left));
    out.push_back(lane_change_sentence(ttc, LaneRelation::Right));
  }
  return out;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__TEXT_OBS_HPP_
