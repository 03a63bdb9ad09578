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

#ifndef OPPDRIVE__EMBEDDING_HPP_
#define OPPDRIVE__EMBEDDING_HPP_

#include "oppdrive/errors.hpp"
#include "oppdrive/frame.hpp"
#include "oppdrive/highway.hpp"
#include "oppdrive/video.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace oppdrive
{

enum class Modality { Text, Image, Video };

inline std::string_view to_string(Modality m)
{
  switch (m) {
    case Modality::Text:
      return "text";
    case Modality::Image:
      return "image";
    case Modality::Video:
      return "video";
  }
  return "?";
}

inline std::optional<Modality> parse_modality(std::string_view s)
{
  if (s == "text") return Modality::Text;
  if (s == "image") return Modality::Image;
  if (s == "video") return Modality::Video;
  return std::nullopt;
}

enum class GoalPolarity { Opposite, Target };

inline std::string_view to_string(GoalPolarity p)
{
  return p == GoalPolarity::Opposite ? "opposite" : "target";
}

inline std::optional<GoalPolarity> parse_polarity(std::string_view s)
{
  if (s == "opposite") return GoalPolarity::Opposite;
  if (s == "target") return GoalPolarity::Target;
  return std::nullopt;
}

struct EmbeddingVector
{
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }

  double norm() const
  {
    double s = 0.0;
    for (double v : values) {
      s += v * v;
    }
    return std::sqrt(s);
  }

  /// Finite entries and a non-zero norm.
  void validate() const
  {
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw InputError("embedding has a non-finite entry");
      }
    }
    if (!(norm() > 0.0)) {
      throw InputError("embedding has zero norm");
    }
  }
};

inline void normalize_in_place(EmbeddingVector & e)
{
  const double n = e.norm();
  if (!(n > 0.0)) {
    throw InputError("cannot normalize a zero embedding");
  }
  for (double & v : e.values) {
    v /= n;
  }
}

/// The linguistic goal an observation is compared against.
struct GoalSpec
{
  Modality modality = Modality::Text;
  std::string goal_text;
  GoalPolarity polarity = GoalPolarity::Opposite;

  static GoalSpec defaults(Modality modality, GoalPolarity polarity)
  {
    const bool text = modality == Modality::Text;
    std::string goal;
    if (polarity == GoalPolarity::Opposite) {
      goal = text ? "A collision is happening." : "White car collides with a blue car.";
    } else {
      goal = text ? "Ego is driving safely." : "White car drives safely.";
    }
    return {modality, goal, polarity};
  }
};

enum class BackendKind { Reference, Remote };

struct BackendDescriptor
{
  std::string name;
  Modality modality = Modality::Text;
  int dim = 0;
  BackendKind kind = BackendKind::Reference;
};

using Observation = std::variant<std::string, FrameImage, VideoClip>;

/// Encoder for one modality: observations on one side, goals on the other.
class Embedder
{
public:
  virtual ~Embedder() = default;
  virtual const BackendDescriptor & descriptor() const = 0;
  virtual EmbeddingVector embed(const Observation & obs) = 0;

protected:
  friend EmbeddingVector embed_goal(Embedder & backend, const GoalSpec & goal);
  virtual EmbeddingVector embed_goal_impl(const GoalSpec & goal) = 0;
};

inline EmbeddingVector embed_goal(Embedder & backend, const GoalSpec & goal)
{
  const auto & d = backend.descriptor();
  if (d.modality != goal.modality) {
    throw InterfaceError(
      "goal modality '" + std::string(to_string(goal.modality)) + "' does not match backend '" +
      d.name + "' (" + std::string(to_string(d.modality)) + ")");
  }
  auto e = backend.embed_goal_impl(goal);
  if (static_cast<int>(e.dim()) != d.dim) {
    throw InterfaceError(
      "backend '" + d.name + "' returned dim " + std::to_string(e.dim()) + ", descriptor says " +
      std::to_string(d.dim));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Reference backends: deterministic, dependency-free stand-ins.

inline constexpr int kTextDim = 16384;
inline constexpr int kPoolGrid = 16;
inline constexpr int kImageDim = kPoolGrid * kPoolGrid * FrameImage::kChannels;

inline std::uint64_t fnv1a64(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Lowercased words with punctuation removed, except '.' between digits.
inline std::vector<std::string> text_words(std::string_view text)
{
  std::string cleaned;
  cleaned.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isalnum(c)) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      cleaned.push_back(' ');
    } else if (c == '.' && i > 0 && i + 1 < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
               std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      cleaned.push_back('.');
    }
  }
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    const auto start = cleaned.find_first_not_of(' ', pos);
    if (start == std::string::npos) {
      break;
    }
    const auto end = cleaned.find(' ', start);
    words.push_back(cleaned.substr(start, end - start));
    pos = end == std::string::npos ? cleaned.size() : end;
  }
  return words;
}

/// Hashed unigram + bigram counts, L2-normalized.
inline EmbeddingVector embed_text_ref(std::string_view text)
{
  const auto words = text_words(text);
  if (words.empty()) {
    throw InputError("cannot embed empty text");
  }
  EmbeddingVector e{std::vector<double>(kTextDim, 0.0)};
  for (std::size_t i = 0; i < words.size(); ++i) {
    e.values[fnv1a64(words[i]) % kTextDim] += 1.0;
    if (i + 1 < words.size()) {
      e.values[fnv1a64(words[i] + ' ' + words[i + 1]) % kTextDim] += 1.0;
    }
  }
  normalize_in_place(e);
  return e;
}

/// 16x16 average-pooled RGB grid, mean-centred, L2-normalized.
inline EmbeddingVector embed_image_ref(const FrameImage & frame)
{
  if (!frame.has_standard_shape()) {
    throw InputError(
      "image embedding expects 224x224x3, got " + std::to_string(frame.width) + "x" +
      std::to_string(frame.height));
  }
  constexpr int cell = FrameImage::kSize / kPoolGrid;
  EmbeddingVector e{std::vector<double>(kImageDim, 0.0)};
  for (int py = 0; py < FrameImage::kSize; ++py) {
    for (int px = 0; px < FrameImage::kSize; ++px) {
      const auto p = frame.pixel(px, py);
      const int base = ((py / cell) * kPoolGrid + (px / cell)) * FrameImage::kChannels;
      for (int c = 0; c < FrameImage::kChannels; ++c) {
        e.values[base + c] += p[c];
      }
    }
  }
  double mean = 0.0;
  for (auto & v : e.values) {
    v /= cell * cell;
    mean += v;
  }
  mean /= kImageDim;
  for (auto & v : e.values) {
    v -= mean;
  }
  normalize_in_place(e);
  return e;
}

/// Mean of the per-frame image embeddings, re-normalized.
inline EmbeddingVector embed_video_ref(const VideoClip & clip)
{
  if (clip.frames.size() != kClipLength) {
    throw InputError(
      "video embedding expects " + std::to_string(kClipLength) + " frames, got " +
      std::to_string(clip.frames.size()));
  }
  EmbeddingVector e{std::vector<double>(kImageDim, 0.0)};
  for (const auto & f : clip.frames) {
    const auto fe = embed_image_ref(f);
    for (int i = 0; i < kImageDim; ++i) {
      e.values[i] += fe.values[i];
    }
  }
  for (auto & v : e.values) {
    v /= static_cast<double>(kClipLength);
  }
  normalize_in_place(e);
  return e;
}

/// Scene standing in for a visual goal: ego overlapping a blue npc
/// (opposite) or the ego cruising alone (target).
inline WorldState goal_exemplar_world(GoalPolarity polarity)
{
  WorldState world;
  world.config.spawn_count = 0;
  VehicleState ego;
  ego.is_ego = true;
  ego.lane_index = ego.target_lane = 1;
  ego.y = world.lane_center(1);
  ego.speed = ego.target_speed = 25.0;
  world.vehicles.push_back(ego);
  if (polarity == GoalPolarity::Opposite) {
    VehicleState npc = ego;
    npc.id = 1;
    npc.is_ego = false;
    npc.x = 0.6 * world.config.vehicle_length;
    npc.y += 0.3 * world.config.vehicle_width;
    npc.heading = 0.2;
    world.vehicles.push_back(npc);
  }
  return world;
}

inline FrameImage goal_exemplar_frame(GoalPolarity polarity)
{
  return render_frame(goal_exemplar_world(polarity));
}

class ReferenceTextEmbedder final : public Embedder
{
public:
  const BackendDescriptor & descriptor() const override { return desc_; }

  EmbeddingVector embed(const Observation & obs) override
  {
    const auto * text = std::get_if<std::string>(&obs);
    if (text == nullptr) {
      throw InterfaceError("text backend received a non-text observation");
    }
    return embed_text_ref(*text);
  }

protected:
  EmbeddingVector embed_goal_impl(const GoalSpec & goal) override
  {
    return embed_text_ref(goal.goal_text);
  }

private:
  BackendDescriptor desc_{"reference-text", Modality::Text, kTextDim, BackendKind::Reference};
};

class ReferenceImageEmbedder final : public Embedder
{
public:
  const BackendDescriptor & descriptor() const override { return desc_; }

  EmbeddingVector embed(const Observation & obs) override
  {
    const auto * frame = std::get_if<FrameImage>(&obs);
    if (frame == nullptr) {
      throw InterfaceError("image backend received a non-image observation");
    }
    return embed_image_ref(*frame);
  }

protected:
  EmbeddingVector embed_goal_impl(const GoalSpec & goal) override
  {
    return embed_image_ref(goal_exemplar_frame(goal.polarity));
  }

private:
  BackendDescriptor desc_{"reference-image", Modality::Image, kImageDim, BackendKind::Reference};
};

class ReferenceVideoEmbedder final : public Embedder
{
public:
  const BackendDescriptor & descriptor() const override { return desc_; }

  EmbeddingVector embed(const Observation & obs) override
  {
    const auto * clip = std::get_if<VideoClip>(&obs);
    if (clip == nullptr) {
      throw InterfaceError("video backend received a non-video observation");
    }
    return embed_video_ref(*clip);
  }

protected:
  EmbeddingVector embed_goal_impl(const GoalSpec & goal) override
  {
    VideoClip clip;
    clip.frames.assign(kClipLength, goal_exemplar_frame(goal.polarity));
    return embed_video_ref(clip);
  }

private:
  BackendDescriptor desc_{"reference-video", Modality::Video, kImageDim, BackendKind::Reference};
};

inline std::shared_ptr<Embedder> make_reference_embedder(Modality modality)
{
  switch (modality) {
    case Modality::Text:
      return std::make_shared<ReferenceTextEmbedder>();
    case Modality::Image:
      return std::make_shared<ReferenceImageEmbedder>();
    case Modality::Video:
      return std::make_shared<ReferenceVideoEmbedder>();
  }
  return nullptr;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__EMBEDDING_HPP_
