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

#ifndef OPPDRIVE__VIDEO_HPP_
#define OPPDRIVE__VIDEO_HPP_

#include "oppdrive/frame.hpp"

#include <cstddef>
#include <deque>
#include <vector>

namespace oppdrive
{

inline constexpr std::size_t kClipLength = 30;

/// Exactly kClipLength frames, oldest first.
struct VideoClip
{
  std::vector<FrameImage> frames;
};

/// Sliding window over the most recent frames.
class FrameHistory
{
public:
  explicit FrameHistory(std::size_t capacity = kClipLength) : capacity_(capacity) {}

  void push(FrameImage frame)
  {
    frames_.push_back(std::move(frame));
    while (frames_.size() > capacity_) {
      frames_.pop_front();
    }
  }

  void clear() { frames_.clear(); }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const std::deque<FrameImage> & frames() const { return frames_; }

  /// Current window, left-padded with the earliest frame.
  VideoClip clip() const
  {
    VideoClip out;
    if (frames_.empty()) {
      return out;
    }
    out.frames.reserve(capacity_);
    for (std::size_t i = frames_.size(); i < capacity_; ++i) {
      out.frames.push_back(frames_.front());
    }
    out.frames.insert(out.frames.end(), frames_.begin(), frames_.end());
    return out;
  }

private:
  std::size_t capacity_;
  std::deque<FrameImage> frames_;
};

inline VideoClip stack_video(FrameHistory & history, FrameImage current)
{
  history.push(std::move(current));
  return history.clip();
}

}  // namespace oppdrive

#endif  // OPPDRIVE__VIDEO_HPP_
