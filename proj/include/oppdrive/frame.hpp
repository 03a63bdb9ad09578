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

#ifndef OPPDRIVE__FRAME_HPP_
#define OPPDRIVE__FRAME_HPP_

#include "oppdrive/collision.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/highway.hpp"

#include <png.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace oppdrive
{

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row-major, interleaved.
struct FrameImage
{
  static constexpr int kSize = 224;
  static constexpr int kChannels = 3;

  int width = kSize;
  int height = kSize;
  std::vector<std::uint8_t> pixels = std::vector<std::uint8_t>(kSize * kSize * kChannels, 0);

  bool operator==(const FrameImage &) const = default;

  bool has_standard_shape() const
  {
    return width == kSize && height == kSize &&
           pixels.size() == static_cast<std::size_t>(kSize * kSize * kChannels);
  }

  Rgb pixel(int px, int py) const
  {
    const auto * p = &pixels[(static_cast<std::size_t>(py) * width + px) * kChannels];
    return {p[0], p[1], p[2]};
  }

  void set(int px, int py, Rgb c)
  {
    auto * p = &pixels[(static_cast<std::size_t>(py) * width + px) * kChannels];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }
};

namespace palette
{
inline constexpr Rgb kBackground{24, 24, 24};
inline constexpr Rgb kLaneLine{72, 72, 72};
inline constexpr Rgb kEgo{255, 255, 255};
inline constexpr Rgb kNpc{40, 80, 255};
inline constexpr Rgb kCrashed{230, 30, 30};
}  // namespace palette

struct RenderOptions
{
  double scaling = 10.0;  // pixels per metre
};

/// Ego-centred top-down view: x to the right, lane index increasing downwards.
inline FrameImage render_frame(const WorldState & world, const RenderOptions & opts = {})
{
  FrameImage img;
  const int size = FrameImage::kSize;
  const double half = 0.5 * size;
  const double s = opts.scaling;
  const auto & ego = world.ego();
  const auto & cfg = world.config;

  for (int py = 0; py < size; ++py) {
    for (int px = 0; px < size; ++px) {
      img.set(px, py, palette::kBackground);
    }
  }

  // Lane boundaries: one pixel row per boundary inside the window.
  for (int k = 0; k <= cfg.lane_count; ++k) {
    const double by = (k - 0.5) * cfg.lane_width;
    const int py = static_cast<int>(std::floor((by - ego.y) * s + half));
    if (py < 0 || py >= size) {
      continue;
    }
    const bool edge = (k == 0 || k == cfg.lane_count);
    for (int px = 0; px < size; ++px) {
      if (edge || ((px + static_cast<int>(std::floor(ego.x * s))) / 15) % 2 == 0) {
        img.set(px, py, palette::kLaneLine);
      }
    }
  }

  const double reach = 0.5 * std::hypot(cfg.vehicle_length, cfg.vehicle_width);
  auto draw = [&](const VehicleState & v, Rgb color) {
    const double cx = (v.x - ego.x) * s + half;
    const double cy = (v.y - ego.y) * s + half;
    const double r = reach * s;
    if (cx + r < 0 || cx - r >= size || cy + r < 0 || cy - r >= size) {
      return;
    }
    const auto box = vehicle_box(v, cfg.vehicle_length, cfg.vehicle_width);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(cx + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(cy + r)));
    for (int py = y0; py <= y1; ++py) {
      for (int px = x0; px <= x1; ++px) {
        const Vec2 p{ego.x + (px + 0.5 - half) / s, ego.y + (py + 0.5 - half) / s};
        if (box.contains(p)) {
          img.set(px, py, color);
        }
      }
    }
  };
  for (const auto & v : world.vehicles) {
    if (!v.is_ego) {
      draw(v, v.crashed ? palette::kCrashed : palette::kNpc);
    }
  }
  draw(ego, palette::kEgo);
  return img;
}

inline std::vector<std::uint8_t> encode_png(const FrameImage & frame)
{
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width);
  image.height = static_cast<png_uint_32>(frame.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, frame.pixels.data(), 0, nullptr)) {
    throw PersistenceError(std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, frame.pixels.data(), 0, nullptr)) {
    throw PersistenceError(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

inline FrameImage decode_png(const std::vector<std::uint8_t> & bytes)
{
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw InputError(std::string("png decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  FrameImage frame;
  frame.width = static_cast<int>(image.width);
  frame.height = static_cast<int>(image.height);
  frame.pixels.assign(PNG_IMAGE_SIZE(image), 0);
  if (!png_image_finish_read(&image, nullptr, frame.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw InputError(std::string("png decode failed: ") + image.message);
  }
  return frame;
}

inline void write_png(const FrameImage & frame, const std::string & path)
{
  const auto bytes = encode_png(frame);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw PersistenceError("cannot write '" + path + "'");
  }
}

inline FrameImage read_png(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open image '" + path + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  return decode_png(bytes);
}

}  // namespace oppdrive

#endif  // OPPDRIVE__FRAME_HPP_
