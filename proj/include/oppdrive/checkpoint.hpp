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

#ifndef OPPDRIVE__CHECKPOINT_HPP_
#define OPPDRIVE__CHECKPOINT_HPP_

#include "oppdrive/embedding.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/policy.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oppdrive
{

// Layout (little-endian):
//   magic "OPDCKPT\0", u32 version, u32 block count,
//   per block: u32 name length, name, u32 rows, u32 cols, rows*cols f64 (column-major),
//   u64 FNV-1a of every preceding byte.
inline constexpr char kCheckpointMagic[8] = {'O', 'P', 'D', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail
{

template <typename T>
void put(std::string & out, T value)
{
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader
{
public:
  explicit Reader(const std::string & data) : data_(data) {}

  template <typename T>
  T get(const char * what)
  {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string bytes(std::size_t n, const char * what)
  {
    need(n, what);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t position() const { return pos_; }

private:
  void need(std::size_t n, const char * what) const
  {
    if (pos_ + n > data_.size()) {
      throw PersistenceError(std::string("checkpoint truncated while reading ") + what);
    }
  }

  const std::string & data_;
  std::size_t pos_ = 0;
};

inline void put_matrix(std::string & out, const std::string & name, const Eigen::MatrixXd & m)
{
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  out.append(reinterpret_cast<const char *>(m.data()), sizeof(double) * m.size());
}

inline std::string shape_string(const std::vector<int> & sizes)
{
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) s += (i ? "-" : "") + std::to_string(sizes[i]);
  return s;
}

}  // namespace detail

inline std::string serialize_checkpoint(const PolicyParams & params)
{
  std::vector<std::pair<std::string, const Eigen::MatrixXd *>> blocks;
  std::vector<Eigen::MatrixXd> biases;
  biases.reserve(params.actor.layers().size() + params.critic.layers().size());
  for (const auto * net : {&params.actor, &params.critic}) {
    const std::string prefix = net == &params.actor ? "actor" : "critic";
    for (std::size_t l = 0; l < net->layers().size(); ++l) {
      blocks.emplace_back(prefix + "." + std::to_string(l) + ".weight", &net->layers()[l].weight);
      biases.emplace_back(net->layers()[l].bias);
      blocks.emplace_back(prefix + "." + std::to_string(l) + ".bias", &biases.back());
    }
  }
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto & [name, m] : blocks) {
    detail::put_matrix(out, name, *m);
  }
  detail::put<std::uint64_t>(out, fnv1a64(out));
  return out;
}

inline PolicyParams deserialize_checkpoint(const std::string & data)
{
  detail::Reader r(data);
  if (r.bytes(sizeof(kCheckpointMagic), "magic") != std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw PersistenceError("not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw PersistenceError(
      "checkpoint version " + std::to_string(version) + " unsupported (expected " +
      std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = r.get<std::uint32_t>("block count");
  std::map<std::string, Eigen::MatrixXd> blocks;
  for (std::uint32_t b = 0; b < count; ++b) {
    const auto len = r.get<std::uint32_t>("block name length");
    const auto name = r.bytes(len, "block name");
    const auto rows = r.get<std::uint32_t>("block rows");
    const auto cols = r.get<std::uint32_t>("block cols");
    const auto raw = r.bytes(sizeof(double) * static_cast<std::size_t>(rows) * cols, "block data");
    Eigen::MatrixXd m(rows, cols);
    std::memcpy(m.data(), raw.data(), raw.size());
    blocks[name] = std::move(m);
  }
  const std::size_t body = r.position();
  const auto checksum = r.get<std::uint64_t>("checksum");
  if (checksum != fnv1a64(std::string_view(data).substr(0, body))) {
    throw PersistenceError("checkpoint checksum mismatch (corrupt file)");
  }

  PolicyParams params;
  for (auto * net : {&params.actor, &params.critic}) {
    const std::string prefix = net == &params.actor ? "actor" : "critic";
    for (int l = 0;; ++l) {
      const auto w = blocks.find(prefix + "." + std::to_string(l) + ".weight");
      const auto bias = blocks.find(prefix + "." + std::to_string(l) + ".bias");
      if (w == blocks.end()) break;
      if (bias == blocks.end() || bias->second.cols() != 1 || bias->second.rows() != w->second.rows()) {
        throw PersistenceError("checkpoint block " + prefix + "." + std::to_string(l) + ".bias missing or misshapen");
      }
      if (!net->layers().empty() && net->layers().back().weight.rows() != w->second.cols()) {
        throw PersistenceError("checkpoint layer " + prefix + "." + std::to_string(l) + " does not chain");
      }
      net->layers().push_back({w->second, bias->second.col(0)});
    }
    if (net->layers().empty()) {
      throw PersistenceError("checkpoint has no " + prefix + " blocks");
    }
  }
  if (params.actor.input_size() != params.critic.input_size() || params.critic.output_size() != 1) {
    throw PersistenceError("checkpoint actor/critic shapes are inconsistent");
  }
  return params;
}

inline void save_checkpoint(const PolicyParams & params, const std::filesystem::path & path)
{
  const auto data = serialize_checkpoint(params);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
      throw PersistenceError("cannot write checkpoint '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw PersistenceError("cannot move checkpoint into place: " + ec.message());
  }
}

inline PolicyParams load_checkpoint(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw PersistenceError("cannot open checkpoint '" + path.string() + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

/// Load and require a specific architecture.
inline PolicyParams load_checkpoint(const std::filesystem::path & path, const PolicyShape & expected)
{
  auto params = load_checkpoint(path);
  const auto got = params.shape();
  if (!(got == expected)) {
    throw PersistenceError(
      "checkpoint shape mismatch: file has actor " + detail::shape_string(params.actor.sizes()) +
      ", expected " + detail::shape_string(expected.actor_sizes()));
  }
  return params;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__CHECKPOINT_HPP_
