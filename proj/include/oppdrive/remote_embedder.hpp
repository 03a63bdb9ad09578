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

#ifndef OPPDRIVE__REMOTE_EMBEDDER_HPP_
#define OPPDRIVE__REMOTE_EMBEDDER_HPP_

#include "oppdrive/embedding.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/frame.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace oppdrive
{

/// Environment variable naming the embedding service base URL.
inline constexpr const char * kEndpointEnvVar = "OPPDRIVE_EMBED_ENDPOINT";

struct RemoteOptions
{
  std::string endpoint = "http://127.0.0.1:8765";
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{100};
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{30000};
  std::size_t pool_size = 4;
};

/// Client for the `/embed` + `/info` protocol:
///   request  {"modality": "text"|"image"|"video", "is_goal": bool, "payload": ...}
///   response {"embedding": [real...], "dim": int, "model": string}
/// Image payloads are base64 PNG; video payloads are arrays of them.
class RemoteClient
{
public:
  explicit RemoteClient(RemoteOptions options) : options_(std::move(options)) {}

  const RemoteOptions & options() const { return options_; }

  nlohmann::json info()
  {
    auto res = send([](httplib::Client & c) { return c.Get("/info"); }, "/info");
    try {
      auto body = nlohmann::json::parse(res.body);
      if (!body.contains("modalities") || !body["modalities"].is_object()) {
        throw ProtocolError("/info response lacks a 'modalities' object");
      }
      return body;
    } catch (const nlohmann::json::exception & e) {
      throw ProtocolError(std::string("/info response is not valid JSON: ") + e.what());
    }
  }

  /// Dim and model reported by /info for one modality.
  std::pair<int, std::string> modality_info(std::string_view modality)
  {
    const auto body = info();
    const auto & mods = body["modalities"];
    const std::string key(modality);
    if (!mods.contains(key)) {
      throw InterfaceError("embedding service does not offer modality '" + key + "'");
    }
    const auto & m = mods[key];
    if (!m.contains("dim") || !m["dim"].is_number_integer() || m["dim"].get<int>() <= 0) {
      throw ProtocolError("/info entry for '" + key + "' has no positive integer 'dim'");
    }
    return {m["dim"].get<int>(), m.value("model", std::string("unknown"))};
  }

  EmbeddingVector embed(std::string_view modality, bool is_goal, const nlohmann::json & payload)
  {
    if (!parse_modality(modality)) {
      throw ProtocolError("unknown modality '" + std::string(modality) + "'");
    }
    const nlohmann::json request{
      {"modality", std::string(modality)}, {"is_goal", is_goal}, {"payload", payload}};
    const auto text = request.dump();
    auto res = send(
      [&](httplib::Client & c) { return c.Post("/embed", text, "application/json"); }, "/embed");
    return parse_embed_response(res.body);
  }

  /// One request per payload; results keep request order.
  std::vector<EmbeddingVector> embed_batch(
    std::string_view modality, bool is_goal, const std::vector<nlohmann::json> & payloads)
  {
    std::vector<EmbeddingVector> out;
    out.reserve(payloads.size());
    for (const auto & p : payloads) {
      out.push_back(embed(modality, is_goal, p));
    }
    return out;
  }

  static EmbeddingVector parse_embed_response(const std::string & body)
  {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception & e) {
      throw ProtocolError(std::string("embed response is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("embedding") || !j["embedding"].is_array() ||
        !j.contains("dim") || !j["dim"].is_number_integer() || !j.contains("model") ||
        !j["model"].is_string()) {
      throw ProtocolError("embed response must carry 'embedding', 'dim' and 'model'");
    }
    EmbeddingVector e;
    e.values.reserve(j["embedding"].size());
    for (const auto & v : j["embedding"]) {
      if (!v.is_number()) {
        throw ProtocolError("embed response contains a non-numeric entry");
      }
      e.values.push_back(v.get<double>());
    }
    if (static_cast<long long>(e.dim()) != j["dim"].get<long long>()) {
      throw ProtocolError(
        "embed response dim field " + std::to_string(j["dim"].get<long long>()) +
        " disagrees with vector length " + std::to_string(e.dim()));
    }
    try {
      e.validate();
    } catch (const InputError & err) {
      throw ProtocolError(std::string("embed response: ") + err.what());
    }
    return e;
  }

private:
  template <typename Call>
  httplib::Response send(Call && call, const std::string & route)
  {
    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(options_.base_backoff * (1 << (attempt - 1)));
      }
      auto lease = acquire();
      auto result = call(*lease.client);
      if (!result) {
        last_error = httplib::to_string(result.error());
        lease.discard = true;
        continue;
      }
      const int status = result->status;
      if (status == 200) {
        return *result;
      }
      if (status >= 500) {
        last_error = "HTTP " + std::to_string(status);
        continue;
      }
      throw ProtocolError(
        route + " rejected with HTTP " + std::to_string(status) + ": " + result->body);
    }
    throw AvailabilityError(
      "embedding service at " + options_.endpoint + route + " unavailable after " +
      std::to_string(options_.max_retries + 1) + " attempts: " + last_error);
  }

  struct Lease
  {
    RemoteClient * owner;
    std::unique_ptr<httplib::Client> client;
    bool discard = false;

    Lease(RemoteClient * o, std::unique_ptr<httplib::Client> c) : owner(o), client(std::move(c)) {}
    Lease(const Lease &) = delete;
    Lease & operator=(const Lease &) = delete;
    ~Lease() { owner->release(std::move(client), discard); }
  };

  Lease acquire()
  {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !idle_.empty() || leased_ < options_.pool_size; });
    ++leased_;
    if (!idle_.empty()) {
      auto c = std::move(idle_.back());
      idle_.pop_back();
      return Lease(this, std::move(c));
    }
    lock.unlock();
    auto c = std::make_unique<httplib::Client>(options_.endpoint);
    c->set_connection_timeout(options_.connect_timeout);
    c->set_read_timeout(options_.read_timeout);
    c->set_keep_alive(true);
    return Lease(this, std::move(c));
  }

  void release(std::unique_ptr<httplib::Client> c, bool discard)
  {
    {
      std::lock_guard lock(mutex_);
      --leased_;
      if (!discard) {
        idle_.push_back(std::move(c));
      }
    }
    cv_.notify_one();
  }

  RemoteOptions options_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
  std::size_t leased_ = 0;
};

inline std::string base64_png(const FrameImage & frame)
{
  const auto bytes = encode_png(frame);
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

/// Wire payload for an observation of the given modality.
inline nlohmann::json encode_payload(Modality modality, const Observation & obs)
{
  switch (modality) {
    case Modality::Text:
      if (const auto * t = std::get_if<std::string>(&obs)) {
        return *t;
      }
      break;
    case Modality::Image:
      if (const auto * f = std::get_if<FrameImage>(&obs)) {
        return base64_png(*f);
      }
      break;
    case Modality::Video:
      if (const auto * clip = std::get_if<VideoClip>(&obs)) {
        auto arr = nlohmann::json::array();
        for (const auto & f : clip->frames) {
          arr.push_back(base64_png(f));
        }
        return arr;
      }
      break;
  }
  throw InterfaceError("observation does not match modality '" + std::string(to_string(modality)) + "'");
}

inline EmbeddingVector remote_embed(
  RemoteClient & client, std::string_view modality, const Observation & payload)
{
  const auto m = parse_modality(modality);
  if (!m) {
    throw ProtocolError("unknown modality '" + std::string(modality) + "'");
  }
  return client.embed(modality, false, encode_payload(*m, payload));
}

/// Embedder backed by the remote service; goals go through the service's
/// text branch for the same modality.
class RemoteEmbedder final : public Embedder
{
public:
  RemoteEmbedder(std::shared_ptr<RemoteClient> client, Modality modality)
  : client_(std::move(client))
  {
    const auto [dim, model] = client_->modality_info(to_string(modality));
    desc_ = {"remote-" + std::string(to_string(modality)) + ":" + model, modality, dim,
             BackendKind::Remote};
  }

  const BackendDescriptor & descriptor() const override { return desc_; }

  EmbeddingVector embed(const Observation & obs) override
  {
    return checked(remote_embed(*client_, to_string(desc_.modality), obs));
  }

protected:
  EmbeddingVector embed_goal_impl(const GoalSpec & goal) override
  {
    return client_->embed(to_string(desc_.modality), true, goal.goal_text);
  }

private:
  EmbeddingVector checked(EmbeddingVector e) const
  {
    if (static_cast<int>(e.dim()) != desc_.dim) {
      throw InterfaceError(
        "remote backend returned dim " + std::to_string(e.dim()) + ", advertised " +
        std::to_string(desc_.dim));
    }
    return e;
  }

  std::shared_ptr<RemoteClient> client_;
  BackendDescriptor desc_;
};

/// Endpoint from OPPDRIVE_EMBED_ENDPOINT, if set.
inline std::optional<std::string> endpoint_from_environment()
{
  if (const char * v = std::getenv(kEndpointEnvVar); v != nullptr && *v != '\0') {
    return std::string(v);
  }
  return std::nullopt;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__REMOTE_EMBEDDER_HPP_
