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

// In-process stand-in for the embedding service, for client tests.

#ifndef OPPDRIVE_TESTS__MOCK_SERVICE_HPP_
#define OPPDRIVE_TESTS__MOCK_SERVICE_HPP_

#include <httplib.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <algorithm>
#include <string>
#include <thread>
#include <vector>

namespace mock
{

/// Deterministic vector for a payload: dim values seeded from its dump.
inline std::vector<double> fake_embedding(const std::string & key, int dim)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : key) h = (h ^ c) * 1099511628211ULL;
  std::vector<double> out(dim);
  for (int i = 0; i < dim; ++i) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 29;
    out[i] = static_cast<double>(h % 2001) / 1000.0 - 1.0;
  }
  out[0] += 3.0;  // never all-zero
  return out;
}

class EmbedService
{
public:
  int dim = 8;
  int reported_dim = -1;        // /embed claims this dim when >= 0
  std::atomic<int> fail_next{0};  // answer this many /embed calls with 503
  int reject_status = 0;        // answer /embed with this status when non-zero
  bool malformed = false;       // answer /embed with garbage
  std::atomic<int> embed_calls{0};
  std::vector<nlohmann::json> requests;

  EmbedService()
  {
    server_.Get("/info", [this](const httplib::Request &, httplib::Response & res) {
      nlohmann::json mods;
      for (const char * m : {"text", "image", "video"}) mods[m] = {{"dim", dim}, {"model", "mock"}};
      res.set_content(nlohmann::json{{"modalities", mods}}.dump(), "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request & req, httplib::Response & res) {
      ++embed_calls;
      if (fail_next.fetch_sub(1) > 0) {
        res.status = 503;
        return;
      }
      fail_next = std::max(fail_next.load(), 0);
      if (reject_status != 0) {
        res.status = reject_status;
        res.set_content("rejected", "text/plain");
        return;
      }
      if (malformed) {
        res.set_content("{\"embedding\": [1, 2", "application/json");
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      {
        std::lock_guard lock(mutex_);
        requests.push_back(body);
      }
      const auto key = body["payload"].dump();
      auto values = fake_embedding(key, dim);
      if (reported_dim >= 0) values.resize(reported_dim, 0.5);
      res.set_content(
        nlohmann::json{{"embedding", values}, {"dim", values.size()}, {"model", "mock"}}.dump(),
        "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~EmbedService()
  {
    server_.stop();
    thread_.join();
  }

  EmbedService(const EmbedService &) = delete;
  EmbedService & operator=(const EmbedService &) = delete;

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
  std::mutex mutex_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

/// A port with nothing listening on it.
inline std::string dead_endpoint()
{
  // Bind an ephemeral port and release it without listening: connects are refused.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr *>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr *>(&addr), &len);
  ::close(fd);
  return "http://127.0.0.1:" + std::to_string(ntohs(addr.sin_port));
}

}  // namespace mock

#endif  // OPPDRIVE_TESTS__MOCK_SERVICE_HPP_
