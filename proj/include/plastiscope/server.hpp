// Copyright 2026 The Plastiscope Authors
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

// HTTP and the /ws collaboration endpoint on one port (Boost.Beast).

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "plastiscope/collab.hpp"
#include "plastiscope/data_service.hpp"

namespace plastiscope::server {

struct ServerOptions {
  std::string address = "0.0.0.0";
  std::uint16_t port = 8080;  // 0 picks a free port
  unsigned threads = 1;
  std::chrono::milliseconds tick{1000};  // hub heartbeat/expiry cadence
  bool handle_signals = false;           // stop on SIGINT / SIGTERM
  // One JSON object per event (requests, connections, shutdown).
  std::function<void(const nlohmann::json&)> log;
};

class Server {
 public:
  // Binds immediately; Error(io) when the address or port is unavailable.
  Server(const service::DataService& data, collab::SessionHub& hub, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept;

  // Serves on the calling thread plus threads - 1 workers until stop().
  void run();
  // Serves on background threads; returns at once.
  void start();
  // Ends every collaboration session with leave semantics, stops accepting
  // and returns once all threads have finished. Safe from any thread.
  void stop();

  struct Impl;  // defined in server.cpp

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace plastiscope::server
