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

// Small blocking clients for tests that talk to a live server: one HTTP
// request per call, and a WebSocket client that reads on its own thread.

#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

namespace plastiscope::testing {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

using HttpResponse = http::response<http::string_body>;

// Opens a connection, sends each target in turn on it (keep-alive) and
// returns the responses.
inline std::vector<HttpResponse> http_get_all(std::uint16_t port, const std::vector<std::string>& targets,
                                              const std::map<std::string, std::string>& headers = {}) {
  net::io_context ioc;
  beast::tcp_stream stream(ioc);
  stream.expires_after(std::chrono::seconds(10));
  stream.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
  std::vector<HttpResponse> out;
  beast::flat_buffer buffer;
  for (const auto& target : targets) {
    http::request<http::empty_body> req(http::verb::get, target, 11);
    req.set(http::field::host, "127.0.0.1");
    for (const auto& [k, v] : headers) req.set(k, v);
    req.keep_alive(true);
    http::write(stream, req);
    http::response_parser<http::string_body> parser;
    parser.body_limit(64 << 20);
    http::read(stream, buffer, parser);
    out.push_back(parser.release());
  }
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return out;
}

inline HttpResponse http_get(std::uint16_t port, const std::string& target,
                             const std::map<std::string, std::string>& headers = {}) {
  return http_get_all(port, {target}, headers).front();
}

class WsClient {
 public:
  using Json = nlohmann::json;

  explicit WsClient(std::uint16_t port, std::string path = "/ws", bool auto_pong = true)
      : ws_(ioc_), auto_pong_(auto_pong) {
    ws_.next_layer().connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
    ws_.handshake("127.0.0.1:" + std::to_string(port), path);
    read();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  ~WsClient() { close(); }

  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  void send(const Json& message) { send_text(message.dump()); }

  void send_text(std::string text) {
    net::post(ioc_, [this, text = std::move(text)]() mutable {
      if (closed_flag_) return;
      queue_.push_back(std::move(text));
      if (queue_.size() == 1) write();
    });
  }

  // Next message, or nullopt after the timeout or once the socket closed.
  std::optional<Json> next(std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return !inbox_.empty() || closed_; });
    if (inbox_.empty()) return std::nullopt;
    Json j = std::move(inbox_.front());
    inbox_.pop_front();
    return j;
  }

  // Skips messages of other types (pings, for instance).
  std::optional<Json> next_of(const std::string& type,
                              std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      auto m = next(left);
      if (!m) return std::nullopt;
      if ((*m)["type"] == type) return m;
    }
  }

  bool wait_closed(std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] { return closed_; });
  }

  bool closed() {
    std::lock_guard lock(mutex_);
    return closed_;
  }

  // Drops the TCP connection without a close handshake.
  void kill() {
    net::post(ioc_, [this] {
      beast::error_code ec;
      ws_.next_layer().socket().close(ec);
    });
    wait_closed();
  }

  void close() {
    if (!thread_.joinable()) return;
    net::post(ioc_, [this] {
      if (!closed_flag_) {
        closed_flag_ = true;
        ws_.async_close(websocket::close_code::normal, [](beast::error_code) {});
      }
    });
    if (!wait_closed(std::chrono::seconds(2))) ioc_.stop();
    thread_.join();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [this](beast::error_code ec, std::size_t) {
      if (ec) {
        std::lock_guard lock(mutex_);
        closed_ = true;
        cv_.notify_all();
        return;
      }
      Json j = Json::parse(beast::buffers_to_string(buffer_.data()), nullptr, false);
      buffer_.consume(buffer_.size());
      if (auto_pong_ && j.is_object() && j.value("type", "") == "ping") {
        send_text(R"({"type":"pong"})");
      } else {
        std::lock_guard lock(mutex_);
        inbox_.push_back(std::move(j));
        cv_.notify_all();
      }
      read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [this](beast::error_code ec, std::size_t) {
      if (ec) {
        queue_.clear();
        return;
      }
      queue_.pop_front();
      if (!queue_.empty()) write();
    });
  }

  net::io_context ioc_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool auto_pong_;
  bool closed_flag_ = false;
  std::thread thread_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Json> inbox_;
  bool closed_ = false;
};

}  // namespace plastiscope::testing
