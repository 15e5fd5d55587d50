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

#include "plastiscope/server.hpp"

#include <csignal>
#include <deque>
#include <thread>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace plastiscope::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Json = nlohmann::json;

namespace {

constexpr std::size_t kMaxRequestBody = 1 << 20;
constexpr std::size_t kMaxMessage = 1 << 20;
constexpr auto kReadTimeout = std::chrono::seconds(30);
constexpr auto kShutdownGrace = std::chrono::milliseconds(300);

}  // namespace

struct Server::Impl {
  Impl(const service::DataService& d, collab::SessionHub& h, ServerOptions o)
      : data(d), hub(h), options(std::move(o)), acceptor(net::make_strand(ioc)), ticker(ioc), grace(ioc) {}

  void log(Json event) const {
    if (options.log) options.log(event);
  }

  void accept();
  void tick();
  void begin_shutdown();

  const service::DataService& data;
  collab::SessionHub& hub;
  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer ticker;
  net::steady_timer grace;
  std::optional<net::signal_set> signals;
  std::vector<std::thread> workers;
  std::atomic<bool> stopping{false};
  std::uint16_t port = 0;
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Server::Impl& impl) : ws_(std::move(socket)), impl_(impl) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kMaxMessage);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void deliver(std::string text) {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      if (self->closed_) return;
      self->queue_.push_back(std::move(text));
      if (self->queue_.size() == 1) self->write();
    });
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (self->queue_.empty()) self->do_close();
    });
  }

 private:
  struct Bridge : collab::Member {
    std::weak_ptr<WsSession> session;
    void deliver(const std::string& text) override {
      if (auto s = session.lock()) s->deliver(text);
    }
    void close() override {
      if (auto s = session.lock()) s->close();
    }
  };

  void on_accept(beast::error_code ec) {
    if (ec) return;
    auto bridge = std::make_shared<Bridge>();
    bridge->session = weak_from_this();
    id_ = impl_.hub.connect(bridge);
    impl_.log({{"event", "ws_open"}, {"connection", id_}});
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      impl_.hub.disconnect(id_);
      closed_ = true;
      impl_.log({{"event", "ws_close"}, {"connection", id_}});
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    impl_.hub.on_message(id_, text);
    read();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      queue_.clear();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      write();
    } else if (closing_) {
      do_close();
    }
  }

  void do_close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool closed_ = false;
  Server::Impl& impl_;
  collab::SessionHub::ConnectionId id_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Server::Impl& impl) : stream_(std::move(socket)), impl_(impl) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read, shared_from_this()));
  }

 private:
  void read() {
    parser_.emplace();
    parser_->body_limit(kMaxRequestBody);
    stream_.expires_after(kReadTimeout);
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    http::request<http::string_body> req = parser_->release();
    const std::string target(req.target());
    if (websocket::is_upgrade(req) && target.substr(0, target.find('?')) == "/ws") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), impl_)->run(std::move(req));
      return;
    }

    const auto start = std::chrono::steady_clock::now();
    service::Request r;
    r.method = std::string(req.method_string());
    r.target = target;
    for (const auto& field : req) {
      std::string name(field.name_string());
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
      r.headers[name] = std::string(field.value());
    }
    service::Response out = impl_.data.handle(r);
    if (out.status == 404 && websocket::is_upgrade(req)) {
      out = service::error_response(404, "not_found", "websocket endpoint is /ws");
    }

    auto res = std::make_shared<http::response<http::string_body>>(
        static_cast<http::status>(out.status), req.version());
    res->set(http::field::server, "plastiscope");
    if (!out.content_type.empty()) res->set(http::field::content_type, out.content_type);
    for (const auto& [k, v] : out.headers) res->set(k, v);
    res->keep_alive(req.keep_alive());
    res->body() = std::move(out.body);
    res->prepare_payload();
    impl_.log({{"event", "request"},
               {"method", r.method},
               {"target", target},
               {"status", out.status},
               {"bytes", res->body().size()},
               {"ms", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()}});
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      self->on_write(ec, res->need_eof());
    });
  }

  void on_write(beast::error_code ec, bool close) {
    if (ec) return;
    if (close || impl_.stopping) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    read();
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  Server::Impl& impl_;
};

}  // namespace

void Server::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (stopping || !acceptor.is_open()) return;
    if (!ec) std::make_shared<HttpSession>(std::move(socket), *this)->run();
    accept();
  });
}

void Server::Impl::tick() {
  ticker.expires_after(options.tick);
  ticker.async_wait([this](beast::error_code ec) {
    if (ec || stopping) return;
    hub.tick();
    tick();
  });
}

void Server::Impl::begin_shutdown() {
  if (stopping.exchange(true)) return;
  log({{"event", "shutdown"}, {"sessions", hub.session_count()}, {"connections", hub.connection_count()}});
  beast::error_code ec;
  acceptor.close(ec);
  ticker.cancel();
  if (signals) signals->cancel(ec);
  hub.shutdown();
  // Let the close frames go out, then drop whatever is still open.
  grace.expires_after(kShutdownGrace);
  grace.async_wait([this](beast::error_code) { ioc.stop(); });
}

Server::Server(const service::DataService& data, collab::SessionHub& hub, ServerOptions options)
    : impl_(std::make_unique<Impl>(data, hub, std::move(options))) {
  Impl& s = *impl_;
  try {
    const tcp::endpoint ep(net::ip::make_address(s.options.address), s.options.port);
    s.acceptor.open(ep.protocol());
    s.acceptor.set_option(net::socket_base::reuse_address(true));
    s.acceptor.bind(ep);
    s.acceptor.listen(net::socket_base::max_listen_connections);
    s.port = s.acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    fail(ErrorCode::io, "cannot listen on " + s.options.address + ":" +
                            std::to_string(s.options.port) + ": " + e.code().message());
  }
  if (s.options.handle_signals) {
    s.signals.emplace(s.ioc, SIGINT, SIGTERM);
    s.signals->async_wait([this](beast::error_code ec, int sig) {
      if (ec) return;
      impl_->log({{"event", "signal"}, {"signal", sig}});
      impl_->begin_shutdown();
    });
  }
  s.accept();
  s.tick();
}

Server::~Server() {
  if (!impl_->workers.empty()) stop();
}

std::uint16_t Server::port() const noexcept { return impl_->port; }

void Server::run() {
  impl_->log({{"event", "listening"}, {"address", impl_->options.address}, {"port", impl_->port}});
  std::vector<std::thread> extra;
  for (unsigned i = 1; i < std::max(1u, impl_->options.threads); ++i) {
    extra.emplace_back([this] { impl_->ioc.run(); });
  }
  impl_->ioc.run();
  for (auto& t : extra) t.join();
}

void Server::start() {
  impl_->log({{"event", "listening"}, {"address", impl_->options.address}, {"port", impl_->port}});
  for (unsigned i = 0; i < std::max(1u, impl_->options.threads); ++i) {
    impl_->workers.emplace_back([this] { impl_->ioc.run(); });
  }
}

void Server::stop() {
  net::post(impl_->ioc, [this] { impl_->begin_shutdown(); });
  const auto self = std::this_thread::get_id();
  for (auto& t : impl_->workers) {
    if (t.get_id() != self && t.joinable()) t.join();
  }
  impl_->workers.clear();
}

}  // namespace plastiscope::server
