#pragma once

// HTTP + WebSocket front end for DriveSession on Boost.Beast.
//   GET /health  service status
//   GET /map     hazard grid JSON
//   WS  /drive   DriveMessage stream
// A single io_context thread owns sockets, the tick timer and the session;
// the simulation only advances while a driver is connected.

#include "sets/autonomy/protocol.hpp"
#include "sets/autonomy/session.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <deque>
#include <functional>
#include <iostream>
#include <memory>
#include <string>

namespace sets::autonomy {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  /// Simulated seconds per wall-clock second.
  double time_scale = 1.0;
  /// Stop on SIGINT/SIGTERM.
  bool handle_signals = false;
};

class DriveServer;

namespace detail {

class DriveSocket : public std::enable_shared_from_this<DriveSocket> {
 public:
  DriveSocket(tcp::socket socket, DriveServer& server) : ws_(std::move(socket)), server_(server) {}

  template <typename Request>
  void start(Request req);
  void send(const Payload& p) {
    const bool idle = outbox_.empty();
    outbox_.push_back(encode(out_seq_.stamp(p)));
    if (idle && open_) write_next();
  }
  void close() {
    if (!open_) return;
    open_ = false;
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
  }
  bool open() const { return open_; }

 private:
  void read_next();
  void on_read(beast::error_code ec);
  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->fail();
        return;
      }
      self->outbox_.pop_front();
      if (!self->outbox_.empty() && self->open_) self->write_next();
    });
  }
  void fail();

  websocket::stream<tcp::socket> ws_;
  DriveServer& server_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  SeqCounter out_seq_;
  SeqGate in_seq_;
  bool open_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, DriveServer& server) : stream_(std::move(socket)), server_(server) {}
  void start() {
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (!ec) self->handle();
    });
  }

 private:
  void handle();

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<http::response<http::string_body>> res_;
  DriveServer& server_;
};

}  // namespace detail

class DriveServer {
 public:
  DriveServer(ServerConfig cfg, SessionConfig session_cfg, std::shared_ptr<const env::HazardGrid> hazard)
      : cfg_(std::move(cfg)),
        hazard_(std::move(hazard)),
        session_(std::move(session_cfg), hazard_),
        acceptor_(io_),
        timer_(io_) {
    if (!(cfg_.time_scale > 0.0)) throw std::invalid_argument("DriveServer: time_scale must be positive");
    tcp::endpoint ep(asio::ip::make_address(cfg_.address), cfg_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  /// Serves until stop(); call from one thread.
  void run() {
    asio::signal_set signals(io_);
    if (cfg_.handle_signals) {
      signals.add(SIGINT);
      signals.add(SIGTERM);
      signals.async_wait([this](beast::error_code ec, int) {
        if (!ec) stop();
      });
    }
    accept_next();
    schedule_tick();
    io_.run();
  }

  /// Thread-safe.
  void stop() {
    asio::post(io_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      timer_.cancel();
      if (client_) client_->close();
      io_.stop();
    });
  }

  const DriveSession& session() const { return session_; }

  // Callbacks from connections (io thread only).
  nlohmann::json health() const {
    return {{"status", "ok"},
            {"tick", session_.tick_count()},
            {"client_connected", client_ != nullptr},
            {"planner_enabled", session_.planner_enabled()},
            {"safety_count", session_.collisions()},
            {"time_scale", cfg_.time_scale}};
  }
  std::string map_json() const { return hazard_ ? env::to_json(*hazard_).dump() : std::string("null"); }

  void attach(std::shared_ptr<detail::DriveSocket> s) {
    if (client_) client_->close();
    client_ = std::move(s);
    client_->send(Hello{"sets-drive", 1, session_.dt()});
    client_->send(session_.report());
  }
  void detach(const detail::DriveSocket* s) {
    if (client_.get() == s) client_.reset();
  }
  void on_message(detail::DriveSocket& from, const DriveMessage& m) {
    if (const auto* c = std::get_if<Command>(&m.payload)) {
      session_.set_command(*c);
    } else if (const auto* u = std::get_if<ConfigUpdate>(&m.payload)) {
      if (u->planner_enabled) session_.set_planner_enabled(*u->planner_enabled);
      if (u->time_scale) cfg_.time_scale = *u->time_scale;
    } else if (std::holds_alternative<Hello>(m.payload)) {
      // Nothing to negotiate.
    } else {
      from.send(Event{"protocol_error", session_.tick_count(), std::string("unexpected kind '") + kind_of(m.payload) + "'"});
    }
  }
  long tick_count() const { return session_.tick_count(); }

 private:
  void accept_next() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<detail::HttpConnection>(std::move(socket), *this)->start();
      accept_next();
    });
  }

  void schedule_tick() {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(session_.dt() / cfg_.time_scale));
    next_tick_ = (next_tick_ == std::chrono::steady_clock::time_point{} ? std::chrono::steady_clock::now() : next_tick_) +
                 period;
    timer_.expires_at(next_tick_);
    timer_.async_wait([this](beast::error_code ec) {
      if (ec) return;
      if (client_ && client_->open()) {
        const TickResult r = session_.tick();
        client_->send(r.state);
        client_->send(r.plan);
        for (const Event& e : r.events) client_->send(e);
      }
      // Do not try to catch up after a slow tick.
      const auto now = std::chrono::steady_clock::now();
      if (next_tick_ < now) next_tick_ = now;
      schedule_tick();
    });
  }

  ServerConfig cfg_;
  std::shared_ptr<const env::HazardGrid> hazard_;
  DriveSession session_;
  asio::io_context io_;
  tcp::acceptor acceptor_;
  asio::steady_timer timer_;
  std::chrono::steady_clock::time_point next_tick_{};
  std::shared_ptr<detail::DriveSocket> client_;
};

namespace detail {

template <typename Request>
void DriveSocket::start(Request req) {
  ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->open_ = true;
    self->server_.attach(self);
    self->read_next();
  });
}

inline void DriveSocket::read_next() {
  ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
}

inline void DriveSocket::on_read(beast::error_code ec) {
  if (ec) {
    fail();
    return;
  }
  const std::string text = beast::buffers_to_string(buffer_.data());
  buffer_.consume(buffer_.size());
  try {
    const DriveMessage m = decode(text);
    if (!in_seq_.accept(m.seq)) {
      send(Event{"protocol_error", server_.tick_count(), "out-of-order seq " + std::to_string(m.seq)});
    } else {
      server_.on_message(*this, m);
    }
  } catch (const ProtocolError& e) {
    send(Event{"protocol_error", server_.tick_count(), e.what()});
  }
  if (open_) read_next();
}

inline void DriveSocket::fail() {
  open_ = false;
  server_.detach(this);
}

inline void HttpConnection::handle() {
  if (websocket::is_upgrade(req_)) {
    if (req_.target() == "/drive") {
      std::make_shared<DriveSocket>(stream_.release_socket(), server_)->start(std::move(req_));
      return;
    }
  }
  res_ = std::make_shared<http::response<http::string_body>>();
  res_->version(req_.version());
  res_->keep_alive(false);
  res_->set(http::field::server, "sets-drive");
  res_->set(http::field::access_control_allow_origin, "*");
  if (req_.method() != http::verb::get) {
    res_->result(http::status::method_not_allowed);
    res_->set(http::field::content_type, "text/plain");
    res_->body() = "method not allowed\n";
  } else if (req_.target() == "/health") {
    res_->result(http::status::ok);
    res_->set(http::field::content_type, "application/json");
    res_->body() = server_.health().dump();
  } else if (req_.target() == "/map") {
    res_->result(http::status::ok);
    res_->set(http::field::content_type, "application/json");
    res_->body() = server_.map_json();
  } else {
    res_->result(http::status::not_found);
    res_->set(http::field::content_type, "text/plain");
    res_->body() = "not found\n";
  }
  res_->prepare_payload();
  http::async_write(stream_, *res_, [self = shared_from_this()](beast::error_code, std::size_t) {
    beast::error_code ec;
    self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  });
}

}  // namespace detail

}  // namespace sets::autonomy
