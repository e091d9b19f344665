#pragma once

// WebSocket endpoint for UI subscribers. Each connection receives the hub's
// frames (snapshot first) and may send pose frames back; malformed inbound
// frames get an error frame and the connection stays open.

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <functional>
#include <memory>
#include <string>

#include "sononav/stream.hpp"

namespace sononav::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

using PoseCallback = std::function<void(const osc::PoseInput&)>;

namespace detail {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, StateHub& hub, PoseCallback on_pose)
      : ws_(std::move(socket)), hub_(hub), on_pose_(std::move(on_pose)) {}

  ~WsSession() {
    if (subscribed_) hub_.unsubscribe(subscription_.id);
  }

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto executor = ws_.get_executor();
    subscription_ = hub_.subscribe([weak, executor] {
      asio::post(executor, [weak] {
        if (auto self = weak.lock()) self->pump();
      });
    });
    subscribed_ = true;
    pump();
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    const InboundResult r = parse_inbound_frame(text, hub_.plan().targets.size());
    if (r.pose && on_pose_) on_pose_(*r.pose);
    if (r.reply) {
      replies_.push_back(*r.reply);
      pump();
    }
    read();
  }

  void pump() {
    if (writing_ || closed_) return;
    if (!replies_.empty()) {
      outgoing_ = std::move(replies_.front());
      replies_.pop_front();
    } else if (auto frame = subscription_.queue->try_pop()) {
      outgoing_ = std::move(*frame);
    } else {
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(outgoing_), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) {
      closed_ = true;
      return;
    }
    pump();
  }

  websocket::stream<beast::tcp_stream> ws_;
  StateHub& hub_;
  PoseCallback on_pose_;
  StateHub::Subscription subscription_;
  bool subscribed_ = false;
  bool writing_ = false;
  bool closed_ = false;
  beast::flat_buffer buffer_;
  std::string outgoing_;
  std::deque<std::string> replies_;
};

}  // namespace detail

class WsBridge {
 public:
  WsBridge(asio::io_context& io, StateHub& hub, const tcp::endpoint& endpoint, PoseCallback on_pose = {})
      : io_(io), acceptor_(io), hub_(hub), on_pose_(std::move(on_pose)) {
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen(asio::socket_base::max_listen_connections);
  }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  void start() { accept(); }

  void stop() {
    beast::error_code ec;
    acceptor_.close(ec);
  }

 private:
  void accept() {
    acceptor_.async_accept(asio::make_strand(io_), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<detail::WsSession>(std::move(socket), hub_, on_pose_)->start();
      accept();
    });
  }

  asio::io_context& io_;
  tcp::acceptor acceptor_;
  StateHub& hub_;
  PoseCallback on_pose_;
};

}  // namespace sononav::net
