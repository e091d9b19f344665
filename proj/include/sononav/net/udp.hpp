#pragma once

// OSC over UDP: a receiver for /sononav/pose datagrams and a sender for
// outbound parameter and event messages.

#include <boost/asio.hpp>

#include <array>
#include <functional>
#include <string>

#include "sononav/osc.hpp"

namespace sononav::net {

namespace asio = boost::asio;
using udp = asio::ip::udp;

class UdpIngress {
 public:
  using PoseHandler = std::function<void(const osc::PoseInput&)>;
  using ErrorHandler = std::function<void(const Error&)>;

  UdpIngress(asio::io_context& io, const udp::endpoint& endpoint, std::size_t target_count, PoseHandler on_pose,
             ErrorHandler on_error = {})
      : socket_(io, endpoint),
        target_count_(target_count),
        on_pose_(std::move(on_pose)),
        on_error_(std::move(on_error)) {}

  std::uint16_t port() const { return socket_.local_endpoint().port(); }

  void start() { receive(); }

  void stop() {
    boost::system::error_code ec;
    socket_.close(ec);
  }

  std::uint64_t received() const { return received_; }
  std::uint64_t rejected() const { return rejected_; }

 private:
  void receive() {
    socket_.async_receive_from(asio::buffer(buffer_), sender_, [this](boost::system::error_code ec, std::size_t n) {
      if (ec == asio::error::operation_aborted) return;
      if (!ec) handle(n);
      if (socket_.is_open()) receive();
    });
  }

  void handle(std::size_t n) {
    ++received_;
    try {
      const osc::Message msg = osc::decode(std::span<const std::uint8_t>(buffer_.data(), n));
      if (msg.address != osc::kPoseAddress) {
        throw Error(ErrorCode::InvalidInput, "unhandled address " + msg.address);
      }
      on_pose_(osc::ingest_pose(msg, target_count_));
    } catch (const Error& e) {
      ++rejected_;
      if (on_error_) on_error_(e);
    }
  }

  udp::socket socket_;
  udp::endpoint sender_;
  std::array<std::uint8_t, 65536> buffer_{};
  std::size_t target_count_;
  PoseHandler on_pose_;
  ErrorHandler on_error_;
  std::uint64_t received_ = 0;
  std::uint64_t rejected_ = 0;
};

class OscSender {
 public:
  OscSender(asio::io_context& io, const std::string& host, std::uint16_t port) : socket_(io) {
    udp::resolver resolver(io);
    target_ = *resolver.resolve(udp::v4(), host, std::to_string(port)).begin();
    socket_.open(udp::v4());
  }

  void send(const osc::Message& msg) {
    const auto bytes = osc::encode(msg);
    boost::system::error_code ec;
    socket_.send_to(asio::buffer(bytes), target_, 0, ec);
  }

 private:
  udp::socket socket_;
  udp::endpoint target_;
};

}  // namespace sononav::net
