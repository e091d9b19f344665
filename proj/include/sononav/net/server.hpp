#pragma once

// Live serving: UDP pose ingress and UI pose frames feed a bounded queue; a
// single engine thread ticks the engine and fans results out to the state
// hub, the session log, outbound OSC and (optionally) a real-time audio
// thread. Ingress keeps the newest poses when the engine falls behind.

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "sononav/engine.hpp"
#include "sononav/handoff.hpp"
#include "sononav/mapping.hpp"
#include "sononav/net/udp.hpp"
#include "sononav/net/ws_bridge.hpp"
#include "sononav/session.hpp"
#include "sononav/stream.hpp"
#include "sononav/synth.hpp"

namespace sononav::net {

struct ServeOptions {
  std::string log_path;                                // empty: no session log
  std::function<void(const AudioBlock&)> audio_sink;   // empty: no local audio
  std::function<void(const std::string&)> diagnostics; // rejected packets, engine errors
};

struct TickStats {
  std::uint64_t count = 0;
  double max_ms = 0.0;
  double mean_ms = 0.0;
};

class LiveServer {
 public:
  LiveServer(TargetPlan plan, EngineConfig config, ServeOptions options = {})
      : engine_(plan, config),
        hub_(plan, config.network.subscriber_queue),
        options_(std::move(options)),
        ingress_queue_(config.network.ingress_queue) {
    const auto address = asio::ip::make_address(config.network.bind_address);
    const std::size_t targets = plan.targets.size();
    udp_ = std::make_unique<UdpIngress>(
        io_, udp::endpoint(address, config.network.udp_port), targets,
        [this](const osc::PoseInput& p) { submit(p); },
        [this](const Error& e) { diagnose(std::string("udp: ") + e.what()); });
    ws_ = std::make_unique<WsBridge>(io_, hub_, tcp::endpoint(address, config.network.ws_port),
                                     [this](const osc::PoseInput& p) { submit(p); });
    if (!config.network.osc_out_host.empty()) {
      osc_out_ = std::make_unique<OscSender>(io_, config.network.osc_out_host, config.network.osc_out_port);
    }
    if (!options_.log_path.empty()) {
      log_file_.open(options_.log_path);
      if (!log_file_) throw Error(ErrorCode::InvalidArgument, "cannot open " + options_.log_path);
      log_writer_.emplace(log_file_, plan, config);
    }
  }

  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  ~LiveServer() { stop(); }

  std::uint16_t udp_port() const { return udp_->port(); }
  std::uint16_t ws_port() const { return ws_->port(); }
  StateHub& hub() { return hub_; }

  void start() {
    if (running_.exchange(true)) return;
    start_time_ = std::chrono::steady_clock::now();
    udp_->start();
    ws_->start();
    io_thread_ = std::thread([this] {
      auto guard = asio::make_work_guard(io_);
      io_.run();
    });
    engine_thread_ = std::thread([this] { engine_loop(); });
    if (options_.audio_sink) audio_thread_ = std::thread([this] { audio_loop(); });
  }

  void stop() {
    if (!running_.exchange(false)) return;
    ingress_queue_.close();
    earcon_queue_.close();
    if (engine_thread_.joinable()) engine_thread_.join();
    if (audio_thread_.joinable()) audio_thread_.join();
    asio::post(io_, [this] {
      udp_->stop();
      ws_->stop();
    });
    hub_.close_all();
    io_.stop();
    if (io_thread_.joinable()) io_thread_.join();
    if (log_writer_) log_writer_->flush();
  }

  /// Enqueues a pose as if it had arrived from the network.
  void submit(const osc::PoseInput& pose) {
    if (!ingress_queue_.push(pose) && !ingress_queue_.closed()) diagnose("ingress queue full; dropped oldest pose");
  }

  TickStats tick_stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
  }

 private:
  void diagnose(const std::string& message) {
    if (options_.diagnostics) options_.diagnostics(message);
  }

  void engine_loop() {
    using namespace std::chrono;
    while (true) {
      auto item = ingress_queue_.pop_for(milliseconds(50));
      if (!item) {
        if (ingress_queue_.closed()) return;
        continue;
      }
      const auto begin = steady_clock::now();
      const double t = duration<double>(begin - start_time_).count();
      try {
        const SessionRecord record = engine_.tick(t, item->target_id, item->pose);
        hub_.publish(record);
        if (log_writer_) log_writer_->append(record);
        if (osc_out_) {
          osc_out_->send(make_params_message(record.synth));
          for (const auto& e : record.events) osc_out_->send(make_event_message(e, t, record.target_id));
        }
        params_.store(record.synth);
        for (const auto& earcon : earcons_for(record.events, engine_.config().mapping.earcons)) {
          earcon_queue_.push(earcon);
        }
      } catch (const Error& e) {
        diagnose(std::string("engine: ") + e.what());
      }
      const double ms = duration<double, std::milli>(steady_clock::now() - begin).count();
      std::lock_guard lock(stats_mutex_);
      ++stats_.count;
      stats_.max_ms = std::max(stats_.max_ms, ms);
      stats_.mean_ms += (ms - stats_.mean_ms) / static_cast<double>(stats_.count);
    }
  }

  void audio_loop() {
    using namespace std::chrono;
    const SynthConfig& cfg = engine_.config().synth;
    PulseSynth synth(cfg);
    const auto block_period = duration_cast<steady_clock::duration>(
        duration<double>(static_cast<double>(cfg.block_frames) / cfg.sample_rate_hz));
    auto deadline = steady_clock::now();
    std::uint64_t seen = 0;
    std::optional<SynthParams> current;
    while (running_) {
      if (auto p = params_.load_if_newer(seen)) current = std::move(p);
      while (auto earcon = earcon_queue_.try_pop()) synth.trigger(*earcon);
      const AudioBlock block =
          current ? synth.render_block(*current, cfg.block_frames) : synth.render_silence(cfg.block_frames);
      options_.audio_sink(block);
      deadline += block_period;
      std::this_thread::sleep_until(deadline);
    }
  }

  Engine engine_;
  StateHub hub_;
  ServeOptions options_;
  asio::io_context io_;
  std::unique_ptr<UdpIngress> udp_;
  std::unique_ptr<WsBridge> ws_;
  std::unique_ptr<OscSender> osc_out_;
  std::ofstream log_file_;
  std::optional<SessionWriter> log_writer_;

  DropOldestQueue<osc::PoseInput> ingress_queue_;
  DropOldestQueue<EarconSpec> earcon_queue_{16};
  LatestValue<SynthParams> params_;

  std::atomic<bool> running_{false};
  std::chrono::steady_clock::time_point start_time_;
  std::thread io_thread_, engine_thread_, audio_thread_;
  mutable std::mutex stats_mutex_;
  TickStats stats_;
};

}  // namespace sononav::net
