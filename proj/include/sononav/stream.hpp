#pragma once

// Outbound state for external consumers: JSON state frames for UI subscribers
// and OSC parameter/event messages for an external synthesizer.
//
// Subscriber frames (JSON text):
//   {"type": "snapshot", "plan": {...}, "thresholds": {...}, "state": <state frame or null>}
//   {"type": "state", "seq": 12, "timestamp": 0.24, "target": 0, "target_label": "L1-left",
//    "errors": {"e_x": .., "e_y": .., "e_phi": .., "e_delta": .., "d": .., "theta": ..},
//    "phase": "EP", "synth": {...}, "events": ["EnterEP"]}
//   {"type": "error", "message": "..."}
// Inbound frames from a subscriber:
//   {"type": "pose", "target_id": 0, "position": [x, y, z], "quaternion": [w, x, y, z]}
// Inbound poses go through the same validation as /sononav/pose.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sononav/config.hpp"
#include "sononav/handoff.hpp"
#include "sononav/osc.hpp"
#include "sononav/session.hpp"

namespace sononav {

inline json state_frame(const SessionRecord& r, const TargetPlan& plan, std::uint64_t seq) {
  std::string label;
  if (r.target_id >= 0 && static_cast<std::size_t>(r.target_id) < plan.targets.size()) {
    label = plan.targets[static_cast<std::size_t>(r.target_id)].label;
  }
  return {{"type", "state"},
          {"seq", seq},
          {"timestamp", r.timestamp_s},
          {"target", r.target_id},
          {"target_label", label},
          {"errors", to_json(r.error)},
          {"phase", std::string(to_string(r.phase))},
          {"synth", to_json(r.synth)},
          {"events", events_to_json(r.events)}};
}

inline json error_frame(const std::string& message) { return {{"type", "error"}, {"message", message}}; }

struct InboundResult {
  std::optional<osc::PoseInput> pose;
  std::optional<std::string> reply;  // error frame to send back
};

inline InboundResult parse_inbound_frame(const std::string& text, std::size_t target_count) {
  InboundResult out;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "frame must be a JSON object");
    const auto type = j.value("type", std::string());
    if (type != "pose") throw Error(ErrorCode::InvalidInput, "unsupported frame type '" + type + "'");
    const auto& pos = j.at("position");
    const auto& quat = j.at("quaternion");
    if (!pos.is_array() || pos.size() != 3) throw Error(ErrorCode::InvalidInput, "position must have 3 values");
    if (!quat.is_array() || quat.size() != 4) throw Error(ErrorCode::InvalidInput, "quaternion must have 4 values");
    osc::Message msg{std::string(osc::kPoseAddress), {j.at("target_id").get<std::int32_t>()}};
    for (const auto& v : pos) msg.arguments.emplace_back(v.get<float>());
    for (const auto& v : quat) msg.arguments.emplace_back(v.get<float>());
    out.pose = osc::ingest_pose(msg, target_count);
  } catch (const json::exception& e) {
    out.reply = error_frame(std::string("malformed frame: ") + e.what()).dump();
  } catch (const Error& e) {
    out.reply = error_frame(e.what()).dump();
  }
  return out;
}

inline json pose_frame(std::int32_t target_id, const Pose& pose) {
  return {{"type", "pose"},
          {"target_id", target_id},
          {"position", vec_to_json(pose.position)},
          {"quaternion", quat_to_json(pose.orientation)}};
}

/// /sononav/params: phase, mode, fundamental (Hz), pulse interval (s), then chord frequencies.
inline osc::Message make_params_message(const SynthParams& p) {
  osc::Message m{std::string(osc::kParamsAddress),
                 {std::string(to_string(p.active_phase)), std::string(to_string(p.mode)),
                  static_cast<float>(p.fundamental_hz), static_cast<float>(p.pulse_interval_s)}};
  for (double f : p.chord_freqs_hz) m.arguments.emplace_back(static_cast<float>(f));
  return m;
}

/// /sononav/event: event name, timestamp (s), target id.
inline osc::Message make_event_message(const TransitionEvent& e, double timestamp_s, std::int32_t target_id) {
  return osc::Message{std::string(osc::kEventAddress),
                      {to_string(e), static_cast<float>(timestamp_s), target_id}};
}

/// Fan-out of state frames to subscribers. Each subscriber owns a bounded queue
/// that drops its oldest frames when the consumer falls behind; the first frame
/// a subscriber sees is always a snapshot.
class StateHub {
 public:
  using Queue = DropOldestQueue<std::string>;

  struct Subscription {
    std::uint64_t id = 0;
    std::shared_ptr<Queue> queue;
  };

  explicit StateHub(TargetPlan plan, std::size_t queue_capacity = 64)
      : plan_(std::move(plan)), capacity_(queue_capacity) {}

  const TargetPlan& plan() const { return plan_; }

  /// `on_frame` is invoked (from the publishing thread) after a frame is queued.
  Subscription subscribe(std::function<void()> on_frame = {}) {
    std::lock_guard lock(mutex_);
    Subscription s{next_id_++, std::make_shared<Queue>(capacity_)};
    s.queue->push(snapshot_locked().dump());
    subscribers_.emplace(s.id, Entry{s.queue, std::move(on_frame)});
    return s;
  }

  void unsubscribe(std::uint64_t id) {
    std::lock_guard lock(mutex_);
    auto it = subscribers_.find(id);
    if (it == subscribers_.end()) return;
    it->second.queue->close();
    subscribers_.erase(it);
  }

  void publish(const SessionRecord& record) {
    std::vector<std::function<void()>> notify;
    {
      std::lock_guard lock(mutex_);
      latest_ = state_frame(record, plan_, ++seq_);
      const std::string text = latest_->dump();
      for (auto& [id, entry] : subscribers_) {
        entry.queue->push(text);
        if (entry.on_frame) notify.push_back(entry.on_frame);
      }
    }
    for (auto& f : notify) f();
  }

  json snapshot() const {
    std::lock_guard lock(mutex_);
    return snapshot_locked();
  }

  std::optional<json> latest() const {
    std::lock_guard lock(mutex_);
    return latest_;
  }

  std::size_t subscriber_count() const {
    std::lock_guard lock(mutex_);
    return subscribers_.size();
  }

  void close_all() {
    std::lock_guard lock(mutex_);
    for (auto& [id, entry] : subscribers_) entry.queue->close();
    subscribers_.clear();
  }

 private:
  struct Entry {
    std::shared_ptr<Queue> queue;
    std::function<void()> on_frame;
  };

  json snapshot_locked() const {
    return {{"type", "snapshot"},
            {"plan", to_json(plan_)},
            {"thresholds", to_json(plan_.thresholds)},
            {"state", latest_ ? *latest_ : json(nullptr)}};
  }

  TargetPlan plan_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, Entry> subscribers_;
  std::optional<json> latest_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_id_ = 1;
};

}  // namespace sononav
