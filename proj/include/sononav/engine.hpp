#pragma once

// The per-tick pipeline: pose -> error decomposition -> alignment step ->
// synthesis parameters. One Engine instance is owned by a single thread.

#include <cstdint>
#include <vector>

#include "sononav/alignment.hpp"
#include "sononav/config.hpp"
#include "sononav/error.hpp"
#include "sononav/geometry.hpp"
#include "sononav/mapping.hpp"
#include "sononav/session.hpp"

namespace sononav {

class Engine {
 public:
  Engine(TargetPlan plan, EngineConfig config) : plan_(std::move(plan)), config_(std::move(config)) {
    validate(plan_);
    validate(config_.mapping);
    planes_.reserve(plan_.targets.size());
    for (const auto& t : plan_.targets) planes_.push_back(make_entry_plane(t.trajectory, plan_.frame));
  }

  const TargetPlan& plan() const { return plan_; }
  const EngineConfig& config() const { return config_; }
  const AlignmentState& state() const { return state_; }
  std::int32_t active_target() const { return active_target_; }
  const EntryPlane& entry_plane(std::int32_t target_id) const { return planes_.at(static_cast<std::size_t>(target_id)); }

  /// Processes one tracking sample. Switching targets restarts the alignment
  /// at IP. Timestamps must not go backwards.
  SessionRecord tick(double timestamp_s, std::int32_t target_id, const Pose& tool) {
    if (!std::isfinite(timestamp_s) || timestamp_s < last_timestamp_) {
      throw Error(ErrorCode::InvalidInput, "timestamps must be finite and non-decreasing");
    }
    if (target_id < 0 || static_cast<std::size_t>(target_id) >= plan_.targets.size()) {
      throw Error(ErrorCode::UnknownTarget, "target id " + std::to_string(target_id) + " not in plan");
    }
    validate(tool);

    const auto idx = static_cast<std::size_t>(target_id);
    const ErrorVector err =
        compute_error(tool, plan_.targets[idx].trajectory, planes_[idx], plan_.frame);

    if (target_id != active_target_) {
      state_ = AlignmentState{};
      active_target_ = target_id;
    }
    StepResult stepped = step(state_, err, plan_.thresholds);
    state_ = stepped.state;
    last_timestamp_ = timestamp_s;

    SessionRecord record;
    record.timestamp_s = timestamp_s;
    record.target_id = target_id;
    record.pose = tool;
    record.error = err;
    record.phase = state_.phase;
    record.synth = map_params(state_.phase, normalize_errors(err, plan_.thresholds), config_.mapping);
    record.events = std::move(stepped.events);
    return record;
  }

 private:
  TargetPlan plan_;
  EngineConfig config_;
  std::vector<EntryPlane> planes_;
  AlignmentState state_;
  std::int32_t active_target_ = -1;
  double last_timestamp_ = -std::numeric_limits<double>::infinity();
};

/// Feeds the recorded poses of `log` through a fresh engine built from the
/// log's own plan and config.
inline std::vector<SessionRecord> replay_session(const SessionLog& log) {
  Engine engine(log.plan, log.config);
  std::vector<SessionRecord> out;
  out.reserve(log.records.size());
  for (const auto& r : log.records) out.push_back(engine.tick(r.timestamp_s, r.target_id, r.pose));
  return out;
}

}  // namespace sononav
