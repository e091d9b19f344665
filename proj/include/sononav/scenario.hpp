#pragma once

// Scripted alignment trials: a keyframed tool motion with tracking noise is
// stepped through the engine at a fixed tick rate, and per-target trial
// metrics are derived from the resulting session log.
//
// Scenario file:
//   {"name": "demo", "tick_rate_hz": 50,
//    "noise": {"position_sigma_mm": 0.05, "orientation_sigma_deg": 0.02, "seed": 7},
//    "plan": { ...TargetPlan... },
//    "script": [
//      {"t": 0.0, "target": 0, "offset_mm": [30, 10, -15], "tilt_deg": [12, -8], "label": "approach"},
//      {"t": 4.0, "target": 0, "pose": {"position": [..], "orientation": [w, x, y, z]}},
//      ...]}
//
// offset_mm is (along in_plane_x, along in_plane_y, along the normal) of the
// target's entry plane; tilt_deg rotates the planned direction about Z_a
// (axial) and then about X_a (sagittal). Between keyframes of the same target
// the motion is linear; a keyframe for a different target is a step change.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sononav/alignment.hpp"
#include "sononav/config.hpp"
#include "sononav/engine.hpp"
#include "sononav/error.hpp"
#include "sononav/session.hpp"
#include "sononav/stats.hpp"

namespace sononav {

struct Keyframe {
  double t = 0.0;
  std::int32_t target = 0;
  Vec3 offset_mm = Vec3::Zero();
  double axial_tilt_deg = 0.0;
  double sagittal_tilt_deg = 0.0;
  std::optional<Pose> pose;  // absolute pose, overrides offset/tilt
  std::string label;
};

struct NoiseModel {
  double position_sigma_mm = 0.0;
  double orientation_sigma_deg = 0.0;
  std::uint64_t seed = 0;
};

struct Scenario {
  std::string name = "scenario";
  TargetPlan plan;
  std::vector<Keyframe> script;
  NoiseModel noise;
  double tick_rate_hz = 50.0;
};

inline void validate(const Scenario& s) {
  validate(s.plan);
  if (!(s.tick_rate_hz > 0.0) || !std::isfinite(s.tick_rate_hz)) {
    throw Error(ErrorCode::InvalidArgument, "tick rate must be positive");
  }
  if (s.script.empty()) throw Error(ErrorCode::InvalidArgument, "scenario script is empty");
  for (std::size_t i = 0; i < s.script.size(); ++i) {
    const auto& k = s.script[i];
    if (!std::isfinite(k.t) || (i > 0 && k.t < s.script[i - 1].t)) {
      throw Error(ErrorCode::InvalidArgument, "keyframe times must be finite and non-decreasing");
    }
    if (k.target < 0 || static_cast<std::size_t>(k.target) >= s.plan.targets.size()) {
      throw Error(ErrorCode::UnknownTarget, "keyframe references unknown target " + std::to_string(k.target));
    }
  }
  if (s.noise.position_sigma_mm < 0.0 || s.noise.orientation_sigma_deg < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "noise sigmas must be non-negative");
  }
}

/// Tool pose for a target-relative keyframe.
inline Pose relative_pose(const TargetPlan& plan, const EntryPlane& plane, std::int32_t target,
                          const Vec3& offset_mm, double axial_tilt_deg, double sagittal_tilt_deg) {
  const auto& traj = plan.targets.at(static_cast<std::size_t>(target)).trajectory;
  Pose pose;
  pose.position = traj.entry_point + offset_mm.x() * plane.in_plane_x + offset_mm.y() * plane.in_plane_y +
                  offset_mm.z() * plane.normal;
  const Quat along = Quat::FromTwoVectors(Vec3::UnitZ(), traj.direction);
  const Quat tilt = Quat(Eigen::AngleAxisd(deg_to_rad(sagittal_tilt_deg), plan.frame.x_axis)) *
                    Quat(Eigen::AngleAxisd(deg_to_rad(axial_tilt_deg), plan.frame.z_axis));
  pose.orientation = (tilt * along).normalized();
  return pose;
}

namespace detail {

inline Pose keyframe_pose(const Scenario& s, const Engine& engine, const Keyframe& k) {
  if (k.pose) return *k.pose;
  return relative_pose(s.plan, engine.entry_plane(k.target), k.target, k.offset_mm, k.axial_tilt_deg,
                       k.sagittal_tilt_deg);
}

inline std::pair<std::int32_t, Pose> scripted_pose(const Scenario& s, const Engine& engine, double t) {
  const auto& script = s.script;
  auto upper = std::upper_bound(script.begin(), script.end(), t,
                                [](double value, const Keyframe& k) { return value < k.t; });
  if (upper == script.begin()) return {script.front().target, keyframe_pose(s, engine, script.front())};
  const Keyframe& a = *std::prev(upper);
  if (upper == script.end() || upper->target != a.target) return {a.target, keyframe_pose(s, engine, a)};
  const Keyframe& b = *upper;
  const double u = (t - a.t) / (b.t - a.t);
  if (!a.pose && !b.pose) {
    const Vec3 offset = a.offset_mm + u * (b.offset_mm - a.offset_mm);
    return {a.target, relative_pose(s.plan, engine.entry_plane(a.target), a.target, offset,
                                    std::lerp(a.axial_tilt_deg, b.axial_tilt_deg, u),
                                    std::lerp(a.sagittal_tilt_deg, b.sagittal_tilt_deg, u))};
  }
  const Pose pa = keyframe_pose(s, engine, a);
  const Pose pb = keyframe_pose(s, engine, b);
  return {a.target, Pose{pa.position + u * (pb.position - pa.position),
                         pa.orientation.slerp(u, pb.orientation).normalized()}};
}

}  // namespace detail

struct TimedEvent {
  double timestamp_s = 0.0;
  TransitionEvent event;
};

struct TrialMetrics {
  std::int32_t target_id = 0;
  std::string target_label;
  std::optional<double> alignment_start_s;  // first EnterEP
  std::optional<double> drill_start_s;      // FP held for the dwell time
  std::optional<double> alignment_time_s;
  ErrorVector final_error;  // at drill start, else at the target's last tick
  std::map<std::string, int> transition_counts;
  std::vector<TimedEvent> timeline;
};

/// One metrics row per target that appears in the log, in order of first appearance.
inline std::vector<TrialMetrics> compute_metrics(const SessionLog& log, double dwell_s) {
  std::vector<TrialMetrics> rows;
  std::map<std::int32_t, std::size_t> index;
  std::map<std::int32_t, std::optional<double>> fp_since;
  constexpr double kEps = 1e-9;

  for (const auto& rec : log.records) {
    auto [it, inserted] = index.try_emplace(rec.target_id, rows.size());
    if (inserted) {
      TrialMetrics m;
      m.target_id = rec.target_id;
      if (rec.target_id >= 0 && static_cast<std::size_t>(rec.target_id) < log.plan.targets.size()) {
        m.target_label = log.plan.targets[static_cast<std::size_t>(rec.target_id)].label;
      }
      rows.push_back(std::move(m));
    }
    TrialMetrics& m = rows[it->second];
    for (const auto& e : rec.events) {
      m.timeline.push_back(TimedEvent{rec.timestamp_s, e});
      ++m.transition_counts[to_string(e)];
      if (e.kind == TransitionEvent::Kind::EnterEP && !m.alignment_start_s) m.alignment_start_s = rec.timestamp_s;
    }
    if (m.drill_start_s) continue;
    m.final_error = rec.error;

    auto& since = fp_since[rec.target_id];
    if (rec.phase != Phase::FP) {
      since.reset();
      continue;
    }
    if (!since) since = rec.timestamp_s;
    if (rec.timestamp_s - *since >= dwell_s - kEps) {
      m.drill_start_s = rec.timestamp_s;
      if (m.alignment_start_s) m.alignment_time_s = rec.timestamp_s - *m.alignment_start_s;
    }
  }
  return rows;
}

struct ScenarioRun {
  SessionLog log;
  std::vector<TrialMetrics> metrics;
};

inline ScenarioRun run_scenario(const Scenario& scenario, const EngineConfig& config) {
  validate(scenario);
  Engine engine(scenario.plan, config);
  ScenarioRun run;
  run.log.plan = scenario.plan;
  run.log.config = config;

  std::mt19937_64 rng(scenario.noise.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  const double pos_sigma = scenario.noise.position_sigma_mm;
  const double rot_sigma = deg_to_rad(scenario.noise.orientation_sigma_deg);

  const double end = scenario.script.back().t;
  const auto ticks = static_cast<std::int64_t>(std::floor(end * scenario.tick_rate_hz + 1e-9));
  run.log.records.reserve(static_cast<std::size_t>(ticks + 1));
  for (std::int64_t k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) / scenario.tick_rate_hz;
    auto [target, pose] = detail::scripted_pose(scenario, engine, t);

    const Vec3 dp(unit_normal(rng), unit_normal(rng), unit_normal(rng));
    const Vec3 rv(unit_normal(rng), unit_normal(rng), unit_normal(rng));
    pose.position += pos_sigma * dp;
    const Vec3 rot = rot_sigma * rv;
    if (rot.norm() > 0.0) {
      pose.orientation = (Quat(Eigen::AngleAxisd(rot.norm(), rot.normalized())) * pose.orientation).normalized();
    }
    run.log.records.push_back(engine.tick(t, target, pose));
  }
  run.metrics = compute_metrics(run.log, config.drill_dwell_s);
  return run;
}

inline Scenario scenario_from_json(const json& j, const ZoneThresholds& default_thresholds = {}) {
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    s.tick_rate_hz = j.value("tick_rate_hz", 50.0);
    s.plan = plan_from_json(j.at("plan"), default_thresholds);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      s.noise.position_sigma_mm = n.value("position_sigma_mm", 0.0);
      s.noise.orientation_sigma_deg = n.value("orientation_sigma_deg", 0.0);
      s.noise.seed = n.value("seed", std::uint64_t{0});
    }
    for (const auto& k : j.at("script")) {
      Keyframe key;
      key.t = k.at("t").get<double>();
      key.target = k.value("target", 0);
      key.label = k.value("label", std::string());
      if (k.contains("pose")) {
        key.pose = Pose{vec_from_json(k.at("pose").at("position")),
                        quat_from_json(k.at("pose").at("orientation")).normalized()};
      } else {
        if (k.contains("offset_mm")) key.offset_mm = vec_from_json(k.at("offset_mm"));
        if (k.contains("tilt_deg")) {
          const auto& tilt = k.at("tilt_deg");
          if (!tilt.is_array() || tilt.size() != 2) throw Error(ErrorCode::ParseError, "tilt_deg must be [axial, sagittal]");
          key.axial_tilt_deg = tilt[0].get<double>();
          key.sagittal_tilt_deg = tilt[1].get<double>();
        }
      }
      s.script.push_back(std::move(key));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

inline Scenario load_scenario(const std::string& path, const ZoneThresholds& default_thresholds = {}) {
  return scenario_from_json(read_json_file(path), default_thresholds);
}

// ---- reporting ---------------------------------------------------------------

using stats::MeanSd;
using stats::mean_sd;

struct ReportRow {
  std::string label;
  std::size_t n = 0;
  std::size_t n_na = 0;  // rows without an alignment time
  MeanSd time_s;
  MeanSd d_mm;
  MeanSd theta_deg;
};

/// CSV columns: label,n,n_time,n_na,time_mean_s,time_sd_s,d_mean_mm,d_sd_mm,theta_mean_deg,theta_sd_deg
inline constexpr std::string_view kReportCsvHeader =
    "label,n,n_time,n_na,time_mean_s,time_sd_s,d_mean_mm,d_sd_mm,theta_mean_deg,theta_sd_deg";

struct Report {
  std::vector<ReportRow> rows;

  std::string to_csv() const {
    std::ostringstream out;
    out << kReportCsvHeader << '\n' << std::setprecision(10);
    for (const auto& r : rows) {
      out << r.label << ',' << r.n << ',' << r.time_s.n << ',' << r.n_na << ',' << r.time_s.mean << ','
          << r.time_s.sd << ',' << r.d_mm.mean << ',' << r.d_mm.sd << ',' << r.theta_deg.mean << ','
          << r.theta_deg.sd << '\n';
    }
    return out.str();
  }

  std::string to_text() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    for (const auto& r : rows) {
      out << r.label << ": n=" << r.n << " time " << r.time_s.mean << " +/- " << r.time_s.sd << " s (n/a "
          << r.n_na << "), d " << r.d_mm.mean << " +/- " << r.d_mm.sd << " mm, theta " << r.theta_deg.mean
          << " +/- " << r.theta_deg.sd << " deg\n";
    }
    return out.str();
  }
};

/// Groups rows by `group_labels` (parallel to `rows`), in order of first
/// appearance. Rows without an alignment time are left out of the time
/// statistics and counted in n_na.
inline Report report(std::span<const TrialMetrics> rows, std::span<const std::string> group_labels) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "report needs at least one metrics row");
  if (rows.size() != group_labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "one group label is needed per metrics row");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrialMetrics*>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& g = groups[group_labels[i]];
    if (g.empty()) order.push_back(group_labels[i]);
    g.push_back(&rows[i]);
  }
  Report out;
  for (const auto& label : order) {
    std::vector<double> times, ds, thetas;
    ReportRow row;
    row.label = label;
    for (const TrialMetrics* m : groups[label]) {
      ++row.n;
      if (m->alignment_time_s) {
        times.push_back(*m->alignment_time_s);
      } else {
        ++row.n_na;
      }
      ds.push_back(m->final_error.d);
      thetas.push_back(m->final_error.theta);
    }
    row.time_s = mean_sd(times);
    row.d_mm = mean_sd(ds);
    row.theta_deg = mean_sd(thetas);
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace sononav
