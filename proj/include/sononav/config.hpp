#pragma once

// Engine configuration and target plans, with their JSON forms.
//
// Config file schema (every key optional; missing keys keep their defaults):
//
//   {
//     "thresholds": {"working_radius_mm": 20, "working_angle_deg": 30,
//                    "target_mm": 2, "target_deg": 1.5,
//                    "transition_mm": 0.5, "transition_deg": 0.375},
//     "mapping": {"ep_freq_hz": [880, 1760], "ap_freq_hz": [110, 440],
//                 "pulse_interval_s": [0.35, 0.1],
//                 "ip_chord": {"freqs_hz": [...], "interval_s": 0.66},
//                 "fp_chord": {"freqs_hz": [...], "interval_s": 1.5},
//                 "zero_error_at_first_endpoint": true,
//                 "earcons": {"optimum_x_phi_hz": [1320, 1760], ...}},
//     "synth": {"sample_rate_hz": 48000, "block_frames": 256,
//               "harmonicity_ratio": 1, "modulation_index": 1, ...},
//     "network": {"bind_address": "0.0.0.0", "udp_port": 57130, "ws_port": 8765,
//                 "osc_out_host": "", "osc_out_port": 0, ...},
//     "log_dir": ".", "drill_dwell_s": 0.5
//   }
//
// Environment overrides: SONONAV_PORT (UDP ingress port), SONONAV_WS_PORT,
// SONONAV_LOG_DIR.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sononav/alignment.hpp"
#include "sononav/error.hpp"
#include "sononav/geometry.hpp"
#include "sononav/mapping.hpp"
#include "sononav/synth.hpp"

namespace sononav {

using json = nlohmann::json;

struct NetworkConfig {
  std::string bind_address = "0.0.0.0";
  std::uint16_t udp_port = 57130;
  std::uint16_t ws_port = 8765;
  std::string osc_out_host;  // empty disables outbound OSC
  std::uint16_t osc_out_port = 0;
  std::size_t ingress_queue = 64;
  std::size_t subscriber_queue = 64;

  bool operator==(const NetworkConfig&) const = default;
};

struct EngineConfig {
  ZoneThresholds thresholds;
  MappingConfig mapping;
  SynthConfig synth;
  NetworkConfig network;
  std::string log_dir = ".";
  double drill_dwell_s = 0.5;

  bool operator==(const EngineConfig&) const = default;
};

struct LabeledTarget {
  std::string label;
  PlannedTrajectory trajectory;

  bool operator==(const LabeledTarget&) const = default;
};

struct TargetPlan {
  std::vector<LabeledTarget> targets;
  AnatomicalFrame frame;
  ZoneThresholds thresholds;

  bool operator==(const TargetPlan&) const = default;
};

inline void validate(const TargetPlan& plan) {
  if (plan.targets.empty()) throw Error(ErrorCode::InvalidArgument, "target plan has no targets");
  std::set<std::string> labels;
  for (const auto& t : plan.targets) {
    if (!labels.insert(t.label).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate target label '" + t.label + "'");
    }
    validate(t.trajectory);
  }
  validate(plan.frame);
  validate(plan.thresholds);
}

// ---- JSON --------------------------------------------------------------------

inline json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline json quat_to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

inline Quat quat_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::ParseError, "expected [w, x, y, z]");
  return Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

namespace detail {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void read_range(const json& j, const char* key, Range& out) {
  if (!j.contains(key)) return;
  const auto& r = j.at(key);
  if (!r.is_array() || r.size() != 2) throw Error(ErrorCode::ParseError, std::string(key) + " must be [a, b]");
  out = Range{r[0].get<double>(), r[1].get<double>()};
}

}  // namespace detail

inline json to_json(const ZoneThresholds& t) {
  return {{"working_radius_mm", t.working_radius_mm}, {"working_angle_deg", t.working_angle_deg},
          {"target_mm", t.target_mm},                 {"target_deg", t.target_deg},
          {"transition_mm", t.transition_mm},         {"transition_deg", t.transition_deg}};
}

inline ZoneThresholds thresholds_from_json(const json& j, ZoneThresholds t = {}) {
  detail::read_opt(j, "working_radius_mm", t.working_radius_mm);
  detail::read_opt(j, "working_angle_deg", t.working_angle_deg);
  detail::read_opt(j, "target_mm", t.target_mm);
  detail::read_opt(j, "target_deg", t.target_deg);
  detail::read_opt(j, "transition_mm", t.transition_mm);
  detail::read_opt(j, "transition_deg", t.transition_deg);
  return t;
}

inline json to_json(const MappingConfig& m) {
  const auto& e = m.earcons;
  return {{"ep_freq_hz", {m.ep_freq_hz.first, m.ep_freq_hz.second}},
          {"ap_freq_hz", {m.ap_freq_hz.first, m.ap_freq_hz.second}},
          {"pulse_interval_s", {m.pulse_interval_s.first, m.pulse_interval_s.second}},
          {"ip_chord", {{"freqs_hz", m.ip_chord.freqs_hz}, {"interval_s", m.ip_chord.interval_s}}},
          {"fp_chord", {{"freqs_hz", m.fp_chord.freqs_hz}, {"interval_s", m.fp_chord.interval_s}}},
          {"zero_error_at_first_endpoint", m.zero_error_at_first_endpoint},
          {"earcons",
           {{"optimum_x_phi_hz", e.optimum_x_phi_hz},
            {"optimum_y_delta_hz", e.optimum_y_delta_hz},
            {"optimum_note_s", e.optimum_note_s},
            {"transition_root_hz", e.transition_root_hz},
            {"transition_note_s", e.transition_note_s}}}};
}

inline MappingConfig mapping_from_json(const json& j, MappingConfig m = {}) {
  detail::read_range(j, "ep_freq_hz", m.ep_freq_hz);
  detail::read_range(j, "ap_freq_hz", m.ap_freq_hz);
  detail::read_range(j, "pulse_interval_s", m.pulse_interval_s);
  for (auto [key, chord] : {std::pair{"ip_chord", &m.ip_chord}, std::pair{"fp_chord", &m.fp_chord}}) {
    if (!j.contains(key)) continue;
    detail::read_opt(j.at(key), "freqs_hz", chord->freqs_hz);
    detail::read_opt(j.at(key), "interval_s", chord->interval_s);
  }
  detail::read_opt(j, "zero_error_at_first_endpoint", m.zero_error_at_first_endpoint);
  if (j.contains("earcons")) {
    const auto& e = j.at("earcons");
    detail::read_opt(e, "optimum_x_phi_hz", m.earcons.optimum_x_phi_hz);
    detail::read_opt(e, "optimum_y_delta_hz", m.earcons.optimum_y_delta_hz);
    detail::read_opt(e, "optimum_note_s", m.earcons.optimum_note_s);
    detail::read_opt(e, "transition_root_hz", m.earcons.transition_root_hz);
    detail::read_opt(e, "transition_note_s", m.earcons.transition_note_s);
  }
  return m;
}

inline json to_json(const SynthConfig& s) {
  return {{"sample_rate_hz", s.sample_rate_hz},   {"block_frames", s.block_frames},
          {"harmonicity_ratio", s.harmonicity_ratio}, {"modulation_index", s.modulation_index},
          {"attack_s", s.attack_s},               {"decay_fraction", s.decay_fraction},
          {"output_gain", s.output_gain},         {"earcon_duck_db", s.earcon_duck_db},
          {"retrigger_ramp_s", s.retrigger_ramp_s}, {"earcon_attack_s", s.earcon_attack_s},
          {"earcon_release_s", s.earcon_release_s}};
}

inline SynthConfig synth_from_json(const json& j, SynthConfig s = {}) {
  detail::read_opt(j, "sample_rate_hz", s.sample_rate_hz);
  detail::read_opt(j, "block_frames", s.block_frames);
  detail::read_opt(j, "harmonicity_ratio", s.harmonicity_ratio);
  detail::read_opt(j, "modulation_index", s.modulation_index);
  detail::read_opt(j, "attack_s", s.attack_s);
  detail::read_opt(j, "decay_fraction", s.decay_fraction);
  detail::read_opt(j, "output_gain", s.output_gain);
  detail::read_opt(j, "earcon_duck_db", s.earcon_duck_db);
  detail::read_opt(j, "retrigger_ramp_s", s.retrigger_ramp_s);
  detail::read_opt(j, "earcon_attack_s", s.earcon_attack_s);
  detail::read_opt(j, "earcon_release_s", s.earcon_release_s);
  return s;
}

inline json to_json(const NetworkConfig& n) {
  return {{"bind_address", n.bind_address}, {"udp_port", n.udp_port},
          {"ws_port", n.ws_port},           {"osc_out_host", n.osc_out_host},
          {"osc_out_port", n.osc_out_port}, {"ingress_queue", n.ingress_queue},
          {"subscriber_queue", n.subscriber_queue}};
}

inline NetworkConfig network_from_json(const json& j, NetworkConfig n = {}) {
  detail::read_opt(j, "bind_address", n.bind_address);
  detail::read_opt(j, "udp_port", n.udp_port);
  detail::read_opt(j, "ws_port", n.ws_port);
  detail::read_opt(j, "osc_out_host", n.osc_out_host);
  detail::read_opt(j, "osc_out_port", n.osc_out_port);
  detail::read_opt(j, "ingress_queue", n.ingress_queue);
  detail::read_opt(j, "subscriber_queue", n.subscriber_queue);
  return n;
}

inline json to_json(const EngineConfig& c) {
  return {{"thresholds", to_json(c.thresholds)}, {"mapping", to_json(c.mapping)},
          {"synth", to_json(c.synth)},           {"network", to_json(c.network)},
          {"log_dir", c.log_dir},                {"drill_dwell_s", c.drill_dwell_s}};
}

inline EngineConfig engine_config_from_json(const json& j) {
  EngineConfig c;
  try {
    if (j.contains("thresholds")) c.thresholds = thresholds_from_json(j.at("thresholds"));
    if (j.contains("mapping")) c.mapping = mapping_from_json(j.at("mapping"));
    if (j.contains("synth")) c.synth = synth_from_json(j.at("synth"));
    if (j.contains("network")) c.network = network_from_json(j.at("network"));
    detail::read_opt(j, "log_dir", c.log_dir);
    detail::read_opt(j, "drill_dwell_s", c.drill_dwell_s);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  validate(c.thresholds);
  validate(c.mapping);
  validate(c.synth);
  return c;
}

/// Applies SONONAV_PORT, SONONAV_WS_PORT and SONONAV_LOG_DIR when set.
inline void apply_env_overrides(EngineConfig& c) {
  auto port = [](const char* name, std::uint16_t& out) {
    if (const char* v = std::getenv(name)) {
      const long p = std::strtol(v, nullptr, 10);
      if (p <= 0 || p > 65535) throw Error(ErrorCode::InvalidArgument, std::string(name) + " is not a valid port");
      out = static_cast<std::uint16_t>(p);
    }
  };
  port("SONONAV_PORT", c.network.udp_port);
  port("SONONAV_WS_PORT", c.network.ws_port);
  if (const char* dir = std::getenv("SONONAV_LOG_DIR")) c.log_dir = dir;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline EngineConfig load_engine_config(const std::string& path) {
  return engine_config_from_json(read_json_file(path));
}

inline json to_json(const AnatomicalFrame& f) {
  return {{"origin", vec_to_json(f.origin)},
          {"x_axis", vec_to_json(f.x_axis)},
          {"y_axis", vec_to_json(f.y_axis)},
          {"z_axis", vec_to_json(f.z_axis)}};
}

inline AnatomicalFrame frame_from_json(const json& j) {
  AnatomicalFrame f;
  if (j.contains("origin")) f.origin = vec_from_json(j.at("origin"));
  if (j.contains("x_axis")) f.x_axis = vec_from_json(j.at("x_axis"));
  if (j.contains("y_axis")) f.y_axis = vec_from_json(j.at("y_axis"));
  if (j.contains("z_axis")) f.z_axis = vec_from_json(j.at("z_axis"));
  return f;
}

inline json to_json(const TargetPlan& plan) {
  json targets = json::array();
  for (const auto& t : plan.targets) {
    targets.push_back({{"label", t.label},
                       {"entry", vec_to_json(t.trajectory.entry_point)},
                       {"direction", vec_to_json(t.trajectory.direction)}});
  }
  return {{"targets", targets}, {"frame", to_json(plan.frame)}, {"thresholds", to_json(plan.thresholds)}};
}

/// Directions that are not unit length are normalized on load, so hand-written
/// plans need not be exact.
inline TargetPlan plan_from_json(const json& j, const ZoneThresholds& default_thresholds = {}) {
  TargetPlan plan;
  try {
    for (const auto& t : j.at("targets")) {
      LabeledTarget target;
      target.label = t.at("label").get<std::string>();
      target.trajectory.entry_point = vec_from_json(t.at("entry"));
      const Vec3 dir = vec_from_json(t.at("direction"));
      if (!(dir.norm() > 0.0)) throw Error(ErrorCode::ParseError, "target direction is zero");
      target.trajectory.direction = std::abs(dir.norm() - 1.0) > kUnitTolerance ? Vec3(dir.normalized()) : dir;
      plan.targets.push_back(std::move(target));
    }
    if (j.contains("frame")) plan.frame = frame_from_json(j.at("frame"));
    plan.thresholds = j.contains("thresholds") ? thresholds_from_json(j.at("thresholds"), default_thresholds)
                                               : default_thresholds;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("plan: ") + e.what());
  }
  validate(plan);
  return plan;
}

}  // namespace sononav
