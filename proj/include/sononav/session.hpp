#pragma once

// Session logs: line-delimited JSON. Line 1 is a header
//   {"format": "sononav-session", "version": 1, "plan": {...}, "config": {...}}
// followed by one record per processed tick:
//   {"t": 0.02, "target": 0,
//    "pose": {"position": [x, y, z], "orientation": [w, x, y, z]},
//    "error": {"e_x": .., "e_y": .., "e_phi": .., "e_delta": .., "d": .., "theta": ..},
//    "phase": "EP",
//    "synth": {"mode": "pulse_stream", "fundamental_hz": .., "pulse_interval_s": ..,
//              "chord_hz": [..], "phase": "EP"},
//    "events": ["EnterEP", "DimensionReached(x)"]}

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sononav/alignment.hpp"
#include "sononav/config.hpp"
#include "sononav/error.hpp"
#include "sononav/geometry.hpp"
#include "sononav/mapping.hpp"

namespace sononav {

inline constexpr std::string_view kSessionFormat = "sononav-session";
inline constexpr int kSessionVersion = 1;

struct SessionRecord {
  double timestamp_s = 0.0;
  std::int32_t target_id = 0;
  Pose pose;
  ErrorVector error;
  Phase phase = Phase::IP;
  SynthParams synth;
  std::vector<TransitionEvent> events;

  bool operator==(const SessionRecord&) const = default;
};

struct SessionLog {
  TargetPlan plan;
  EngineConfig config;
  std::vector<SessionRecord> records;

  bool operator==(const SessionLog&) const = default;
};

/// Timestamps must be finite and non-decreasing.
inline void validate(const SessionLog& log) {
  double last = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const double t = log.records[i].timestamp_s;
    if (!std::isfinite(t) || t < last) {
      throw Error(ErrorCode::MalformedLog, "record " + std::to_string(i) + " has a bad timestamp");
    }
    last = t;
  }
}

inline json to_json(const ErrorVector& e) {
  return {{"e_x", e.e_x}, {"e_y", e.e_y}, {"e_phi", e.e_phi},
          {"e_delta", e.e_delta}, {"d", e.d}, {"theta", e.theta}};
}

inline ErrorVector error_from_json(const json& j) {
  return ErrorVector{j.at("e_x").get<double>(),     j.at("e_y").get<double>(), j.at("e_phi").get<double>(),
                     j.at("e_delta").get<double>(), j.at("d").get<double>(),   j.at("theta").get<double>()};
}

inline Phase phase_from_json(const json& j) {
  const auto p = phase_from_string(j.get<std::string>());
  if (!p) throw Error(ErrorCode::ParseError, "unknown phase '" + j.get<std::string>() + "'");
  return *p;
}

inline json to_json(const SynthParams& s) {
  return {{"mode", std::string(to_string(s.mode))},
          {"fundamental_hz", s.fundamental_hz},
          {"pulse_interval_s", s.pulse_interval_s},
          {"chord_hz", s.chord_freqs_hz},
          {"phase", std::string(to_string(s.active_phase))}};
}

inline SynthParams synth_params_from_json(const json& j) {
  SynthParams s;
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "pulse_stream") {
    s.mode = SynthMode::PulseStream;
  } else if (mode == "chord") {
    s.mode = SynthMode::Chord;
  } else {
    throw Error(ErrorCode::ParseError, "unknown synth mode '" + mode + "'");
  }
  s.fundamental_hz = j.at("fundamental_hz").get<double>();
  s.pulse_interval_s = j.at("pulse_interval_s").get<double>();
  s.chord_freqs_hz = j.at("chord_hz").get<std::vector<double>>();
  s.active_phase = phase_from_json(j.at("phase"));
  return s;
}

inline json events_to_json(const std::vector<TransitionEvent>& events) {
  json out = json::array();
  for (const auto& e : events) out.push_back(to_string(e));
  return out;
}

inline std::vector<TransitionEvent> events_from_json(const json& j) {
  std::vector<TransitionEvent> out;
  for (const auto& item : j) {
    const auto e = event_from_string(item.get<std::string>());
    if (!e) throw Error(ErrorCode::ParseError, "unknown event '" + item.get<std::string>() + "'");
    out.push_back(*e);
  }
  return out;
}

inline json to_json(const SessionRecord& r) {
  return {{"t", r.timestamp_s},
          {"target", r.target_id},
          {"pose", {{"position", vec_to_json(r.pose.position)}, {"orientation", quat_to_json(r.pose.orientation)}}},
          {"error", to_json(r.error)},
          {"phase", std::string(to_string(r.phase))},
          {"synth", to_json(r.synth)},
          {"events", events_to_json(r.events)}};
}

inline SessionRecord record_from_json(const json& j) {
  SessionRecord r;
  r.timestamp_s = j.at("t").get<double>();
  r.target_id = j.at("target").get<std::int32_t>();
  r.pose.position = vec_from_json(j.at("pose").at("position"));
  r.pose.orientation = quat_from_json(j.at("pose").at("orientation"));
  r.error = error_from_json(j.at("error"));
  r.phase = phase_from_json(j.at("phase"));
  r.synth = synth_params_from_json(j.at("synth"));
  r.events = events_from_json(j.at("events"));
  return r;
}

inline json session_header(const SessionLog& log) {
  return {{"format", std::string(kSessionFormat)},
          {"version", kSessionVersion},
          {"plan", to_json(log.plan)},
          {"config", to_json(log.config)}};
}

/// Appends records to an open stream; used for both whole-log writes and live logging.
class SessionWriter {
 public:
  SessionWriter(std::ostream& out, const TargetPlan& plan, const EngineConfig& config) : out_(out) {
    out_ << session_header(SessionLog{plan, config, {}}).dump() << '\n';
  }

  void append(const SessionRecord& record) { out_ << to_json(record).dump() << '\n'; }
  void flush() { out_.flush(); }

 private:
  std::ostream& out_;
};

inline void write_session(std::ostream& out, const SessionLog& log) {
  SessionWriter writer(out, log.plan, log.config);
  for (const auto& r : log.records) writer.append(r);
  writer.flush();
}

inline void write_session(const std::string& path, const SessionLog& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  write_session(out, log);
}

inline SessionLog read_session(std::istream& in) {
  SessionLog log;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + why);
  };

  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  line_no = 1;
  try {
    const json header = json::parse(line);
    if (header.at("format").get<std::string>() != kSessionFormat) throw fail("not a session log");
    const int version = header.at("version").is_string() ? std::stoi(header.at("version").get<std::string>())
                                                          : header.at("version").get<int>();
    if (version != kSessionVersion) {
      throw Error(ErrorCode::VersionMismatch, "session version " + std::to_string(version) +
                                                  " is not supported (reader version " +
                                                  std::to_string(kSessionVersion) + ")");
    }
    log.config = engine_config_from_json(header.at("config"));
    log.plan = plan_from_json(header.at("plan"), log.config.thresholds);
  } catch (const json::exception& e) {
    throw fail(e.what());
  } catch (const std::invalid_argument&) {
    throw fail("version is not a number");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      log.records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw fail(e.what());
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  return log;
}

inline SessionLog read_session(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  return read_session(in);
}

}  // namespace sononav
