#pragma once

// Four-phase alignment state machine (IP -> EP -> AP -> FP) with nested
// target/transition zones. Forward transitions require the inner transition
// zone (<= threshold); backward transitions require leaving the outer target
// zone (> threshold). Between the two boundaries the phase is held.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sononav/error.hpp"
#include "sononav/geometry.hpp"

namespace sononav {

struct ZoneThresholds {
  double working_radius_mm = 20.0;  // r_EP
  double working_angle_deg = 30.0;  // theta_Ang
  double target_mm = 2.0;
  double target_deg = 1.5;
  double transition_mm = 0.5;
  double transition_deg = 0.375;

  bool operator==(const ZoneThresholds&) const = default;
};

inline void validate(const ZoneThresholds& t) {
  const bool ok_mm = 0.0 < t.transition_mm && t.transition_mm < t.target_mm &&
                     t.target_mm < t.working_radius_mm;
  const bool ok_deg = 0.0 < t.transition_deg && t.transition_deg < t.target_deg &&
                      t.target_deg < t.working_angle_deg;
  if (!ok_mm || !ok_deg) {
    throw Error(ErrorCode::InvalidArgument,
                "zone thresholds must satisfy 0 < transition < target < working area");
  }
}

enum class Phase { IP, EP, AP, FP };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::IP: return "IP";
    case Phase::EP: return "EP";
    case Phase::AP: return "AP";
    case Phase::FP: return "FP";
  }
  return "?";
}

inline std::optional<Phase> phase_from_string(std::string_view s) {
  for (Phase p : {Phase::IP, Phase::EP, Phase::AP, Phase::FP}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

enum class Dimension { X = 0, Y = 1, Phi = 2, Delta = 3 };

constexpr std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::X: return "x";
    case Dimension::Y: return "y";
    case Dimension::Phi: return "phi";
    case Dimension::Delta: return "delta";
  }
  return "?";
}

using DimensionFlags = std::array<bool, 4>;  // indexed by Dimension

struct TransitionEvent {
  enum class Kind { EnterEP, EPtoAP, APtoEP, APtoFP, FPtoAP, ExitToIP, DimensionReached, DimensionLost };

  Kind kind = Kind::EnterEP;
  Dimension dimension = Dimension::X;  // meaningful for DimensionReached/Lost only

  static TransitionEvent reached(Dimension d) { return {Kind::DimensionReached, d}; }
  static TransitionEvent lost(Dimension d) { return {Kind::DimensionLost, d}; }

  bool is_dimension_event() const {
    return kind == Kind::DimensionReached || kind == Kind::DimensionLost;
  }

  friend bool operator==(const TransitionEvent& a, const TransitionEvent& b) {
    return a.kind == b.kind && (!a.is_dimension_event() || a.dimension == b.dimension);
  }
};

/// "EPtoAP", "DimensionReached(x)", ...
inline std::string to_string(const TransitionEvent& e) {
  using K = TransitionEvent::Kind;
  switch (e.kind) {
    case K::EnterEP: return "EnterEP";
    case K::EPtoAP: return "EPtoAP";
    case K::APtoEP: return "APtoEP";
    case K::APtoFP: return "APtoFP";
    case K::FPtoAP: return "FPtoAP";
    case K::ExitToIP: return "ExitToIP";
    case K::DimensionReached: return "DimensionReached(" + std::string(to_string(e.dimension)) + ")";
    case K::DimensionLost: return "DimensionLost(" + std::string(to_string(e.dimension)) + ")";
  }
  return "?";
}

inline std::optional<TransitionEvent> event_from_string(std::string_view s) {
  using K = TransitionEvent::Kind;
  for (K k : {K::EnterEP, K::EPtoAP, K::APtoEP, K::APtoFP, K::FPtoAP, K::ExitToIP}) {
    if (to_string(TransitionEvent{k}) == s) return TransitionEvent{k};
  }
  for (K k : {K::DimensionReached, K::DimensionLost}) {
    for (Dimension d : {Dimension::X, Dimension::Y, Dimension::Phi, Dimension::Delta}) {
      const TransitionEvent e{k, d};
      if (to_string(e) == s) return e;
    }
  }
  return std::nullopt;
}

struct AlignmentState {
  Phase phase = Phase::IP;
  double d = std::numeric_limits<double>::infinity();
  double theta = std::numeric_limits<double>::infinity();
  DimensionFlags at_target{};

  bool operator==(const AlignmentState&) const = default;
};

struct StepResult {
  AlignmentState state;
  std::vector<TransitionEvent> events;
};

inline bool monitors(Phase phase, Dimension dim) {
  switch (phase) {
    case Phase::EP: return dim == Dimension::X || dim == Dimension::Y;
    case Phase::AP: return dim == Dimension::Phi || dim == Dimension::Delta;
    default: return false;
  }
}

/// Per-dimension at-target flags for the interactive phase; boundary inclusive.
/// Dimensions not monitored in `phase` report false.
inline DimensionFlags dimension_flags(const ErrorVector& err, const ZoneThresholds& t, Phase phase) {
  DimensionFlags flags{};
  if (phase == Phase::EP) {
    flags[0] = std::abs(err.e_x) <= t.target_mm;
    flags[1] = std::abs(err.e_y) <= t.target_mm;
  } else if (phase == Phase::AP) {
    flags[2] = std::abs(err.e_phi) <= t.target_deg;
    flags[3] = std::abs(err.e_delta) <= t.target_deg;
  }
  return flags;
}

namespace detail {

inline std::optional<std::pair<Phase, TransitionEvent::Kind>> next_phase(Phase phase, double d,
                                                                       double theta,
                                                                       const ZoneThresholds& t) {
  using K = TransitionEvent::Kind;
  switch (phase) {
    case Phase::IP:
      if (d < t.working_radius_mm) return std::pair{Phase::EP, K::EnterEP};
      break;
    case Phase::EP:
      if (d > t.working_radius_mm) return std::pair{Phase::IP, K::ExitToIP};
      if (d <= t.transition_mm) return std::pair{Phase::AP, K::EPtoAP};
      break;
    case Phase::AP:
      if (d > t.target_mm) return std::pair{Phase::EP, K::APtoEP};
      if (theta <= t.transition_deg) return std::pair{Phase::FP, K::APtoFP};
      break;
    case Phase::FP:
      // The tip leaving its target zone also drops out of FP; AP then demotes to EP.
      if (theta > t.target_deg || d > t.target_mm) return std::pair{Phase::AP, K::FPtoAP};
      break;
  }
  return std::nullopt;
}

}  // namespace detail

/// Advances the machine by one tick. Phase transitions cascade within a tick
/// (e.g. IP straight to FP when already aligned), emitted in causal order,
/// followed by rising/falling edges of the per-dimension flags.
inline StepResult step(const AlignmentState& state, const ErrorVector& err, const ZoneThresholds& t) {
  for (double v : {err.e_x, err.e_y, err.e_phi, err.e_delta, err.d, err.theta}) {
    if (std::isnan(v)) throw Error(ErrorCode::InvalidInput, "error vector contains NaN");
  }

  StepResult out;
  out.state.d = err.d;
  out.state.theta = err.theta;

  Phase phase = state.phase;
  // Chains are at most three transitions long; the zones are nested so no loop can form.
  for (int guard = 0; guard < 4; ++guard) {
    const auto next = detail::next_phase(phase, err.d, err.theta, t);
    if (!next) break;
    phase = next->first;
    out.events.push_back(TransitionEvent{next->second});
  }
  out.state.phase = phase;

  const DimensionFlags now = dimension_flags(err, t, phase);
  for (int i = 0; i < 4; ++i) {
    const auto dim = static_cast<Dimension>(i);
    if (!monitors(phase, dim)) continue;
    // Flags of a phase that was just entered start from false.
    const bool before = monitors(state.phase, dim) && state.at_target[i];
    if (now[i] && !before) out.events.push_back(TransitionEvent::reached(dim));
    if (!now[i] && before) out.events.push_back(TransitionEvent::lost(dim));
  }
  out.state.at_target = now;
  return out;
}

}  // namespace sononav
