#pragma once

// Parameter mapping from (phase, normalized error) to synthesis controls.
//
//   EP: e_x   -exp-> fundamental [880, 1760] Hz, e_y     -lin-> interval [0.35, 0.1] s
//   AP: e_phi -exp-> fundamental [110, 440] Hz,  e_delta -lin-> interval [0.35, 0.1] s
//   IP: chord (123.47, 155.56, 185, 246.94) Hz pulsing every 0.66 s
//   FP: chord (440, 523.25, 659.26, 880) Hz pulsing every 1.5 s
//
// A normalized error of 0 selects the first endpoint of each range unless
// `zero_error_at_first_endpoint` is cleared.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "sononav/alignment.hpp"
#include "sononav/error.hpp"
#include "sononav/geometry.hpp"

namespace sononav {

struct Range {
  double first = 0.0;
  double second = 0.0;

  bool operator==(const Range&) const = default;
};

struct Chord {
  std::vector<double> freqs_hz;
  double interval_s = 1.0;

  bool operator==(const Chord&) const = default;
};

enum class EarconKind { OptimumXPhi, OptimumYDelta, TransitionUp, TransitionDown };

constexpr std::string_view to_string(EarconKind k) {
  switch (k) {
    case EarconKind::OptimumXPhi: return "OptimumXPhi";
    case EarconKind::OptimumYDelta: return "OptimumYDelta";
    case EarconKind::TransitionUp: return "TransitionUp";
    case EarconKind::TransitionDown: return "TransitionDown";
  }
  return "?";
}

struct EarconSpec {
  EarconKind kind = EarconKind::OptimumXPhi;
  std::vector<double> note_freqs_hz;
  double note_duration_s = 0.08;

  bool operator==(const EarconSpec&) const = default;
};

/// Equal-tempered major scale starting at `root_hz`, one octave (8 notes).
inline std::vector<double> major_scale(double root_hz) {
  static constexpr std::array<int, 8> kSemitones{0, 2, 4, 5, 7, 9, 11, 12};
  std::vector<double> notes;
  notes.reserve(kSemitones.size());
  for (int s : kSemitones) notes.push_back(root_hz * std::pow(2.0, s / 12.0));
  return notes;
}

struct EarconPalette {
  std::vector<double> optimum_x_phi_hz{1320.0, 1760.0};
  std::vector<double> optimum_y_delta_hz{1320.0, 1567.98};
  double optimum_note_s = 0.080;
  double transition_root_hz = 440.0;
  double transition_note_s = 0.060;

  bool operator==(const EarconPalette&) const = default;
};

struct MappingConfig {
  Range ep_freq_hz{880.0, 1760.0};
  Range ap_freq_hz{110.0, 440.0};
  Range pulse_interval_s{0.35, 0.1};
  Chord ip_chord{{123.47, 155.56, 185.0, 246.94}, 0.66};
  Chord fp_chord{{440.0, 523.25, 659.26, 880.0}, 1.5};
  bool zero_error_at_first_endpoint = true;
  EarconPalette earcons;

  bool operator==(const MappingConfig&) const = default;
};

inline void validate(const MappingConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  bool ok = positive(c.ep_freq_hz.first) && positive(c.ep_freq_hz.second) &&
            positive(c.ap_freq_hz.first) && positive(c.ap_freq_hz.second) &&
            positive(c.pulse_interval_s.first) && positive(c.pulse_interval_s.second) &&
            positive(c.ip_chord.interval_s) && positive(c.fp_chord.interval_s) &&
            !c.ip_chord.freqs_hz.empty() && !c.fp_chord.freqs_hz.empty();
  for (double f : c.ip_chord.freqs_hz) ok = ok && positive(f);
  for (double f : c.fp_chord.freqs_hz) ok = ok && positive(f);
  if (!ok) throw Error(ErrorCode::InvalidArgument, "mapping config values must be finite and positive");
}

enum class SynthMode { PulseStream, Chord };

constexpr std::string_view to_string(SynthMode m) {
  return m == SynthMode::PulseStream ? "pulse_stream" : "chord";
}

struct SynthParams {
  SynthMode mode = SynthMode::Chord;
  double fundamental_hz = 0.0;
  double pulse_interval_s = 1.0;
  std::vector<double> chord_freqs_hz;  // chord mode only
  Phase active_phase = Phase::IP;

  bool operator==(const SynthParams&) const = default;

  /// Carrier frequencies of the voices this parameter set sounds.
  std::vector<double> voice_freqs() const {
    return mode == SynthMode::Chord ? chord_freqs_hz : std::vector<double>{fundamental_hz};
  }
};

using NormalizedError = std::array<double, 4>;  // x, y, phi, delta in [0, 1]

inline NormalizedError normalize_errors(const ErrorVector& err, const ZoneThresholds& t) {
  auto norm = [](double v, double scale) { return std::clamp(std::abs(v) / scale, 0.0, 1.0); };
  return {norm(err.e_x, t.working_radius_mm), norm(err.e_y, t.working_radius_mm),
          norm(err.e_phi, t.working_angle_deg), norm(err.e_delta, t.working_angle_deg)};
}

namespace detail {

inline double exp_interp(const Range& r, double e) {
  if (e == 0.0) return r.first;
  if (e == 1.0) return r.second;
  return r.first * std::pow(r.second / r.first, e);
}

inline double lin_interp(const Range& r, double e) { return std::lerp(r.first, r.second, e); }

}  // namespace detail

inline SynthParams map_params(Phase phase, const NormalizedError& e, const MappingConfig& config) {
  auto oriented = [&](double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return config.zero_error_at_first_endpoint ? c : 1.0 - c;
  };
  SynthParams p;
  p.active_phase = phase;
  switch (phase) {
    case Phase::EP:
    case Phase::AP: {
      const bool ep = phase == Phase::EP;
      const Range& freq = ep ? config.ep_freq_hz : config.ap_freq_hz;
      p.mode = SynthMode::PulseStream;
      p.fundamental_hz = detail::exp_interp(freq, oriented(e[ep ? 0 : 2]));
      p.pulse_interval_s = detail::lin_interp(config.pulse_interval_s, oriented(e[ep ? 1 : 3]));
      break;
    }
    case Phase::IP:
    case Phase::FP: {
      const Chord& chord = phase == Phase::IP ? config.ip_chord : config.fp_chord;
      p.mode = SynthMode::Chord;
      p.chord_freqs_hz = chord.freqs_hz;
      p.fundamental_hz = *std::min_element(chord.freqs_hz.begin(), chord.freqs_hz.end());
      p.pulse_interval_s = chord.interval_s;
      break;
    }
  }
  return p;
}

inline EarconSpec make_earcon(EarconKind kind, const EarconPalette& palette) {
  switch (kind) {
    case EarconKind::OptimumXPhi:
      return {kind, palette.optimum_x_phi_hz, palette.optimum_note_s};
    case EarconKind::OptimumYDelta:
      return {kind, palette.optimum_y_delta_hz, palette.optimum_note_s};
    case EarconKind::TransitionUp:
      return {kind, major_scale(palette.transition_root_hz), palette.transition_note_s};
    case EarconKind::TransitionDown: {
      auto notes = major_scale(palette.transition_root_hz);
      std::reverse(notes.begin(), notes.end());
      return {kind, notes, palette.transition_note_s};
    }
  }
  return {};
}

/// Earcons for one tick's events, in event order. Only rising edges and the
/// EP<->AP transitions sound; every other event is silent.
inline std::vector<EarconSpec> earcons_for(std::span<const TransitionEvent> events,
                                           const EarconPalette& palette = {}) {
  using K = TransitionEvent::Kind;
  std::vector<EarconSpec> out;
  for (const auto& e : events) {
    switch (e.kind) {
      case K::DimensionReached:
        out.push_back(make_earcon(e.dimension == Dimension::X || e.dimension == Dimension::Phi
                                      ? EarconKind::OptimumXPhi
                                      : EarconKind::OptimumYDelta,
                                  palette));
        break;
      case K::EPtoAP: out.push_back(make_earcon(EarconKind::TransitionUp, palette)); break;
      case K::APtoEP: out.push_back(make_earcon(EarconKind::TransitionDown, palette)); break;
      default: break;
    }
  }
  return out;
}

}  // namespace sononav
