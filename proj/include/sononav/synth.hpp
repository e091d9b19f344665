#pragma once

// FM pulse-stream synthesis.
//
// A pulse stream is a train of FM tones
//     y[n] = A[n] * sin(2*pi*fc*t + I * sin(2*pi*fm*t)),   fm = fc * harmonicity
// where A[n] is a per-pulse envelope (linear attack, exponential decay to -60 dB
// at `decay_fraction` of the pulse interval, silent afterwards). Chord mode sums
// one voice per chord note divided by the voice count. New parameters are
// latched at the next pulse onset; a phase change instead fades the running
// pulse out over a short ramp and starts a fresh pulse immediately.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numbers>
#include <optional>
#include <vector>

#include "sononav/error.hpp"
#include "sononav/mapping.hpp"

namespace sononav {

struct SynthConfig {
  double sample_rate_hz = 48000.0;
  std::size_t block_frames = 256;
  double harmonicity_ratio = 1.0;
  double modulation_index = 1.0;
  double attack_s = 0.005;
  double decay_fraction = 0.5;  // -60 dB point as a fraction of the pulse interval
  double output_gain = 0.5;
  double earcon_duck_db = -6.0;
  double retrigger_ramp_s = 64.0 / 48000.0;
  double earcon_attack_s = 0.005;
  double earcon_release_s = 0.015;

  bool operator==(const SynthConfig&) const = default;
};

inline constexpr double kMinSampleRateHz = 8000.0;

inline void validate(const SynthConfig& c) {
  if (!(c.sample_rate_hz >= kMinSampleRateHz) || !std::isfinite(c.sample_rate_hz)) {
    throw Error(ErrorCode::InvalidSampleRate, "sample rate must be at least 8000 Hz");
  }
  if (c.block_frames == 0 || !(c.harmonicity_ratio > 0.0) || !(c.modulation_index >= 0.0) ||
      !(c.attack_s > 0.0) || !(c.decay_fraction > 0.0 && c.decay_fraction <= 1.0) ||
      !(c.output_gain > 0.0 && c.output_gain <= 1.0) || !(c.retrigger_ramp_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid synthesis configuration");
  }
}

struct AudioBlock {
  double sample_rate_hz = 48000.0;
  std::vector<float> samples;

  bool operator==(const AudioBlock&) const = default;
};

class FmVoice {
 public:
  FmVoice(double carrier_hz, double harmonicity_ratio, double modulation_index)
      : carrier_hz_(carrier_hz), ratio_(harmonicity_ratio), index_(modulation_index) {}

  /// Changes the carrier without resetting the phase accumulators.
  void retune(double carrier_hz) { carrier_hz_ = carrier_hz; }

  double next(double sample_rate_hz) {
    const double out = std::sin(carrier_phase_ + index_ * std::sin(modulator_phase_));
    carrier_phase_ = wrap(carrier_phase_ + kTwoPi * carrier_hz_ / sample_rate_hz);
    modulator_phase_ = wrap(modulator_phase_ + kTwoPi * carrier_hz_ * ratio_ / sample_rate_hz);
    return out;
  }

  double carrier_hz() const { return carrier_hz_; }
  double carrier_phase() const { return carrier_phase_; }
  double modulator_phase() const { return modulator_phase_; }

 private:
  static constexpr double kTwoPi = 2.0 * std::numbers::pi;

  static double wrap(double phase) {
    phase = std::fmod(phase, kTwoPi);
    return phase < 0.0 ? phase + kTwoPi : phase;
  }

  double carrier_hz_;
  double ratio_;
  double index_;
  double carrier_phase_ = 0.0;
  double modulator_phase_ = 0.0;
};

struct PulseEnvelope {
  double attack_s = 0.005;
  double decay_s = 0.17;  // from end of attack to the -60 dB point

  static PulseEnvelope for_interval(const SynthConfig& c, double interval_s) {
    const double attack = std::min(c.attack_s, 0.25 * interval_s);
    return {attack, std::max(c.decay_fraction * interval_s - attack, attack)};
  }

  double amplitude(double t) const {
    if (t < 0.0) return 0.0;
    if (t < attack_s) return t / attack_s;
    const double u = t - attack_s;
    if (u >= decay_s) return 0.0;
    static const double kMinus60dB = std::log(1000.0);
    return std::exp(-kMinus60dB * u / decay_s);
  }
};

/// Renders a single earcon: notes back to back, each a sine tone with its own
/// attack/release envelope, scaled by the output gain.
inline AudioBlock render_earcon(const EarconSpec& spec, const SynthConfig& config = {}) {
  validate(config);
  AudioBlock block;
  block.sample_rate_hz = config.sample_rate_hz;
  const double sr = config.sample_rate_hz;
  const auto note_frames = static_cast<std::size_t>(std::lround(spec.note_duration_s * sr));
  block.samples.reserve(note_frames * spec.note_freqs_hz.size());
  for (double freq : spec.note_freqs_hz) {
    FmVoice voice(freq, 1.0, 0.0);
    const double attack = std::min(config.earcon_attack_s, spec.note_duration_s / 4.0);
    const double release = std::min(config.earcon_release_s, spec.note_duration_s / 2.0);
    for (std::size_t n = 0; n < note_frames; ++n) {
      const double t = static_cast<double>(n) / sr;
      const double remaining = static_cast<double>(note_frames - n) / sr;
      const double env = std::min({1.0, t / attack, remaining / release});
      block.samples.push_back(static_cast<float>(config.output_gain * env * voice.next(sr)));
    }
  }
  return block;
}

/// Stateful renderer for the pulse stream plus queued earcons.
class PulseSynth {
 public:
  explicit PulseSynth(SynthConfig config = {}) : config_(config) {
    validate(config_);
    duck_target_ = std::pow(10.0, config_.earcon_duck_db / 20.0);
    ramp_frames_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(config_.retrigger_ramp_s * config_.sample_rate_hz)));
  }

  const SynthConfig& config() const { return config_; }

  /// Queues an earcon; it plays after any earcons already queued.
  void trigger(const EarconSpec& spec) {
    const AudioBlock notes = render_earcon(spec, config_);
    earcon_queue_.insert(earcon_queue_.end(), notes.samples.begin(), notes.samples.end());
  }

  bool earcon_playing() const { return !earcon_queue_.empty(); }

  /// Renders `frames` samples using `params` as the latest control state.
  AudioBlock render_block(const SynthParams& params, std::size_t frames) {
    if (!active_) {
      pending_ = params;
      start_pulse();
    } else {
      if (params.active_phase != active_->active_phase) retrigger_ = true;
      pending_ = params;
    }
    return render(frames, true);
  }

  /// Renders `frames` samples with no pulse stream (earcons only).
  AudioBlock render_silence(std::size_t frames) { return render(frames, false); }

  std::size_t pulses_started() const { return pulses_started_; }

 private:
  AudioBlock render(std::size_t frames, bool stream) {
    AudioBlock block;
    block.sample_rate_hz = config_.sample_rate_hz;
    block.samples.resize(frames);
    const double sr = config_.sample_rate_hz;
    const double duck_step = 1.0 / static_cast<double>(ramp_frames_);
    for (std::size_t n = 0; n < frames; ++n) {
      double sample = 0.0;
      if (stream && active_) {
        if (retrigger_) {
          ramp_gain_ -= duck_step;
          if (ramp_gain_ <= 0.0 || envelope_.amplitude(pulse_time()) == 0.0) {
            retrigger_ = false;
            start_pulse();
          }
        } else if (pos_in_pulse_ >= pulse_frames_) {
          start_pulse();
        }
        double voices = 0.0;
        for (auto& v : voices_) voices += v.next(sr);
        voices /= static_cast<double>(voices_.size());
        sample = config_.output_gain * envelope_.amplitude(pulse_time()) * ramp_gain_ * voices;
        ++pos_in_pulse_;
      }

      const double target = earcon_queue_.empty() ? 1.0 : duck_target_;
      duck_gain_ += std::clamp(target - duck_gain_, -duck_step, duck_step);
      sample *= duck_gain_;
      if (!earcon_queue_.empty()) {
        sample += earcon_queue_.front();
        earcon_queue_.pop_front();
      }
      block.samples[n] = static_cast<float>(std::clamp(sample, -1.0, 1.0));
    }
    return block;
  }

  double pulse_time() const { return static_cast<double>(pos_in_pulse_) / config_.sample_rate_hz; }

  void start_pulse() {
    const auto freqs = pending_.voice_freqs();
    if (voices_.size() == freqs.size()) {
      for (std::size_t i = 0; i < freqs.size(); ++i) voices_[i].retune(freqs[i]);
    } else {
      voices_.clear();
      for (double f : freqs) voices_.emplace_back(f, config_.harmonicity_ratio, config_.modulation_index);
    }
    active_ = pending_;
    envelope_ = PulseEnvelope::for_interval(config_, pending_.pulse_interval_s);
    pulse_frames_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(pending_.pulse_interval_s * config_.sample_rate_hz)));
    pos_in_pulse_ = 0;
    ramp_gain_ = 1.0;
    ++pulses_started_;
  }

  SynthConfig config_;
  double duck_target_ = 0.5;
  std::size_t ramp_frames_ = 64;

  SynthParams pending_;
  std::optional<SynthParams> active_;
  std::vector<FmVoice> voices_;
  PulseEnvelope envelope_;
  std::size_t pulse_frames_ = 1;
  std::size_t pos_in_pulse_ = 0;
  std::size_t pulses_started_ = 0;
  bool retrigger_ = false;
  double ramp_gain_ = 1.0;
  double duck_gain_ = 1.0;
  std::deque<float> earcon_queue_;
};

}  // namespace sononav
