#pragma once

// Deterministic offline rendering of a session log. Control updates are
// sampled at block boundaries, as the live renderer does: a record stamped at
// sample s takes effect at the first block starting at or after s.

#include <cmath>
#include <cstddef>
#include <vector>

#include "sononav/mapping.hpp"
#include "sononav/session.hpp"
#include "sononav/synth.hpp"

namespace sononav {

struct EventSample {
  std::size_t record_index = 0;
  TransitionEvent event;
  std::size_t sample_index = 0;  // block start where the event took effect
};

struct RenderedSession {
  AudioBlock audio;
  std::vector<EventSample> events;
};

inline std::size_t timestamp_to_sample(double t, double sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(t * sample_rate_hz));
}

inline RenderedSession offline_render(const SessionLog& log, const SynthConfig& synth_config,
                                      const MappingConfig& mapping) {
  validate(synth_config);
  validate(log);
  RenderedSession out;
  out.audio.sample_rate_hz = synth_config.sample_rate_hz;
  if (log.records.empty()) return out;

  const double sr = synth_config.sample_rate_hz;
  const std::size_t block = synth_config.block_frames;
  const std::size_t last_sample = timestamp_to_sample(log.records.back().timestamp_s, sr);
  const std::size_t total = (last_sample / block + 1) * block;
  out.audio.samples.reserve(total);

  PulseSynth synth(synth_config);
  const SynthParams* current = nullptr;
  std::size_t next = 0;
  for (std::size_t start = 0; start < total; start += block) {
    while (next < log.records.size() && timestamp_to_sample(log.records[next].timestamp_s, sr) <= start) {
      const SessionRecord& rec = log.records[next];
      current = &rec.synth;
      for (const auto& e : rec.events) out.events.push_back(EventSample{next, e, start});
      for (const auto& earcon : earcons_for(rec.events, mapping.earcons)) synth.trigger(earcon);
      ++next;
    }
    const AudioBlock chunk = current ? synth.render_block(*current, block) : synth.render_silence(block);
    out.audio.samples.insert(out.audio.samples.end(), chunk.samples.begin(), chunk.samples.end());
  }
  return out;
}

inline RenderedSession offline_render(const SessionLog& log) {
  return offline_render(log, log.config.synth, log.config.mapping);
}

}  // namespace sononav
