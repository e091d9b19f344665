#pragma once

// Mono RIFF/WAVE encoding (16-bit PCM or 32-bit IEEE float).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sononav/error.hpp"
#include "sononav/synth.hpp"

namespace sononav {

enum class WavFormat { Pcm16, Float32 };

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_wav(const AudioBlock& block, WavFormat format) {
  const std::uint16_t bytes_per_sample = format == WavFormat::Pcm16 ? 2 : 4;
  const auto rate = static_cast<std::uint32_t>(std::lround(block.sample_rate_hz));
  const auto data_bytes = static_cast<std::uint32_t>(block.samples.size() * bytes_per_sample);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, 36 + data_bytes);
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, format == WavFormat::Pcm16 ? 1 : 3);  // PCM / IEEE float
  detail::put_u16(out, 1);                                   // mono
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * bytes_per_sample);
  detail::put_u16(out, bytes_per_sample);
  detail::put_u16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  detail::put_tag(out, "data");
  detail::put_u32(out, data_bytes);

  for (float s : block.samples) {
    if (format == WavFormat::Pcm16) {
      const double clamped = std::clamp(static_cast<double>(s), -1.0, 1.0);
      const auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
      detail::put_u16(out, static_cast<std::uint16_t>(v));
    } else {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(s));
    }
  }
  return out;
}

inline void write_wav(const std::string& path, const AudioBlock& block, WavFormat format) {
  const auto bytes = encode_wav(block, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace sononav
