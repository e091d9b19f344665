#pragma once

// OSC 1.0 messages (no bundles): padded address, ',' type-tag string, then
// big-endian arguments. Supported tags: i (int32), f (float32), s (string),
// b (blob).

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sononav/error.hpp"
#include "sononav/geometry.hpp"

namespace sononav::osc {

using Blob = std::vector<std::uint8_t>;
using Argument = std::variant<std::int32_t, float, std::string, Blob>;

struct Message {
  std::string address;
  std::vector<Argument> arguments;

  friend bool operator==(const Message& a, const Message& b) {
    if (a.address != b.address || a.arguments.size() != b.arguments.size()) return false;
    for (std::size_t i = 0; i < a.arguments.size(); ++i) {
      const auto& x = a.arguments[i];
      const auto& y = b.arguments[i];
      if (x.index() != y.index()) return false;
      // Floats compare bitwise so NaN payloads round-trip as equal.
      if (const float* fx = std::get_if<float>(&x)) {
        if (std::bit_cast<std::uint32_t>(*fx) != std::bit_cast<std::uint32_t>(std::get<float>(y))) return false;
      } else if (x != y) {
        return false;
      }
    }
    return true;
  }
};

inline constexpr std::string_view kPoseAddress = "/sononav/pose";
inline constexpr std::string_view kParamsAddress = "/sononav/params";
inline constexpr std::string_view kEventAddress = "/sononav/event";

constexpr char type_tag(const Argument& arg) {
  switch (arg.index()) {
    case 0: return 'i';
    case 1: return 'f';
    case 2: return 's';
    default: return 'b';
  }
}

namespace detail {

inline std::size_t padded(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

// OSC-string: bytes, at least one NUL, padded to a multiple of 4.
inline void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
  out.resize(out.size() + padded(s.size() + 1) - s.size(), 0);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint32_t u32() {
    need(4, "numeric argument");
    const std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 24) | (std::uint32_t{bytes_[pos_ + 1]} << 16) |
                            (std::uint32_t{bytes_[pos_ + 2]} << 8) | std::uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  std::string string(const char* what) {
    std::size_t end = pos_;
    while (end < bytes_.size() && bytes_[end] != 0) ++end;
    if (end == bytes_.size()) malformed(std::string("unterminated ") + what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), end - pos_);
    const std::size_t next = pos_ + padded(s.size() + 1);
    if (next > bytes_.size()) malformed(std::string("truncated padding after ") + what);
    for (std::size_t i = end; i < next; ++i) {
      if (bytes_[i] != 0) malformed(std::string("non-zero padding after ") + what);
    }
    pos_ = next;
    return s;
  }

  Blob blob() {
    const std::uint32_t size = u32();
    need(padded(size), "blob");
    Blob b(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
           bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + size));
    for (std::size_t i = pos_ + size; i < pos_ + padded(size); ++i) {
      if (bytes_[i] != 0) malformed("non-zero blob padding");
    }
    pos_ += padded(size);
    return b;
  }

  [[noreturn]] static void malformed(const std::string& why) {
    throw Error(ErrorCode::MalformedPacket, why);
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) malformed(std::string("truncated ") + what);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Message& msg) {
  if (msg.address.empty() || msg.address.front() != '/') {
    throw Error(ErrorCode::InvalidArgument, "OSC address must start with '/'");
  }
  std::vector<std::uint8_t> out;
  detail::put_string(out, msg.address);
  std::string tags = ",";
  for (const auto& arg : msg.arguments) tags.push_back(type_tag(arg));
  detail::put_string(out, tags);
  for (const auto& arg : msg.arguments) {
    switch (arg.index()) {
      case 0: detail::put_u32(out, static_cast<std::uint32_t>(std::get<0>(arg))); break;
      case 1: detail::put_u32(out, std::bit_cast<std::uint32_t>(std::get<1>(arg))); break;
      case 2: detail::put_string(out, std::get<2>(arg)); break;
      case 3: {
        const Blob& b = std::get<3>(arg);
        detail::put_u32(out, static_cast<std::uint32_t>(b.size()));
        out.insert(out.end(), b.begin(), b.end());
        out.resize(out.size() + detail::padded(b.size()) - b.size(), 0);
        break;
      }
    }
  }
  return out;
}

inline Message decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes.size() % 4 != 0) {
    detail::Reader::malformed("packet size " + std::to_string(bytes.size()) + " is not a positive multiple of 4");
  }
  detail::Reader in(bytes);
  Message msg;
  msg.address = in.string("address");
  if (msg.address.empty() || msg.address.front() != '/') {
    detail::Reader::malformed("address must start with '/' (bundles are not supported)");
  }
  if (in.done()) detail::Reader::malformed("missing type tag string");
  const std::string tags = in.string("type tags");
  if (tags.empty() || tags.front() != ',') detail::Reader::malformed("type tag string must start with ','");
  for (std::size_t i = 1; i < tags.size(); ++i) {
    switch (tags[i]) {
      case 'i': msg.arguments.emplace_back(static_cast<std::int32_t>(in.u32())); break;
      case 'f': msg.arguments.emplace_back(std::bit_cast<float>(in.u32())); break;
      case 's': msg.arguments.emplace_back(in.string("string argument")); break;
      case 'b': msg.arguments.emplace_back(in.blob()); break;
      default: detail::Reader::malformed(std::string("unknown type tag '") + tags[i] + "'");
    }
  }
  if (!in.done()) detail::Reader::malformed("trailing bytes after arguments");
  return msg;
}

/// Tolerance on the incoming quaternion norm; inside it the quaternion is renormalized.
inline constexpr double kQuaternionNormTolerance = 1e-3;

struct PoseInput {
  std::int32_t target_id = 0;
  Pose pose;
};

/// Validates a /sononav/pose message: target id (int32), position xyz (float32, mm),
/// quaternion wxyz (float32). `target_count` bounds the target id.
inline PoseInput ingest_pose(const Message& msg, std::size_t target_count) {
  if (msg.address != kPoseAddress) {
    throw Error(ErrorCode::InvalidInput, "expected " + std::string(kPoseAddress) + ", got " + msg.address);
  }
  if (msg.arguments.size() != 8) {
    throw Error(ErrorCode::InvalidInput, "pose message needs 8 arguments, got " + std::to_string(msg.arguments.size()));
  }
  const auto* id = std::get_if<std::int32_t>(&msg.arguments[0]);
  if (!id) throw Error(ErrorCode::InvalidInput, "target id must be int32");
  double v[7];
  for (int i = 0; i < 7; ++i) {
    const auto* f = std::get_if<float>(&msg.arguments[static_cast<std::size_t>(i + 1)]);
    if (!f) throw Error(ErrorCode::InvalidInput, "pose components must be float32");
    if (!std::isfinite(*f)) throw Error(ErrorCode::InvalidInput, "pose components must be finite");
    v[i] = *f;
  }
  if (*id < 0 || static_cast<std::size_t>(*id) >= target_count) {
    throw Error(ErrorCode::UnknownTarget, "target id " + std::to_string(*id) + " not in plan of " +
                                              std::to_string(target_count));
  }
  Quat q(v[3], v[4], v[5], v[6]);
  const double norm = q.norm();
  if (!(std::abs(norm - 1.0) < kQuaternionNormTolerance)) {
    throw Error(ErrorCode::BadQuaternion, "quaternion norm " + std::to_string(norm) + " too far from 1");
  }
  q.normalize();
  return PoseInput{*id, Pose{Vec3(v[0], v[1], v[2]), q}};
}

inline Message make_pose_message(std::int32_t target_id, const Pose& pose) {
  const auto& p = pose.position;
  const auto& q = pose.orientation;
  return Message{std::string(kPoseAddress),
                 {target_id, static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()),
                  static_cast<float>(q.w()), static_cast<float>(q.x()), static_cast<float>(q.y()),
                  static_cast<float>(q.z())}};
}

}  // namespace sononav::osc
