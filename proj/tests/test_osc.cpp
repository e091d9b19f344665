#include <gtest/gtest.h>

#include <random>

#include "sononav/osc.hpp"
#include "sononav/stream.hpp"
#include "support/helpers.hpp"

using namespace sononav;
using osc::Message;

namespace {

using Bytes = std::vector<std::uint8_t>;

Bytes bytes(std::initializer_list<int> v) {
  Bytes out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

Message random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 8), kind(0, 3), len(0, 13), byte(0, 255);
  std::uniform_int_distribution<std::uint32_t> word;
  Message m;
  m.address = "/";
  for (int i = len(rng); i >= 0; --i) m.address.push_back(static_cast<char>('a' + byte(rng) % 26));
  for (int i = count(rng); i > 0; --i) {
    switch (kind(rng)) {
      case 0: m.arguments.emplace_back(static_cast<std::int32_t>(word(rng))); break;
      case 1: m.arguments.emplace_back(std::bit_cast<float>(word(rng))); break;
      case 2: {
        std::string s;
        for (int j = len(rng); j > 0; --j) s.push_back(static_cast<char>(1 + byte(rng) % 255));
        m.arguments.emplace_back(s);
        break;
      }
      default: {
        osc::Blob b;
        for (int j = len(rng); j > 0; --j) b.push_back(static_cast<std::uint8_t>(byte(rng)));
        m.arguments.emplace_back(b);
      }
    }
  }
  return m;
}

}  // namespace

TEST(Osc, ReferenceEncodingOfIntMessage) {
  const Bytes expected = bytes({'/', 't', 'e', 's', 't', 0, 0, 0, ',', 'i', 0, 0, 0x00, 0x00, 0x00, 0x2A});
  EXPECT_EQ(osc::encode(Message{"/test", {std::int32_t{42}}}), expected);
  EXPECT_EQ(osc::decode(expected), (Message{"/test", {std::int32_t{42}}}));
}

TEST(Osc, ReferenceEncodingOfMixedMessage) {
  // 1.0f = 0x3F800000; "hi" pads to 4 bytes; a 5-byte blob pads to 8.
  const Bytes expected = bytes({'/', 'a', 0, 0, ',', 'f', 's', 'b', 0, 0, 0, 0, 0x3F, 0x80, 0x00, 0x00, 'h', 'i',
                                0, 0, 0, 0, 0, 5, 1, 2, 3, 4, 5, 0, 0, 0});
  const Message m{"/a", {1.0f, std::string("hi"), osc::Blob{1, 2, 3, 4, 5}}};
  EXPECT_EQ(osc::encode(m), expected);
  EXPECT_EQ(osc::decode(expected), m);
}

TEST(Osc, EmptyArgumentListStillHasTypeTags) {
  EXPECT_EQ(osc::encode(Message{"/abc", {}}), bytes({'/', 'a', 'b', 'c', 0, 0, 0, 0, ',', 0, 0, 0}));
}

TEST(OscProperty, RoundTripsRandomMessages) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 20000; ++i) {
    const Message m = random_message(rng);
    const Bytes b = osc::encode(m);
    ASSERT_EQ(b.size() % 4, 0u);
    ASSERT_EQ(osc::decode(b), m);
  }
}

TEST(OscProperty, CorruptedPacketsNeverCrash) {
  std::mt19937_64 rng(78);
  std::uniform_int_distribution<int> byte(0, 255);
  int rejected = 0;
  for (int i = 0; i < 20000; ++i) {
    Bytes b = osc::encode(random_message(rng));
    std::uniform_int_distribution<std::size_t> at(0, b.size() - 1);
    b[at(rng)] = static_cast<std::uint8_t>(byte(rng));
    if (i % 3 == 0) b.resize(at(rng));
    try {
      (void)osc::decode(b);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::MalformedPacket);
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(Osc, MalformedPacketsAreRejected) {
  EXPECT_ERROR_CODE(osc::decode(Bytes{}), ErrorCode::MalformedPacket);
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0})), ErrorCode::MalformedPacket);                   // not x4
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0, 0})), ErrorCode::MalformedPacket);                // no tags
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 'b', 'c'})), ErrorCode::MalformedPacket);            // unterminated
  EXPECT_ERROR_CODE(osc::decode(bytes({'#', 'b', 'u', 0, ',', 0, 0, 0})), ErrorCode::MalformedPacket);  // bundle
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0, 0, 'i', 0, 0, 0})), ErrorCode::MalformedPacket);  // no comma
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0, 0, ',', 'i', 0, 0})), ErrorCode::MalformedPacket);  // truncated
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0, 0, ',', 'x', 0, 0, 0, 0, 0, 0})), ErrorCode::MalformedPacket);
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0, 1, ',', 0, 0, 0})), ErrorCode::MalformedPacket);  // padding
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0, 0, ',', 0, 0, 0, 0, 0, 0, 0})), ErrorCode::MalformedPacket);
  EXPECT_ERROR_CODE(osc::decode(bytes({'/', 'a', 0, 0, ',', 'b', 0, 0, 0, 0, 0, 9, 1, 2, 3, 4})),
                    ErrorCode::MalformedPacket);
  EXPECT_ERROR_CODE(osc::encode(Message{"noslash", {}}), ErrorCode::InvalidArgument);
}

TEST(OscPose, IngestValidatesAndNormalizes) {
  const Pose pose{Vec3(1.5, -2.0, 30.25), Quat(Eigen::AngleAxisd(0.3, Vec3::UnitY()))};
  const auto in = osc::ingest_pose(osc::decode(osc::encode(osc::make_pose_message(2, pose))), 3);
  EXPECT_EQ(in.target_id, 2);
  EXPECT_TRUE(in.pose.position.isApprox(pose.position, 1e-6));
  EXPECT_NEAR(in.pose.orientation.angularDistance(pose.orientation), 0.0, 1e-6);
  EXPECT_NEAR(in.pose.orientation.norm(), 1.0, 1e-12);

  Message near_unit{std::string(osc::kPoseAddress), {std::int32_t{0}, 0.f, 0.f, 0.f, 1.0005f, 0.f, 0.f, 0.f}};
  EXPECT_NEAR(osc::ingest_pose(near_unit, 1).pose.orientation.norm(), 1.0, 1e-12);
}

TEST(OscPose, IngestRejectsBadInput) {
  auto pose_msg = [](std::int32_t id, float w) {
    return Message{std::string(osc::kPoseAddress), {id, 0.f, 0.f, 0.f, w, 0.f, 0.f, 0.f}};
  };
  EXPECT_ERROR_CODE(osc::ingest_pose(pose_msg(0, 1.01f), 1), ErrorCode::BadQuaternion);
  EXPECT_ERROR_CODE(osc::ingest_pose(pose_msg(0, 0.0f), 1), ErrorCode::BadQuaternion);
  EXPECT_ERROR_CODE(osc::ingest_pose(pose_msg(1, 1.0f), 1), ErrorCode::UnknownTarget);
  EXPECT_ERROR_CODE(osc::ingest_pose(pose_msg(-1, 1.0f), 1), ErrorCode::UnknownTarget);
  EXPECT_ERROR_CODE(osc::ingest_pose(pose_msg(0, std::numeric_limits<float>::quiet_NaN()), 1),
                    ErrorCode::InvalidInput);
  Message wrong = pose_msg(0, 1.0f);
  wrong.address = "/other";
  EXPECT_ERROR_CODE(osc::ingest_pose(wrong, 1), ErrorCode::InvalidInput);
  Message short_msg = pose_msg(0, 1.0f);
  short_msg.arguments.pop_back();
  EXPECT_ERROR_CODE(osc::ingest_pose(short_msg, 1), ErrorCode::InvalidInput);
  Message float_id = pose_msg(0, 1.0f);
  float_id.arguments[0] = 0.0f;
  EXPECT_ERROR_CODE(osc::ingest_pose(float_id, 1), ErrorCode::InvalidInput);
}

TEST(OscOutbound, ParamsAndEventMessages) {
  const auto fp = map_params(Phase::FP, {0, 0, 0, 0}, MappingConfig{});
  const Message params = osc::decode(osc::encode(make_params_message(fp)));
  EXPECT_EQ(params.address, "/sononav/params");
  ASSERT_EQ(params.arguments.size(), 4u + fp.chord_freqs_hz.size());
  EXPECT_EQ(std::get<std::string>(params.arguments[0]), "FP");
  EXPECT_EQ(std::get<std::string>(params.arguments[1]), "chord");
  EXPECT_FLOAT_EQ(std::get<float>(params.arguments[3]), 1.5f);
  for (std::size_t i = 0; i < fp.chord_freqs_hz.size(); ++i) {
    EXPECT_FLOAT_EQ(std::get<float>(params.arguments[4 + i]), static_cast<float>(fp.chord_freqs_hz[i]));
  }

  const auto ep = map_params(Phase::EP, {0, 0, 0, 0}, MappingConfig{});
  const Message ep_msg = make_params_message(ep);
  EXPECT_EQ(std::get<std::string>(ep_msg.arguments[1]), "pulse_stream");
  EXPECT_FLOAT_EQ(std::get<float>(ep_msg.arguments[2]), 880.0f);
  EXPECT_EQ(ep_msg.arguments.size(), 4u);

  const Message ev = osc::decode(osc::encode(make_event_message(TransitionEvent{TransitionEvent::Kind::EPtoAP}, 3.5, 4)));
  EXPECT_EQ(ev.address, "/sononav/event");
  EXPECT_EQ(std::get<std::string>(ev.arguments[0]), "EPtoAP");
  EXPECT_FLOAT_EQ(std::get<float>(ev.arguments[1]), 3.5f);
  EXPECT_EQ(std::get<std::int32_t>(ev.arguments[2]), 4);
}
