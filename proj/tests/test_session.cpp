#include <gtest/gtest.h>

#include <sstream>

#include "sononav/engine.hpp"
#include "sononav/render.hpp"
#include "sononav/scenario.hpp"
#include "sononav/session.hpp"
#include "sononav/wav.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace sononav;

namespace {

const std::string kScenarios = std::string(SONONAV_SOURCE_DIR) + "/scenarios/";

TargetPlan single_target() {
  TargetPlan plan;
  plan.targets.push_back(LabeledTarget{"T", PlannedTrajectory{Vec3(0, 0, 0), Vec3::UnitY()}});
  return plan;
}

std::string serialize(const SessionLog& log) {
  std::ostringstream out;
  write_session(out, log);
  return out.str();
}

SessionLog parse(const std::string& text) {
  std::istringstream in(text);
  return read_session(in);
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  EngineConfig c;
  c.thresholds.target_mm = 1.8;
  c.mapping.ep_freq_hz = {700.0, 1400.0};
  c.mapping.zero_error_at_first_endpoint = false;
  c.synth.modulation_index = 1.5;
  c.network.osc_out_host = "127.0.0.1";
  c.network.osc_out_port = 9000;
  c.log_dir = "/tmp/logs";
  c.drill_dwell_s = 0.25;
  EXPECT_EQ(engine_config_from_json(json::parse(to_json(c).dump())), c);
}

TEST(Config, MissingKeysUseDefaultsAndBadValuesAreRejected) {
  EXPECT_EQ(engine_config_from_json(json::object()), EngineConfig{});
  EXPECT_ERROR_CODE(engine_config_from_json(json::parse(R"({"synth": {"sample_rate_hz": 100}})")),
                    ErrorCode::InvalidSampleRate);
  EXPECT_ERROR_CODE(engine_config_from_json(json::parse(R"({"thresholds": {"target_mm": "x"}})")),
                    ErrorCode::ParseError);
  EXPECT_ERROR_CODE(engine_config_from_json(json::parse(R"({"mapping": {"ep_freq_hz": [1]}})")),
                    ErrorCode::ParseError);
}

TEST(Config, EnvironmentOverrides) {
  EngineConfig c;
  ::setenv("SONONAV_PORT", "6000", 1);
  ::setenv("SONONAV_WS_PORT", "6001", 1);
  ::setenv("SONONAV_LOG_DIR", "/var/tmp", 1);
  apply_env_overrides(c);
  EXPECT_EQ(c.network.udp_port, 6000);
  EXPECT_EQ(c.network.ws_port, 6001);
  EXPECT_EQ(c.log_dir, "/var/tmp");
  ::setenv("SONONAV_PORT", "70000", 1);
  EXPECT_ERROR_CODE(apply_env_overrides(c), ErrorCode::InvalidArgument);
  ::unsetenv("SONONAV_PORT");
  ::unsetenv("SONONAV_WS_PORT");
  ::unsetenv("SONONAV_LOG_DIR");
}

TEST(Plan, JsonRoundTrip) {
  const TargetPlan plan = load_scenario(kScenarios + "demo.json").plan;
  EXPECT_EQ(plan.targets.size(), 10u);
  const TargetPlan back = plan_from_json(json::parse(to_json(plan).dump()));
  ASSERT_EQ(back.targets.size(), plan.targets.size());
  for (std::size_t i = 0; i < plan.targets.size(); ++i) {
    EXPECT_EQ(back.targets[i].label, plan.targets[i].label);
    EXPECT_TRUE(back.targets[i].trajectory.direction.isApprox(plan.targets[i].trajectory.direction, 1e-15));
  }
}

TEST(Engine, TickProducesConsistentRecord) {
  Engine engine(single_target(), EngineConfig{});
  const Pose on_target{Vec3::Zero(), testing_support::pointing(Vec3::UnitY())};
  const auto r = engine.tick(0.0, 0, on_target);
  EXPECT_EQ(r.phase, Phase::FP);  // cascades IP -> EP -> AP -> FP
  EXPECT_EQ(r.synth.mode, SynthMode::Chord);
  EXPECT_EQ(r.events.front(), TransitionEvent{TransitionEvent::Kind::EnterEP});

  EXPECT_ERROR_CODE(engine.tick(-1.0, 0, on_target), ErrorCode::InvalidInput);
  EXPECT_ERROR_CODE(engine.tick(1.0, 3, on_target), ErrorCode::UnknownTarget);
  const Pose far{Vec3(50, 0, 0), testing_support::pointing(Vec3::UnitY())};
  EXPECT_EQ(engine.tick(1.0, 0, far).phase, Phase::IP);
}

TEST(Session, LogRoundTripIsExact) {
  const auto run = run_scenario(load_scenario(kScenarios + "excursion.json"), EngineConfig{});
  const std::string text = serialize(run.log);
  const SessionLog back = parse(text);
  EXPECT_EQ(back, run.log);
  EXPECT_EQ(serialize(back), text);
}

TEST(Session, ReplayReproducesRecords) {
  const auto run = run_scenario(load_scenario(kScenarios + "demo.json"), EngineConfig{});
  const SessionLog back = parse(serialize(run.log));
  EXPECT_EQ(replay_session(back), run.log.records);
}

TEST(Session, ParseErrorsCarryLineNumbers) {
  SessionLog log{single_target(), EngineConfig{}, {}};
  Engine engine(log.plan, log.config);
  const Pose pose{Vec3::Zero(), testing_support::pointing(Vec3::UnitY())};
  for (int i = 0; i < 3; ++i) log.records.push_back(engine.tick(0.1 * i, 0, pose));
  std::string text = serialize(log);
  // Corrupt the third line (second record).
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos, "{oops");
  try {
    parse(text);
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_ERROR_CODE(parse(""), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(parse("{\"format\": \"other\", \"version\": 1}\n"), ErrorCode::ParseError);
}

TEST(Session, NewerVersionIsRejected) {
  SessionLog log{single_target(), EngineConfig{}, {}};
  json header = session_header(log);
  header["version"] = kSessionVersion + 1;
  EXPECT_ERROR_CODE(parse(header.dump() + "\n"), ErrorCode::VersionMismatch);
}

TEST(Render, DeterministicAndByteIdentical) {
  const auto log = run_scenario(load_scenario(kScenarios + "excursion.json"), EngineConfig{}).log;
  const auto a = offline_render(log);
  const auto b = offline_render(parse(serialize(log)));
  EXPECT_EQ(encode_wav(a.audio, WavFormat::Pcm16), encode_wav(b.audio, WavFormat::Pcm16));
  EXPECT_EQ(encode_wav(a.audio, WavFormat::Float32), encode_wav(b.audio, WavFormat::Float32));
  const std::size_t block = log.config.synth.block_frames;
  EXPECT_EQ(a.audio.samples.size() % block, 0u);
  EXPECT_GE(a.audio.samples.size(), timestamp_to_sample(log.records.back().timestamp_s, 48000.0));
}

TEST(Render, EmptyLogRendersNothing) {
  const SessionLog log{single_target(), EngineConfig{}, {}};
  EXPECT_TRUE(offline_render(log).audio.samples.empty());
}

TEST(Render, EventsTakeEffectAtNextBlockBoundary) {
  const auto log = run_scenario(load_scenario(kScenarios + "excursion.json"), EngineConfig{}).log;
  const auto out = offline_render(log);
  ASSERT_FALSE(out.events.empty());
  const std::size_t block = log.config.synth.block_frames;
  for (const auto& ev : out.events) {
    const std::size_t s = timestamp_to_sample(log.records[ev.record_index].timestamp_s, 48000.0);
    EXPECT_EQ(ev.sample_index % block, 0u);
    EXPECT_GE(ev.sample_index, s);
    EXPECT_LT(ev.sample_index - s, block);
  }
}

TEST(Render, FinalPhaseChordSoundsWithinOneBlock) {
  const auto log = run_scenario(load_scenario(kScenarios + "excursion.json"), EngineConfig{}).log;
  const auto out = offline_render(log);
  const auto fp = std::find_if(out.events.begin(), out.events.end(), [](const EventSample& e) {
    return e.event.kind == TransitionEvent::Kind::APtoFP;
  });
  ASSERT_NE(fp, out.events.end());
  // Earcons from the same tick are mixed in; look past them to the chord.
  const std::size_t start = fp->sample_index + 64 + 2 * 3840 + 2 * 2880 + 1024;
  const auto mag = oracle::magnitude_spectrum(out.audio.samples, start, 8192);
  const double bin = 48000.0 / 8192.0;
  const auto& chord = log.config.mapping.fp_chord.freqs_hz;
  for (double f : chord) {
    const auto k = static_cast<std::size_t>(std::lround(f / bin));
    const double local = std::max({mag[k - 1], mag[k], mag[k + 1]});
    EXPECT_GT(local, 0.05 * *std::max_element(mag.begin() + 1, mag.end())) << f;
  }
}
