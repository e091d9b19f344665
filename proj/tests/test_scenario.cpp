#include <gtest/gtest.h>

#include "sononav/scenario.hpp"
#include "support/helpers.hpp"

using namespace sononav;

namespace {

const std::string kScenarios = std::string(SONONAV_SOURCE_DIR) + "/scenarios/";

std::vector<std::string> phase_events(const TrialMetrics& m) {
  std::vector<std::string> out;
  for (const auto& e : m.timeline) {
    if (e.event.kind != TransitionEvent::Kind::DimensionReached &&
        e.event.kind != TransitionEvent::Kind::DimensionLost) {
      out.push_back(to_string(e.event));
    }
  }
  return out;
}

}  // namespace

TEST(Scenario, RunIsDeterministic) {
  const Scenario s = load_scenario(kScenarios + "demo.json");
  const auto a = run_scenario(s, EngineConfig{});
  const auto b = run_scenario(s, EngineConfig{});
  EXPECT_EQ(a.log, b.log);
  Scenario other = s;
  other.noise.seed += 1;
  EXPECT_NE(run_scenario(other, EngineConfig{}).log.records, a.log.records);
}

TEST(Scenario, ExcursionLeavesAlignmentPhaseOnce) {
  const auto run = run_scenario(load_scenario(kScenarios + "excursion.json"), EngineConfig{});
  ASSERT_EQ(run.metrics.size(), 1u);
  const auto& m = run.metrics[0];
  EXPECT_EQ(m.transition_counts.at("APtoEP"), 1);
  EXPECT_EQ(phase_events(m),
            (std::vector<std::string>{"EnterEP", "EPtoAP", "APtoEP", "EPtoAP", "APtoFP"}));
  ASSERT_TRUE(m.alignment_time_s.has_value());
  EXPECT_LE(m.final_error.d, 0.5);
  EXPECT_LE(m.final_error.theta, 0.375);
}

TEST(Scenario, DemoConvergesOnEveryTarget) {
  const auto run = run_scenario(load_scenario(kScenarios + "demo.json"), EngineConfig{});
  ASSERT_EQ(run.metrics.size(), 10u);
  for (const auto& m : run.metrics) {
    ASSERT_TRUE(m.drill_start_s.has_value()) << m.target_label;
    EXPECT_LE(m.final_error.d, 0.5) << m.target_label;
    EXPECT_LE(m.final_error.theta, 0.375) << m.target_label;
    ASSERT_TRUE(m.alignment_time_s.has_value());
    EXPECT_GT(*m.alignment_time_s, 0.0);
  }
}

TEST(Scenario, DwellIsHonoured) {
  const auto run = run_scenario(load_scenario(kScenarios + "excursion.json"), EngineConfig{});
  const auto& m = run.metrics[0];
  double fp_at = -1.0;
  for (const auto& e : m.timeline) {
    if (e.event.kind == TransitionEvent::Kind::APtoFP) fp_at = e.timestamp_s;
  }
  ASSERT_GE(fp_at, 0.0);
  EXPECT_NEAR(*m.drill_start_s - fp_at, EngineConfig{}.drill_dwell_s, 1e-9);
}

TEST(Scenario, ValidationErrors) {
  Scenario s = load_scenario(kScenarios + "excursion.json");
  Scenario bad = s;
  bad.script.clear();
  EXPECT_ERROR_CODE(run_scenario(bad, EngineConfig{}), ErrorCode::InvalidArgument);
  bad = s;
  bad.tick_rate_hz = 0.0;
  EXPECT_ERROR_CODE(run_scenario(bad, EngineConfig{}), ErrorCode::InvalidArgument);
  bad = s;
  bad.noise.position_sigma_mm = -1.0;
  EXPECT_ERROR_CODE(run_scenario(bad, EngineConfig{}), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(load_scenario(kScenarios + "missing.json"), ErrorCode::InvalidArgument);
}

TEST(Report, GroupsAndCountsMissingTimes) {
  std::vector<TrialMetrics> rows(4);
  rows[0].alignment_time_s = 10.0;
  rows[1].alignment_time_s = 14.0;
  rows[2].alignment_time_s = 20.0;
  rows[0].final_error.d = 0.2;
  rows[1].final_error.d = 0.4;
  rows[2].final_error.d = 0.1;
  rows[3].final_error.d = 0.3;
  const std::vector<std::string> labels{"audio", "audio", "visual", "visual"};
  const Report r = report(rows, labels);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].label, "audio");
  EXPECT_EQ(r.rows[0].n, 2u);
  EXPECT_EQ(r.rows[0].n_na, 0u);
  EXPECT_DOUBLE_EQ(r.rows[0].time_s.mean, 12.0);
  EXPECT_NEAR(r.rows[0].time_s.sd, std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(r.rows[0].d_mm.mean, 0.3, 1e-12);
  EXPECT_EQ(r.rows[1].n, 2u);
  EXPECT_EQ(r.rows[1].n_na, 1u);
  EXPECT_EQ(r.rows[1].time_s.n, 1u);
  EXPECT_DOUBLE_EQ(r.rows[1].time_s.mean, 20.0);
  EXPECT_EQ(r.to_csv().substr(0, kReportCsvHeader.size()), kReportCsvHeader);

  EXPECT_ERROR_CODE(report({}, {}), ErrorCode::EmptyInput);
  EXPECT_ERROR_CODE(report(rows, std::vector<std::string>{"a"}), ErrorCode::LengthMismatch);
}
