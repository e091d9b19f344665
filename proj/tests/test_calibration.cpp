#include <gtest/gtest.h>

#include <random>

#include "sononav/calibration.hpp"
#include "support/helpers.hpp"

using namespace sononav;

namespace {

// Poses of a tool pivoting about `pivot` with the tip at `tip` in the tool frame:
// R_i * tip + p_i = pivot.
std::vector<Pose> pivot_poses(const Vec3& tip, const Vec3& pivot, std::size_t n, double noise_mm,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tilt(-0.6, 0.6), spin(-3.0, 3.0);
  std::normal_distribution<double> noise(0.0, noise_mm);
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < n; ++i) {
    const Quat r = (Quat(Eigen::AngleAxisd(tilt(rng), Vec3::UnitX())) *
                    Quat(Eigen::AngleAxisd(tilt(rng), Vec3::UnitY())) *
                    Quat(Eigen::AngleAxisd(spin(rng), Vec3::UnitZ())))
                       .normalized();
    Vec3 p = pivot - r * tip;
    if (noise_mm > 0.0) p += Vec3(noise(rng), noise(rng), noise(rng));
    poses.push_back(Pose{p, r});
  }
  return poses;
}

}  // namespace

TEST(RigidTransform, ComposeAndInvert) {
  std::mt19937_64 rng(3);
  const RigidTransform a{testing_support::random_rotation(rng), testing_support::random_point(rng, 10)};
  const RigidTransform b{testing_support::random_rotation(rng), testing_support::random_point(rng, 10)};
  const Vec3 p = testing_support::random_point(rng, 10);
  EXPECT_TRUE((a * b).apply(p).isApprox(a.apply(b.apply(p)), 1e-12));
  EXPECT_TRUE(a.inverse().apply(a.apply(p)).isApprox(p, 1e-12));
  EXPECT_TRUE((a * RigidTransform::identity()).apply(p).isApprox(a.apply(p), 1e-12));
}

TEST(PivotCalibration, RecoversTipOffsetWithoutNoise) {
  const Vec3 tip(1.5, -2.0, 180.0), pivot(100.0, 50.0, -20.0);
  const auto result = pivot_calibrate(pivot_poses(tip, pivot, 60, 0.0, 1));
  EXPECT_LT((result.tip_offset - tip).norm(), 1e-6);
  EXPECT_LT((result.pivot_point - pivot).norm(), 1e-6);
  EXPECT_LT(result.rms_residual, 1e-9);
  EXPECT_LT(result.condition_number, kMaxPivotCondition);
}

TEST(PivotCalibration, NoisyResidualMatchesNoiseLevel) {
  const Vec3 tip(0.0, 0.0, 150.0), pivot(0.0, 0.0, 0.0);
  const auto result = pivot_calibrate(pivot_poses(tip, pivot, 500, 0.1, 42));
  EXPECT_LE((result.tip_offset - tip).norm(), 0.2);
  // Per-coordinate RMS residual is close to sigma (slightly below: 6 fitted parameters).
  EXPECT_NEAR(result.rms_residual, 0.1, 0.02);
}

TEST(PivotCalibration, RejectsTooFewPoses) {
  const auto poses = pivot_poses(Vec3(0, 0, 100), Vec3::Zero(), 9, 0.0, 1);
  EXPECT_ERROR_CODE(pivot_calibrate(poses), ErrorCode::InvalidArgument);
}

TEST(PivotCalibration, RejectsPosesWithoutRotation) {
  std::vector<Pose> poses(20, Pose{Vec3(1, 2, 3), Quat::Identity()});
  for (std::size_t i = 0; i < poses.size(); ++i) poses[i].position.x() += 1e-3 * static_cast<double>(i);
  EXPECT_ERROR_CODE(pivot_calibrate(poses), ErrorCode::IllConditioned);
}

TEST(Registration, RecoversRigidTransformExactly) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const RigidTransform truth{testing_support::random_rotation(rng), testing_support::random_point(rng, 200)};
    std::vector<Vec3> src, dst;
    for (int i = 0; i < 6; ++i) {
      src.push_back(testing_support::random_point(rng, 100));
      dst.push_back(truth.apply(src.back()));
    }
    const auto reg = register_landmarks(src, dst);
    EXPECT_LT(reg.transform.rotation.angularDistance(truth.rotation), 1e-9);
    EXPECT_LT((reg.transform.translation - truth.translation).norm(), 1e-9);
    EXPECT_LT(reg.fre_rms, 1e-9);
  }
}

TEST(Registration, FreReflectsNoise) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0.0, 0.5);
  const RigidTransform truth{testing_support::random_rotation(rng), Vec3(10, 20, 30)};
  std::vector<Vec3> src, dst;
  for (int i = 0; i < 200; ++i) {
    src.push_back(testing_support::random_point(rng, 100));
    dst.push_back(truth.apply(src.back()) + Vec3(noise(rng), noise(rng), noise(rng)));
  }
  const auto reg = register_landmarks(src, dst);
  // Per-point RMS distance of isotropic noise is sigma * sqrt(3).
  EXPECT_NEAR(reg.fre_rms, 0.5 * std::sqrt(3.0), 0.1);
}

TEST(Registration, RejectsDegenerateInputs) {
  const std::vector<Vec3> line{Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2), Vec3(5, 5, 5)};
  EXPECT_ERROR_CODE(register_landmarks(line, line), ErrorCode::CollinearDegenerate);
  const std::vector<Vec3> three{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  const std::vector<Vec3> two{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  EXPECT_ERROR_CODE(register_landmarks(three, two), ErrorCode::LengthMismatch);
  EXPECT_ERROR_CODE(register_landmarks(two, two), ErrorCode::InvalidArgument);
}
