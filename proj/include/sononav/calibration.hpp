#pragma once

// Pivot calibration and paired-point (landmark) rigid registration.

#include <cmath>
#include <limits>
#include <string>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sononav/error.hpp"
#include "sononav/geometry.hpp"

namespace sononav {

struct RigidTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_direction(const Vec3& v) const { return rotation * v; }

  Pose apply(const Pose& pose) const {
    return Pose{apply(pose.position), (rotation * pose.orientation).normalized()};
  }

  /// (a * b).apply(p) == a.apply(b.apply(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return RigidTransform{(a.rotation * b.rotation).normalized(),
                          a.rotation * b.translation + a.translation};
  }

  RigidTransform inverse() const {
    const Quat inv = rotation.conjugate();
    return RigidTransform{inv, -(inv * translation)};
  }

  static RigidTransform identity() { return {}; }
};

struct PivotCalibration {
  Vec3 tip_offset = Vec3::Zero();   // tool frame, mm
  Vec3 pivot_point = Vec3::Zero();  // world, mm
  double rms_residual = 0.0;        // per-coordinate RMS, mm
  double condition_number = 0.0;
};

inline constexpr std::size_t kMinPivotSamples = 10;
inline constexpr double kMaxPivotCondition = 1e6;

/// Least-squares solution of R_i * tip + p_i = pivot over all poses.
inline PivotCalibration pivot_calibrate(std::span<const Pose> poses) {
  if (poses.size() < kMinPivotSamples) {
    throw Error(ErrorCode::InvalidArgument, "pivot calibration needs at least 10 poses");
  }
  const auto n = static_cast<Eigen::Index>(poses.size());
  Eigen::MatrixXd a(3 * n, 6);
  Eigen::VectorXd b(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Pose& pose = poses[static_cast<std::size_t>(i)];
    validate(pose);
    a.block<3, 3>(3 * i, 0) = pose.orientation.toRotationMatrix();
    a.block<3, 3>(3 * i, 3) = -Eigen::Matrix3d::Identity();
    b.segment<3>(3 * i) = -pose.position;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxPivotCondition)) {
    throw Error(ErrorCode::IllConditioned,
                "pivot system condition number " + std::to_string(cond) +
                    " exceeds 1e6; poses need more rotation");
  }
  const Eigen::VectorXd x = svd.solve(b);

  PivotCalibration out;
  out.tip_offset = x.head<3>();
  out.pivot_point = x.tail<3>();
  out.rms_residual = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(3 * n));
  out.condition_number = cond;
  return out;
}

struct Registration {
  RigidTransform transform;
  double fre_rms = 0.0;  // RMS of per-point residual distances, mm
};

/// Closed-form absolute orientation (unit-quaternion eigenvector method):
/// minimizes sum |T * source_i - target_i|^2 over rotations and translations.
inline Registration register_landmarks(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorCode::LengthMismatch, "source and target landmark counts differ");
  }
  if (source.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "registration needs at least 3 landmarks");
  }
  const double count = static_cast<double>(source.size());
  Vec3 src_mean = Vec3::Zero(), dst_mean = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!is_finite(source[i]) || !is_finite(target[i])) {
      throw Error(ErrorCode::InvalidArgument, "landmark has non-finite coordinates");
    }
    src_mean += source[i];
    dst_mean += target[i];
  }
  src_mean /= count;
  dst_mean /= count;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 s = source[i] - src_mean;
    const Vec3 t = target[i] - dst_mean;
    cross += s * t.transpose();
    scatter += s * s.transpose();
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> spread(scatter);
  const Vec3 lambda = spread.eigenvalues();  // ascending
  if (!(lambda(1) > 1e-12 * std::max(lambda(2), 1e-300))) {
    throw Error(ErrorCode::CollinearDegenerate, "source landmarks are collinear");
  }

  const double sxx = cross(0, 0), sxy = cross(0, 1), sxz = cross(0, 2);
  const double syx = cross(1, 0), syy = cross(1, 1), syz = cross(1, 2);
  const double szx = cross(2, 0), szy = cross(2, 1), szz = cross(2, 2);
  Eigen::Matrix4d nmat;
  nmat << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
          syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
          szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
          sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(nmat);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);

  Registration out;
  out.transform.rotation = Quat(q(0), q(1), q(2), q(3)).normalized();
  out.transform.translation = dst_mean - out.transform.rotation * src_mean;

  double sum_sq = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    sum_sq += (out.transform.apply(source[i]) - target[i]).squaredNorm();
  }
  out.fre_rms = std::sqrt(sum_sq / count);
  return out;
}

}  // namespace sononav
