#pragma once

// Tool-to-trajectory error decomposition in the anatomical frame.
//
// Conventions:
//  * Pose::orientation rotates tool-frame vectors into world coordinates; the
//    tool's pointing axis is the tool-frame +Z axis.
//  * e_x / e_y are coordinates along EntryPlane::in_plane_x / in_plane_y.
//  * e_phi is the signed angle (target -> tool) between the projections onto the
//    axial plane (X_a, Y_a), positive counter-clockwise about Z_a; e_delta is the
//    same on the sagittal plane (Y_a, Z_a), positive about X_a.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sononav/error.hpp"

namespace sononav {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kUnitTolerance = 1e-9;
inline constexpr double kParallelToleranceRad = 1e-6;
inline constexpr double kProjectionMinNorm = 1e-6;

inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  /// World-space pointing axis of the tool.
  Vec3 axis() const { return orientation * Vec3::UnitZ(); }

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs();
  }
};

struct PlannedTrajectory {
  Vec3 entry_point = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  friend bool operator==(const PlannedTrajectory& a, const PlannedTrajectory& b) {
    return a.entry_point == b.entry_point && a.direction == b.direction;
  }
};

/// Mediolateral (x), caudiocranial (y), anteroposterior (z) axes.
struct AnatomicalFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 x_axis = Vec3::UnitX();
  Vec3 y_axis = Vec3::UnitY();
  Vec3 z_axis = Vec3::UnitZ();

  friend bool operator==(const AnatomicalFrame& a, const AnatomicalFrame& b) {
    return a.origin == b.origin && a.x_axis == b.x_axis && a.y_axis == b.y_axis &&
           a.z_axis == b.z_axis;
  }
};

struct EntryPlane {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 in_plane_x = Vec3::UnitX();
  Vec3 in_plane_y = Vec3::UnitY();
  // Set when the trajectory is parallel to X_a and Y_a was used to seed in_plane_x.
  bool degenerate_axis = false;
};

struct ErrorVector {
  double e_x = 0.0;      // mm
  double e_y = 0.0;      // mm
  double e_phi = 0.0;    // deg
  double e_delta = 0.0;  // deg
  double d = 0.0;        // mm
  double theta = 0.0;    // deg

  bool operator==(const ErrorVector&) const = default;
};

struct EntryError {
  double e_x = 0.0;
  double e_y = 0.0;
  double d = 0.0;
};

struct AngularError {
  double e_phi = 0.0;
  double e_delta = 0.0;
  double theta = 0.0;
};

inline void validate(const Pose& pose) {
  if (!is_finite(pose.position) || !pose.orientation.coeffs().allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "pose has non-finite components");
  }
  if (std::abs(pose.orientation.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument, "pose orientation is not a unit quaternion");
  }
}

inline void validate(const PlannedTrajectory& target) {
  if (!is_finite(target.entry_point) || !is_finite(target.direction)) {
    throw Error(ErrorCode::InvalidArgument, "trajectory has non-finite components");
  }
  if (std::abs(target.direction.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument, "trajectory direction is not unit length");
  }
}

inline void validate(const AnatomicalFrame& frame) {
  const Vec3* axes[] = {&frame.x_axis, &frame.y_axis, &frame.z_axis};
  for (const Vec3* axis : axes) {
    if (!is_finite(*axis) || std::abs(axis->norm() - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::InvalidArgument, "anatomical axis is not unit length");
    }
  }
  if (std::abs(frame.x_axis.dot(frame.y_axis)) > kUnitTolerance ||
      std::abs(frame.y_axis.dot(frame.z_axis)) > kUnitTolerance ||
      std::abs(frame.z_axis.dot(frame.x_axis)) > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument, "anatomical axes are not orthogonal");
  }
  if ((frame.x_axis.cross(frame.y_axis) - frame.z_axis).norm() > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument, "anatomical frame is not right-handed");
  }
}

/// Builds an anatomical frame from a rotation whose columns are X_a, Y_a, Z_a.
inline AnatomicalFrame make_frame(const Vec3& origin, const Eigen::Matrix3d& axes) {
  return AnatomicalFrame{origin, axes.col(0), axes.col(1), axes.col(2)};
}

/// Entry plane through the planned entry point with the trajectory as normal.
/// in_plane_x is X_a projected onto the plane; Y_a is used instead when the
/// trajectory runs along X_a (flagged via degenerate_axis).
inline EntryPlane make_entry_plane(const PlannedTrajectory& target, const AnatomicalFrame& frame) {
  validate(target);
  const Vec3 n = target.direction;
  EntryPlane plane;
  plane.center = target.entry_point;
  plane.normal = n;

  const double sin_angle = n.cross(frame.x_axis).norm();
  Vec3 seed = frame.x_axis;
  if (sin_angle < std::sin(kParallelToleranceRad)) {
    seed = frame.y_axis;
    plane.degenerate_axis = true;
  }
  plane.in_plane_x = (seed - seed.dot(n) * n).normalized();
  plane.in_plane_y = n.cross(plane.in_plane_x).normalized();
  return plane;
}

/// In-plane offset of the tool tip from the plane center; the component along
/// the normal is discarded.
inline EntryError entry_error(const Pose& tool, const EntryPlane& plane) {
  const Vec3 offset = tool.position - plane.center;
  EntryError err;
  err.e_x = offset.dot(plane.in_plane_x);
  err.e_y = offset.dot(plane.in_plane_y);
  err.d = std::hypot(err.e_x, err.e_y);
  return err;
}

namespace detail {

// Signed angle from `from` to `to` after projecting both onto span(u, v),
// positive about u x v.
inline double projected_angle_deg(const Vec3& from, const Vec3& to, const Vec3& u, const Vec3& v) {
  const double fu = from.dot(u), fv = from.dot(v);
  const double tu = to.dot(u), tv = to.dot(v);
  if (std::hypot(fu, fv) < kProjectionMinNorm || std::hypot(tu, tv) < kProjectionMinNorm) {
    throw Error(ErrorCode::ProjectionDegenerate, "axis is perpendicular to a projection plane");
  }
  return rad_to_deg(std::atan2(fu * tv - fv * tu, fu * tu + fv * tv));
}

}  // namespace detail

inline AngularError angular_error(const Pose& tool, const PlannedTrajectory& target,
                                  const AnatomicalFrame& frame) {
  const Vec3 tool_axis = tool.axis().normalized();
  const Vec3& dir = target.direction;
  AngularError err;
  err.e_phi = detail::projected_angle_deg(dir, tool_axis, frame.x_axis, frame.y_axis);
  err.e_delta = detail::projected_angle_deg(dir, tool_axis, frame.y_axis, frame.z_axis);
  err.theta = rad_to_deg(std::atan2(tool_axis.cross(dir).norm(), tool_axis.dot(dir)));
  return err;
}

/// Full 4-DOF decomposition plus the composite distances used by the state machine.
inline ErrorVector compute_error(const Pose& tool, const PlannedTrajectory& target,
                                 const EntryPlane& plane, const AnatomicalFrame& frame) {
  const EntryError entry = entry_error(tool, plane);
  const AngularError angle = angular_error(tool, target, frame);
  return ErrorVector{entry.e_x, entry.e_y, angle.e_phi, angle.e_delta, entry.d, angle.theta};
}

}  // namespace sononav
