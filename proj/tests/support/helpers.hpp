#pragma once

#include <gtest/gtest.h>

#include <random>

#include "sononav/error.hpp"
#include "sononav/geometry.hpp"

// Fails unless `stmt` throws sononav::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                   \
  do {                                                                           \
    try {                                                                        \
      stmt;                                                                      \
      ADD_FAILURE() << "expected " << #expected_code << " from " #stmt;          \
    } catch (const ::sononav::Error& e_) {                                       \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                          \
    }                                                                            \
  } while (0)

namespace testing_support {

inline sononav::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  sononav::Vec3 v;
  do {
    v = sononav::Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline sononav::Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d q;
  do {
    q = Eigen::Vector4d(n(rng), n(rng), n(rng), n(rng));
  } while (q.norm() < 1e-6);
  q.normalize();
  return sononav::Quat(q(0), q(1), q(2), q(3));
}

inline sononav::Vec3 random_point(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return sononav::Vec3(u(rng), u(rng), u(rng));
}

inline sononav::AnatomicalFrame random_frame(std::mt19937_64& rng) {
  return sononav::make_frame(random_point(rng, 100.0), random_rotation(rng).toRotationMatrix());
}

/// Orientation whose +Z axis is `axis`.
inline sononav::Quat pointing(const sononav::Vec3& axis) {
  return sononav::Quat::FromTwoVectors(sononav::Vec3::UnitZ(), axis).normalized();
}

}  // namespace testing_support
