/*
 * Copyright 2026 The ctcalib Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CTCALIB_GEOMETRY_H_
#define CTCALIB_GEOMETRY_H_

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ctcalib {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// se(3) tangent vector, rotation first: (r_x, r_y, r_z, rho_x, rho_y, rho_z).
// r is the axis-angle vector in radians, rho the translational part in meters.
using Twist = Vector6d;

// Below this rotation angle exp/log switch to second-order Taylor branches.
inline constexpr double kSmallAngle = 1e-8;

// log() is undefined within this distance of a half-turn.
inline constexpr double kHalfTurnMargin = 1e-6;

Eigen::Matrix3d Skew(const Eigen::Vector3d& v);

// Element of SO(3). Stored as a unit quaternion, exposed as a matrix.
class Rotation {
 public:
  Rotation() = default;

  static Rotation FromQuaternion(const Eigen::Quaterniond& q);
  // Projects `m` onto SO(3); throws kInvalidArgument if it is not within 1e-6
  // of a rotation.
  static Rotation FromMatrix(const Eigen::Matrix3d& m);
  // Nearest rotation in the Frobenius sense, no closeness check.
  static Rotation ProjectFromMatrix(const Eigen::Matrix3d& m);
  static Rotation Exp(const Eigen::Vector3d& rotation_vector);

  // Axis-angle vector with angle in [0, pi].
  Eigen::Vector3d Log() const;
  double angle() const;

  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }

  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Rotation operator*(const Rotation& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }

 private:
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q) {}

  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

// Element of SE(3), acting on points as x -> R x + t.
class Pose {
 public:
  Pose() : translation_(Eigen::Vector3d::Zero()) {}
  Pose(const Rotation& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose Identity() { return Pose(); }
  static Pose FromMatrix(const Eigen::Matrix4d& m);

  const Rotation& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;

  Pose inverse() const;
  Pose operator*(const Pose& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const {
    return rotation_ * point + translation_;
  }

 private:
  Rotation rotation_;
  Eigen::Vector3d translation_;
};

// SE(3) exponential. Throws kInvalidArgument on non-finite input.
Pose ExpMap(const Twist& xi);

// SE(3) logarithm. Throws kDegenerateRotation when the rotation angle is
// within kHalfTurnMargin of pi.
Twist LogMap(const Pose& pose);

// a^-1 * b, so that a * RelativePose(a, b) == b.
Pose RelativePose(const Pose& a, const Pose& b);

// Geodesic rotation distance |log(a^T b)| in radians.
double RotationDistance(const Rotation& a, const Rotation& b);

// Left Jacobian of SO(3) at `r` and its inverse.
Eigen::Matrix3d LeftJacobianSO3(const Eigen::Vector3d& r);
Eigen::Matrix3d LeftJacobianInverseSO3(const Eigen::Vector3d& r);

}  // namespace ctcalib

#endif  // CTCALIB_GEOMETRY_H_
