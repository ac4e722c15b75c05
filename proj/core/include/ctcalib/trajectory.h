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

#ifndef CTCALIB_TRAJECTORY_H_
#define CTCALIB_TRAJECTORY_H_

#include <cstddef>
#include <string>
#include <vector>

#include "ctcalib/geometry.h"

namespace ctcalib {

struct StampedPose {
  double timestamp = 0.0;  // seconds, owning sensor clock
  Pose pose;
};

// Piecewise-geodesic SE(3) trajectory through time-sorted knots. Between
// knots i and j the pose is T_i * exp(alpha * log(T_i^-1 T_j)) with
// alpha = (t - t_i) / (t_j - t_i). Queries outside the knot span throw
// kOutOfRange; there is no extrapolation.
class ContinuousTrajectory {
 public:
  // Throws kTooShort for fewer than two knots, kInvalidArgument for
  // non-finite or non-increasing timestamps, kDegenerateRotation when two
  // consecutive knots differ by a half-turn.
  explicit ContinuousTrajectory(std::vector<StampedPose> knots,
                                std::string clock_id = "lidar");

  const std::vector<StampedPose>& knots() const { return knots_; }
  const std::string& clock_id() const { return clock_id_; }
  double start_time() const { return knots_.front().timestamp; }
  double end_time() const { return knots_.back().timestamp; }
  bool Contains(double t) const {
    return t >= start_time() && t <= end_time();
  }

  Pose Interpolate(double t) const;

  // Body-frame twist rate d/dt on the segment containing t, so that
  // T(t + dt) = T(t) * exp(dt * BodyVelocity(t)) inside that segment. At an
  // interior knot the right-hand segment is used.
  Twist BodyVelocity(double t) const;

  // Index i of the segment [t_i, t_{i+1}] used for t.
  std::size_t SegmentIndex(double t) const;

  // Same motion with every knot timestamp offset by `delta` seconds.
  ContinuousTrajectory TimeShifted(double delta) const;
  // Every knot left-multiplied by `g` (change of world frame).
  ContinuousTrajectory LeftMultiplied(const Pose& g) const;

 private:
  void CheckInSpan(double t) const;

  std::vector<StampedPose> knots_;
  std::vector<Twist> segment_twists_;
  std::string clock_id_;
};

// Free-function form of ContinuousTrajectory::Interpolate.
inline Pose Interpolate(const ContinuousTrajectory& trajectory, double t) {
  return trajectory.Interpolate(t);
}

}  // namespace ctcalib

#endif  // CTCALIB_TRAJECTORY_H_
