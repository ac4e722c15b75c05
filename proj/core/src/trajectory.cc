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

#include "ctcalib/trajectory.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "ctcalib/error.h"

namespace ctcalib {

ContinuousTrajectory::ContinuousTrajectory(std::vector<StampedPose> knots,
                                           std::string clock_id)
    : knots_(std::move(knots)), clock_id_(std::move(clock_id)) {
  if (knots_.size() < 2) {
    throw Error(ErrorCode::kTooShort,
                "trajectory needs at least two knots, got " +
                    std::to_string(knots_.size()));
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i].timestamp)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "knot " + std::to_string(i) + " has a non-finite timestamp");
    }
    if (i > 0 && !(knots_[i].timestamp > knots_[i - 1].timestamp)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "knot timestamps must be strictly increasing (knot " +
                      std::to_string(i) + ")");
    }
  }
  segment_twists_.reserve(knots_.size() - 1);
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    segment_twists_.push_back(
        LogMap(RelativePose(knots_[i].pose, knots_[i + 1].pose)));
  }
}

void ContinuousTrajectory::CheckInSpan(double t) const {
  if (!Contains(t)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "query time " << t << " outside trajectory span [" << start_time()
        << ", " << end_time() << "]";
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
}

std::size_t ContinuousTrajectory::SegmentIndex(double t) const {
  CheckInSpan(t);
  const auto it = std::upper_bound(
      knots_.begin(), knots_.end(), t,
      [](double value, const StampedPose& k) { return value < k.timestamp; });
  const auto idx = static_cast<std::size_t>(it - knots_.begin());
  // idx is the first knot strictly after t; clamp the last knot onto the
  // final segment.
  return std::min(idx, knots_.size() - 1) - 1;
}

Pose ContinuousTrajectory::Interpolate(double t) const {
  const std::size_t i = SegmentIndex(t);
  const StampedPose& a = knots_[i];
  const StampedPose& b = knots_[i + 1];
  if (t == a.timestamp) return a.pose;
  if (t == b.timestamp) return b.pose;
  const double alpha = (t - a.timestamp) / (b.timestamp - a.timestamp);
  return a.pose * ExpMap(alpha * segment_twists_[i]);
}

Twist ContinuousTrajectory::BodyVelocity(double t) const {
  const std::size_t i = SegmentIndex(t);
  return segment_twists_[i] /
         (knots_[i + 1].timestamp - knots_[i].timestamp);
}

ContinuousTrajectory ContinuousTrajectory::TimeShifted(double delta) const {
  std::vector<StampedPose> shifted = knots_;
  for (auto& k : shifted) k.timestamp += delta;
  return ContinuousTrajectory(std::move(shifted), clock_id_);
}

ContinuousTrajectory ContinuousTrajectory::LeftMultiplied(const Pose& g) const {
  std::vector<StampedPose> moved = knots_;
  for (auto& k : moved) k.pose = g * k.pose;
  return ContinuousTrajectory(std::move(moved), clock_id_);
}

}  // namespace ctcalib
