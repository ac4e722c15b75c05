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

#ifndef CTCALIB_COARSE_H_
#define CTCALIB_COARSE_H_

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctcalib/camera.h"
#include "ctcalib/geometry.h"
#include "ctcalib/trajectory.h"

namespace ctcalib {

// Scalar motion-intensity time series used for rough time synchronization.
struct MotionSignal {
  std::vector<double> timestamps;  // strictly increasing
  std::vector<double> magnitudes;  // non-negative
};

// Timestamp of the first sample whose magnitude exceeds `threshold` and stays
// above it for `hold` consecutive samples. Throws kOnsetNotFound.
double DetectMotionOnset(const MotionSignal& signal, double threshold,
                         int hold);

// Rotational speed |omega| (rad/s) of each trajectory segment, stamped at the
// segment start.
MotionSignal LidarRotationalSpeed(const ContinuousTrajectory& trajectory);

// Mean pixel displacement of features shared by consecutive frames
// (pixels/frame), stamped at the earlier frame.
MotionSignal FeatureMotion(const std::vector<FeatureTrack>& tracks,
                           const FrameTimestamps& frame_times);

struct SyncConfig {
  double lidar_threshold = 0.15;  // rad/s
  int lidar_hold = 5;
  double camera_threshold = 2.0;  // px/frame
  int camera_hold = 5;
};

struct SyncResult {
  double offset = 0.0;  // add to camera timestamps to reach the LiDAR clock
  double lidar_onset = 0.0;
  double camera_onset = 0.0;
};

SyncResult DetectSync(const ContinuousTrajectory& lidar,
                      const MotionSignal& camera_motion,
                      const SyncConfig& config = {});

// onset_lidar - onset_camera.
double RoughSync(const ContinuousTrajectory& lidar,
                 const MotionSignal& camera_motion,
                 const SyncConfig& config = {});

// Paired relative motions over the same time span. The camera translation is
// known only up to the monocular scale.
struct RelativePosePair {
  Pose lidar_rel;
  Pose camera_rel;
  double t_begin = 0.0;  // camera clock
  double t_end = 0.0;
};

inline constexpr double kMinPairAngle = 1e-3;

// Relative pose pairs between camera keyframes spaced evenly over the camera
// poses at or after `window_start`. A camera pose at time t is matched with
// the LiDAR pose interpolated at t + time_offset. Only pairs whose relative
// rotation angle is at least `min_angle` for both sensors are kept.
// Throws kInsufficientExcitation for fewer than three pairs.
std::vector<RelativePosePair> ExtractPairs(
    const ContinuousTrajectory& lidar,
    const std::vector<StampedPose>& camera_poses, int count, double min_angle,
    double time_offset = 0.0,
    double window_start = -std::numeric_limits<double>::infinity());

struct RotationSolution {
  Rotation rotation;
  double conditioning = 0.0;  // sigma_min / sigma_max of M
};

// Rotation R of the LiDAR-from-camera extrinsic from R_L R = R R_C.
// Throws kDegenerateMotion when M is rank deficient.
RotationSolution SolveRotation(std::span<const RelativePosePair> pairs);

struct TranslationScaleSolution {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double scale = 1.0;
  double conditioning = 0.0;  // of the column-scaled stacked system
};

// Least-squares solution of (I - R_L) t + lambda R t_C = t_L over all pairs.
// Throws kUnobservableTranslation or kScaleSign.
TranslationScaleSolution SolveTranslationScale(
    std::span<const RelativePosePair> pairs, const Rotation& rotation);

struct CoarseConfig {
  int pair_count = 10;
  double min_angle = 0.17;         // rad, per pair
  double target_excursion = 0.44;  // rad, warn when no pair reaches it
  SyncConfig sync;
  // Skips onset detection when set.
  std::optional<double> time_offset;
};

struct CoarseResult {
  Pose extrinsic;  // LiDAR-from-camera
  double scale = 1.0;
  double time_offset = 0.0;
  double rotation_conditioning = 0.0;
  double translation_conditioning = 0.0;
  int pair_count = 0;
  std::vector<std::string> warnings;
};

// Rough sync, pair extraction, rotation, then translation and scale. Errors
// carry the failing Stage.
CoarseResult CoarseCalibrate(const ContinuousTrajectory& lidar,
                             const std::vector<StampedPose>& camera_poses,
                             const MotionSignal& camera_motion,
                             const CoarseConfig& config = {});

}  // namespace ctcalib

#endif  // CTCALIB_COARSE_H_
