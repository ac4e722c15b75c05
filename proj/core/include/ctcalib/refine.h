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

#ifndef CTCALIB_REFINE_H_
#define CTCALIB_REFINE_H_

#include <string>
#include <vector>

#include "ctcalib/camera.h"
#include "ctcalib/coarse.h"
#include "ctcalib/error.h"
#include "ctcalib/geometry.h"
#include "ctcalib/normal_equations.h"
#include "ctcalib/trajectory.h"
#include "ctcalib/triangulation.h"

namespace ctcalib {

struct RefineConfig {
  int keyframes = 30;
  RobustWeight robust;
  int max_iterations = 100;
  // Time-lag-only iterations run before the joint stage; 0 disables them.
  int time_lag_iterations = 20;
  // Re-solve the closed-form extrinsic after the time-lag stage. Needs the
  // camera trajectory.
  bool reinitialize_extrinsic = true;
  // Stop after the time-lag stage.
  bool time_lag_only = false;
  double initial_damping = 1e-4;  // relative to the mean diagonal of H_bar
  double damping_increase = 10.0;
  double damping_decrease = 0.3;
  int max_rejections = 10;
  double step_tolerance = 1e-8;
  double cost_tolerance = 1e-10;
  int min_track_length = 3;
  double min_triangulation_angle = kDefaultMinTriangulationAngle;
  double max_excluded_fraction = 0.3;
  CoarseConfig coarse;  // used by the extrinsic re-initialization
};

struct RefineResult {
  Pose extrinsic;  // LiDAR-from-camera
  double tau = 0.0;
  std::vector<double> time_lag_cost_history;
  std::vector<double> cost_history;  // accepted joint-stage costs; tau stage when time_lag_only
  double mean_reprojection_error = 0.0;  // pixels
  double inlier_ratio = 0.0;
  bool converged = false;
  int iterations = 0;
  int keyframe_count = 0;
  int landmark_count = 0;
  int residual_count = 0;
  std::vector<std::string> warnings;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, RefineResult best)
      : Error(ErrorCode::kNonConvergence, message, Stage::kRefineJoint),
        best_(std::move(best)) {}
  const RefineResult& best() const { return best_; }

 private:
  RefineResult best_;
};

// Keyframe ids spread evenly over the observed frames whose shifted
// timestamp t + tau lies inside the LiDAR span.
std::vector<int> SelectKeyframes(const std::vector<FeatureTrack>& tracks,
                                 const FrameTimestamps& frame_times,
                                 const ContinuousTrajectory& lidar, double tau,
                                 int count);

// Structureless continuous-time bundle adjustment of the extrinsic and time
// lag. Landmarks are re-triangulated at every evaluation and eliminated with
// the Schur complement. `camera_poses` may be empty when
// config.reinitialize_extrinsic is false.
RefineResult RefineCalibration(const CoarseResult& initial,
                               const std::vector<StampedPose>& camera_poses,
                               const std::vector<FeatureTrack>& tracks,
                               const FrameTimestamps& frame_times,
                               const ContinuousTrajectory& lidar,
                               const CameraIntrinsics& intrinsics,
                               const RefineConfig& config = {});

}  // namespace ctcalib

#endif  // CTCALIB_REFINE_H_
