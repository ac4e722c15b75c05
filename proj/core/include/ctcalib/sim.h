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

#ifndef CTCALIB_SIM_H_
#define CTCALIB_SIM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ctcalib/camera.h"
#include "ctcalib/coarse.h"
#include "ctcalib/geometry.h"
#include "ctcalib/refine.h"
#include "ctcalib/trajectory.h"

namespace ctcalib {

enum class TrajectoryProfile { kHandheldSinusoid, kArc, kStationaryThenMove };

std::string_view ToString(TrajectoryProfile profile);
// Throws kInvalidArgument for unknown names.
TrajectoryProfile ParseTrajectoryProfile(std::string_view name);

// Camera looking along the LiDAR x axis, 0.2 m baseline.
Pose DefaultExtrinsic();

struct Scenario {
  TrajectoryProfile profile = TrajectoryProfile::kHandheldSinusoid;
  double duration = 10.0;      // seconds of camera recording
  double lidar_rate = 100.0;   // knots per second
  double camera_rate = 20.0;   // frames per second
  Pose extrinsic = DefaultExtrinsic();  // LiDAR-from-camera
  double time_lag = 0.0;       // seconds, camera time + lag = LiDAR time
  double pixel_noise = 5.0;    // sigma, pixels
  double rotation_noise = 0.0; // sigma of camera pose rotation noise, rad
  int landmark_count = 300;
  double landmark_radius = 20.0;
  double landmark_min_distance = 1.0;
  double rotation_amplitude = 0.3;     // rad
  double translation_amplitude = 0.5;  // m
  double min_period = 2.0;  // s
  double max_period = 7.0;  // s
  double onset_time = 2.5;  // LiDAR clock, stationary-then-move only
  // Monocular camera translations are multiplied by this factor; 0 draws a
  // random factor in [0.5, 2].
  double camera_scale = 0.0;
  double lidar_padding = 1.0;  // extra trajectory before and after, seconds
  CameraIntrinsics intrinsics;
  std::uint64_t seed = 1;

  // Throws kInvalidArgument on non-positive rates or duration.
  void Validate() const;
};

struct GroundTruth {
  Pose extrinsic;          // LiDAR-from-camera
  double time_lag = 0.0;   // seconds
  double scale = 1.0;      // lambda: metric = lambda * camera translation
};

struct SimulatedDataset {
  ContinuousTrajectory lidar;
  std::vector<StampedPose> camera_poses;  // camera clock, scaled world frame
  std::vector<FeatureTrack> tracks;
  FrameTimestamps frame_times;
  CameraIntrinsics intrinsics;
  GroundTruth truth;
  std::vector<Eigen::Vector3d> landmarks;  // LiDAR world frame
};

// Deterministic for a fixed Scenario::seed. Throws kScenarioInfeasible when
// more than half the frames see fewer than 8 landmarks.
SimulatedDataset GenerateScenario(const Scenario& scenario);

// Per-trial seed derived from a master seed.
std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t trial);

struct ErrorMetrics {
  double e_r = 0.0;    // rad
  double e_t = 0.0;    // m
  double e_tau = 0.0;  // s, signed
};

ErrorMetrics Evaluate(const Pose& extrinsic, double tau,
                      const GroundTruth& truth);

struct ErrorReport {
  std::vector<ErrorMetrics> trials;
  int failures = 0;
  double mean_e_r = 0.0, var_e_r = 0.0;
  double mean_e_t = 0.0, var_e_t = 0.0;
  double mean_e_tau = 0.0, var_e_tau = 0.0;
  double mean_abs_e_tau = 0.0;
};

ErrorReport Summarize(std::vector<ErrorMetrics> trials, int failures = 0);

// "mean (variance)" in the units of the usual result tables: e_r in 1e-3 rad,
// e_t in m, e_tau in ms.
std::string FormatTableRow(const ErrorReport& report);

// --- experiment sweeps ---

struct MotionSweepCell {
  double level_deg = 0.0;
  int samples = 0;
  double noise = 0.0;  // rad
  double mean_error = 0.0;  // rad
  int trials = 0;
};

// Closed-form rotation error with synthetic relative rotations of a fixed
// excursion angle, isotropic rotation-vector noise on both sensors, and a
// random ground-truth extrinsic per trial.
std::vector<MotionSweepCell> SweepMotionExcitation(
    std::span<const double> levels_deg, std::span<const int> samples,
    std::span<const double> noise_levels, int trials, std::uint64_t seed);

// Initial guess for refine-only experiments: ground truth perturbed by
// N(0, rotation_sigma^2) per rotation axis and N(0, translation_sigma^2) per
// translation axis.
struct Perturbation {
  double rotation_sigma = 0.05;
  double translation_sigma = 0.05;
};

struct FrameSweepRow {
  int keyframes = 0;
  ErrorReport report;
};

// Refinement accuracy versus keyframe count. Each trial draws a random
// trajectory and a true time lag uniform in +-max_true_lag; refinement starts
// from the perturbed extrinsic and tau = 0.
std::vector<FrameSweepRow> SweepFrames(const Scenario& base,
                                       std::span<const int> keyframe_counts,
                                       int trials, std::uint64_t seed,
                                       const RefineConfig& refine,
                                       const Perturbation& perturbation = {},
                                       double max_true_lag = 0.01);

struct LagSweepRow {
  double injected = 0.0;  // seconds
  ErrorReport coarse;
  ErrorReport refined;    // empty when refinement was not run
};

// Coarse accuracy when the camera is synchronized with an offset error of
// `injected` seconds; optionally refines from each coarse result.
std::vector<LagSweepRow> SweepCoarseSyncError(const Scenario& base,
                                              std::span<const double> injected,
                                              int trials, std::uint64_t seed,
                                              const CoarseConfig& coarse,
                                              const RefineConfig* refine);

// Refinement only, true time lag set to each injected value and tau
// initialized to zero. Results are reported in LagSweepRow::refined.
std::vector<LagSweepRow> SweepRefineLag(const Scenario& base,
                                        std::span<const double> injected,
                                        int trials, std::uint64_t seed,
                                        const RefineConfig& refine,
                                        const Perturbation& perturbation = {});

}  // namespace ctcalib

#endif  // CTCALIB_SIM_H_
