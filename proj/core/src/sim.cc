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

#include "ctcalib/sim.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "ctcalib/error.h"

namespace ctcalib {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr int kMinVisibleLandmarks = 8;
constexpr double kMinDepth = 0.1;

struct SinusoidParams {
  std::array<double, 6> amplitude{};
  std::array<double, 6> omega{};
  std::array<double, 6> phase{};
};

Eigen::Vector3d RandomUnitVector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

Rotation RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return Rotation::FromQuaternion(q);
}

Eigen::Vector3d GaussianVector(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return sigma * Eigen::Vector3d(x, y, z);
}

SinusoidParams DrawSinusoids(const Scenario& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> period(s.min_period, s.max_period);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::bernoulli_distribution sign(0.5);
  SinusoidParams p;
  for (int k = 0; k < 6; ++k) {
    const double amp = k < 3 ? s.rotation_amplitude : s.translation_amplitude;
    p.amplitude[k] = sign(rng) ? amp : -amp;
    p.omega[k] = kTwoPi / period(rng);
    p.phase[k] = phase(rng);
  }
  return p;
}

// World-from-LiDAR pose at LiDAR time s.
Pose MotionAt(const Scenario& scenario, const SinusoidParams& p, double s) {
  Eigen::Matrix<double, 6, 1> x;
  switch (scenario.profile) {
    case TrajectoryProfile::kHandheldSinusoid:
      for (int k = 0; k < 6; ++k) {
        x(k) = p.amplitude[k] * std::sin(p.omega[k] * s + p.phase[k]);
      }
      return Pose(Rotation::Exp(x.head<3>()), x.tail<3>());
    case TrajectoryProfile::kStationaryThenMove: {
      // Zero phase gives a velocity jump at the onset.
      const double u = std::max(0.0, s - scenario.onset_time);
      for (int k = 0; k < 6; ++k) {
        x(k) = p.amplitude[k] * std::sin(p.omega[k] * u);
      }
      return Pose(Rotation::Exp(x.head<3>()), x.tail<3>());
    }
    case TrajectoryProfile::kArc: {
      constexpr double kRadius = 3.0;
      constexpr double kSpeed = 0.8;
      const double heading = kSpeed * s / kRadius;
      for (int k = 0; k < 6; ++k) {
        x(k) = 0.5 * p.amplitude[k] * std::sin(p.omega[k] * s + p.phase[k]);
      }
      const Eigen::Vector3d position(kRadius * std::sin(heading),
                                     kRadius * (1.0 - std::cos(heading)), 0.0);
      return Pose(Rotation::Exp(Eigen::Vector3d(0.0, 0.0, heading)) *
                      Rotation::Exp(x.head<3>()),
                  position + x.tail<3>());
    }
  }
  return Pose();
}

}  // namespace

std::string_view ToString(TrajectoryProfile profile) {
  switch (profile) {
    case TrajectoryProfile::kHandheldSinusoid: return "handheld-sinusoid";
    case TrajectoryProfile::kArc: return "arc";
    case TrajectoryProfile::kStationaryThenMove: return "stationary-then-move";
  }
  return "unknown";
}

TrajectoryProfile ParseTrajectoryProfile(std::string_view name) {
  if (name == "handheld-sinusoid" || name == "handheld") {
    return TrajectoryProfile::kHandheldSinusoid;
  }
  if (name == "arc") return TrajectoryProfile::kArc;
  if (name == "stationary-then-move") {
    return TrajectoryProfile::kStationaryThenMove;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown trajectory profile '" + std::string(name) + "'");
}

Pose DefaultExtrinsic() {
  Eigen::Matrix3d camera_axes;
  // Columns: camera x, y, z expressed in the LiDAR frame.
  camera_axes << 0.0, 0.0, 1.0,  //
      -1.0, 0.0, 0.0,            //
      0.0, -1.0, 0.0;
  const Rotation mount = Rotation::FromMatrix(camera_axes);
  const Rotation tilt = Rotation::Exp(Eigen::Vector3d(0.03, -0.05, 0.02));
  return Pose(mount * tilt, Eigen::Vector3d(0.12, -0.08, 0.15));
}

void Scenario::Validate() const {
  if (!(duration > 0.0) || !(lidar_rate > 0.0) || !(camera_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "scenario duration and rates must be positive");
  }
  if (landmark_count < 1 || !(landmark_radius > landmark_min_distance)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid landmark distribution");
  }
  if (!(min_period > 0.0) || max_period < min_period) {
    throw Error(ErrorCode::kInvalidArgument, "invalid motion periods");
  }
  if (pixel_noise < 0.0 || rotation_noise < 0.0 || camera_scale < 0.0 ||
      lidar_padding < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "noise, scale and padding must be non-negative");
  }
  intrinsics.Validate();
}

SimulatedDataset GenerateScenario(const Scenario& scenario) {
  scenario.Validate();
  std::mt19937_64 rng(scenario.seed);
  const SinusoidParams motion = DrawSinusoids(scenario, rng);

  // LiDAR knots on the integer grid k / rate so that grid-aligned events
  // (e.g. the motion onset) coincide with knot timestamps.
  const double t_begin =
      std::min(0.0, scenario.time_lag) - scenario.lidar_padding;
  const double t_end =
      std::max(0.0, scenario.time_lag) + scenario.duration + scenario.lidar_padding;
  const auto k_begin = static_cast<long>(std::floor(t_begin * scenario.lidar_rate));
  const auto k_end = static_cast<long>(std::ceil(t_end * scenario.lidar_rate));
  std::vector<StampedPose> knots;
  knots.reserve(static_cast<std::size_t>(k_end - k_begin + 1));
  for (long k = k_begin; k <= k_end; ++k) {
    const double s = static_cast<double>(k) / scenario.lidar_rate;
    knots.push_back({s, MotionAt(scenario, motion, s)});
  }
  ContinuousTrajectory lidar(std::move(knots), "lidar");

  // Camera frames on the camera clock; true (LiDAR) time is t + lag.
  const auto frame_count =
      static_cast<int>(std::floor(scenario.duration * scenario.camera_rate + 1e-9)) + 1;
  std::vector<Pose> world_from_camera;
  std::vector<double> frame_times;
  world_from_camera.reserve(static_cast<std::size_t>(frame_count));
  for (int k = 0; k < frame_count; ++k) {
    const double t = static_cast<double>(k) / scenario.camera_rate;
    frame_times.push_back(t);
    world_from_camera.push_back(lidar.Interpolate(t + scenario.time_lag) *
                                scenario.extrinsic);
  }

  // Visual odometry frame: arbitrary rigid transform and positive scale.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Rotation g_rotation = RandomRotation(rng);
  const Eigen::Vector3d g_translation(10.0 * unit(rng), 10.0 * unit(rng),
                                      10.0 * unit(rng));
  std::uniform_real_distribution<double> scale_dist(0.5, 2.0);
  const double drawn_scale = scale_dist(rng);
  const double camera_scale =
      scenario.camera_scale > 0.0 ? scenario.camera_scale : drawn_scale;

  std::vector<StampedPose> camera_poses;
  camera_poses.reserve(world_from_camera.size());
  for (int k = 0; k < frame_count; ++k) {
    const Pose& p = world_from_camera[static_cast<std::size_t>(k)];
    Rotation r = g_rotation * p.rotation();
    const Eigen::Vector3d noise = GaussianVector(rng, scenario.rotation_noise);
    if (scenario.rotation_noise > 0.0) r = r * Rotation::Exp(noise);
    camera_poses.push_back(
        {frame_times[static_cast<std::size_t>(k)],
         Pose(r, camera_scale * (g_rotation * p.translation() + g_translation))});
  }

  // Landmarks uniform in a ball around the mean camera position.
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  for (const Pose& p : world_from_camera) center += p.translation();
  center /= static_cast<double>(world_from_camera.size());
  std::vector<Eigen::Vector3d> landmarks;
  landmarks.reserve(static_cast<std::size_t>(scenario.landmark_count));
  const int max_draws = 1000 * scenario.landmark_count;
  for (int draws = 0; static_cast<int>(landmarks.size()) < scenario.landmark_count;
       ++draws) {
    if (draws >= max_draws) {
      throw Error(ErrorCode::kScenarioInfeasible,
                  "cannot place landmarks away from the trajectory",
                  Stage::kSimulation);
    }
    const Eigen::Vector3d v(unit(rng), unit(rng), unit(rng));
    if (v.squaredNorm() > 1.0) continue;
    const Eigen::Vector3d candidate = center + scenario.landmark_radius * v;
    bool too_close = false;
    for (const Pose& p : world_from_camera) {
      if ((p.translation() - candidate).norm() < scenario.landmark_min_distance) {
        too_close = true;
        break;
      }
    }
    if (!too_close) landmarks.push_back(candidate);
  }

  std::normal_distribution<double> pixel_noise(0.0, 1.0);
  std::vector<FeatureTrack> tracks;
  std::vector<int> visible(static_cast<std::size_t>(frame_count), 0);
  std::vector<Pose> camera_from_world;
  camera_from_world.reserve(world_from_camera.size());
  for (const Pose& p : world_from_camera) camera_from_world.push_back(p.inverse());
  for (std::size_t j = 0; j < landmarks.size(); ++j) {
    FeatureTrack track;
    track.landmark_id = static_cast<int>(j);
    for (int k = 0; k < frame_count; ++k) {
      const Eigen::Vector3d pc =
          camera_from_world[static_cast<std::size_t>(k)] * landmarks[j];
      if (pc.z() < kMinDepth) continue;
      const Eigen::Vector2d pixel = scenario.intrinsics.Project(pc);
      if (!scenario.intrinsics.InImage(pixel)) continue;
      const double nu = pixel_noise(rng);
      const double nv = pixel_noise(rng);
      Eigen::Vector2d observed = pixel;
      if (scenario.pixel_noise > 0.0) {
        observed += scenario.pixel_noise * Eigen::Vector2d(nu, nv);
      }
      track.observations.push_back({k, observed});
      ++visible[static_cast<std::size_t>(k)];
    }
    if (track.observations.size() >= 2) tracks.push_back(std::move(track));
  }
  const auto starved = std::count_if(visible.begin(), visible.end(), [](int v) {
    return v < kMinVisibleLandmarks;
  });
  if (2 * starved > frame_count) {
    throw Error(ErrorCode::kScenarioInfeasible,
                std::to_string(starved) + " of " + std::to_string(frame_count) +
                    " frames see fewer than " +
                    std::to_string(kMinVisibleLandmarks) + " landmarks",
                Stage::kSimulation);
  }

  FrameTimestamps stamps;
  for (int k = 0; k < frame_count; ++k) {
    stamps[k] = frame_times[static_cast<std::size_t>(k)];
  }
  return SimulatedDataset{
      std::move(lidar),
      std::move(camera_poses),
      std::move(tracks),
      std::move(stamps),
      scenario.intrinsics,
      GroundTruth{scenario.extrinsic, scenario.time_lag, 1.0 / camera_scale},
      std::move(landmarks)};
}

std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t trial) {
  // splitmix64 over the combined value.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ErrorMetrics Evaluate(const Pose& extrinsic, double tau,
                      const GroundTruth& truth) {
  ErrorMetrics m;
  m.e_r = RotationDistance(extrinsic.rotation(), truth.extrinsic.rotation());
  m.e_t = (extrinsic.translation() - truth.extrinsic.translation()).norm();
  m.e_tau = tau - truth.time_lag;
  return m;
}

ErrorReport Summarize(std::vector<ErrorMetrics> trials, int failures) {
  ErrorReport r;
  r.trials = std::move(trials);
  r.failures = failures;
  const auto n = static_cast<double>(r.trials.size());
  if (r.trials.empty()) return r;
  for (const auto& m : r.trials) {
    r.mean_e_r += m.e_r / n;
    r.mean_e_t += m.e_t / n;
    r.mean_e_tau += m.e_tau / n;
    r.mean_abs_e_tau += std::abs(m.e_tau) / n;
  }
  for (const auto& m : r.trials) {
    r.var_e_r += (m.e_r - r.mean_e_r) * (m.e_r - r.mean_e_r) / n;
    r.var_e_t += (m.e_t - r.mean_e_t) * (m.e_t - r.mean_e_t) / n;
    r.var_e_tau += (m.e_tau - r.mean_e_tau) * (m.e_tau - r.mean_e_tau) / n;
  }
  return r;
}

std::string FormatTableRow(const ErrorReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "e_r %.2f (%.2f) | e_t %.3f (%.3f) | e_tau %.2f (%.2f)",
                r.mean_e_r * 1e3, r.var_e_r * 1e6, r.mean_e_t, r.var_e_t,
                r.mean_e_tau * 1e3, r.var_e_tau * 1e6);
  return buf;
}

std::vector<MotionSweepCell> SweepMotionExcitation(
    std::span<const double> levels_deg, std::span<const int> samples,
    std::span<const double> noise_levels, int trials, std::uint64_t seed) {
  std::vector<MotionSweepCell> cells;
  for (double noise : noise_levels) {
    for (int count : samples) {
      for (double level : levels_deg) {
        MotionSweepCell cell{level, count, noise, 0.0, trials};
        const double angle = level * M_PI / 180.0;
        double sum = 0.0;
        for (int trial = 0; trial < trials; ++trial) {
          // Same trial stream for every cell so cells differ only in the
          // swept parameter.
          std::mt19937_64 rng(TrialSeed(seed, static_cast<std::uint64_t>(trial)));
          const Rotation truth = RandomRotation(rng);
          std::vector<RelativePosePair> pairs;
          for (int i = 0; i < count; ++i) {
            const Rotation lidar_rel =
                Rotation::Exp(angle * RandomUnitVector(rng));
            const Rotation camera_rel = truth.inverse() * lidar_rel * truth;
            const Eigen::Vector3d nl = GaussianVector(rng, noise);
            const Eigen::Vector3d nc = GaussianVector(rng, noise);
            RelativePosePair pair;
            pair.lidar_rel = Pose(Rotation::Exp(lidar_rel.Log() + nl),
                                  Eigen::Vector3d::Zero());
            pair.camera_rel = Pose(Rotation::Exp(camera_rel.Log() + nc),
                                   Eigen::Vector3d::Zero());
            pairs.push_back(pair);
          }
          double error = M_PI;
          try {
            error = RotationDistance(SolveRotation(pairs).rotation, truth);
          } catch (const Error&) {
            // Degenerate draw counts as a maximal error.
          }
          sum += error;
        }
        cell.mean_error = trials > 0 ? sum / trials : 0.0;
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

namespace {

CoarseResult PerturbedGuess(const GroundTruth& truth,
                            const Perturbation& perturbation,
                            std::mt19937_64& rng, double tau) {
  const Eigen::Vector3d dr = GaussianVector(rng, perturbation.rotation_sigma);
  const Eigen::Vector3d dt = GaussianVector(rng, perturbation.translation_sigma);
  CoarseResult guess;
  guess.extrinsic =
      Pose(truth.extrinsic.rotation() * Rotation::Exp(dr),
           truth.extrinsic.translation() + dt);
  guess.time_offset = tau;
  guess.scale = truth.scale;
  return guess;
}

}  // namespace

std::vector<FrameSweepRow> SweepFrames(const Scenario& base,
                                       std::span<const int> keyframe_counts,
                                       int trials, std::uint64_t seed,
                                       const RefineConfig& refine,
                                       const Perturbation& perturbation,
                                       double max_true_lag) {
  std::vector<std::vector<ErrorMetrics>> metrics(keyframe_counts.size());
  std::vector<int> failures(keyframe_counts.size(), 0);
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(TrialSeed(seed, static_cast<std::uint64_t>(trial)));
    std::uniform_real_distribution<double> lag(-max_true_lag, max_true_lag);
    Scenario scenario = base;
    scenario.seed = rng();
    scenario.time_lag = lag(rng);
    const CoarseResult guess = PerturbedGuess(
        GroundTruth{scenario.extrinsic, scenario.time_lag, 1.0}, perturbation,
        rng, 0.0);
    const SimulatedDataset data = GenerateScenario(scenario);
    for (std::size_t c = 0; c < keyframe_counts.size(); ++c) {
      RefineConfig config = refine;
      config.keyframes = keyframe_counts[c];
      try {
        const RefineResult result =
            RefineCalibration(guess, data.camera_poses, data.tracks,
                              data.frame_times, data.lidar, data.intrinsics,
                              config);
        metrics[c].push_back(Evaluate(result.extrinsic, result.tau, data.truth));
      } catch (const Error&) {
        ++failures[c];
      }
    }
  }
  std::vector<FrameSweepRow> rows;
  for (std::size_t c = 0; c < keyframe_counts.size(); ++c) {
    rows.push_back({keyframe_counts[c], Summarize(std::move(metrics[c]), failures[c])});
  }
  return rows;
}

std::vector<LagSweepRow> SweepCoarseSyncError(const Scenario& base,
                                              std::span<const double> injected,
                                              int trials, std::uint64_t seed,
                                              const CoarseConfig& coarse,
                                              const RefineConfig* refine) {
  std::vector<std::vector<ErrorMetrics>> coarse_metrics(injected.size());
  std::vector<std::vector<ErrorMetrics>> refined_metrics(injected.size());
  std::vector<int> coarse_failures(injected.size(), 0);
  std::vector<int> refined_failures(injected.size(), 0);
  for (int trial = 0; trial < trials; ++trial) {
    Scenario scenario = base;
    scenario.seed = TrialSeed(seed, static_cast<std::uint64_t>(trial));
    const SimulatedDataset data = GenerateScenario(scenario);
    for (std::size_t i = 0; i < injected.size(); ++i) {
      CoarseConfig config = coarse;
      config.time_offset = data.truth.time_lag + injected[i];
      CoarseResult result;
      try {
        result = CoarseCalibrate(data.lidar, data.camera_poses, MotionSignal{},
                                 config);
      } catch (const Error&) {
        ++coarse_failures[i];
        if (refine != nullptr) ++refined_failures[i];
        continue;
      }
      coarse_metrics[i].push_back(
          Evaluate(result.extrinsic, result.time_offset, data.truth));
      if (refine == nullptr) continue;
      try {
        const RefineResult refined =
            RefineCalibration(result, data.camera_poses, data.tracks,
                              data.frame_times, data.lidar, data.intrinsics,
                              *refine);
        refined_metrics[i].push_back(
            Evaluate(refined.extrinsic, refined.tau, data.truth));
      } catch (const Error&) {
        ++refined_failures[i];
      }
    }
  }
  std::vector<LagSweepRow> rows;
  for (std::size_t i = 0; i < injected.size(); ++i) {
    rows.push_back({injected[i],
                    Summarize(std::move(coarse_metrics[i]), coarse_failures[i]),
                    Summarize(std::move(refined_metrics[i]), refined_failures[i])});
  }
  return rows;
}

std::vector<LagSweepRow> SweepRefineLag(const Scenario& base,
                                        std::span<const double> injected,
                                        int trials, std::uint64_t seed,
                                        const RefineConfig& refine,
                                        const Perturbation& perturbation) {
  std::vector<std::vector<ErrorMetrics>> metrics(injected.size());
  std::vector<int> failures(injected.size(), 0);
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(TrialSeed(seed, static_cast<std::uint64_t>(trial)));
    const std::uint64_t scenario_seed = rng();
    const CoarseResult guess = PerturbedGuess(
        GroundTruth{base.extrinsic, 0.0, 1.0}, perturbation, rng, 0.0);
    for (std::size_t i = 0; i < injected.size(); ++i) {
      Scenario scenario = base;
      scenario.seed = scenario_seed;
      scenario.time_lag = injected[i];
      try {
        const SimulatedDataset data = GenerateScenario(scenario);
        const RefineResult result =
            RefineCalibration(guess, data.camera_poses, data.tracks,
                              data.frame_times, data.lidar, data.intrinsics,
                              refine);
        metrics[i].push_back(Evaluate(result.extrinsic, result.tau, data.truth));
      } catch (const Error&) {
        ++failures[i];
      }
    }
  }
  std::vector<LagSweepRow> rows;
  for (std::size_t i = 0; i < injected.size(); ++i) {
    rows.push_back({injected[i], ErrorReport{},
                    Summarize(std::move(metrics[i]), failures[i])});
  }
  return rows;
}

}  // namespace ctcalib
