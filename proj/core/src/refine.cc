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

#include "ctcalib/refine.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "ctcalib/reprojection.h"

namespace ctcalib {
namespace {

// Median of the residual norm of a 2D isotropic Gaussian is sigma*sqrt(2 ln 2).
constexpr double kRayleighMedian = 1.1774100225154747;

struct Evaluation {
  NormalEquations system;
  std::vector<LandmarkObservations> landmarks;
  // Per problem track: index into `landmarks`, or -1 when not used.
  std::vector<int> slot;
  int dropped_tracks = 0;
};

class StructurelessProblem {
 public:
  StructurelessProblem(std::vector<LandmarkObservations> tracks,
                       const ContinuousTrajectory& lidar,
                       const CameraIntrinsics& intrinsics,
                       const RefineConfig& config)
      : tracks_(std::move(tracks)),
        lidar_(lidar),
        intrinsics_(intrinsics),
        config_(config) {}

  // Without `previous`, every track is triangulated from scratch and those
  // failing the parallax or cheirality checks are dropped. With `previous`,
  // its landmark set is kept and each landmark is re-optimized starting from
  // its previous position, so the cost varies continuously with the state.
  Evaluation Evaluate(const CalibrationState& state,
                      const Evaluation* previous = nullptr) const {
    const Pose camera_from_lidar = state.camera_from_lidar();
    Evaluation ev;
    ev.slot.assign(tracks_.size(), -1);
    int total = 0;
    int excluded = 0;
    std::vector<Eigen::Vector2d> pixels;
    std::vector<Pose> poses;
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
      const auto& track = tracks_[k];
      if (previous != nullptr && previous->slot[k] < 0) continue;
      LandmarkObservations lm;
      lm.landmark_id = track.landmark_id;
      pixels.clear();
      poses.clear();
      for (const auto& obs : track.observations) {
        ++total;
        if (!lidar_.Contains(obs.frame_time + state.tau)) {
          ++excluded;
          continue;
        }
        lm.observations.push_back(obs);
        pixels.push_back(obs.pixel);
        poses.push_back(CameraPoseInWorld(camera_from_lidar, state.tau,
                                          obs.frame_time, lidar_));
      }
      if (lm.observations.size() < 2) {
        ++ev.dropped_tracks;
        continue;
      }
      Eigen::Vector3d start;
      if (previous != nullptr) {
        start = previous->landmarks[previous->slot[k]].position;
      } else {
        try {
          start = Triangulate(pixels, poses, intrinsics_,
                              config_.min_triangulation_angle)
                      .position;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kLowParallax &&
              e.code() != ErrorCode::kCheirality) {
            throw;
          }
          ++ev.dropped_tracks;
          continue;
        }
      }
      lm.position = PolishLandmark(start, pixels, poses, intrinsics_,
                                   config_.robust);
      ev.slot[k] = static_cast<int>(ev.landmarks.size());
      ev.landmarks.push_back(std::move(lm));
    }
    if (total > 0 &&
        excluded > config_.max_excluded_fraction * static_cast<double>(total)) {
      throw Error(ErrorCode::kTooManyExcluded,
                  std::to_string(excluded) + " of " + std::to_string(total) +
                      " observations fall outside the LiDAR trajectory at "
                      "tau = " + std::to_string(state.tau) + " s");
    }
    if (ev.landmarks.empty()) {
      throw Error(ErrorCode::kNoConstraints,
                  "no feature track could be triangulated");
    }
    ev.system = AssembleNormalEquations(state, ev.landmarks, lidar_,
                                        intrinsics_, config_.robust);
    ev.system.excluded_count = excluded;
    return ev;
  }

  std::vector<double> ResidualNorms(const CalibrationState& state,
                                    const Evaluation& ev) const {
    const Pose camera_from_lidar = state.camera_from_lidar();
    std::vector<double> norms;
    for (const auto& lm : ev.landmarks) {
      for (const auto& obs : lm.observations) {
        const Reprojection rep =
            ReprojectionResidual(camera_from_lidar, state.tau, obs.frame_time,
                                 obs.pixel, lm.position, lidar_, intrinsics_);
        if (rep.valid) norms.push_back(rep.residual.norm());
      }
    }
    return norms;
  }

 private:
  std::vector<LandmarkObservations> tracks_;
  const ContinuousTrajectory& lidar_;
  const CameraIntrinsics& intrinsics_;
  const RefineConfig& config_;
};

CalibrationState Apply(const CalibrationState& state, const CoreVector& delta) {
  CalibrationState next;
  next.xi = LogMap(ExpMap(delta.head<6>()) * ExpMap(state.xi));
  next.tau = state.tau + delta(kTauIndex);
  return next;
}

bool IsRecoverable(const Error& e) {
  return e.code() == ErrorCode::kTooManyExcluded ||
         e.code() == ErrorCode::kNoConstraints ||
         e.code() == ErrorCode::kOutOfRange;
}

double MeanDiagonal(const CoreMatrix& h) {
  return std::max(h.diagonal().cwiseAbs().mean(), 1e-300);
}

void Finalize(const StructurelessProblem& problem,
              const CalibrationState& state, const Evaluation& ev,
              RefineResult& result) {
  result.extrinsic = state.lidar_from_camera();
  result.tau = state.tau;
  result.landmark_count = static_cast<int>(ev.landmarks.size());
  result.residual_count = ev.system.residual_count;
  std::vector<double> norms = problem.ResidualNorms(state, ev);
  if (norms.empty()) return;
  double sum = 0.0;
  for (double n : norms) sum += n;
  result.mean_reprojection_error = sum / static_cast<double>(norms.size());
  std::vector<double> sorted = norms;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  const double sigma = sorted[sorted.size() / 2] / kRayleighMedian;
  const double threshold = 3.0 * sigma;
  const auto inliers = std::count_if(norms.begin(), norms.end(),
                                     [&](double n) { return n <= threshold; });
  result.inlier_ratio =
      static_cast<double>(inliers) / static_cast<double>(norms.size());
}

}  // namespace

std::vector<int> SelectKeyframes(const std::vector<FeatureTrack>& tracks,
                                 const FrameTimestamps& frame_times,
                                 const ContinuousTrajectory& lidar, double tau,
                                 int count) {
  std::set<int> observed;
  for (const auto& track : tracks) {
    for (const auto& obs : track.observations) observed.insert(obs.frame_id);
  }
  std::vector<std::pair<double, int>> candidates;
  for (int id : observed) {
    const auto it = frame_times.find(id);
    if (it == frame_times.end()) continue;
    if (lidar.Contains(it->second + tau)) candidates.emplace_back(it->second, id);
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<int> selected;
  const std::size_t n = candidates.size();
  if (count <= 0 || n == 0) return selected;
  if (n <= static_cast<std::size_t>(count)) {
    for (const auto& c : candidates) selected.push_back(c.second);
    return selected;
  }
  if (count == 1) return {candidates[n / 2].second};
  for (int k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(
        static_cast<double>(k) * static_cast<double>(n - 1) / (count - 1)));
    selected.push_back(candidates[idx].second);
  }
  return selected;
}

RefineResult RefineCalibration(const CoarseResult& initial,
                               const std::vector<StampedPose>& camera_poses,
                               const std::vector<FeatureTrack>& tracks,
                               const FrameTimestamps& frame_times,
                               const ContinuousTrajectory& lidar,
                               const CameraIntrinsics& intrinsics,
                               const RefineConfig& config) {
  intrinsics.Validate();
  CalibrationState state =
      CalibrationState::FromLidarFromCamera(initial.extrinsic, initial.time_offset);
  RefineResult result;

  const std::vector<int> keyframes =
      SelectKeyframes(tracks, frame_times, lidar, state.tau, config.keyframes);
  result.keyframe_count = static_cast<int>(keyframes.size());
  const std::set<int> keyframe_set(keyframes.begin(), keyframes.end());

  std::vector<LandmarkObservations> problem_tracks;
  for (const auto& track : tracks) {
    LandmarkObservations lm;
    lm.landmark_id = track.landmark_id;
    for (const auto& obs : track.observations) {
      if (keyframe_set.count(obs.frame_id) == 0) continue;
      lm.observations.push_back({frame_times.at(obs.frame_id), obs.pixel});
    }
    if (static_cast<int>(lm.observations.size()) >= config.min_track_length) {
      problem_tracks.push_back(std::move(lm));
    }
  }
  if (problem_tracks.empty()) {
    throw Error(ErrorCode::kNoConstraints,
                "no feature track spans " +
                    std::to_string(config.min_track_length) +
                    " keyframes",
                Stage::kRefineTimeLag);
  }
  const StructurelessProblem problem(std::move(problem_tracks), lidar,
                                     intrinsics, config);

  Evaluation current;
  // Time-lag stage: extrinsic and landmarks marginalized, only tau moves.
  try {
    current = problem.Evaluate(state);
    if (config.time_lag_iterations > 0) {
      result.time_lag_cost_history.push_back(current.system.cost);
      double mu = config.initial_damping;
      const double scale =
          MarginalizeLandmarks(current.system).h(kTauIndex, kTauIndex);
      int rejections = 0;
      for (int it = 0; it < config.time_lag_iterations; ++it) {
        const ReducedSystem reduced = MarginalizeLandmarks(current.system);
        const double step = SolveTimeLagOnly(reduced, mu * std::max(scale, 1e-300));
        CalibrationState candidate = state;
        candidate.tau += step;
        bool accepted = false;
        Evaluation next;
        try {
          next = problem.Evaluate(candidate, &current);
          accepted = next.system.cost <= current.system.cost;
        } catch (const Error& e) {
          if (!IsRecoverable(e)) throw;
        }
        if (accepted) {
          const double rel = (current.system.cost - next.system.cost) /
                             std::max(current.system.cost, 1e-300);
          state = candidate;
          current = std::move(next);
          result.time_lag_cost_history.push_back(current.system.cost);
          mu *= config.damping_decrease;
          rejections = 0;
          if (std::abs(step) < config.step_tolerance ||
              rel < config.cost_tolerance) {
            break;
          }
        } else {
          if (std::abs(step) < config.step_tolerance) break;
          mu *= config.damping_increase;
          if (++rejections >= config.max_rejections) break;
        }
      }
    }
  } catch (const Error& e) {
    throw e.WithStage(Stage::kRefineTimeLag);
  }

  if (config.time_lag_only) {
    result.converged = true;
    result.cost_history = result.time_lag_cost_history;
    Finalize(problem, state, current, result);
    return result;
  }

  if (config.reinitialize_extrinsic && config.time_lag_iterations > 0 &&
      !camera_poses.empty()) {
    CoarseConfig coarse = config.coarse;
    coarse.time_offset = state.tau;
    try {
      const CoarseResult reinit =
          CoarseCalibrate(lidar, camera_poses, MotionSignal{}, coarse);
      CalibrationState candidate =
          CalibrationState::FromLidarFromCamera(reinit.extrinsic, state.tau);
      Evaluation ev = problem.Evaluate(candidate);
      state = candidate;
      current = std::move(ev);
    } catch (const Error& e) {
      result.warnings.push_back(
          std::string("closed-form re-initialization skipped: ") + e.what());
    }
  }

  // Joint stage over (xi, tau).
  try {
    result.cost_history.push_back(current.system.cost);
    double mu = config.initial_damping;
    const double scale = MeanDiagonal(MarginalizeLandmarks(current.system).h);
    int rejections = 0;
    for (int it = 0; it < config.max_iterations; ++it) {
      result.iterations = it + 1;
      const ReducedSystem reduced = MarginalizeLandmarks(current.system);
      const CoreVector delta = SolveCore(reduced, mu * scale);
      const double step = delta.cwiseAbs().maxCoeff();
      const CalibrationState candidate = Apply(state, delta);
      bool evaluated = false;
      Evaluation next;
      try {
        next = problem.Evaluate(candidate, &current);
        evaluated = true;
      } catch (const Error& e) {
        if (!IsRecoverable(e)) throw;
      }
      if (evaluated && next.system.cost <= current.system.cost) {
        const double rel = (current.system.cost - next.system.cost) /
                           std::max(current.system.cost, 1e-300);
        state = candidate;
        current = std::move(next);
        result.cost_history.push_back(current.system.cost);
        mu *= config.damping_decrease;
        rejections = 0;
        if (step < config.step_tolerance || rel < config.cost_tolerance) {
          result.converged = true;
          break;
        }
        continue;
      }
      if (step < config.step_tolerance ||
          (evaluated && next.system.cost - current.system.cost <=
                            config.cost_tolerance * current.system.cost)) {
        result.converged = true;
        break;
      }
      mu *= config.damping_increase;
      if (++rejections >= config.max_rejections) {
        Finalize(problem, state, current, result);
        throw NonConvergenceError(
            "joint refinement rejected " + std::to_string(rejections) +
                " consecutive steps",
            result);
      }
    }
  } catch (const NonConvergenceError&) {
    throw;
  } catch (const Error& e) {
    throw e.WithStage(Stage::kRefineJoint);
  }

  Finalize(problem, state, current, result);
  return result;
}

}  // namespace ctcalib
