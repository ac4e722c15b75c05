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

#include "ctcalib/coarse.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ctcalib/error.h"

namespace ctcalib {
namespace {

bool PairAngleOk(double angle, double min_angle) {
  return angle >= std::max(min_angle, kMinPairAngle) &&
         angle < M_PI - kMinPairAngle;
}

template <typename Fn>
auto InStage(Stage stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.WithStage(stage);
  }
}

}  // namespace

double DetectMotionOnset(const MotionSignal& signal, double threshold,
                         int hold) {
  if (signal.timestamps.size() != signal.magnitudes.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "motion signal timestamps and magnitudes differ in length");
  }
  if (hold < 1) {
    throw Error(ErrorCode::kInvalidArgument, "hold must be at least 1");
  }
  const std::size_t n = signal.magnitudes.size();
  if (n < static_cast<std::size_t>(hold)) {
    throw Error(ErrorCode::kOnsetNotFound,
                "motion signal shorter than the hold window");
  }
  int run = 0;
  for (std::size_t i = 0; i < n; ++i) {
    run = signal.magnitudes[i] > threshold ? run + 1 : 0;
    if (run == hold) return signal.timestamps[i + 1 - hold];
  }
  throw Error(ErrorCode::kOnsetNotFound,
              "no motion onset above threshold " + std::to_string(threshold));
}

MotionSignal LidarRotationalSpeed(const ContinuousTrajectory& trajectory) {
  MotionSignal signal;
  const auto& knots = trajectory.knots();
  signal.timestamps.reserve(knots.size() - 1);
  signal.magnitudes.reserve(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double dt = knots[i + 1].timestamp - knots[i].timestamp;
    const double angle =
        RotationDistance(knots[i].pose.rotation(), knots[i + 1].pose.rotation());
    signal.timestamps.push_back(knots[i].timestamp);
    signal.magnitudes.push_back(angle / dt);
  }
  return signal;
}

MotionSignal FeatureMotion(const std::vector<FeatureTrack>& tracks,
                           const FrameTimestamps& frame_times) {
  // frame -> (landmark -> pixel)
  std::map<int, std::map<int, Eigen::Vector2d>> by_frame;
  for (const auto& track : tracks) {
    for (const auto& obs : track.observations) {
      by_frame[obs.frame_id][track.landmark_id] = obs.pixel;
    }
  }
  std::vector<std::pair<double, int>> frames;
  frames.reserve(frame_times.size());
  for (const auto& [id, t] : frame_times) frames.emplace_back(t, id);
  std::sort(frames.begin(), frames.end());

  MotionSignal signal;
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const auto& a = by_frame[frames[k].second];
    const auto& b = by_frame[frames[k + 1].second];
    double sum = 0.0;
    int count = 0;
    for (const auto& [landmark, pixel] : a) {
      const auto it = b.find(landmark);
      if (it == b.end()) continue;
      sum += (it->second - pixel).norm();
      ++count;
    }
    signal.timestamps.push_back(frames[k].first);
    signal.magnitudes.push_back(count > 0 ? sum / count : 0.0);
  }
  return signal;
}

SyncResult DetectSync(const ContinuousTrajectory& lidar,
                      const MotionSignal& camera_motion,
                      const SyncConfig& config) {
  SyncResult result;
  result.lidar_onset = DetectMotionOnset(LidarRotationalSpeed(lidar),
                                         config.lidar_threshold,
                                         config.lidar_hold);
  result.camera_onset = DetectMotionOnset(
      camera_motion, config.camera_threshold, config.camera_hold);
  result.offset = result.lidar_onset - result.camera_onset;
  return result;
}

double RoughSync(const ContinuousTrajectory& lidar,
                 const MotionSignal& camera_motion, const SyncConfig& config) {
  return DetectSync(lidar, camera_motion, config).offset;
}

std::vector<RelativePosePair> ExtractPairs(
    const ContinuousTrajectory& lidar,
    const std::vector<StampedPose>& camera_poses, int count, double min_angle,
    double time_offset, double window_start) {
  if (count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "pair count must be positive");
  }
  std::vector<const StampedPose*> frames;
  for (const auto& p : camera_poses) {
    if (p.timestamp >= window_start && lidar.Contains(p.timestamp + time_offset)) {
      frames.push_back(&p);
    }
  }
  std::sort(frames.begin(), frames.end(),
            [](const StampedPose* a, const StampedPose* b) {
              return a->timestamp < b->timestamp;
            });

  auto make_pair = [&](const StampedPose& a,
                       const StampedPose& b) -> std::optional<RelativePosePair> {
    RelativePosePair pair;
    pair.camera_rel = RelativePose(a.pose, b.pose);
    pair.lidar_rel = RelativePose(lidar.Interpolate(a.timestamp + time_offset),
                                  lidar.Interpolate(b.timestamp + time_offset));
    pair.t_begin = a.timestamp;
    pair.t_end = b.timestamp;
    if (!PairAngleOk(pair.camera_rel.rotation().angle(), min_angle) ||
        !PairAngleOk(pair.lidar_rel.rotation().angle(), min_angle)) {
      return std::nullopt;
    }
    return pair;
  };

  std::vector<RelativePosePair> pairs;
  if (frames.size() >= 2) {
    // Evenly spaced keyframes; each pair spans two consecutive keyframes.
    const std::size_t n = frames.size();
    const std::size_t spans = std::min<std::size_t>(count, n - 1);
    std::size_t prev = 0;
    for (std::size_t k = 1; k <= spans; ++k) {
      const auto next = static_cast<std::size_t>(
          std::llround(static_cast<double>(k) * (n - 1) / spans));
      if (next == prev) continue;
      if (auto pair = make_pair(*frames[prev], *frames[next])) {
        pairs.push_back(*pair);
      }
      prev = next;
    }
    if (pairs.size() < 3) {
      // Not enough motion per span: chain frames greedily until each span
      // accumulates min_angle.
      std::vector<RelativePosePair> chained;
      std::size_t anchor = 0;
      for (std::size_t j = 1; j < n; ++j) {
        const double cam_angle = RelativePose(frames[anchor]->pose,
                                              frames[j]->pose)
                                     .rotation()
                                     .angle();
        if (cam_angle < min_angle) continue;
        if (auto pair = make_pair(*frames[anchor], *frames[j])) {
          chained.push_back(*pair);
        }
        anchor = j;
      }
      if (chained.size() > pairs.size()) {
        if (chained.size() > static_cast<std::size_t>(count)) {
          std::vector<RelativePosePair> spread;
          for (int k = 0; k < count; ++k) {
            spread.push_back(chained[static_cast<std::size_t>(k) *
                                     chained.size() / count]);
          }
          chained = std::move(spread);
        }
        pairs = std::move(chained);
      }
    }
  }
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kInsufficientExcitation,
                "only " + std::to_string(pairs.size()) +
                    " relative pose pairs reach the minimum rotation of " +
                    std::to_string(min_angle) + " rad; at least 3 are needed");
  }
  return pairs;
}

RotationSolution SolveRotation(std::span<const RelativePosePair> pairs) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kInsufficientExcitation,
                "rotation solve needs at least 3 pairs");
  }
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& pair : pairs) {
    m += pair.lidar_rel.rotation().Log() *
         pair.camera_rel.rotation().Log().transpose();
  }
  // Eigenvalues of M^T M are the squared singular values of M (ascending).
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m.transpose() * m);
  const Eigen::Vector3d sv = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  RotationSolution solution;
  solution.conditioning = sv(2) > 0.0 ? sv(0) / sv(2) : 0.0;
  if (!(sv(0) >= 1e-6 * sv(2)) || sv(2) == 0.0) {
    throw Error(ErrorCode::kDegenerateMotion,
                "relative rotation axes do not span 3D (sigma_min/sigma_max = " +
                    std::to_string(solution.conditioning) + ")");
  }
  // With r_L = R r_C, M = R C for symmetric C = sum r_C r_C^T, hence
  // R = M (M^T M)^{-1/2}.
  const Eigen::Vector3d inv_sqrt =
      eig.eigenvalues().cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
  const Eigen::Matrix3d r = m * eig.eigenvectors() * inv_sqrt.asDiagonal() *
                            eig.eigenvectors().transpose();
  solution.rotation = Rotation::ProjectFromMatrix(r);
  return solution;
}

TranslationScaleSolution SolveTranslationScale(
    std::span<const RelativePosePair> pairs, const Rotation& rotation) {
  if (pairs.size() < 2) {
    throw Error(ErrorCode::kUnobservableTranslation,
                "translation and scale need at least 2 pairs");
  }
  const auto rows = static_cast<Eigen::Index>(3 * pairs.size());
  Eigen::MatrixXd a(rows, 4);
  Eigen::VectorXd b(rows);
  const Eigen::Matrix3d r = rotation.matrix();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(3 * i);
    a.block<3, 3>(row, 0) =
        Eigen::Matrix3d::Identity() - pairs[i].lidar_rel.rotation().matrix();
    a.block<3, 1>(row, 3) = r * pairs[i].camera_rel.translation();
    b.segment<3>(row) = pairs[i].lidar_rel.translation();
  }
  const Eigen::Vector4d norms = a.colwise().norm().transpose();
  if ((norms.array() == 0.0).any()) {
    throw Error(ErrorCode::kUnobservableTranslation,
                "stacked translation system has a zero column");
  }
  const Eigen::Vector4d col_scale = norms.cwiseInverse();
  const Eigen::MatrixXd scaled = a * col_scale.asDiagonal();

  TranslationScaleSolution solution;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  const Eigen::Vector4d sv = svd.singularValues();
  solution.conditioning = sv(3) / sv(0);
  if (!(solution.conditioning >= 1e-8)) {
    throw Error(ErrorCode::kUnobservableTranslation,
                "translation/scale system is rank deficient (sigma_min/sigma_max "
                "= " + std::to_string(solution.conditioning) + ")");
  }
  const Eigen::Vector4d y = scaled.colPivHouseholderQr().solve(b);
  const Eigen::Vector4d x = col_scale.asDiagonal() * y;
  solution.translation = x.head<3>();
  solution.scale = x(3);
  if (!(solution.scale > 0.0)) {
    throw Error(ErrorCode::kScaleSign,
                "estimated monocular scale is not positive (" +
                    std::to_string(solution.scale) + ")");
  }
  return solution;
}

CoarseResult CoarseCalibrate(const ContinuousTrajectory& lidar,
                             const std::vector<StampedPose>& camera_poses,
                             const MotionSignal& camera_motion,
                             const CoarseConfig& config) {
  CoarseResult result;
  double window_start = -std::numeric_limits<double>::infinity();
  if (config.time_offset) {
    result.time_offset = *config.time_offset;
  } else {
    const SyncResult sync = InStage(Stage::kRoughSync, [&] {
      return DetectSync(lidar, camera_motion, config.sync);
    });
    result.time_offset = sync.offset;
    window_start = sync.camera_onset;
  }

  const auto pairs = InStage(Stage::kPairExtraction, [&] {
    return ExtractPairs(lidar, camera_poses, config.pair_count,
                        config.min_angle, result.time_offset, window_start);
  });
  result.pair_count = static_cast<int>(pairs.size());
  if (pairs.size() < 4) {
    result.warnings.push_back("only " + std::to_string(pairs.size()) +
                              " relative pose pairs; 4 or more recommended");
  }
  double max_angle = 0.0;
  for (const auto& p : pairs) {
    max_angle = std::max(max_angle, p.lidar_rel.rotation().angle());
  }
  if (max_angle < config.target_excursion) {
    result.warnings.push_back(
        "largest pair rotation " + std::to_string(max_angle) +
        " rad is below the recommended excursion of " +
        std::to_string(config.target_excursion) + " rad");
  }

  const RotationSolution rot =
      InStage(Stage::kRotation, [&] { return SolveRotation(pairs); });
  const TranslationScaleSolution trans = InStage(Stage::kTranslation, [&] {
    return SolveTranslationScale(pairs, rot.rotation);
  });
  result.extrinsic = Pose(rot.rotation, trans.translation);
  result.scale = trans.scale;
  result.rotation_conditioning = rot.conditioning;
  result.translation_conditioning = trans.conditioning;
  return result;
}

}  // namespace ctcalib
