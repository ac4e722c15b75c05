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

#include "ctcalib/error.h"

namespace ctcalib {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateRotation: return "degenerate-rotation";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kOnsetNotFound: return "onset-not-found";
    case ErrorCode::kInsufficientExcitation: return "insufficient-excitation";
    case ErrorCode::kDegenerateMotion: return "degenerate-motion";
    case ErrorCode::kUnobservableTranslation: return "unobservable-translation";
    case ErrorCode::kScaleSign: return "scale-sign";
    case ErrorCode::kLowParallax: return "low-parallax";
    case ErrorCode::kCheirality: return "cheirality";
    case ErrorCode::kNoConstraints: return "no-constraints";
    case ErrorCode::kUnobservableCore: return "unobservable-core";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kTooManyExcluded: return "too-many-excluded";
    case ErrorCode::kScenarioInfeasible: return "scenario-infeasible";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kTooShort: return "too-short";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::string_view ToString(Stage stage) {
  switch (stage) {
    case Stage::kNone: return "none";
    case Stage::kRoughSync: return "rough-sync";
    case Stage::kPairExtraction: return "pair-extraction";
    case Stage::kRotation: return "rotation";
    case Stage::kTranslation: return "translation";
    case Stage::kRefineTimeLag: return "refine-time-lag";
    case Stage::kRefineJoint: return "refine-joint";
    case Stage::kSimulation: return "simulation";
    case Stage::kInput: return "input";
  }
  return "unknown";
}

std::string_view Remedy(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOnsetNotFound:
      return "no motion start detected: record a stationary period followed "
             "by deliberate motion, or set coarse.time_offset";
    case ErrorCode::kInsufficientExcitation:
    case ErrorCode::kDegenerateMotion:
      return "insufficient rotational excitation: add roll/pitch/yaw motion";
    case ErrorCode::kUnobservableTranslation:
      return "translation unobservable: rotate about several axes while "
             "translating";
    case ErrorCode::kScaleSign:
      return "negative monocular scale: check the time offset and that both "
             "trajectories describe the same motion";
    case ErrorCode::kUnobservableCore:
      return "extrinsic/time lag unobservable: the platform must move during "
             "the selected keyframes";
    case ErrorCode::kNoConstraints:
      return "no usable feature observations: check tracks and intrinsics";
    case ErrorCode::kTooManyExcluded:
      return "time lag pushes too many frames outside the LiDAR trajectory: "
             "extend the LiDAR trajectory or fix the initial time offset";
    case ErrorCode::kNonConvergence:
      return "refinement diverged: improve the initial guess";
    default:
      return "";
  }
}

}  // namespace ctcalib
