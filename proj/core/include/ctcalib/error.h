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

#ifndef CTCALIB_ERROR_H_
#define CTCALIB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctcalib {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateRotation,
  kOutOfRange,
  kOnsetNotFound,
  kInsufficientExcitation,
  kDegenerateMotion,
  kUnobservableTranslation,
  kScaleSign,
  kLowParallax,
  kCheirality,
  kNoConstraints,
  kUnobservableCore,
  kNonConvergence,
  kTooManyExcluded,
  kScenarioInfeasible,
  kFormat,
  kTooShort,
  kIo,
};

// Pipeline stage an error originated from. kNone for library-level calls.
enum class Stage {
  kNone,
  kRoughSync,
  kPairExtraction,
  kRotation,
  kTranslation,
  kRefineTimeLag,
  kRefineJoint,
  kSimulation,
  kInput,
};

std::string_view ToString(ErrorCode code);
std::string_view ToString(Stage stage);

// Suggested user action for a calibration-stage failure; empty when none.
std::string_view Remedy(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, Stage stage = Stage::kNone)
      : std::runtime_error(message), code_(code), stage_(stage) {}

  ErrorCode code() const { return code_; }
  Stage stage() const { return stage_; }

  // Returns a copy tagged with `stage` unless a stage is already set.
  Error WithStage(Stage stage) const {
    return Error(code_, what(), stage_ == Stage::kNone ? stage : stage_);
  }

 private:
  ErrorCode code_;
  Stage stage_;
};

}  // namespace ctcalib

#endif  // CTCALIB_ERROR_H_
