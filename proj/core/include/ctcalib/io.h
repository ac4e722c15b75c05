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

#ifndef CTCALIB_IO_H_
#define CTCALIB_IO_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctcalib/camera.h"
#include "ctcalib/coarse.h"
#include "ctcalib/refine.h"
#include "ctcalib/sim.h"
#include "ctcalib/trajectory.h"

namespace ctcalib {

// Trajectory text format, one record per line:
//   timestamp tx ty tz qx qy qz qw
// with an optional `# clock: <label>` header. Other `#` lines are comments.
struct TrajectoryRecords {
  std::string clock_id;
  std::vector<StampedPose> poses;
};

// Throws kFormat naming the offending line (bad field count, quaternion norm
// off by more than 1e-3, non-increasing timestamps), kTooShort for fewer than
// two records.
TrajectoryRecords ParseTrajectory(std::istream& in,
                                  const std::string& source = "<stream>");
TrajectoryRecords LoadTrajectoryRecords(const std::string& path);
ContinuousTrajectory LoadTrajectory(const std::string& path);
void WriteTrajectory(std::ostream& out, const std::vector<StampedPose>& poses,
                     const std::string& clock_id);
void SaveTrajectory(const std::string& path,
                    const std::vector<StampedPose>& poses,
                    const std::string& clock_id);

// Track text format: `landmark_id frame_id timestamp u v` per line.
struct TrackData {
  std::vector<FeatureTrack> tracks;  // sorted by landmark id
  FrameTimestamps frame_times;
};

TrackData ParseTracks(std::istream& in, const std::string& source = "<stream>");
TrackData LoadTracks(const std::string& path);
void WriteTracks(std::ostream& out, const std::vector<FeatureTrack>& tracks,
                 const FrameTimestamps& frame_times);
void SaveTracks(const std::string& path, const std::vector<FeatureTrack>& tracks,
                const FrameTimestamps& frame_times);

// Intrinsics text format: one line `fx fy cx cy width height`.
CameraIntrinsics ParseIntrinsics(std::istream& in,
                                 const std::string& source = "<stream>");
CameraIntrinsics LoadIntrinsics(const std::string& path);
void SaveIntrinsics(const std::string& path, const CameraIntrinsics& intrinsics);

void SaveGroundTruth(const std::string& path, const GroundTruth& truth);

struct CalibrationReport {
  std::string mode = "full";  // full | coarse-only | tau-only
  std::optional<CoarseResult> coarse;
  std::optional<RefineResult> refine;
  std::optional<GroundTruth> truth;
  CoarseConfig coarse_config;
  RefineConfig refine_config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;  // role -> path
};

// JSON report. Doubles are written with round-trip precision.
std::string ReportToJson(const CalibrationReport& report);
void SaveReport(const std::string& path, const CalibrationReport& report);

// Final extrinsic stored in a saved report.
Pose LoadReportExtrinsic(const std::string& path);

// CSV experiment tables.
void WriteMotionSweepCsv(std::ostream& out,
                         const std::vector<MotionSweepCell>& cells);
void WriteFrameSweepCsv(std::ostream& out,
                        const std::vector<FrameSweepRow>& rows);
// Coarse columns always; refined columns when `include_refined`.
void WriteLagSweepCsv(std::ostream& out, const std::vector<LagSweepRow>& rows,
                      bool include_refined);
void WriteRefineLagCsv(std::ostream& out, const std::vector<LagSweepRow>& rows);

// Round-trip formatting of a double ("%.17g").
std::string FormatDouble(double v);

}  // namespace ctcalib

#endif  // CTCALIB_IO_H_
