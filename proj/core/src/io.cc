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

#include "ctcalib/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ctcalib/config.h"
#include "ctcalib/error.h"

namespace ctcalib {
namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "0.3.0";

Error FormatError(const std::string& source, int line, const std::string& what) {
  return Error(ErrorCode::kFormat,
               source + ":" + std::to_string(line) + ": " + what, Stage::kInput);
}

std::ifstream OpenInput(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, std::string("cannot open ") + what + " " + path,
                Stage::kInput);
  }
  return in;
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path, Stage::kInput);
  }
  return out;
}

// Strips comments and whitespace; returns false for blank lines.
bool DataLine(std::string& line) {
  const auto hash = line.find('#');
  if (hash != std::string::npos) line.resize(hash);
  return line.find_first_not_of(" \t\r") != std::string::npos;
}

json PoseJson(const Pose& pose) {
  json j;
  const Eigen::Matrix4d m = pose.matrix();
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  }
  j["matrix"] = rows;
  const Twist xi = LogMap(pose);
  j["twist"] = {xi(0), xi(1), xi(2), xi(3), xi(4), xi(5)};
  const auto& q = pose.rotation().quaternion();
  j["quaternion_xyzw"] = {q.x(), q.y(), q.z(), q.w()};
  j["translation"] = {pose.translation().x(), pose.translation().y(),
                      pose.translation().z()};
  return j;
}

json ErrorsJson(const ErrorMetrics& m) {
  return {{"e_r_rad", m.e_r}, {"e_t_m", m.e_t}, {"e_tau_ms", m.e_tau * 1e3}};
}

std::string KernelName(RobustKernel k) {
  switch (k) {
    case RobustKernel::kNone: return "none";
    case RobustKernel::kHuber: return "huber";
    case RobustKernel::kCauchy: return "cauchy";
  }
  return "unknown";
}

json CoarseConfigJson(const CoarseConfig& c) {
  json j = {{"coarse.pair_count", c.pair_count},
            {"coarse.min_angle", c.min_angle},
            {"coarse.target_excursion", c.target_excursion},
            {"sync.lidar_threshold", c.sync.lidar_threshold},
            {"sync.lidar_hold", c.sync.lidar_hold},
            {"sync.camera_threshold", c.sync.camera_threshold},
            {"sync.camera_hold", c.sync.camera_hold}};
  if (c.time_offset) j["coarse.time_offset"] = *c.time_offset;
  return j;
}

json RefineConfigJson(const RefineConfig& c) {
  return {{"refine.keyframes", c.keyframes},
          {"refine.robust_kernel", KernelName(c.robust.kernel)},
          {"refine.robust_scale", c.robust.scale},
          {"refine.max_iterations", c.max_iterations},
          {"refine.time_lag_iterations", c.time_lag_iterations},
          {"refine.reinitialize_extrinsic", c.reinitialize_extrinsic},
          {"refine.initial_damping", c.initial_damping},
          {"refine.damping_increase", c.damping_increase},
          {"refine.damping_decrease", c.damping_decrease},
          {"refine.max_rejections", c.max_rejections},
          {"refine.step_tolerance", c.step_tolerance},
          {"refine.cost_tolerance", c.cost_tolerance},
          {"refine.min_track_length", c.min_track_length},
          {"refine.min_triangulation_angle_deg",
           c.min_triangulation_angle * 180.0 / M_PI},
          {"refine.max_excluded_fraction", c.max_excluded_fraction}};
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TrajectoryRecords ParseTrajectory(std::istream& in, const std::string& source) {
  TrajectoryRecords records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') {
      const auto pos = line.find("clock:");
      if (pos != std::string::npos) {
        std::istringstream label(line.substr(pos + 6));
        label >> records.clock_id;
      }
      continue;
    }
    if (!DataLine(line)) continue;
    std::istringstream fields(line);
    double v[8];
    for (double& x : v) {
      if (!(fields >> x)) {
        throw FormatError(source, line_no,
                          "expected 'timestamp tx ty tz qx qy qz qw'");
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw FormatError(source, line_no, "unexpected trailing field '" + extra + "'");
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw FormatError(source, line_no, "non-finite value");
    }
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (std::abs(q.norm() - 1.0) > 1e-3) {
      throw FormatError(source, line_no,
                        "quaternion norm " + std::to_string(q.norm()) +
                            " differs from 1 by more than 1e-3");
    }
    if (!records.poses.empty() && !(v[0] > records.poses.back().timestamp)) {
      throw FormatError(source, line_no, "timestamps must be strictly increasing");
    }
    records.poses.push_back(
        {v[0], Pose(Rotation::FromQuaternion(q), Eigen::Vector3d(v[1], v[2], v[3]))});
  }
  if (records.poses.size() < 2) {
    throw Error(ErrorCode::kTooShort,
                source + ": trajectory needs at least two records, found " +
                    std::to_string(records.poses.size()),
                Stage::kInput);
  }
  return records;
}

TrajectoryRecords LoadTrajectoryRecords(const std::string& path) {
  std::ifstream in = OpenInput(path, "trajectory file");
  return ParseTrajectory(in, path);
}

ContinuousTrajectory LoadTrajectory(const std::string& path) {
  TrajectoryRecords records = LoadTrajectoryRecords(path);
  return ContinuousTrajectory(std::move(records.poses),
                              records.clock_id.empty() ? "lidar" : records.clock_id);
}

void WriteTrajectory(std::ostream& out, const std::vector<StampedPose>& poses,
                     const std::string& clock_id) {
  out << "# clock: " << clock_id << "\n";
  out << "# timestamp tx ty tz qx qy qz qw\n";
  for (const auto& p : poses) {
    out << FormatDouble(p.timestamp) << ' ' << PoseToString(p.pose) << '\n';
  }
}

void SaveTrajectory(const std::string& path, const std::vector<StampedPose>& poses,
                    const std::string& clock_id) {
  std::ofstream out = OpenOutput(path);
  WriteTrajectory(out, poses, clock_id);
}

TrackData ParseTracks(std::istream& in, const std::string& source) {
  std::map<int, FeatureTrack> by_landmark;
  std::set<std::pair<int, int>> seen;
  TrackData data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!DataLine(line)) continue;
    std::istringstream fields(line);
    long long landmark = 0;
    long long frame = 0;
    double t = 0.0;
    double u = 0.0;
    double v = 0.0;
    if (!(fields >> landmark >> frame >> t >> u >> v)) {
      throw FormatError(source, line_no,
                        "expected 'landmark_id frame_id timestamp u v'");
    }
    std::string extra;
    if (fields >> extra) {
      throw FormatError(source, line_no, "unexpected trailing field '" + extra + "'");
    }
    if (!std::isfinite(t) || !std::isfinite(u) || !std::isfinite(v)) {
      throw FormatError(source, line_no, "non-finite value");
    }
    const int lm = static_cast<int>(landmark);
    const int fr = static_cast<int>(frame);
    if (!seen.insert({lm, fr}).second) {
      throw FormatError(source, line_no,
                        "duplicate observation of landmark " + std::to_string(lm) +
                            " in frame " + std::to_string(fr));
    }
    const auto [it, inserted] = data.frame_times.emplace(fr, t);
    if (!inserted && std::abs(it->second - t) > 1e-9) {
      throw FormatError(source, line_no,
                        "frame " + std::to_string(fr) +
                            " has inconsistent timestamps");
    }
    auto& track = by_landmark[lm];
    track.landmark_id = lm;
    track.observations.push_back({fr, Eigen::Vector2d(u, v)});
  }
  for (auto& [id, track] : by_landmark) data.tracks.push_back(std::move(track));
  return data;
}

TrackData LoadTracks(const std::string& path) {
  std::ifstream in = OpenInput(path, "track file");
  return ParseTracks(in, path);
}

void WriteTracks(std::ostream& out, const std::vector<FeatureTrack>& tracks,
                 const FrameTimestamps& frame_times) {
  out << "# landmark_id frame_id timestamp u v\n";
  for (const auto& track : tracks) {
    for (const auto& obs : track.observations) {
      out << track.landmark_id << ' ' << obs.frame_id << ' '
          << FormatDouble(frame_times.at(obs.frame_id)) << ' '
          << FormatDouble(obs.pixel.x()) << ' ' << FormatDouble(obs.pixel.y())
          << '\n';
    }
  }
}

void SaveTracks(const std::string& path, const std::vector<FeatureTrack>& tracks,
                const FrameTimestamps& frame_times) {
  std::ofstream out = OpenOutput(path);
  WriteTracks(out, tracks, frame_times);
}

CameraIntrinsics ParseIntrinsics(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!DataLine(line)) continue;
    std::istringstream fields(line);
    CameraIntrinsics k;
    double width = 0.0;
    double height = 0.0;
    if (!(fields >> k.fx >> k.fy >> k.cx >> k.cy >> width >> height)) {
      throw FormatError(source, line_no, "expected 'fx fy cx cy width height'");
    }
    k.width = static_cast<int>(width);
    k.height = static_cast<int>(height);
    try {
      k.Validate();
    } catch (const Error& e) {
      throw FormatError(source, line_no, e.what());
    }
    return k;
  }
  throw Error(ErrorCode::kFormat, source + ": no intrinsics record", Stage::kInput);
}

CameraIntrinsics LoadIntrinsics(const std::string& path) {
  std::ifstream in = OpenInput(path, "intrinsics file");
  return ParseIntrinsics(in, path);
}

void SaveIntrinsics(const std::string& path, const CameraIntrinsics& k) {
  std::ofstream out = OpenOutput(path);
  out << "# fx fy cx cy width height\n"
      << FormatDouble(k.fx) << ' ' << FormatDouble(k.fy) << ' '
      << FormatDouble(k.cx) << ' ' << FormatDouble(k.cy) << ' ' << k.width
      << ' ' << k.height << '\n';
}

void SaveGroundTruth(const std::string& path, const GroundTruth& truth) {
  std::ofstream out = OpenOutput(path);
  out << "# LiDAR-from-camera extrinsic: tx ty tz qx qy qz qw\n"
      << "truth.extrinsic = " << PoseToString(truth.extrinsic) << '\n'
      << "truth.time_lag = " << FormatDouble(truth.time_lag) << '\n'
      << "truth.scale = " << FormatDouble(truth.scale) << '\n';
}

std::string ReportToJson(const CalibrationReport& report) {
  json j;
  j["tool"] = "ctcalib";
  j["version"] = kToolVersion;
  j["mode"] = report.mode;
  j["seed"] = report.seed;
  j["inputs"] = report.inputs;

  std::optional<Pose> final_extrinsic;
  std::optional<double> final_tau;
  if (report.coarse) {
    const CoarseResult& c = *report.coarse;
    j["coarse"] = {{"extrinsic", PoseJson(c.extrinsic)},
                   {"scale", c.scale},
                   {"time_offset_ms", c.time_offset * 1e3},
                   {"rotation_conditioning", c.rotation_conditioning},
                   {"translation_conditioning", c.translation_conditioning},
                   {"pair_count", c.pair_count},
                   {"warnings", c.warnings}};
    final_extrinsic = c.extrinsic;
    final_tau = c.time_offset;
  }
  if (report.refine) {
    const RefineResult& r = *report.refine;
    j["refine"] = {{"extrinsic", PoseJson(r.extrinsic)},
                   {"tau_ms", r.tau * 1e3},
                   {"converged", r.converged},
                   {"iterations", r.iterations},
                   {"keyframes", r.keyframe_count},
                   {"landmarks", r.landmark_count},
                   {"residuals", r.residual_count},
                   {"mean_reprojection_error_px", r.mean_reprojection_error},
                   {"inlier_ratio", r.inlier_ratio},
                   {"time_lag_cost_history", r.time_lag_cost_history},
                   {"cost_history", r.cost_history},
                   {"warnings", r.warnings}};
    final_extrinsic = r.extrinsic;
    final_tau = r.tau;
  }
  if (final_extrinsic) {
    j["result"] = {{"extrinsic", PoseJson(*final_extrinsic)},
                   {"tau_ms", *final_tau * 1e3}};
    if (report.coarse) j["result"]["scale"] = report.coarse->scale;
  }
  if (report.truth) {
    json errors;
    if (report.coarse) {
      errors["coarse"] = ErrorsJson(Evaluate(report.coarse->extrinsic,
                                             report.coarse->time_offset,
                                             *report.truth));
    }
    if (report.refine) {
      errors["refine"] = ErrorsJson(
          Evaluate(report.refine->extrinsic, report.refine->tau, *report.truth));
    }
    j["ground_truth"] = {{"extrinsic", PoseJson(report.truth->extrinsic)},
                         {"time_lag_ms", report.truth->time_lag * 1e3},
                         {"scale", report.truth->scale}};
    j["ground_truth_errors"] = errors;
  }
  json config = CoarseConfigJson(report.coarse_config);
  config.update(RefineConfigJson(report.refine_config));
  j["config"] = config;
  return j.dump(2) + "\n";
}

void SaveReport(const std::string& path, const CalibrationReport& report) {
  std::ofstream out = OpenOutput(path);
  out << ReportToJson(report);
}

Pose LoadReportExtrinsic(const std::string& path) {
  std::ifstream in = OpenInput(path, "report");
  json j;
  try {
    in >> j;
    const auto& e = j.at("result").at("extrinsic");
    const auto q = e.at("quaternion_xyzw").get<std::vector<double>>();
    const auto t = e.at("translation").get<std::vector<double>>();
    if (q.size() != 4 || t.size() != 3) throw std::runtime_error("bad sizes");
    return Pose(Rotation::FromQuaternion(Eigen::Quaterniond(q[3], q[0], q[1], q[2])),
                Eigen::Vector3d(t[0], t[1], t[2]));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kFormat, path + ": malformed report: " + e.what(),
                Stage::kInput);
  }
}

void WriteMotionSweepCsv(std::ostream& out,
                         const std::vector<MotionSweepCell>& cells) {
  out << "noise_rad,samples,excursion_deg,trials,mean_rotation_error_rad\n";
  for (const auto& c : cells) {
    out << FormatDouble(c.noise) << ',' << c.samples << ','
        << FormatDouble(c.level_deg) << ',' << c.trials << ','
        << FormatDouble(c.mean_error) << '\n';
  }
}

namespace {

void WriteReportColumns(std::ostream& out, const ErrorReport& r) {
  out << r.trials.size() << ',' << r.failures << ','
      << FormatDouble(r.mean_e_r) << ',' << FormatDouble(r.var_e_r) << ','
      << FormatDouble(r.mean_e_t) << ',' << FormatDouble(r.var_e_t) << ','
      << FormatDouble(r.mean_e_tau) << ',' << FormatDouble(r.var_e_tau) << ','
      << FormatDouble(r.mean_abs_e_tau);
}

constexpr const char* kReportColumns[] = {
    "trials",   "failures",     "mean_e_r_rad", "var_e_r",          "mean_e_t_m",
    "var_e_t",  "mean_e_tau_s", "var_e_tau",    "mean_abs_e_tau_s"};

std::string ReportHeader(const std::string& prefix = "") {
  std::string header;
  for (const char* column : kReportColumns) {
    if (!header.empty()) header += ',';
    header += prefix + column;
  }
  return header;
}

}  // namespace

void WriteFrameSweepCsv(std::ostream& out, const std::vector<FrameSweepRow>& rows) {
  out << "keyframes," << ReportHeader() << '\n';
  for (const auto& row : rows) {
    out << row.keyframes << ',';
    WriteReportColumns(out, row.report);
    out << '\n';
  }
}

void WriteLagSweepCsv(std::ostream& out, const std::vector<LagSweepRow>& rows,
                      bool include_refined) {
  out << "injected_sync_error_s," << ReportHeader("coarse_");
  if (include_refined) out << ',' << ReportHeader("refined_");
  out << '\n';
  for (const auto& row : rows) {
    out << FormatDouble(row.injected) << ',';
    WriteReportColumns(out, row.coarse);
    if (include_refined) {
      out << ',';
      WriteReportColumns(out, row.refined);
    }
    out << '\n';
  }
}

void WriteRefineLagCsv(std::ostream& out, const std::vector<LagSweepRow>& rows) {
  out << "true_time_lag_s," << ReportHeader() << '\n';
  for (const auto& row : rows) {
    out << FormatDouble(row.injected) << ',';
    WriteReportColumns(out, row.refined);
    out << '\n';
  }
}

}  // namespace ctcalib
