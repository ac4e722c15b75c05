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

#include "ctcalib/config.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctcalib/error.h"

namespace ctcalib {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

Error BadValue(const std::string& key, const std::string& value,
               const char* expected) {
  return Error(ErrorCode::kFormat, "config key '" + key + "': expected " +
                                       expected + ", got '" + value + "'");
}

}  // namespace

Config Config::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str(), path);
}

Config Config::Parse(const std::string& text, const std::string& source) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kFormat, source + ":" + std::to_string(line_no) +
                                          ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::kFormat,
                  source + ":" + std::to_string(line_no) + ": empty key");
    }
    if (config.values_.count(key) > 0) {
      throw Error(ErrorCode::kFormat, source + ":" + std::to_string(line_no) +
                                          ": duplicate key '" + key + "'");
    }
    config.values_[key] = value;
  }
  return config;
}

std::optional<std::string> Config::GetString(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  consumed_.insert(key);
  return it->second;
}

std::optional<double> Config::GetDouble(const std::string& key) const {
  const auto s = GetString(key);
  if (!s) return std::nullopt;
  std::istringstream in(*s);
  double v = 0.0;
  std::string rest;
  if (!(in >> v) || (in >> rest) || !std::isfinite(v)) {
    throw BadValue(key, *s, "a finite number");
  }
  return v;
}

std::optional<int> Config::GetInt(const std::string& key) const {
  const auto s = GetString(key);
  if (!s) return std::nullopt;
  std::istringstream in(*s);
  long long v = 0;
  std::string rest;
  if (!(in >> v) || (in >> rest)) throw BadValue(key, *s, "an integer");
  return static_cast<int>(v);
}

std::optional<bool> Config::GetBool(const std::string& key) const {
  const auto s = GetString(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes") return true;
  if (*s == "false" || *s == "0" || *s == "no") return false;
  throw BadValue(key, *s, "true or false");
}

std::optional<std::vector<double>> Config::GetDoubles(const std::string& key,
                                                      std::size_t count) const {
  const auto s = GetString(key);
  if (!s) return std::nullopt;
  std::istringstream in(*s);
  std::vector<double> v;
  double x = 0.0;
  while (in >> x) v.push_back(x);
  if (!in.eof() || v.size() != count) {
    throw BadValue(key, *s,
                   (std::to_string(count) + " numbers").c_str());
  }
  return v;
}

std::optional<std::vector<double>> Config::GetDoubleList(
    const std::string& key) const {
  const auto s = GetString(key);
  if (!s) return std::nullopt;
  std::istringstream in(*s);
  std::vector<double> v;
  double x = 0.0;
  while (in >> x) v.push_back(x);
  if (!in.eof() || v.empty()) throw BadValue(key, *s, "a list of numbers");
  return v;
}

void Config::CheckAllConsumed(const std::vector<std::string>& prefixes) const {
  for (const auto& [key, value] : values_) {
    if (consumed_.count(key) > 0) continue;
    for (const auto& prefix : prefixes) {
      if (key.rfind(prefix, 0) == 0) {
        throw Error(ErrorCode::kFormat, "unknown config key '" + key + "'");
      }
    }
  }
}

CoarseConfig CoarseConfigFrom(const Config& c) {
  CoarseConfig out;
  if (auto v = c.GetInt("coarse.pair_count")) out.pair_count = *v;
  if (auto v = c.GetDouble("coarse.min_angle")) out.min_angle = *v;
  if (auto v = c.GetDouble("coarse.target_excursion")) out.target_excursion = *v;
  if (auto v = c.GetDouble("coarse.time_offset")) out.time_offset = *v;
  if (auto v = c.GetDouble("sync.lidar_threshold")) out.sync.lidar_threshold = *v;
  if (auto v = c.GetInt("sync.lidar_hold")) out.sync.lidar_hold = *v;
  if (auto v = c.GetDouble("sync.camera_threshold")) out.sync.camera_threshold = *v;
  if (auto v = c.GetInt("sync.camera_hold")) out.sync.camera_hold = *v;
  return out;
}

RefineConfig RefineConfigFrom(const Config& c) {
  RefineConfig out;
  out.coarse = CoarseConfigFrom(c);
  if (auto v = c.GetInt("refine.keyframes")) out.keyframes = *v;
  if (auto v = c.GetString("refine.robust_kernel")) {
    if (*v == "huber") {
      out.robust.kernel = RobustKernel::kHuber;
    } else if (*v == "cauchy") {
      out.robust.kernel = RobustKernel::kCauchy;
    } else if (*v == "none") {
      out.robust.kernel = RobustKernel::kNone;
    } else {
      throw BadValue("refine.robust_kernel", *v, "huber, cauchy or none");
    }
  }
  if (auto v = c.GetDouble("refine.robust_scale")) {
    if (!(*v > 0.0)) throw BadValue("refine.robust_scale", std::to_string(*v), "a positive scale");
    out.robust.scale = *v;
  }
  if (auto v = c.GetInt("refine.max_iterations")) out.max_iterations = *v;
  if (auto v = c.GetInt("refine.time_lag_iterations")) out.time_lag_iterations = *v;
  if (auto v = c.GetBool("refine.reinitialize_extrinsic")) out.reinitialize_extrinsic = *v;
  if (auto v = c.GetDouble("refine.initial_damping")) out.initial_damping = *v;
  if (auto v = c.GetDouble("refine.damping_increase")) out.damping_increase = *v;
  if (auto v = c.GetDouble("refine.damping_decrease")) out.damping_decrease = *v;
  if (auto v = c.GetInt("refine.max_rejections")) out.max_rejections = *v;
  if (auto v = c.GetDouble("refine.step_tolerance")) out.step_tolerance = *v;
  if (auto v = c.GetDouble("refine.cost_tolerance")) out.cost_tolerance = *v;
  if (auto v = c.GetInt("refine.min_track_length")) out.min_track_length = *v;
  if (auto v = c.GetDouble("refine.min_triangulation_angle_deg")) {
    out.min_triangulation_angle = *v * M_PI / 180.0;
  }
  if (auto v = c.GetDouble("refine.max_excluded_fraction")) out.max_excluded_fraction = *v;
  return out;
}

Pose PoseFromValues(const std::vector<double>& v) {
  if (v.size() != 7) {
    throw Error(ErrorCode::kFormat, "pose needs 7 values: tx ty tz qx qy qz qw");
  }
  const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  if (std::abs(q.norm() - 1.0) > 1e-3) {
    throw Error(ErrorCode::kFormat, "pose quaternion is not unit norm");
  }
  return Pose(Rotation::FromQuaternion(q), Eigen::Vector3d(v[0], v[1], v[2]));
}

std::string PoseToString(const Pose& pose) {
  const auto& t = pose.translation();
  const auto& q = pose.rotation().quaternion();
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g",
                t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
  return buf;
}

Scenario ScenarioFrom(const Config& c) {
  Scenario s;
  if (auto v = c.GetString("scenario.profile")) s.profile = ParseTrajectoryProfile(*v);
  if (auto v = c.GetDouble("scenario.duration")) s.duration = *v;
  if (auto v = c.GetDouble("scenario.lidar_rate")) s.lidar_rate = *v;
  if (auto v = c.GetDouble("scenario.camera_rate")) s.camera_rate = *v;
  if (auto v = c.GetDoubles("scenario.extrinsic", 7)) s.extrinsic = PoseFromValues(*v);
  if (auto v = c.GetDouble("scenario.time_lag")) s.time_lag = *v;
  if (auto v = c.GetDouble("scenario.pixel_noise")) s.pixel_noise = *v;
  if (auto v = c.GetDouble("scenario.rotation_noise")) s.rotation_noise = *v;
  if (auto v = c.GetInt("scenario.landmark_count")) s.landmark_count = *v;
  if (auto v = c.GetDouble("scenario.landmark_radius")) s.landmark_radius = *v;
  if (auto v = c.GetDouble("scenario.landmark_min_distance")) s.landmark_min_distance = *v;
  if (auto v = c.GetDouble("scenario.rotation_amplitude")) s.rotation_amplitude = *v;
  if (auto v = c.GetDouble("scenario.translation_amplitude")) s.translation_amplitude = *v;
  if (auto v = c.GetDouble("scenario.min_period")) s.min_period = *v;
  if (auto v = c.GetDouble("scenario.max_period")) s.max_period = *v;
  if (auto v = c.GetDouble("scenario.onset_time")) s.onset_time = *v;
  if (auto v = c.GetDouble("scenario.camera_scale")) s.camera_scale = *v;
  if (auto v = c.GetDouble("scenario.lidar_padding")) s.lidar_padding = *v;
  if (auto v = c.GetDoubles("scenario.intrinsics", 6)) {
    s.intrinsics = CameraIntrinsics{(*v)[0], (*v)[1], (*v)[2], (*v)[3],
                                    static_cast<int>((*v)[4]),
                                    static_cast<int>((*v)[5])};
  }
  if (auto v = c.GetInt("scenario.seed")) s.seed = static_cast<std::uint64_t>(*v);
  s.Validate();
  return s;
}

std::optional<GroundTruth> GroundTruthFrom(const Config& c) {
  const auto extrinsic = c.GetDoubles("truth.extrinsic", 7);
  if (!extrinsic) return std::nullopt;
  GroundTruth truth;
  truth.extrinsic = PoseFromValues(*extrinsic);
  if (auto v = c.GetDouble("truth.time_lag")) truth.time_lag = *v;
  if (auto v = c.GetDouble("truth.scale")) truth.scale = *v;
  return truth;
}

}  // namespace ctcalib
