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

#ifndef CTCALIB_CONFIG_H_
#define CTCALIB_CONFIG_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctcalib/coarse.h"
#include "ctcalib/refine.h"
#include "ctcalib/sim.h"

namespace ctcalib {

// Flat `key = value` settings with dotted namespaces (coarse.*, sync.*,
// refine.*, scenario.*, truth.*). `#` starts a comment.
class Config {
 public:
  Config() = default;

  // Throws kIo when the file cannot be read, kFormat on malformed lines or
  // duplicate keys.
  static Config Load(const std::string& path);
  static Config Parse(const std::string& text,
                      const std::string& source = "<string>");

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  void Set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Typed getters mark the key as consumed; malformed values throw kFormat.
  std::optional<std::string> GetString(const std::string& key) const;
  std::optional<double> GetDouble(const std::string& key) const;
  std::optional<int> GetInt(const std::string& key) const;
  std::optional<bool> GetBool(const std::string& key) const;
  std::optional<std::vector<double>> GetDoubles(const std::string& key,
                                                std::size_t count) const;
  // Whitespace-separated list of any non-zero length.
  std::optional<std::vector<double>> GetDoubleList(const std::string& key) const;

  // Throws kFormat naming the first key with one of `prefixes` that no getter
  // has read.
  void CheckAllConsumed(const std::vector<std::string>& prefixes) const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

// Overlay settings from `config` onto the defaults.
CoarseConfig CoarseConfigFrom(const Config& config);
RefineConfig RefineConfigFrom(const Config& config);
Scenario ScenarioFrom(const Config& config);
// Returns nothing unless truth.extrinsic is present.
std::optional<GroundTruth> GroundTruthFrom(const Config& config);

std::string PoseToString(const Pose& pose);  // "tx ty tz qx qy qz qw"
Pose PoseFromValues(const std::vector<double>& v);

}  // namespace ctcalib

#endif  // CTCALIB_CONFIG_H_
