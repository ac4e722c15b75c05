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

// Command-line front end: calibration of recorded data and simulation
// experiments.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ctcalib/coarse.h"
#include "ctcalib/config.h"
#include "ctcalib/error.h"
#include "ctcalib/io.h"
#include "ctcalib/refine.h"
#include "ctcalib/sim.h"

namespace {

using namespace ctcalib;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitCalibration = 2;

bool IsInputError(const Error& e) {
  return e.code() == ErrorCode::kIo || e.code() == ErrorCode::kFormat ||
         e.stage() == Stage::kInput;
}

int Report(const Error& e) {
  if (IsInputError(e)) {
    std::cerr << "ctcalib: " << ToString(e.code()) << ": " << e.what() << "\n";
    return kExitIo;
  }
  std::cerr << "ctcalib: " << ToString(e.stage()) << " stage failed ("
            << ToString(e.code()) << "): " << e.what() << "\n";
  const auto remedy = Remedy(e.code());
  if (!remedy.empty()) std::cerr << "remedy: " << remedy << "\n";
  return kExitCalibration;
}

Config LoadConfig(const std::string& path) {
  return path.empty() ? Config() : Config::Load(path);
}

std::ofstream OpenCsv(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path, Stage::kInput);
  return out;
}

// --- calibrate ---

struct CalibrateArgs {
  std::string lidar_traj, camera_traj, tracks, intrinsics, config, out;
  std::string ground_truth;
  bool coarse_only = false;
  bool tau_only = false;
  std::uint64_t seed = 0;
};

int RunCalibrate(const CalibrateArgs& args) {
  CalibrationReport report;
  report.seed = args.seed;
  report.mode = args.coarse_only ? "coarse-only" : args.tau_only ? "tau-only" : "full";
  report.inputs = {{"lidar_trajectory", args.lidar_traj},
                   {"camera_trajectory", args.camera_traj},
                   {"tracks", args.tracks},
                   {"intrinsics", args.intrinsics},
                   {"config", args.config}};

  ContinuousTrajectory lidar = [&] {
    const Config config = LoadConfig(args.config);
    report.coarse_config = CoarseConfigFrom(config);
    report.refine_config = RefineConfigFrom(config);
    report.refine_config.coarse = report.coarse_config;
    report.truth = GroundTruthFrom(config);
    config.CheckAllConsumed({"coarse.", "sync.", "refine.", "truth."});
    if (!args.ground_truth.empty()) {
      const Config truth = Config::Load(args.ground_truth);
      report.truth = GroundTruthFrom(truth);
      if (!report.truth) {
        throw Error(ErrorCode::kFormat,
                    args.ground_truth + ": missing truth.extrinsic", Stage::kInput);
      }
      report.inputs["ground_truth"] = args.ground_truth;
    }
    return LoadTrajectory(args.lidar_traj);
  }();
  const TrajectoryRecords camera = LoadTrajectoryRecords(args.camera_traj);
  const TrackData tracks = LoadTracks(args.tracks);
  const CameraIntrinsics intrinsics = LoadIntrinsics(args.intrinsics);

  const MotionSignal camera_motion = FeatureMotion(tracks.tracks, tracks.frame_times);
  report.coarse =
      CoarseCalibrate(lidar, camera.poses, camera_motion, report.coarse_config);

  int status = kExitOk;
  if (!args.coarse_only) {
    RefineConfig refine = report.refine_config;
    if (args.tau_only) refine.time_lag_only = true;
    try {
      report.refine = RefineCalibration(*report.coarse, camera.poses, tracks.tracks,
                                        tracks.frame_times, lidar, intrinsics, refine);
    } catch (const NonConvergenceError& e) {
      report.refine = e.best();
      SaveReport(args.out, report);
      return Report(e);
    }
  }
  SaveReport(args.out, report);
  return status;
}

// --- simulate and sweeps ---

struct SimulateArgs {
  std::string scenario;
  std::string out_dir;
  int trials = 1;
  std::uint64_t seed = 1;
};

int RunSimulate(const SimulateArgs& args) {
  const Config config = LoadConfig(args.scenario);
  Scenario scenario = ScenarioFrom(config);
  config.CheckAllConsumed({"scenario."});
  for (int trial = 0; trial < args.trials; ++trial) {
    scenario.seed = TrialSeed(args.seed, static_cast<std::uint64_t>(trial));
    const SimulatedDataset data = GenerateScenario(scenario);
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%03d", trial);
    const std::filesystem::path dir = std::filesystem::path(args.out_dir) / name;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw Error(ErrorCode::kIo, "cannot create " + dir.string(), Stage::kInput);
    }
    SaveTrajectory((dir / "lidar.traj").string(), data.lidar.knots(),
                   data.lidar.clock_id());
    SaveTrajectory((dir / "camera.traj").string(), data.camera_poses, "camera");
    SaveTracks((dir / "tracks.txt").string(), data.tracks, data.frame_times);
    SaveIntrinsics((dir / "intrinsics.txt").string(), data.intrinsics);
    SaveGroundTruth((dir / "ground_truth.cfg").string(), data.truth);
  }
  return kExitOk;
}

std::vector<int> ToInts(const std::vector<double>& v) {
  return std::vector<int>(v.begin(), v.end());
}

Perturbation PerturbationFrom(const Config& config) {
  Perturbation p;
  if (auto v = config.GetDouble("sweep.perturb_rotation")) p.rotation_sigma = *v;
  if (auto v = config.GetDouble("sweep.perturb_translation")) {
    p.translation_sigma = *v;
  }
  return p;
}

int RunSweepMotion(const SimulateArgs& args) {
  const Config config = LoadConfig(args.scenario);
  const auto levels =
      config.GetDoubleList("sweep.levels_deg").value_or(std::vector<double>{5, 10, 20, 30});
  const auto samples =
      ToInts(config.GetDoubleList("sweep.samples").value_or(std::vector<double>{10}));
  const auto noise =
      config.GetDoubleList("sweep.noise").value_or(std::vector<double>{0.005, 0.01});
  config.CheckAllConsumed({"sweep."});
  const auto cells =
      SweepMotionExcitation(levels, samples, noise, args.trials, args.seed);
  auto out = OpenCsv(args.out_dir, "sweep_motion.csv");
  WriteMotionSweepCsv(out, cells);
  return kExitOk;
}

int RunSweepFrames(const SimulateArgs& args) {
  const Config config = LoadConfig(args.scenario);
  const Scenario scenario = ScenarioFrom(config);
  const RefineConfig refine = RefineConfigFrom(config);
  const auto counts = ToInts(
      config.GetDoubleList("sweep.keyframes").value_or(std::vector<double>{10, 20, 30, 50}));
  const Perturbation perturbation = PerturbationFrom(config);
  const double max_lag = config.GetDouble("sweep.max_true_lag").value_or(0.01);
  config.CheckAllConsumed({"scenario.", "refine.", "sweep."});
  const auto rows = SweepFrames(scenario, counts, args.trials, args.seed, refine,
                                perturbation, max_lag);
  auto out = OpenCsv(args.out_dir, "sweep_frames.csv");
  WriteFrameSweepCsv(out, rows);
  return kExitOk;
}

int RunSweepLag(const SimulateArgs& args, const std::string& stage,
                bool with_refine) {
  const Config config = LoadConfig(args.scenario);
  const Scenario scenario = ScenarioFrom(config);
  const CoarseConfig coarse = CoarseConfigFrom(config);
  RefineConfig refine = RefineConfigFrom(config);
  refine.coarse = coarse;
  const bool coarse_stage = stage == "coarse";
  const std::vector<double> default_lags =
      coarse_stage ? std::vector<double>{-0.5, -0.3, -0.1, 0.1, 0.3, 0.5}
                   : std::vector<double>{0.033, 0.066, 0.099, 0.133};
  const auto lags = config.GetDoubleList("sweep.lags").value_or(default_lags);
  const Perturbation perturbation = PerturbationFrom(config);
  config.CheckAllConsumed({"scenario.", "coarse.", "sync.", "refine.", "sweep."});
  if (coarse_stage) {
    const auto rows = SweepCoarseSyncError(scenario, lags, args.trials, args.seed,
                                           coarse, with_refine ? &refine : nullptr);
    auto out = OpenCsv(args.out_dir, "sweep_lag_coarse.csv");
    WriteLagSweepCsv(out, rows, with_refine);
  } else {
    const auto rows =
        SweepRefineLag(scenario, lags, args.trials, args.seed, refine, perturbation);
    auto out = OpenCsv(args.out_dir, "sweep_lag_refine.csv");
    WriteRefineLagCsv(out, rows);
  }
  return kExitOk;
}

void AddSimulationFlags(CLI::App* cmd, SimulateArgs& args, bool scenario_required) {
  auto* scenario = cmd->add_option("--scenario", args.scenario,
                                   "scenario/config file (key = value)");
  if (scenario_required) scenario->required()->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", args.out_dir, "output directory")->required();
  cmd->add_option("--trials", args.trials, "number of trials")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.seed, "master seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctcalib: targetless spatiotemporal camera-LiDAR calibration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ctcalib 0.3.0");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "calibrate from recorded data");
  calibrate->add_option("--lidar-traj", cal.lidar_traj, "LiDAR trajectory")->required();
  calibrate->add_option("--camera-traj", cal.camera_traj, "camera trajectory")
      ->required();
  calibrate->add_option("--tracks", cal.tracks, "feature tracks")->required();
  calibrate->add_option("--intrinsics", cal.intrinsics, "camera intrinsics")
      ->required();
  calibrate->add_option("--config", cal.config, "settings file")->required();
  calibrate->add_option("--out", cal.out, "report path (JSON)")->required();
  calibrate->add_option("--ground-truth", cal.ground_truth,
                        "truth.* file for error reporting");
  auto* coarse_only =
      calibrate->add_flag("--coarse-only", cal.coarse_only, "skip refinement");
  calibrate->add_flag("--tau-only", cal.tau_only, "refine the time lag only")
      ->excludes(coarse_only);
  calibrate->add_option("--seed", cal.seed, "echoed in the report");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "write simulated datasets");
  AddSimulationFlags(simulate, sim, true);

  SimulateArgs motion_args;
  motion_args.trials = 50;
  auto* sweep_motion =
      app.add_subcommand("sweep-motion", "coarse rotation error vs excitation");
  AddSimulationFlags(sweep_motion, motion_args, false);

  SimulateArgs frame_args;
  frame_args.trials = 50;
  auto* sweep_frames =
      app.add_subcommand("sweep-frames", "refinement error vs keyframe count");
  AddSimulationFlags(sweep_frames, frame_args, false);

  SimulateArgs lag_args;
  lag_args.trials = 50;
  std::string lag_stage = "coarse";
  bool lag_refine = false;
  auto* sweep_lag = app.add_subcommand("sweep-lag", "error vs injected time lag");
  AddSimulationFlags(sweep_lag, lag_args, false);
  sweep_lag->add_option("--stage", lag_stage, "coarse or refine")
      ->check(CLI::IsMember({"coarse", "refine"}));
  sweep_lag->add_flag("--with-refine", lag_refine,
                      "coarse stage: also refine from each coarse result");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitIo;
  }

  try {
    if (*calibrate) return RunCalibrate(cal);
    if (*simulate) return RunSimulate(sim);
    if (*sweep_motion) return RunSweepMotion(motion_args);
    if (*sweep_frames) return RunSweepFrames(frame_args);
    if (*sweep_lag) return RunSweepLag(lag_args, lag_stage, lag_refine);
  } catch (const Error& e) {
    return Report(e);
  } catch (const std::exception& e) {
    std::cerr << "ctcalib: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
