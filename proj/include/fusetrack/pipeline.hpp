// SPDX-License-Identifier: Apache-2.0
//
// fusetrack: Wi-Fi CSI and pressure-insole fusion for single-target tracking
// Copyright (C) 2026 The fusetrack authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef FUSETRACK_PIPELINE_HPP
#define FUSETRACK_PIPELINE_HPP

#include "fusetrack/evaluation.hpp"
#include "fusetrack/formats.hpp"
#include "fusetrack/fusion_solver.hpp"
#include "fusetrack/run_config.hpp"
#include "fusetrack/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// End-to-end orchestration shared by the command-line tools.

namespace fusetrack
{

struct InsoleResult
{
    double offset = 0.0;       // added to right-insole timestamps
    double sync_time = 0.0;    // calibration gesture on the left clock
    insole::Foot first_foot = insole::Foot::Left;
    std::vector<insole::StepEvent> steps;
};

// Alignment, resampling onto the left grid, first-foot detection and segmentation.
InsoleResult process_insoles(std::span<const insole::PressureFrame> left, std::span<const insole::PressureFrame> right,
                             const RunConfig &cfg);

struct SignalProducts
{
    InsoleResult insole;
    csi::DopplerSeries doppler;
    csi::AoaSeries aoa;
    std::vector<StepMeasurement> measurements;
};

// CSI and insole streams to per-step measurements. The CSI clock is taken to be the left
// insole's clock.
SignalProducts extract_measurements(std::span<const csi::CsiFrame> csi, std::span<const insole::PressureFrame> left,
                                    std::span<const insole::PressureFrame> right, const RunConfig &cfg);

struct TrackResult
{
    InitialEstimate initial;
    Trajectory trajectory; // canonical frame
};

// Initial estimate over the first window, then step-by-step tracking.
TrackResult solve(std::span<const StepMeasurement> meas, const RunConfig &cfg);

io::TrajectoryFile to_trajectory_file(const TrackResult &result, const RunConfig &cfg);

io::GroundTruthTrace ground_truth_trace(const sim::GroundTruth &gt);

struct BundlePaths
{
    std::filesystem::path csi;
    std::filesystem::path pressure_left;
    std::filesystem::path pressure_right;
    std::filesystem::path ground_truth;
};

BundlePaths bundle_paths(const std::filesystem::path &dir, bool gzip);

// Writes the four trace files into `dir` (created if missing).
BundlePaths write_bundle(const std::filesystem::path &dir, const sim::Bundle &bundle, bool gzip = false);

struct SeedOutcome
{
    std::uint64_t seed = 0;
    std::string status = "ok"; // or the error name that stopped the run
    std::string message;
    std::vector<Point2> waypoints;
    std::optional<ErrorReport> report;
};

struct SweepResult
{
    std::vector<SeedOutcome> runs; // in seed order
    std::optional<Summary> initial_error;
    std::optional<Summary> mean_step_error;
    std::optional<Summary> endpoint_error;
    std::size_t failures = 0;
};

// Scenario config for seed index i: seeded noise and, for random-walk sweeps, a fresh walk.
sim::ScenarioConfig sweep_scenario(const RunConfig &cfg, int index);

// Runs one scenario per seed on a worker pool; results are merged by seed index.
SweepResult run_sweep(const RunConfig &cfg, int seeds, unsigned threads = 0);

std::string seed_outcome_to_string(const SeedOutcome &o);
std::string sweep_aggregate_to_string(const SweepResult &r, const RunConfig &cfg);

} // namespace fusetrack

#endif
