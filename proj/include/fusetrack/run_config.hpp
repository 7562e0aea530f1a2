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

#ifndef FUSETRACK_RUN_CONFIG_HPP
#define FUSETRACK_RUN_CONFIG_HPP

#include "fusetrack/csi_pipeline.hpp"
#include "fusetrack/fusion_solver.hpp"
#include "fusetrack/insole_pipeline.hpp"
#include "fusetrack/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace fusetrack
{

enum class SweepLevel
{
    Measurement, // per-step measurements synthesized from ground truth
    Signal,      // full CSI and insole simulation through both pipelines
};

struct SweepConfig
{
    SweepLevel level = SweepLevel::Measurement;
    bool random_walk = true;      // draw a fresh straight walk per seed
    int steps = 4;
    double min_ratio = 0.3;       // reject walks inside the Doppler blind spot
    double min_y = 0.3;           // m, distance kept from the Tx-Rx line
    std::uint64_t base_seed = 1;  // seed i of a sweep runs with base_seed + i
};

// Everything a run needs, in one JSON document. Every key is optional and falls back to
// the defaults of the module structs; unknown keys are rejected with Errc::BadConfig.
struct RunConfig
{
    sim::ScenarioConfig scenario;
    insole::InsoleConfig insole;
    std::optional<insole::SensorLayout> layout;
    csi::DopplerConfig doppler;
    csi::AoaConfig aoa;
    FusionConfig fusion;
    SweepConfig sweep;

    insole::SensorLayout sensor_layout() const { return layout.value_or(insole::SensorLayout::default_layout()); }
};

RunConfig parse_run_config(const std::string &json_text);
RunConfig load_run_config(const std::filesystem::path &path);

// Canonical JSON of the effective configuration (all keys, sorted).
std::string dump_run_config(const RunConfig &cfg);

// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig &cfg);

} // namespace fusetrack

#endif
