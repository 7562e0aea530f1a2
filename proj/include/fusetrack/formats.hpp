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

#ifndef FUSETRACK_FORMATS_HPP
#define FUSETRACK_FORMATS_HPP

#include "fusetrack/csi_pipeline.hpp"
#include "fusetrack/geometry.hpp"
#include "fusetrack/insole_pipeline.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Trace and result files. Readers open plain or gzip-compressed files transparently;
// writers compress when asked to or when the path ends in ".gz".
//
// Errors: Errc::IoError (with the path), Errc::ParseError (with the line number),
// Errc::SchemaError for structurally valid text that violates a format invariant.

namespace fusetrack::io
{

namespace fs = std::filesystem;

// Shortest text that reproduces the value at 9 significant digits.
std::string format_number(double v);

// ts_s, a1s1_re .. a3s30_re, a1s1_im .. a3s30_im
csi::CsiStream read_csi(const fs::path &path);
void write_csi(const fs::path &path, std::span<const csi::CsiFrame> frames, bool gzip = false);

// ts_s, foot, p01 .. p45 (row-major, p01..p05 is the toe row)
insole::PressureStream read_pressure(const fs::path &path);
void write_pressure(const fs::path &path, std::span<const insole::PressureFrame> frames, bool gzip = false);

// row, col, y (one line per sensor)
insole::SensorLayout read_layout(const fs::path &path);
void write_layout(const fs::path &path, const insole::SensorLayout &layout);

struct GroundTruthTrace
{
    std::vector<double> times;
    std::vector<Point2> positions;

    // Linear interpolation; nullopt outside the support.
    std::optional<Point2> at(double t) const;
};

// ts_s, x_m, y_m
GroundTruthTrace read_ground_truth(const fs::path &path);
void write_ground_truth(const fs::path &path, const GroundTruthTrace &gt, bool gzip = false);

struct TrajectoryPoint
{
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0;
    double residual = 0.0;
};

struct SceneInfo
{
    Point2 tx;
    Point2 rx;
    double carrier_hz = 0.0;
    double antenna_spacing = 0.0;
    Rect area;
};

// World-frame trajectory with provenance.
struct TrajectoryFile
{
    SceneInfo scene;
    std::string config_hash;
    std::vector<TrajectoryPoint> states;
    std::map<std::string, double> metrics;
};

TrajectoryFile read_trajectory(const fs::path &path);
void write_trajectory(const fs::path &path, const TrajectoryFile &traj);
std::string trajectory_to_string(const TrajectoryFile &traj);
TrajectoryFile trajectory_from_string(const std::string &text);

// Whole file as text, decompressing when needed.
std::string read_text(const fs::path &path);
void write_text(const fs::path &path, const std::string &text, bool gzip = false);

} // namespace fusetrack::io

#endif
