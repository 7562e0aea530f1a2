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

#ifndef FUSETRACK_INSOLE_PIPELINE_HPP
#define FUSETRACK_INSOLE_PIPELINE_HPP

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace fusetrack::insole
{

inline constexpr std::size_t kRows = 9;
inline constexpr std::size_t kCols = 5;
inline constexpr std::size_t kSensors = kRows * kCols;

enum class Foot
{
    Left,
    Right,
};

inline Foot other(Foot f) { return f == Foot::Left ? Foot::Right : Foot::Left; }

// One insole sample. p is row-major over a 9x5 grid, row 0 at the toe.
struct PressureFrame
{
    double timestamp = 0.0;
    Foot foot = Foot::Left;
    std::array<double, kSensors> p{};

    double total() const;
    double row_sum(std::size_t row) const;
};

using PressureStream = std::vector<PressureFrame>;

// Longitudinal sensor coordinates, normalized 0 = heel .. 1 = toe.
struct SensorLayout
{
    std::array<double, kSensors> y{};

    static SensorLayout default_layout();
    // Throws Errc::SchemaError unless every sensor in row r sits strictly toe-ward of row r+1.
    void validate() const;
    // Row with the largest coordinates.
    std::size_t toe_row() const;
};

struct StepEvent
{
    double t_start = 0.0;
    double t_end = 0.0;
    double duration = 0.0;
    double stride = 0.0;
    double speed = 0.0;
    Foot foot = Foot::Left;
};

struct InsoleConfig
{
    double full_scale = 100.0;       // per-sensor full-scale reading
    double contact_fraction = 0.01;  // CoP defined when total > fraction * full_scale * 45
    double forefoot_cop = 0.6;       // sync gesture threshold on CoP_y
    double hold_s = 3.0;             // sync gesture hold
    double hold_fraction = 0.8;      // fraction of the hold the CoP must stay forefoot
    double unload_fraction = 0.1;    // first-moving-foot: total below this fraction of standing mean
    double toe_off_fraction = 0.05;  // toe row sum threshold, fraction of the row's full scale
    double stride = 0.5;             // per-user stride, m
};

// Y_CoP of a frame; nullopt while the foot is airborne.
std::optional<double> cop_y(const PressureFrame &frame, const SensorLayout &layout, double contact_eps);
double contact_threshold(const InsoleConfig &cfg);

// Rise instant of the heel-lift calibration gesture. The rise must be recorded: a stream that
// starts inside the hold does not count. Throws Errc::FeatureNotFound.
double detect_sync_feature(std::span<const PressureFrame> stream, const SensorLayout &layout, const InsoleConfig &cfg);

// Offset to add to the right stream's timestamps so both gestures coincide.
double align_streams(std::span<const PressureFrame> left, std::span<const PressureFrame> right,
                     const SensorLayout &layout, const InsoleConfig &cfg);

PressureStream shift_stream(std::span<const PressureFrame> stream, double offset);

// Linear interpolation of `source` onto the timestamps of `grid` (held at the ends).
PressureStream resample_onto(std::span<const PressureFrame> source, std::span<const PressureFrame> grid);

// Foot whose total load first falls below the unload threshold after `hint`. Simultaneous
// unloading within one sample resolves to Left. Throws Errc::NoMotionDetected.
Foot detect_first_moving_foot(std::span<const PressureFrame> left, std::span<const PressureFrame> right, double hint,
                              const InsoleConfig &cfg);

// Toe-off instants of one foot (downward crossings of the toe-row threshold after t_from).
std::vector<double> toe_off_times(std::span<const PressureFrame> stream, const SensorLayout &layout,
                                  const InsoleConfig &cfg, double t_from = -std::numeric_limits<double>::infinity());

// Steps between alternating toe-offs; stride and speed are left at zero.
// Throws Errc::NoStepsFound.
std::vector<StepEvent> segment_steps(std::span<const PressureFrame> left, std::span<const PressureFrame> right,
                                     const SensorLayout &layout, const InsoleConfig &cfg,
                                     double t_from = -std::numeric_limits<double>::infinity());

std::vector<StepEvent> attach_stride(std::vector<StepEvent> steps, double stride);

} // namespace fusetrack::insole

#endif
