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

#ifndef FUSETRACK_SIMULATOR_HPP
#define FUSETRACK_SIMULATOR_HPP

#include "fusetrack/csi_pipeline.hpp"
#include "fusetrack/fusion_solver.hpp"
#include "fusetrack/geometry.hpp"
#include "fusetrack/insole_pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

// Synthetic walks with matching CSI and insole streams. Positions are world coordinates.

namespace fusetrack::sim
{

struct GaitConfig
{
    double swing_fraction = 0.4;     // of the two-step gait cycle
    double load_per_foot = 1500.0;   // summed sensor reading of a loaded foot
    double standing_cop = 0.45;
    double standing_width = 0.3;     // row weighting spread while standing
    double stance_width = 0.12;      // row weighting spread while rolling heel to toe
    double unload_fraction = 0.15;   // share of stance spent unloading before toe-off
    insole::Foot first_foot = insole::Foot::Left;
};

struct NoiseConfig
{
    double csi_snr_db = 30.0;       // static-path power over AWGN power
    bool cfo_sfo = true;            // per-packet random phase and subcarrier slope
    double sfo_slope_max = 0.05;    // rad per subcarrier
    double pressure_noise = 0.02;   // multiplicative, per sensor
    double doppler_sigma = 0.0;     // m/s, measurement-level
    double aoa_sigma = 0.0;         // rad, measurement-level
};

struct TimelineConfig
{
    double gesture_start = 0.5;
    double gesture_ramp = 0.2;
    double gesture_hold = 3.0;
    double stand_after = 1.5;  // between gesture release and the first toe-off
    double tail = 1.5;         // recording after the last toe-off
};

// Walk along a confocal ellipse (constant reflected path length), canonical frame angles.
struct EllipseArc
{
    double path_length = 5.0;
    double from = 2.0 * kPi / 9.0;  // parametric angle, rad
    double to = 7.0 * kPi / 9.0;
};

struct ScenarioConfig
{
    Scene scene = Scene::default_scene();
    std::vector<Point2> waypoints{{1.0, 1.0}, {3.0, 1.0}};
    std::optional<EllipseArc> ellipse_arc; // replaces waypoints when set
    double speed = 1.0;
    double stride = 0.5;
    GaitConfig gait;
    NoiseConfig noise;
    TimelineConfig timeline;
    double insole_offset = 0.5;           // right insole clock lag, s
    double dyn_amplitude = 0.2;           // reflected amplitude relative to LoS at equal path length
    double subcarrier_spacing_hz = 1.25e6;
    double csi_rate = 1000.0;
    double pressure_rate = 50.0;
    double gt_rate = 100.0;
    std::uint64_t seed = 1;

    // Throws Errc::BadScenario.
    void validate() const;
};

// Constant-speed piecewise-linear path parameterized by arc length.
class Polyline
{
  public:
    explicit Polyline(std::vector<Point2> pts);
    double length() const { return cum_.back(); }
    Point2 at(double s) const;
    double heading_at(double s) const; // direction of the segment containing s (ahead of corners)
    const std::vector<Point2> &points() const { return pts_; }

  private:
    std::vector<Point2> pts_;
    std::vector<double> cum_;
};

struct GroundTruth
{
    std::vector<double> times;
    std::vector<Point2> positions;
    std::vector<double> headings;
    std::vector<double> step_times;        // toe-offs, N+1 for N steps
    std::vector<insole::Foot> step_feet;   // foot leaving the ground at each toe-off
    double walk_start = 0.0;
    double duration = 0.0;
    double speed = 0.0;
    double stride = 0.0;
    Polyline path{{{0.0, 0.0}, {1.0, 0.0}}};

    Point2 position_at(double t) const;
    double heading_at(double t) const;
    std::size_t steps() const { return step_times.empty() ? 0 : step_times.size() - 1; }
};

// Dense waypoints of an ellipse arc in world coordinates.
std::vector<Point2> ellipse_arc_points(const Scene &scene, const EllipseArc &arc, double spacing = 0.01);

// Throws Errc::BadScenario for fewer than 2 waypoints, waypoints outside the area, or a
// path shorter than one stride. The walk is truncated to a whole number of strides.
GroundTruth gen_trajectory(const ScenarioConfig &cfg);

csi::CsiStream gen_csi(const GroundTruth &gt, const ScenarioConfig &cfg);

// Constant path-length-rate scene: Tx-Rx geometry with a reflector whose reflected path
// grows as L0 + rate * t, seen from a fixed angle. Used as a Doppler oracle.
csi::CsiStream gen_csi_constant_rate(const ScenarioConfig &cfg, double l0, double rate, double alpha_r,
                                     double duration);

// Single plane wave from angle alpha (from the array axis), no static path.
csi::CsiStream gen_plane_wave(const ScenarioConfig &cfg, double alpha, std::size_t frames);

struct PressurePair
{
    insole::PressureStream left;
    insole::PressureStream right; // timestamps lag true time by cfg.insole_offset
};

PressurePair gen_pressure(const GroundTruth &gt, const insole::SensorLayout &layout, const ScenarioConfig &cfg);

// Per-step measurements straight from ground truth with the configured measurement-level
// Doppler and AoA noise, in the canonical frame.
std::vector<StepMeasurement> gen_measurements(const GroundTruth &gt, const ScenarioConfig &cfg);

// Truth state at each toe-off in the canonical frame, heading of the following step.
std::vector<TargetState> true_states(const GroundTruth &gt, const Scene &scene);

// Random straight walk of `steps` strides inside the area, keeping |doppler_ratio| at every
// step start at or above `min_ratio` and the walk at least `min_y` off the Tx-Rx line.
std::vector<Point2> random_straight_walk(const Scene &scene, int steps, double stride, std::mt19937_64 &rng,
                                         double min_ratio = 0.3, double min_y = 0.3);

struct Bundle
{
    GroundTruth gt;
    csi::CsiStream csi;
    PressurePair pressure;
};

Bundle simulate(const ScenarioConfig &cfg, const insole::SensorLayout &layout);

} // namespace fusetrack::sim

#endif
