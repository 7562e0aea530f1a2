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

#ifndef FUSETRACK_FUSION_SOLVER_HPP
#define FUSETRACK_FUSION_SOLVER_HPP

#include "fusetrack/csi_pipeline.hpp"
#include "fusetrack/geometry.hpp"
#include "fusetrack/insole_pipeline.hpp"

#include <optional>
#include <span>
#include <vector>

// Fusion of per-step Wi-Fi and insole measurements into target states.
//
// States and angles here are in the canonical scene frame; the search area is
// the scene's world rectangle mapped through Scene::to_canonical.

namespace fusetrack
{

struct StepMeasurement
{
    insole::StepEvent step;
    double delta_l = 0.0;               // reflected path change over the step, m
    double v_ratio = 0.0;               // v_D / v_H at the step start, clamped to [-2, 2]
    std::optional<double> alpha_r_meas; // AoA at the step start, rad
    bool low_confidence = false;        // Doppler had no dominant peak over most of the step
};

struct FusionConfig
{
    double w_ellipse = 1.0;
    double w_line = 1.0;
    double w_ratio = 1.0;

    // Noise scales used to normalize the three terms.
    double sigma_l = 0.02;      // m
    double sigma_ratio = 0.05;  // dimensionless
    double sigma_aoa = 0.05;    // rad

    double grid_xy = 0.1;             // m
    double grid_phi = 5.0 * kPi / 180.0;
    double refine_tol = 1e-5;         // simplex size at convergence
    double y_margin = 0.05;           // |y| below this is excluded
    int window_steps = 3;
    int top_k = 5;

    double track_phi_grid = 2.0 * kPi / 180.0;
    double heading_ambiguity = 1.0;   // cost margin treated as a tie when no look-ahead bearing exists
    double track_lost_threshold = 50.0;
    double reject_threshold = 50.0;   // mean per-step residual above which an initial estimate is flagged

    // Throws Errc::BadConfig.
    void validate() const;
};

struct ObjectiveTerms
{
    double ellipse = 0.0;
    double line = 0.0;
    double ratio = 0.0;
};

// Normalized, unweighted terms. Throws Errc::OutOfRange when |y| < y_margin and
// Errc::DegenerateEllipse when the predicted path length does not exceed d_LoS.
ObjectiveTerms objective_terms(const TargetState &state, const StepMeasurement &meas, const Scene &scene,
                               const FusionConfig &cfg);

double objective(const TargetState &state, const StepMeasurement &meas, const Scene &scene, const FusionConfig &cfg);

// Sum of per-step objectives along a straight walk from `start`. Returns +inf when any
// intermediate state is infeasible.
double window_objective(const TargetState &start, std::span<const StepMeasurement> window, const Scene &scene,
                        const FusionConfig &cfg);

struct InitialEstimate
{
    TargetState state;
    double residual = 0.0;
    bool rejected = false; // residual per step above cfg.reject_threshold
};

// Grid search plus simplex refinement over the first cfg.window_steps measurements.
// Throws Errc::InsufficientData for fewer than 2 steps and Errc::NoFeasibleState when
// the Doppler is unusable over the whole window or no grid cell is feasible.
InitialEstimate estimate_initial_state(std::span<const StepMeasurement> meas, const Scene &scene,
                                       const FusionConfig &cfg);

struct Trajectory
{
    std::vector<double> times;
    std::vector<TargetState> states; // canonical frame
    std::vector<double> residuals;

    std::size_t size() const { return states.size(); }
};

// Step-by-step heading re-estimation. Emits one state per step boundary; state k+1 carries
// the heading used for step k. Throws Errc::TrackLost.
Trajectory track(const TargetState &initial, std::span<const StepMeasurement> meas, const Scene &scene,
                 const FusionConfig &cfg, double initial_residual = 0.0);

struct OracleConfig
{
    double grid_xy = 0.02;
    double grid_phi = kPi / 180.0;
    double ambiguity_tol = 1e-6;  // cells within this of the minimum are reported
    double distinct_xy = 0.1;     // separation for distinct ambiguity members
    double distinct_phi = 10.0 * kPi / 180.0;
};

struct OracleResult
{
    TargetState best;
    double residual = 0.0;
    std::vector<TargetState> ambiguity; // distinct near-optimal cells, best first
};

// Exhaustive grid minimum of window_objective over the scene area.
OracleResult brute_force_oracle(std::span<const StepMeasurement> meas, const Scene &scene, const FusionConfig &cfg,
                                const OracleConfig &ocfg = {});

// Pairs insole steps with Doppler and AoA products. `aoa` is sampled at the step starts
// and may be empty.
std::vector<StepMeasurement> build_measurements(std::span<const insole::StepEvent> steps,
                                                const csi::DopplerSeries &doppler, const csi::AoaSeries &aoa);

} // namespace fusetrack

#endif
