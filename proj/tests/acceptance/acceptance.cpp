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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "fusetrack/error.hpp"
#include "fusetrack/pipeline.hpp"
#include "fusetrack/run_config.hpp"

#include <spdlog/spdlog.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace fusetrack;
namespace fs = std::filesystem;

namespace
{

const fs::path kSource = FUSETRACK_SOURCE_DIR;
const fs::path kScenarios = kSource / "scenarios";
constexpr double kDeg = kPi / 180.0;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string show(double v, int prec = 4)
{
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

sim::ScenarioConfig noiseless(sim::ScenarioConfig sc)
{
    sc.noise.csi_snr_db = std::numeric_limits<double>::infinity();
    sc.noise.cfo_sfo = false;
    sc.noise.pressure_noise = 0.0;
    sc.noise.doppler_sigma = 0.0;
    sc.noise.aoa_sigma = 0.0;
    return sc;
}

int shell(const std::string &cmd)
{
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 1. Calibrated 50-seed random-walk sweep: initial-position error band.
Outcome initial_position_sweep()
{
    const RunConfig cfg = load_run_config(kScenarios / "calibrated_noise.json");
    const SweepResult r = run_sweep(cfg, 50);
    if (!r.initial_error)
        return {false, "no seed produced a report"};
    const auto &s = *r.initial_error;
    const bool pass = r.failures == 0 && s.mean >= 0.08 && s.mean <= 0.30 && s.max < 0.60;
    return {pass, "mean " + show(s.mean) + " m in [0.08, 0.30], max " + show(s.max) + " m < 0.60, std " +
                      show(s.std.value_or(NAN)) + " m, failures " + std::to_string(r.failures) + "/50"};
}

// 2. Noiseless fixed point on every scenario of scenarios/fixed_point.
Outcome noiseless_fixed_point()
{
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(kScenarios / "fixed_point"))
        if (e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    double worst_init = 0.0, worst_step = 0.0;
    std::string failed;
    for (const auto &f : files)
    {
        RunConfig cfg = load_run_config(f);
        cfg.scenario = noiseless(cfg.scenario);
        try
        {
            const auto gt = sim::gen_trajectory(cfg.scenario);
            const auto truth = sim::true_states(gt, cfg.scenario.scene);
            const auto meas = sim::gen_measurements(gt, cfg.scenario);
            const TrackResult r = solve(meas, cfg);
            const double e0 = distance(r.initial.state.pos(), truth.front().pos());
            worst_init = std::max(worst_init, e0);
            double step = 0.0;
            for (std::size_t k = 0; k < truth.size() && k < r.trajectory.size(); ++k)
                step = std::max(step, distance(r.trajectory.states[k].pos(), truth[k].pos()));
            worst_step = std::max(worst_step, step);
            if (r.trajectory.size() != truth.size() || e0 >= 0.01 || step >= 0.05)
                failed += " " + f.stem().string();
        }
        catch (const Error &e)
        {
            failed += " " + f.stem().string() + "(" + std::string(errc_name(e.code())) + ")";
        }
    }
    const bool pass = files.size() >= 10 && failed.empty();
    return {pass, std::to_string(files.size()) + " scenarios, worst initial " + show(worst_init) +
                      " m < 0.01, worst per-step " + show(worst_step) + " m < 0.05" +
                      (failed.empty() ? "" : ", failed:" + failed)};
}

// 3. Constant path-rate scenes against the Doppler estimator.
Outcome doppler_oracle()
{
    RunConfig cfg;
    const double lambda = cfg.scenario.scene.wavelength();
    std::string detail;
    bool pass = true;
    for (double rate : {0.1, 0.2, 0.5})
    {
        const auto csi = sim::gen_csi_constant_rate(cfg.scenario, 5.0, rate, 60.0 * kDeg, 10.0);
        const auto d = csi::estimate_doppler_velocity(csi, cfg.doppler, lambda);
        double sum = 0.0;
        for (double v : d.v_d)
            sum += v;
        const double mean = sum / static_cast<double>(d.size());
        pass = pass && std::abs(mean - rate) <= 0.02;
        detail += (detail.empty() ? "" : ", ") + show(rate, 2) + " -> " + show(mean);
    }
    return {pass, "mean v_d (m/s) " + detail + ", tolerance 0.02"};
}

// 4. doppler_ratio against a central difference of path_length.
Outcome ratio_finite_difference()
{
    const Scene scene = Scene::default_scene();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(-1.0, 5.0), uy(0.2, 4.0), uphi(-kPi, kPi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i)
    {
        const Point2 p{ux(rng), uy(rng)};
        const double phi = uphi(rng);
        const Point2 dir{std::cos(phi), std::sin(phi)};
        constexpr double h = 1e-6;
        const double fd = (path_length(scene, p + h * dir) - path_length(scene, p - h * dir)) / (2.0 * h);
        const auto a = angles_from_position(scene, p);
        worst = std::max(worst, std::abs(doppler_ratio(a.alpha_t, a.alpha_r, phi) - fd));
    }
    return {worst <= 1e-6, "1000 samples, max |ratio - FD| " + show(worst, 3) + " <= 1e-6"};
}

// 5. Tangential walk: no Doppler, tracker refuses with exit 3.
Outcome blind_spot()
{
    const fs::path cfg_path = kScenarios / "tangential.json";
    const RunConfig cfg = load_run_config(cfg_path);
    const auto gt = sim::gen_trajectory(cfg.scenario);
    const auto csi = sim::gen_csi(gt, cfg.scenario);
    const auto d = csi::estimate_doppler_velocity(csi, cfg.doppler, cfg.scenario.scene.wavelength());
    double worst = 0.0;
    for (double v : d.v_d)
        worst = std::max(worst, std::abs(v));

    std::random_device rd;
    const fs::path dir = fs::temp_directory_path() / ("fusetrack_acc_" + std::to_string(rd()));
    const std::string cli = std::string("'") + FUSETRACK_CLI + "'";
    const std::string q = "'" + dir.string() + "/";
    int code = shell(cli + " simulate --config '" + cfg_path.string() + "' --out " + q + "'" + " >/dev/null 2>&1");
    if (code == 0)
        code = shell(cli + " track --csi " + q + "csi.csv' --pressure-left " + q + "pressure_left.csv' --pressure-right " +
                     q + "pressure_right.csv' --config '" + cfg_path.string() + "' --out " + q + "traj.json' 2>/dev/null");
    fs::remove_all(dir);
    return {worst < 0.05 && code == 3, "max |v_d| " + show(worst) + " m/s < 0.05, track exit " + std::to_string(code) +
                                           " (expected 3)"};
}

// 6. Insole alignment and segmentation against the simulator's gait.
Outcome insole_round_trip()
{
    const Scene scene = Scene::default_scene();
    double worst_off = 0.0, worst_toe = 0.0, worst_speed = 0.0;
    std::string failed;
    for (int i = 0; i < 20; ++i)
    {
        std::mt19937_64 rng(1000 + i);
        RunConfig cfg;
        auto &sc = cfg.scenario;
        sc.seed = 1000 + i;
        // Both insoles must record the calibration gesture: the right clock sees it at
        // true time minus the offset.
        sc.timeline.gesture_start = 1.0;
        sc.insole_offset = std::uniform_real_distribution<double>(-0.8, 0.8)(rng);
        sc.speed = std::uniform_real_distribution<double>(0.8, 1.3)(rng);
        sc.gait.first_foot = i % 2 ? insole::Foot::Right : insole::Foot::Left;
        sc.waypoints = sim::random_straight_walk(scene, 6, sc.stride, rng, 0.0, 0.0);
        try
        {
            const auto gt = sim::gen_trajectory(sc);
            const auto p = sim::gen_pressure(gt, cfg.sensor_layout(), sc);
            const InsoleResult r = process_insoles(p.left, p.right, cfg);
            worst_off = std::max(worst_off, std::abs(r.offset - sc.insole_offset));
            bool ok = r.steps.size() == gt.steps() && r.first_foot == sc.gait.first_foot &&
                      std::abs(r.offset - sc.insole_offset) <= 0.02;
            for (std::size_t k = 0; k < std::min(r.steps.size(), gt.steps()); ++k)
            {
                const double e = std::max(std::abs(r.steps[k].t_start - gt.step_times[k]),
                                          std::abs(r.steps[k].t_end - gt.step_times[k + 1]));
                const double sp = std::abs(r.steps[k].speed - sc.speed) / sc.speed;
                worst_toe = std::max(worst_toe, e);
                worst_speed = std::max(worst_speed, sp);
                ok = ok && e <= 0.02 && sp <= 0.05;
            }
            if (!ok)
                failed += " " + std::to_string(i);
        }
        catch (const Error &e)
        {
            failed += " " + std::to_string(i) + "(" + std::string(errc_name(e.code())) + ")";
        }
    }
    return {failed.empty(), "20 scenarios, worst offset error " + show(1000.0 * worst_off, 3) + " ms, toe-off " +
                                show(1000.0 * worst_toe, 3) + " ms (<= 20), speed " + show(100.0 * worst_speed, 3) +
                                "% (<= 5)" + (failed.empty() ? "" : ", failed:" + failed)};
}

// Straight 4-step walk with its start on the 0.02 m oracle grid and an integer-degree heading.
std::vector<Point2> grid_walk(const Scene &scene, std::mt19937_64 &rng)
{
    std::uniform_int_distribution<int> ui(0, 200), udeg(0, 359);
    for (;;)
    {
        const Point2 start{0.02 * ui(rng), 0.02 * ui(rng)};
        const double phi = wrap_angle(udeg(rng) * kDeg);
        const Point2 dir{std::cos(phi), std::sin(phi)};
        bool ok = true;
        for (int k = 0; k <= 4 && ok; ++k)
        {
            const Point2 p = start + (0.5 * k) * dir;
            ok = scene.area().contains(p, 0.0) && p.y >= 0.3;
            if (ok && k < 4)
            {
                const auto a = angles_from_position(scene, p);
                ok = std::abs(doppler_ratio(a.alpha_t, a.alpha_r, phi)) >= 0.3;
            }
        }
        if (ok)
            return {start, start + 2.0 * dir};
    }
}

bool has_near(const std::vector<TargetState> &set, Point2 p, double tol)
{
    return std::any_of(set.begin(), set.end(), [&](const TargetState &s) { return distance(s.pos(), p) <= tol; });
}

// 7. Initial estimate against the exhaustive oracle, and the y-mirror ambiguity.
Outcome oracle_equivalence()
{
    const Scene scene = Scene::default_scene();
    const Scene wide({0.0, 0.0}, {4.0, 0.0}, scene.carrier_hz(), scene.antenna_spacing(), {0.0, 4.0, -4.0, 4.0});
    std::mt19937_64 rng(77);
    const FusionConfig cfg;
    FusionConfig no_aoa = cfg;
    no_aoa.w_line = 0.0;
    const OracleConfig oc;
    double worst = 0.0;
    int mirror_without = 0, mirror_with = 0;
    std::string failed;
    for (int i = 0; i < 20; ++i)
    {
        sim::ScenarioConfig sc = noiseless(sim::ScenarioConfig{});
        sc.waypoints = grid_walk(scene, rng);
        const auto gt = sim::gen_trajectory(sc);
        const auto meas = sim::gen_measurements(gt, sc);
        const TargetState truth = sim::true_states(gt, scene).front();
        try
        {
            const auto est = estimate_initial_state(meas, scene, cfg);
            const auto o = brute_force_oracle(meas, scene, cfg, oc);
            const double e = distance(est.state.pos(), o.best.pos());
            worst = std::max(worst, e);
            if (e >= 0.05)
                failed += " " + std::to_string(i);

            const Point2 mirror{truth.x, -truth.y};
            const auto without = brute_force_oracle(meas, wide, no_aoa, oc);
            const auto with = brute_force_oracle(meas, wide, cfg, oc);
            const bool m_without = has_near(without.ambiguity, mirror, 0.05);
            const bool m_with = has_near(with.ambiguity, mirror, 0.1);
            mirror_without += m_without ? 1 : 0;
            mirror_with += m_with ? 1 : 0;
            if (!m_without || m_with)
                failed += " " + std::to_string(i) + "(mirror)";
        }
        catch (const Error &e)
        {
            failed += " " + std::to_string(i) + "(" + std::string(errc_name(e.code())) + ")";
        }
    }
    return {failed.empty(), "20 scenarios, max |estimate - oracle| " + show(worst) + " m < 0.05; y-mirror in the set " +
                                std::to_string(mirror_without) + "/20 without AoA, " + std::to_string(mirror_with) +
                                "/20 with AoA" + (failed.empty() ? "" : ", failed:" + failed)};
}

// 8. Default 4-step straight walk at calibrated noise.
Outcome trajectory_shape()
{
    RunConfig cfg = load_run_config(kScenarios / "calibrated_noise.json");
    cfg.scenario.waypoints = load_run_config(kScenarios / "default.json").scenario.waypoints;
    cfg.sweep.random_walk = false;
    const SweepResult r = run_sweep(cfg, 20);
    double worst_mean = 0.0, worst_end = 0.0;
    for (const auto &o : r.runs)
        if (o.report)
        {
            worst_mean = std::max(worst_mean, o.report->mean_step_error());
            worst_end = std::max(worst_end, o.report->endpoint_error());
        }
    const bool pass = r.failures == 0 && worst_mean < 0.3 && worst_end < 0.4;
    std::string detail = "20 seeds, failures " + std::to_string(r.failures);
    if (r.mean_step_error)
        detail += ", per-step mean " + show(r.mean_step_error->mean) + " m (worst seed " + show(worst_mean) +
                  " < 0.3), endpoint mean " + show(r.endpoint_error->mean) + " m (worst seed " + show(worst_end) +
                  " < 0.4)";
    return {pass, detail};
}

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"initial-position sweep", initial_position_sweep},
        {"noiseless fixed point", noiseless_fixed_point},
        {"Doppler constant-rate oracle", doppler_oracle},
        {"Doppler ratio vs finite difference", ratio_finite_difference},
        {"tangential blind spot", blind_spot},
        {"insole round trip", insole_round_trip},
        {"oracle equivalence", oracle_equivalence},
        {"trajectory shape", trajectory_shape},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
                  << " (" << show(secs, 3) << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
