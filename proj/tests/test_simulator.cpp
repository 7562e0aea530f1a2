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

#include "fusetrack/error.hpp"
#include "fusetrack/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <random>

using namespace fusetrack;
using namespace fusetrack::sim;

namespace
{

const insole::SensorLayout kLayout = insole::SensorLayout::default_layout();

ScenarioConfig noiseless(std::vector<Point2> waypoints = {{1.0, 1.0}, {3.0, 1.0}})
{
    ScenarioConfig cfg;
    cfg.waypoints = std::move(waypoints);
    cfg.noise.csi_snr_db = std::numeric_limits<double>::infinity();
    cfg.noise.cfo_sfo = false;
    cfg.noise.pressure_noise = 0.0;
    return cfg;
}

template <typename F>
void expect_code(Errc code, F &&fn)
{
    try
    {
        fn();
        ADD_FAILURE() << "expected " << errc_name(code);
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

} // namespace

TEST(Trajectory, StraightWalkTiming)
{
    const auto cfg = noiseless();
    const auto gt = gen_trajectory(cfg);
    ASSERT_EQ(gt.steps(), 4u);
    EXPECT_DOUBLE_EQ(gt.walk_start, 0.5 + 0.4 + 3.0 + 1.5);
    EXPECT_NEAR(gt.duration, gt.walk_start + 2.0 + 1.5, 1e-12);
    for (std::size_t k = 0; k < gt.step_times.size(); ++k)
    {
        EXPECT_NEAR(gt.step_times[k], gt.walk_start + 0.5 * static_cast<double>(k), 1e-12);
        EXPECT_EQ(gt.step_feet[k], k % 2 == 0 ? insole::Foot::Left : insole::Foot::Right);
    }
    const Point2 mid = gt.position_at(gt.walk_start + 1.0);
    EXPECT_NEAR(mid.x, 2.0, 1e-12);
    EXPECT_NEAR(mid.y, 1.0, 1e-12);
    EXPECT_NEAR(gt.position_at(0.0).x, 1.0, 1e-12);
    EXPECT_NEAR(gt.position_at(gt.duration).x, 3.0, 1e-12);
    for (double h : gt.headings)
        EXPECT_NEAR(h, 0.0, 1e-12);
    EXPECT_NEAR(gt.times.back(), gt.duration, 1e-9);
}

TEST(Trajectory, TruncatesToWholeStridesAndFollowsCorners)
{
    auto cfg = noiseless({{0.5, 1.0}, {2.0, 1.0}, {2.0, 2.2}});
    const auto gt = gen_trajectory(cfg);
    EXPECT_EQ(gt.steps(), 5u); // 2.7 m of path
    const auto truth = true_states(gt, cfg.scene);
    ASSERT_EQ(truth.size(), 6u);
    EXPECT_NEAR(truth[2].phi, 0.0, 1e-12);
    EXPECT_NEAR(truth[3].phi, kPi / 2, 1e-12); // corner at (2, 1): heading of the step ahead
    EXPECT_NEAR(truth[5].phi, kPi / 2, 1e-12);
    EXPECT_NEAR(truth[5].y, 2.0, 1e-12);
}

TEST(Trajectory, EllipseArcKeepsPathLength)
{
    ScenarioConfig cfg = noiseless();
    cfg.ellipse_arc = EllipseArc{5.0, 40.0 * kPi / 180.0, 140.0 * kPi / 180.0};
    const auto gt = gen_trajectory(cfg);
    EXPECT_GE(gt.steps(), 4u);
    for (std::size_t i = 0; i < gt.times.size(); i += 7)
        ASSERT_NEAR(path_length(cfg.scene, cfg.scene.to_canonical(gt.positions[i])), 5.0, 2e-4);
}

TEST(Trajectory, RejectsBadScenarios)
{
    expect_code(Errc::BadScenario, [] { gen_trajectory(noiseless({{1.0, 1.0}})); });
    expect_code(Errc::BadScenario, [] { gen_trajectory(noiseless({{1.0, 1.0}, {4.5, 1.0}})); });
    expect_code(Errc::BadScenario, [] { gen_trajectory(noiseless({{1.0, 1.0}, {1.2, 1.0}})); });
    auto cfg = noiseless();
    cfg.speed = 0.0;
    expect_code(Errc::BadScenario, [&] { cfg.validate(); });
    cfg = noiseless();
    cfg.gait.swing_fraction = 0.5;
    expect_code(Errc::BadScenario, [&] { cfg.validate(); });
    cfg = noiseless();
    cfg.dyn_amplitude = -0.1;
    expect_code(Errc::BadScenario, [&] { cfg.validate(); });
}

TEST(GenCsi, StandingPacketsAreIdenticalWithoutNoise)
{
    const auto cfg = noiseless();
    const auto gt = gen_trajectory(cfg);
    const auto csi = gen_csi(gt, cfg);
    ASSERT_EQ(csi.size(), static_cast<std::size_t>(std::floor(gt.duration * 1000.0 + 1e-9)) + 1);
    for (std::size_t i = 1; i < 5000; i += 97)
        for (std::size_t e = 0; e < csi::kFrameEntries; ++e)
            ASSERT_EQ(csi[i].h[e], csi[0].h[e]);
}

TEST(GenCsi, DynamicPhaseFollowsPathLength)
{
    const auto cfg = noiseless({{3.2, 0.8}, {2.0, 2.4}});
    const auto gt = gen_trajectory(cfg);
    const auto csi = gen_csi(gt, cfg);
    const double d = cfg.scene.d_los();
    for (std::size_t s : {0u, 14u, 29u})
    {
        const double f = 5.32e9 + (static_cast<double>(s) - 14.5) * 1.25e6;
        const double k = 2.0 * kPi * f / 299792458.0;
        for (std::size_t i = 6000; i + 10 < csi.size() && i < 8000; i += 50)
        {
            const auto &a = csi[i];
            const auto &b = csi[i + 10];
            const double la = path_length(cfg.scene, cfg.scene.to_canonical(gt.position_at(a.timestamp)));
            const double lb = path_length(cfg.scene, cfg.scene.to_canonical(gt.position_at(b.timestamp)));
            const auto dyn_a = a.at(0, s) - std::polar(1.0, -k * d);
            const auto dyn_b = b.at(0, s) - std::polar(1.0, -k * d);
            ASSERT_NEAR(std::abs(dyn_a), 0.2 * d / la, 1e-9);
            ASSERT_NEAR(wrap_angle(std::arg(dyn_b / dyn_a) + k * (lb - la)), 0.0, 1e-6) << i;
        }
    }
}

TEST(GenCsi, EnergyIsBounded)
{
    auto cfg = noiseless({{3.2, 0.8}, {2.0, 2.4}});
    cfg.noise.cfo_sfo = true;
    const auto gt = gen_trajectory(cfg);
    for (const auto &f : gen_csi(gt, cfg))
        for (const auto &h : f.h)
            ASSERT_LE(std::abs(h), 1.0 + 0.2 + 1e-12);
}

TEST(GenPressure, StandingCopIsConstantWithoutNoise)
{
    const auto cfg = noiseless();
    const auto gt = gen_trajectory(cfg);
    const auto p = gen_pressure(gt, kLayout, cfg);
    const double c0 = *insole::cop_y(p.left.front(), kLayout, 1.0);
    for (const auto &f : p.left)
    {
        if (f.timestamp >= cfg.timeline.gesture_start)
            break;
        EXPECT_NEAR(*insole::cop_y(f, kLayout, 1.0), c0, 1e-12);
    }
    // Between gesture release and the roll into the first step both feet carry the full load.
    const double t = 0.5 * (0.5 + 0.4 + 3.0 + gt.walk_start) - 0.3;
    const auto idx = static_cast<std::size_t>(std::lround(t * 50.0));
    EXPECT_NEAR(p.left[idx].total(), cfg.gait.load_per_foot, 1e-6);
    EXPECT_NEAR(p.right[idx].total(), cfg.gait.load_per_foot, 1e-6);
}

TEST(GenPressure, CopRollsHeelToToeThroughStance)
{
    const auto cfg = noiseless({{0.5, 1.0}, {3.5, 1.0}});
    const auto gt = gen_trajectory(cfg);
    const auto p = gen_pressure(gt, kLayout, cfg);
    const double swing = 0.4 * 2.0 * gt.stride / gt.speed;
    std::vector<double> left_offs;
    for (std::size_t i = 0; i < gt.step_times.size(); ++i)
        if (gt.step_feet[i] == insole::Foot::Left)
            left_offs.push_back(gt.step_times[i]);
    ASSERT_GE(left_offs.size(), 2u);
    int checked = 0;
    for (std::size_t j = 0; j + 1 < left_offs.size(); ++j)
    {
        const double strike = left_offs[j] + swing;
        std::optional<double> prev;
        for (const auto &f : p.left)
        {
            if (f.timestamp <= strike + 0.05 || f.timestamp >= left_offs[j + 1] - 0.05)
                continue;
            const auto c = insole::cop_y(f, kLayout, 1.0);
            ASSERT_TRUE(c.has_value());
            if (prev)
            {
                EXPECT_GE(*c, *prev - 0.05) << f.timestamp;
                ++checked;
            }
            prev = c;
        }
    }
    EXPECT_GT(checked, 5);
}

TEST(GenPressure, RightClockLagsByTheOffset)
{
    auto cfg = noiseless();
    cfg.insole_offset = 0.0;
    const auto gt = gen_trajectory(cfg);
    const auto base = gen_pressure(gt, kLayout, cfg);
    cfg.insole_offset = 0.2; // ten frames at 50 Hz
    const auto lag = gen_pressure(gt, kLayout, cfg);
    for (std::size_t i = 0; i + 10 < base.right.size(); i += 13)
        for (std::size_t s = 0; s < insole::kSensors; ++s)
            ASSERT_NEAR(lag.right[i].p[s], base.right[i + 10].p[s], 1e-9);
}

TEST(Simulate, DeterministicPerSeed)
{
    auto cfg = noiseless({{3.2, 0.8}, {2.0, 2.4}});
    cfg.noise = NoiseConfig{};
    const auto a = simulate(cfg, kLayout);
    const auto b = simulate(cfg, kLayout);
    ASSERT_EQ(a.csi.size(), b.csi.size());
    for (std::size_t i = 0; i < a.csi.size(); i += 11)
        for (std::size_t e = 0; e < csi::kFrameEntries; ++e)
            ASSERT_EQ(a.csi[i].h[e], b.csi[i].h[e]);
    for (std::size_t i = 0; i < a.pressure.left.size(); ++i)
        ASSERT_EQ(a.pressure.left[i].p, b.pressure.left[i].p);

    cfg.seed = 2;
    const auto c = simulate(cfg, kLayout);
    EXPECT_EQ(c.gt.positions.size(), a.gt.positions.size());
    EXPECT_EQ(c.gt.step_times, a.gt.step_times);
    EXPECT_NE(c.csi[100].h[0], a.csi[100].h[0]);
    EXPECT_NE(c.pressure.left[10].p, a.pressure.left[10].p);
}

TEST(GenMeasurements, NoiselessMatchGeometry)
{
    const auto cfg = noiseless({{3.2, 0.8}, {2.0, 2.4}});
    const auto gt = gen_trajectory(cfg);
    const auto truth = true_states(gt, cfg.scene);
    const auto meas = gen_measurements(gt, cfg);
    ASSERT_EQ(meas.size(), gt.steps());
    double total = 0.0;
    for (std::size_t k = 0; k < meas.size(); ++k)
    {
        const auto &m = meas[k];
        EXPECT_NEAR(m.step.duration, 0.5, 1e-12);
        EXPECT_NEAR(m.step.speed, 1.0, 1e-12);
        const auto ang = angles_from_position(cfg.scene, truth[k].pos());
        EXPECT_NEAR(m.v_ratio, doppler_ratio(ang.alpha_t, ang.alpha_r, truth[k].phi), 1e-12);
        EXPECT_NEAR(*m.alpha_r_meas, std::abs(ang.alpha_r), 1e-12);
        total += m.delta_l;
    }
    EXPECT_NEAR(total, path_length(cfg.scene, truth.back().pos()) - path_length(cfg.scene, truth.front().pos()), 1e-12);
}

TEST(GenMeasurements, NoiseHasTheConfiguredSpread)
{
    auto cfg = noiseless({{3.2, 0.8}, {2.0, 2.4}});
    cfg.noise.doppler_sigma = 0.04;
    cfg.noise.aoa_sigma = 0.02;
    const auto gt = gen_trajectory(cfg);
    const auto clean = gen_measurements(gt, noiseless({{3.2, 0.8}, {2.0, 2.4}}));
    double sl = 0.0, sr = 0.0, sa = 0.0;
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 500; ++seed)
    {
        cfg.seed = seed;
        const auto m = gen_measurements(gt, cfg);
        for (std::size_t k = 0; k < m.size(); ++k)
        {
            sl += std::pow(m[k].delta_l - clean[k].delta_l, 2);
            sr += std::pow(m[k].v_ratio - clean[k].v_ratio, 2);
            sa += std::pow(*m[k].alpha_r_meas - *clean[k].alpha_r_meas, 2);
            ++n;
        }
    }
    EXPECT_NEAR(std::sqrt(sl / n), 0.04 * 0.5, 0.002);
    EXPECT_NEAR(std::sqrt(sr / n), 0.04, 0.004);
    EXPECT_NEAR(std::sqrt(sa / n), 0.02, 0.002);
}

TEST(RandomStraightWalk, HonoursConstraints)
{
    const Scene scene = Scene::default_scene();
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i)
    {
        const auto w = random_straight_walk(scene, 4, 0.5, rng);
        ASSERT_EQ(w.size(), 2u);
        EXPECT_NEAR(distance(w[0], w[1]), 2.0, 1e-12);
        const Point2 dir = (1.0 / 2.0) * (w[1] - w[0]);
        const double phi = std::atan2(dir.y, dir.x);
        for (int k = 0; k <= 4; ++k)
        {
            const Point2 p = w[0] + (0.5 * k) * dir;
            EXPECT_TRUE(scene.area().contains(p, 1e-12));
            EXPECT_GE(std::abs(p.y), 0.3);
            if (k < 4)
            {
                const auto a = angles_from_position(scene, p);
                EXPECT_GE(std::abs(doppler_ratio(a.alpha_t, a.alpha_r, phi)), 0.3);
            }
        }
    }
    expect_code(Errc::BadScenario, [&] { random_straight_walk(scene, 20, 0.5, rng); });
}

TEST(SignalLevel, DopplerIntegralTracksPathLengthPerStep)
{
    auto cfg = noiseless({{3.2, 0.8}, {2.0, 2.4}});
    cfg.noise = NoiseConfig{};
    const auto b = simulate(cfg, kLayout);
    const auto truth = true_states(b.gt, cfg.scene);
    const auto dop = csi::estimate_doppler_velocity(b.csi, csi::DopplerConfig{}, cfg.scene.wavelength());
    for (std::size_t k = 0; k + 1 < truth.size(); ++k)
    {
        const double dl = path_length(cfg.scene, truth[k + 1].pos()) - path_length(cfg.scene, truth[k].pos());
        const double est = csi::integrate_path_change(dop, b.gt.step_times[k], b.gt.step_times[k + 1]);
        EXPECT_NEAR(est, dl, 0.05) << "step " << k;
        if (std::abs(dl) >= 0.3 * 0.5)
            EXPECT_NEAR(est / dl, 1.0, 0.1) << "step " << k;
    }
}
