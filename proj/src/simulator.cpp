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

#include "fusetrack/simulator.hpp"
#include "fusetrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace fusetrack::sim
{

using csi::cplx;

namespace
{

// Independent, reproducible generator per noise source.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

double subcarrier_freq(const ScenarioConfig &cfg, std::size_t s)
{
    return cfg.scene.carrier_hz() +
           (static_cast<double>(s) - 0.5 * static_cast<double>(csi::kSubcarriers - 1)) * cfg.subcarrier_spacing_hz;
}

class CsiNoise
{
  public:
    CsiNoise(const ScenarioConfig &cfg, std::uint64_t stream)
        : cfg_(cfg), rng_(substream(cfg.seed, stream)), sigma_(std::sqrt(0.5 * std::pow(10.0, -cfg.noise.csi_snr_db / 10.0)))
    {
    }

    void apply(csi::CsiFrame &f)
    {
        if (cfg_.noise.cfo_sfo)
        {
            const double theta = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng_);
            const double slope =
                std::uniform_real_distribution<double>(-cfg_.noise.sfo_slope_max, cfg_.noise.sfo_slope_max)(rng_);
            for (std::size_t s = 0; s < csi::kSubcarriers; ++s)
            {
                const cplx rot = std::polar(1.0, theta + slope * static_cast<double>(s));
                for (std::size_t a = 0; a < csi::kRxAntennas; ++a)
                    f.at(a, s) *= rot;
            }
        }
        if (std::isfinite(cfg_.noise.csi_snr_db))
        {
            std::normal_distribution<double> n(0.0, sigma_);
            for (auto &h : f.h)
                h += cplx(n(rng_), n(rng_));
        }
    }

  private:
    const ScenarioConfig &cfg_;
    std::mt19937_64 rng_;
    double sigma_;
};

// Reflected-path contribution plus the LoS term at one instant.
void fill_frame(csi::CsiFrame &f, const ScenarioConfig &cfg, double path_len, double cos_alpha)
{
    const double d = cfg.scene.d_los();
    const double amp = cfg.dyn_amplitude * d / path_len;
    const double spacing = cfg.scene.antenna_spacing();
    for (std::size_t s = 0; s < csi::kSubcarriers; ++s)
    {
        const double k = 2.0 * kPi * subcarrier_freq(cfg, s) / kSpeedOfLight;
        const cplx stat = std::polar(1.0, -k * d);
        for (std::size_t a = 0; a < csi::kRxAntennas; ++a)
            f.at(a, s) = stat + std::polar(amp, -k * path_len + k * static_cast<double>(a) * spacing * cos_alpha);
    }
}

struct FootSample
{
    double cop = 0.45;
    double width = 0.3;
    double env = 1.0;
};

class FootModel
{
  public:
    FootModel(const GroundTruth &gt, const ScenarioConfig &cfg, insole::Foot foot) : cfg_(cfg)
    {
        for (std::size_t i = 0; i < gt.step_times.size(); ++i)
            if (gt.step_feet[i] == foot)
                toe_offs_.push_back(gt.step_times[i]);
        const double cycle = 2.0 * gt.stride / gt.speed;
        swing_ = cfg.gait.swing_fraction * cycle;
        stance_ = cycle - swing_;
    }

    FootSample at(double t) const
    {
        const auto &g = cfg_.gait;
        const double roll = 0.5 * stance_;
        const double unload = g.unload_fraction * stance_;
        if (toe_offs_.empty() || t < toe_offs_.front() - roll)
            return standing(t);
        if (t < toe_offs_.front())
        {
            const double u = (t - (toe_offs_.front() - roll)) / roll;
            return {g.standing_cop + (0.9 - g.standing_cop) * u, g.standing_width + (g.stance_width - g.standing_width) * u,
                    std::min(1.0, (toe_offs_.front() - t) / unload)};
        }
        const auto it = std::upper_bound(toe_offs_.begin(), toe_offs_.end(), t) - 1;
        const double strike = *it + swing_;
        if (t < strike)
            return {0.9, g.stance_width, 0.0};
        const double load_in = std::min(1.0, (t - strike) / (0.1 * stance_));
        if (it + 1 != toe_offs_.end())
        {
            const double next = *(it + 1);
            const double u = (t - strike) / (next - strike);
            return {0.1 + 0.8 * u, g.stance_width, std::min({1.0, load_in, (next - t) / unload})};
        }
        const double v = std::min(1.0, 2.0 * (t - strike) / stance_);
        return {0.1 + (g.standing_cop - 0.1) * v, g.stance_width + (g.standing_width - g.stance_width) * v, load_in};
    }

  private:
    FootSample standing(double t) const
    {
        const auto &g = cfg_.gait;
        const auto &tl = cfg_.timeline;
        constexpr double forefoot = 0.85;
        const double t0 = tl.gesture_start, t1 = t0 + tl.gesture_ramp, t2 = t1 + tl.gesture_hold,
                     t3 = t2 + tl.gesture_ramp;
        double cop = g.standing_cop;
        if (t >= t0 && t < t1)
            cop += (forefoot - g.standing_cop) * (t - t0) / tl.gesture_ramp;
        else if (t >= t1 && t < t2)
            cop = forefoot;
        else if (t >= t2 && t < t3)
            cop = forefoot - (forefoot - g.standing_cop) * (t - t2) / tl.gesture_ramp;
        return {cop, g.standing_width, 1.0};
    }

    const ScenarioConfig &cfg_;
    std::vector<double> toe_offs_;
    double swing_ = 0.0;
    double stance_ = 0.0;
};

insole::PressureFrame pressure_frame(const FootSample &fs, const insole::SensorLayout &layout, double load,
                                     double noise, std::mt19937_64 &rng)
{
    insole::PressureFrame f;
    std::array<double, insole::kSensors> w{};
    double sum = 0.0;
    for (std::size_t i = 0; i < insole::kSensors; ++i)
    {
        const double z = (layout.y[i] - fs.cop) / fs.width;
        w[i] = std::exp(-0.5 * z * z);
        sum += w[i];
    }
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t i = 0; i < insole::kSensors; ++i)
    {
        const double clean = load * fs.env * w[i] / sum;
        f.p[i] = std::max(0.0, clean * (1.0 + noise * n(rng)));
    }
    return f;
}

} // namespace

void ScenarioConfig::validate() const
{
    if (!(speed > 0.0))
        throw Error(Errc::BadScenario, "speed must be positive");
    if (!(stride > 0.0))
        throw Error(Errc::BadScenario, "stride must be positive");
    if (!(csi_rate > 0.0 && pressure_rate > 0.0 && gt_rate > 0.0))
        throw Error(Errc::BadScenario, "sampling rates must be positive");
    if (!(gait.swing_fraction > 0.0 && gait.swing_fraction < 0.5))
        throw Error(Errc::BadScenario, "swing fraction must lie in (0, 0.5)");
    if (!(dyn_amplitude >= 0.0))
        throw Error(Errc::BadScenario, "dynamic amplitude must be non-negative");
    if (!ellipse_arc)
    {
        if (waypoints.size() < 2)
            throw Error(Errc::BadScenario, "need at least 2 waypoints, got " + std::to_string(waypoints.size()));
        for (std::size_t i = 0; i < waypoints.size(); ++i)
            if (!scene.area().contains(waypoints[i]))
                throw Error(Errc::BadScenario, "waypoint " + std::to_string(i) + " (" + std::to_string(waypoints[i].x) +
                                                   ", " + std::to_string(waypoints[i].y) + ") outside the area");
    }
}

Polyline::Polyline(std::vector<Point2> pts) : pts_(std::move(pts))
{
    if (pts_.size() < 2)
        throw Error(Errc::BadScenario, "a path needs at least 2 points");
    cum_.push_back(0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i)
        cum_.push_back(cum_.back() + distance(pts_[i - 1], pts_[i]));
}

Point2 Polyline::at(double s) const
{
    if (s <= 0.0)
        return pts_.front();
    if (s >= length())
        return pts_.back();
    const auto i = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin()) - 1;
    const double seg = cum_[i + 1] - cum_[i];
    const double u = seg > 0.0 ? (s - cum_[i]) / seg : 0.0;
    return pts_[i] + u * (pts_[i + 1] - pts_[i]);
}

double Polyline::heading_at(double s) const
{
    auto i = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin());
    i = std::clamp<std::size_t>(i, 1, pts_.size() - 1) - 1;
    // Skip zero-length segments forward, then backward at the end of the path.
    std::size_t j = i;
    while (j + 1 < pts_.size() - 1 && cum_[j + 1] == cum_[j])
        ++j;
    while (j > 0 && cum_[j + 1] == cum_[j])
        --j;
    const Point2 d = pts_[j + 1] - pts_[j];
    return std::atan2(d.y, d.x);
}

Point2 GroundTruth::position_at(double t) const
{
    const double s = std::clamp((t - walk_start) * speed, 0.0, static_cast<double>(steps()) * stride);
    return path.at(s);
}

double GroundTruth::heading_at(double t) const
{
    const double s = std::clamp((t - walk_start) * speed, 0.0, static_cast<double>(steps()) * stride);
    return path.heading_at(std::min(s, std::max(0.0, static_cast<double>(steps()) * stride - 1e-9)));
}

std::vector<Point2> ellipse_arc_points(const Scene &scene, const EllipseArc &arc, double spacing)
{
    const EllipseParams e = ellipse_from_path_length(arc.path_length, scene.d_los());
    const double approx = std::max(e.a, e.b) * std::abs(arc.to - arc.from);
    const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(approx / spacing)) + 1);
    std::vector<Point2> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double th = arc.from + (arc.to - arc.from) * static_cast<double>(i) / static_cast<double>(n - 1);
        pts.push_back(scene.to_world({0.5 * scene.d_los() + e.a * std::cos(th), e.b * std::sin(th)}));
    }
    return pts;
}

GroundTruth gen_trajectory(const ScenarioConfig &cfg)
{
    cfg.validate();
    std::vector<Point2> pts = cfg.ellipse_arc ? ellipse_arc_points(cfg.scene, *cfg.ellipse_arc) : cfg.waypoints;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!cfg.scene.area().contains(pts[i], 1e-6))
            throw Error(Errc::BadScenario, "path point " + std::to_string(i) + " outside the area");

    GroundTruth gt;
    gt.path = Polyline(std::move(pts));
    const auto n_steps = static_cast<std::size_t>(std::floor(gt.path.length() / cfg.stride + 1e-9));
    if (n_steps == 0)
        throw Error(Errc::BadScenario, "path is shorter than one stride");

    const auto &tl = cfg.timeline;
    const double step_t = cfg.stride / cfg.speed;
    gt.speed = cfg.speed;
    gt.stride = cfg.stride;
    gt.walk_start = tl.gesture_start + 2.0 * tl.gesture_ramp + tl.gesture_hold + tl.stand_after;
    gt.duration = gt.walk_start + static_cast<double>(n_steps) * step_t + tl.tail;

    insole::Foot foot = cfg.gait.first_foot;
    for (std::size_t k = 0; k <= n_steps; ++k)
    {
        gt.step_times.push_back(gt.walk_start + static_cast<double>(k) * step_t);
        gt.step_feet.push_back(foot);
        foot = insole::other(foot);
    }

    const auto n = static_cast<std::size_t>(std::floor(gt.duration * cfg.gt_rate + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double t = static_cast<double>(i) / cfg.gt_rate;
        gt.times.push_back(t);
        gt.positions.push_back(gt.position_at(t));
        gt.headings.push_back(gt.heading_at(t));
    }
    return gt;
}

csi::CsiStream gen_csi(const GroundTruth &gt, const ScenarioConfig &cfg)
{
    const Scene &scene = cfg.scene;
    CsiNoise noise(cfg, 1);
    const auto n = static_cast<std::size_t>(std::floor(gt.duration * cfg.csi_rate + 1e-9)) + 1;
    csi::CsiStream out(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto &f = out[i];
        f.timestamp = static_cast<double>(i) / cfg.csi_rate;
        const Point2 p = scene.to_canonical(gt.position_at(f.timestamp));
        const double rr = std::hypot(p.x - scene.d_los(), p.y);
        const double cos_alpha = rr > 0.0 ? (p.x - scene.d_los()) / rr : 1.0;
        fill_frame(f, cfg, path_length(scene, p), cos_alpha);
        noise.apply(f);
    }
    return out;
}

csi::CsiStream gen_csi_constant_rate(const ScenarioConfig &cfg, double l0, double rate, double alpha_r,
                                     double duration)
{
    CsiNoise noise(cfg, 1);
    const auto n = static_cast<std::size_t>(std::floor(duration * cfg.csi_rate + 1e-9)) + 1;
    csi::CsiStream out(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto &f = out[i];
        f.timestamp = static_cast<double>(i) / cfg.csi_rate;
        fill_frame(f, cfg, l0 + rate * f.timestamp, std::cos(alpha_r));
        noise.apply(f);
    }
    return out;
}

csi::CsiStream gen_plane_wave(const ScenarioConfig &cfg, double alpha, std::size_t frames)
{
    CsiNoise noise(cfg, 4);
    const double spacing = cfg.scene.antenna_spacing();
    csi::CsiStream out(frames);
    for (std::size_t i = 0; i < frames; ++i)
    {
        auto &f = out[i];
        f.timestamp = static_cast<double>(i) / cfg.csi_rate;
        for (std::size_t s = 0; s < csi::kSubcarriers; ++s)
        {
            const double k = 2.0 * kPi * subcarrier_freq(cfg, s) / kSpeedOfLight;
            for (std::size_t a = 0; a < csi::kRxAntennas; ++a)
                f.at(a, s) = std::polar(1.0, k * static_cast<double>(a) * spacing * std::cos(alpha));
        }
        noise.apply(f);
    }
    return out;
}

PressurePair gen_pressure(const GroundTruth &gt, const insole::SensorLayout &layout, const ScenarioConfig &cfg)
{
    layout.validate();
    const FootModel left(gt, cfg, insole::Foot::Left);
    const FootModel right(gt, cfg, insole::Foot::Right);
    auto rng = substream(cfg.seed, 2);
    const auto n = static_cast<std::size_t>(std::floor(gt.duration * cfg.pressure_rate + 1e-9)) + 1;

    PressurePair out;
    out.left.reserve(n);
    out.right.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double ts = static_cast<double>(i) / cfg.pressure_rate;
        auto l = pressure_frame(left.at(ts), layout, cfg.gait.load_per_foot, cfg.noise.pressure_noise, rng);
        l.timestamp = ts;
        l.foot = insole::Foot::Left;
        out.left.push_back(l);
        // The right insole's clock lags: the frame stamped ts was taken at ts + offset.
        auto r = pressure_frame(right.at(ts + cfg.insole_offset), layout, cfg.gait.load_per_foot,
                                cfg.noise.pressure_noise, rng);
        r.timestamp = ts;
        r.foot = insole::Foot::Right;
        out.right.push_back(r);
    }
    return out;
}

std::vector<TargetState> true_states(const GroundTruth &gt, const Scene &scene)
{
    std::vector<TargetState> out;
    const std::size_t n = gt.steps();
    for (std::size_t k = 0; k <= n; ++k)
    {
        const Point2 p = scene.to_canonical(gt.path.at(static_cast<double>(k) * gt.stride));
        const double s_ahead = std::min(static_cast<double>(k), static_cast<double>(n) - 0.5) * gt.stride;
        out.push_back({p.x, p.y, scene.heading_to_canonical(gt.path.heading_at(s_ahead))});
    }
    return out;
}

std::vector<StepMeasurement> gen_measurements(const GroundTruth &gt, const ScenarioConfig &cfg)
{
    const Scene &scene = cfg.scene;
    const auto truth = true_states(gt, scene);
    auto rng = substream(cfg.seed, 3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<StepMeasurement> out;
    for (std::size_t k = 0; k + 1 < truth.size(); ++k)
    {
        const TargetState &s = truth[k];
        StepMeasurement m;
        m.step.t_start = gt.step_times[k];
        m.step.t_end = gt.step_times[k + 1];
        m.step.duration = m.step.t_end - m.step.t_start;
        m.step.stride = gt.stride;
        m.step.speed = gt.stride / m.step.duration;
        m.step.foot = gt.step_feet[k];

        const double n_l = n(rng), n_r = n(rng), n_a = n(rng);
        m.delta_l = path_length(scene, truth[k + 1].pos()) - path_length(scene, s.pos()) +
                    cfg.noise.doppler_sigma * m.step.duration * n_l;
        const DeviceAngles ang = angles_from_position(scene, s.pos());
        m.v_ratio = std::clamp(doppler_ratio(ang.alpha_t, ang.alpha_r, s.phi) +
                                   cfg.noise.doppler_sigma / m.step.speed * n_r,
                               -2.0, 2.0);
        // A linear array only sees the angle from its axis.
        m.alpha_r_meas = std::clamp(std::abs(ang.alpha_r) + cfg.noise.aoa_sigma * n_a, 0.0, kPi);
        out.push_back(m);
    }
    return out;
}

std::vector<Point2> random_straight_walk(const Scene &scene, int steps, double stride, std::mt19937_64 &rng,
                                         double min_ratio, double min_y)
{
    const Rect &area = scene.area();
    std::uniform_real_distribution<double> ux(area.xmin, area.xmax), uy(area.ymin, area.ymax), uphi(-kPi, kPi);
    for (int attempt = 0; attempt < 100000; ++attempt)
    {
        const Point2 start{ux(rng), uy(rng)};
        const double phi = uphi(rng);
        const Point2 dir{std::cos(phi), std::sin(phi)};
        bool ok = true;
        for (int k = 0; k <= steps && ok; ++k)
        {
            const Point2 w = start + (stride * k) * dir;
            const Point2 c = scene.to_canonical(w);
            ok = area.contains(w, 0.0) && std::abs(c.y) >= min_y;
            if (ok && k < steps)
            {
                const DeviceAngles a = angles_from_position(scene, c);
                ok = std::abs(doppler_ratio(a.alpha_t, a.alpha_r, scene.heading_to_canonical(phi))) >= min_ratio;
            }
        }
        if (ok)
            return {start, start + (stride * steps) * dir};
    }
    throw Error(Errc::BadScenario, "no straight walk satisfies the constraints");
}

Bundle simulate(const ScenarioConfig &cfg, const insole::SensorLayout &layout)
{
    Bundle b;
    b.gt = gen_trajectory(cfg);
    b.csi = gen_csi(b.gt, cfg);
    b.pressure = gen_pressure(b.gt, layout, cfg);
    return b;
}

} // namespace fusetrack::sim
