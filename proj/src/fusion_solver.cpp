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

#include "fusetrack/fusion_solver.hpp"
#include "fusetrack/error.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace fusetrack
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

// Terms of one step without exceptions. Returns false when the predicted ellipse degenerates.
bool step_terms(const TargetState &s, const StepMeasurement &m, const Scene &scene, const FusionConfig &cfg,
                ObjectiveTerms &out)
{
    const double d = scene.d_los();
    const double rt = std::hypot(s.x, s.y);
    const double rr = std::hypot(s.x - d, s.y);
    if (rt == 0.0 || rr == 0.0)
        return false;

    const double l_pred = rt + rr + m.delta_l;
    if (!(l_pred > d))
        return false;
    const double a = 0.5 * l_pred;
    const double b2 = a * a - 0.25 * d * d;
    const double c = std::cos(s.phi), sn = std::sin(s.phi);
    const double qx = s.x + m.step.stride * c - 0.5 * d;
    const double qy = s.y + m.step.stride * sn;
    const double eq = qx * qx / (a * a) + qy * qy / b2 - 1.0;
    out.ellipse = std::abs(eq) * a / (2.0 * cfg.sigma_l);

    // Path-length rate along the heading: (u_T + u_R) . v, identical to doppler_ratio.
    const double ratio = (s.x / rt + (s.x - d) / rr) * c + (s.y / rt + s.y / rr) * sn;
    out.ratio = std::abs(ratio - m.v_ratio) / (2.0 * cfg.sigma_ratio);

    if (m.alpha_r_meas)
    {
        const double al = *m.alpha_r_meas;
        out.line = std::abs((s.x - d) * std::sin(al) - s.y * std::cos(al)) / rr / cfg.sigma_aoa;
    }
    else
        out.line = 0.0;
    return true;
}

double weighted(const ObjectiveTerms &t, const FusionConfig &cfg)
{
    return cfg.w_ellipse * t.ellipse + cfg.w_line * t.line + cfg.w_ratio * t.ratio;
}

// Window cost with early exit once the running sum exceeds `bound`.
double window_cost(TargetState s, std::span<const StepMeasurement> window, const Scene &scene,
                   const FusionConfig &cfg, double bound = kInf)
{
    double total = 0.0;
    ObjectiveTerms t;
    for (const auto &m : window)
    {
        if (std::abs(s.y) < cfg.y_margin || !step_terms(s, m, scene, cfg, t))
            return kInf;
        total += weighted(t, cfg);
        if (total > bound)
            return kInf;
        s = propagate(s, m.step.stride);
    }
    return total;
}

struct Cell
{
    double cost;
    TargetState state;
};

std::vector<double> axis(double lo, double hi, double step)
{
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + static_cast<double>(i) * step;
    return v;
}

std::vector<double> heading_axis(double step)
{
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(2.0 * kPi / step)));
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j)
        v[j] = wrap_angle(static_cast<double>(j) * step);
    return v;
}

bool far_apart(const TargetState &a, const TargetState &b, double dxy, double dphi)
{
    return distance(a.pos(), b.pos()) > dxy || std::abs(wrap_angle(a.phi - b.phi)) > dphi;
}

struct SimplexCtx
{
    std::span<const StepMeasurement> window;
    const Scene *scene;
    const FusionConfig *cfg;
};

double simplex_f(const gsl_vector *v, void *params)
{
    const auto &ctx = *static_cast<const SimplexCtx *>(params);
    const TargetState s{gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2)};
    const Rect &area = ctx.scene->area();
    const Point2 w = ctx.scene->to_world(s.pos());
    const Point2 inside = area.clamp(w);
    const double outside = distance(w, inside);
    const double cost = window_cost(s, ctx.window, *ctx.scene, *ctx.cfg);
    if (!std::isfinite(cost))
        return 1e9;
    return outside > 0.0 ? cost + 1e6 * (1.0 + outside) : cost;
}

Cell refine(const Cell &start, std::span<const StepMeasurement> window, const Scene &scene, const FusionConfig &cfg)
{
    SimplexCtx ctx{window, &scene, &cfg};
    gsl_multimin_function fn{&simplex_f, 3, &ctx};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(3), gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(3), gsl_vector_free);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3), gsl_multimin_fminimizer_free);

    Cell best = start;
    double scale = 1.0;
    // Restarting from the converged point with a fresh simplex un-sticks Nelder-Mead on
    // the kinks of the absolute-value terms.
    for (int restart = 0; restart < 4; ++restart, scale *= 0.25)
    {
        gsl_vector_set(x.get(), 0, best.state.x);
        gsl_vector_set(x.get(), 1, best.state.y);
        gsl_vector_set(x.get(), 2, best.state.phi);
        gsl_vector_set(step.get(), 0, scale * cfg.grid_xy);
        gsl_vector_set(step.get(), 1, scale * cfg.grid_xy);
        gsl_vector_set(step.get(), 2, scale * cfg.grid_phi);
        if (gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get()) != GSL_SUCCESS)
            break;
        for (int iter = 0; iter < 2000; ++iter)
        {
            if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS)
                break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), cfg.refine_tol) == GSL_SUCCESS)
                break;
        }
        const double f = gsl_multimin_fminimizer_minimum(m.get());
        if (f < best.cost)
        {
            const gsl_vector *r = gsl_multimin_fminimizer_x(m.get());
            best = {f, {gsl_vector_get(r, 0), gsl_vector_get(r, 1), wrap_angle(gsl_vector_get(r, 2))}};
        }
    }
    return best;
}

struct HeadingCtx
{
    Point2 pos;
    const StepMeasurement *meas;
    const StepMeasurement *next;
    const Scene *scene;
    const FusionConfig *cfg;
};

// Step objective plus the next step's AoA constraint at the propagated point. Without the
// look-ahead, headings mirrored about the path-length gradient fit almost equally well.
double heading_cost(double phi, const HeadingCtx &ctx)
{
    const TargetState s{ctx.pos.x, ctx.pos.y, phi};
    ObjectiveTerms t;
    if (!step_terms(s, *ctx.meas, *ctx.scene, *ctx.cfg, t))
        return 1e12;
    double cost = weighted(t, *ctx.cfg);
    if (ctx.next && ctx.next->alpha_r_meas && ctx.cfg->w_line > 0.0)
    {
        const TargetState n = propagate(s, ctx.meas->step.stride);
        const double rr = std::hypot(n.x - ctx.scene->d_los(), n.y);
        if (rr > 0.0)
        {
            const double al = *ctx.next->alpha_r_meas;
            cost += ctx.cfg->w_line * std::abs((n.x - ctx.scene->d_los()) * std::sin(al) - n.y * std::cos(al)) / rr /
                    ctx.cfg->sigma_aoa;
        }
    }
    return cost;
}

double heading_cost_gsl(double phi, void *params) { return heading_cost(phi, *static_cast<const HeadingCtx *>(params)); }

double best_heading(const HeadingCtx &ctx, double previous)
{
    const double g = ctx.cfg->track_phi_grid;
    const std::vector<double> phis = heading_axis(g);
    const std::size_t n = phis.size();
    std::vector<double> f(n);
    for (std::size_t j = 0; j < n; ++j)
        f[j] = heading_cost(phis[j], ctx);

    std::unique_ptr<gsl_min_fminimizer, decltype(&gsl_min_fminimizer_free)> mz(
        gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent), gsl_min_fminimizer_free);
    gsl_function fn{&heading_cost_gsl, const_cast<HeadingCtx *>(&ctx)};

    std::vector<std::pair<double, double>> minima; // (cost, heading)
    for (std::size_t j = 0; j < n; ++j)
    {
        const double fl = f[(j + n - 1) % n], fr = f[(j + 1) % n];
        if (n > 2 && (f[j] > fl || f[j] > fr))
            continue;
        // Unwrapped around phis[j] so the bracket never straddles the branch cut.
        double phi = phis[j], fv = f[j];
        if (fl > fv && fr > fv &&
            gsl_min_fminimizer_set_with_values(mz.get(), &fn, phi, fv, phi - g, fl, phi + g, fr) == GSL_SUCCESS)
        {
            for (int iter = 0; iter < 100; ++iter)
            {
                if (gsl_min_fminimizer_iterate(mz.get()) != GSL_SUCCESS)
                    break;
                if (gsl_min_test_interval(gsl_min_fminimizer_x_lower(mz.get()), gsl_min_fminimizer_x_upper(mz.get()),
                                          1e-10, 0.0) == GSL_SUCCESS)
                    break;
            }
            if (gsl_min_fminimizer_f_minimum(mz.get()) < fv)
            {
                phi = gsl_min_fminimizer_x_minimum(mz.get());
                fv = gsl_min_fminimizer_f_minimum(mz.get());
            }
        }
        minima.emplace_back(fv, phi);
    }
    if (minima.empty())
        return wrap_angle(previous);

    // Without the look-ahead bearing the step is mirror-ambiguous, so minima within the
    // configured margin count as equal and the one closest to the previous heading wins.
    const bool look_ahead = ctx.next && ctx.next->alpha_r_meas && ctx.cfg->w_line > 0.0;
    double best_f = kInf;
    for (const auto &m : minima)
        best_f = std::min(best_f, m.first);
    const double tie = look_ahead ? 1e-9 * std::max(1.0, best_f) : ctx.cfg->heading_ambiguity;
    double best_phi = previous, best_d = kInf;
    for (const auto &[fv, phi] : minima)
    {
        const double d = std::abs(wrap_angle(phi - previous));
        if (fv <= best_f + tie && d < best_d)
        {
            best_d = d;
            best_phi = phi;
        }
    }
    return wrap_angle(best_phi);
}

} // namespace

void FusionConfig::validate() const
{
    if (w_ellipse < 0.0 || w_line < 0.0 || w_ratio < 0.0 || !(w_ellipse + w_line + w_ratio > 0.0))
        throw Error(Errc::BadConfig, "fusion weights must be non-negative with at least one positive");
    if (!(sigma_l > 0.0 && sigma_ratio > 0.0 && sigma_aoa > 0.0))
        throw Error(Errc::BadConfig, "fusion noise scales must be positive");
    if (!(grid_xy > 0.0 && grid_phi > 0.0 && refine_tol > 0.0 && track_phi_grid > 0.0))
        throw Error(Errc::BadConfig, "fusion resolutions must be positive");
    if (y_margin < 0.0)
        throw Error(Errc::BadConfig, "exclusion margin must be non-negative");
    if (window_steps < 2)
        throw Error(Errc::BadConfig, "window_steps must be at least 2");
    if (top_k < 1)
        throw Error(Errc::BadConfig, "top_k must be at least 1");
    if (!(heading_ambiguity >= 0.0))
        throw Error(Errc::BadConfig, "heading ambiguity margin must be non-negative");
    if (!(track_lost_threshold > 0.0 && reject_threshold > 0.0))
        throw Error(Errc::BadConfig, "residual thresholds must be positive");
}

ObjectiveTerms objective_terms(const TargetState &state, const StepMeasurement &meas, const Scene &scene,
                               const FusionConfig &cfg)
{
    if (std::abs(state.y) < cfg.y_margin)
        throw Error(Errc::OutOfRange, "state y=" + std::to_string(state.y) + " inside the exclusion margin");
    const double l_pred = path_length(scene, state.pos()) + meas.delta_l;
    const EllipseParams e = ellipse_from_path_length(l_pred, scene.d_los());
    const TargetState next = propagate(state, meas.step.stride);
    const DeviceAngles ang = angles_from_position(scene, state.pos());

    ObjectiveTerms t;
    t.ellipse = std::abs(ellipse_equation(e, scene.d_los(), next.pos())) * e.a / (2.0 * cfg.sigma_l);
    t.ratio = std::abs(doppler_ratio(ang.alpha_t, ang.alpha_r, state.phi) - meas.v_ratio) / (2.0 * cfg.sigma_ratio);
    if (meas.alpha_r_meas)
    {
        const double al = *meas.alpha_r_meas;
        const double rr = distance(state.pos(), scene.rx());
        t.line = std::abs((state.x - scene.d_los()) * std::sin(al) - state.y * std::cos(al)) / rr / cfg.sigma_aoa;
    }
    return t;
}

double objective(const TargetState &state, const StepMeasurement &meas, const Scene &scene, const FusionConfig &cfg)
{
    return weighted(objective_terms(state, meas, scene, cfg), cfg);
}

double window_objective(const TargetState &start, std::span<const StepMeasurement> window, const Scene &scene,
                        const FusionConfig &cfg)
{
    return window_cost(start, window, scene, cfg);
}

InitialEstimate estimate_initial_state(std::span<const StepMeasurement> meas, const Scene &scene,
                                       const FusionConfig &cfg)
{
    cfg.validate();
    if (meas.size() < 2)
        throw Error(Errc::InsufficientData, "initial estimation needs at least 2 steps, got " +
                                                std::to_string(meas.size()));
    const auto window = meas.first(std::min<std::size_t>(meas.size(), static_cast<std::size_t>(cfg.window_steps)));
    if (std::all_of(window.begin(), window.end(), [](const StepMeasurement &m) { return m.low_confidence; }))
        throw Error(Errc::NoFeasibleState, "no usable Doppler over the initial window (tangential blind spot)");

    const Rect &area = scene.area();
    const auto xs = axis(area.xmin, area.xmax, cfg.grid_xy);
    const auto ys = axis(area.ymin, area.ymax, cfg.grid_xy);
    const auto phis = heading_axis(cfg.grid_phi);

    std::vector<Cell> cells;
    for (double wx : xs)
        for (double wy : ys)
        {
            const Point2 p = scene.to_canonical({wx, wy});
            if (std::abs(p.y) < cfg.y_margin)
                continue;
            for (double phi : phis)
            {
                const TargetState s{p.x, p.y, phi};
                const double c = window_cost(s, window, scene, cfg);
                if (std::isfinite(c))
                    cells.push_back({c, s});
            }
        }
    if (cells.empty())
        throw Error(Errc::NoFeasibleState, "every grid cell is degenerate or inside the exclusion margin");

    std::sort(cells.begin(), cells.end(), [](const Cell &a, const Cell &b) { return a.cost < b.cost; });
    std::vector<Cell> seeds;
    for (const auto &c : cells)
    {
        if (std::all_of(seeds.begin(), seeds.end(), [&](const Cell &s) {
                return far_apart(c.state, s.state, 2.0 * cfg.grid_xy, 2.0 * cfg.grid_phi);
            }))
            seeds.push_back(c);
        if (seeds.size() >= static_cast<std::size_t>(cfg.top_k))
            break;
    }

    Cell best{kInf, {}};
    for (const auto &s : seeds)
    {
        const Cell r = refine(s, window, scene, cfg);
        if (r.cost < best.cost)
            best = r;
    }
    InitialEstimate out;
    out.state = best.state;
    out.residual = best.cost;
    out.rejected = best.cost / static_cast<double>(window.size()) > cfg.reject_threshold;
    return out;
}

Trajectory track(const TargetState &initial, std::span<const StepMeasurement> meas, const Scene &scene,
                 const FusionConfig &cfg, double initial_residual)
{
    cfg.validate();
    Trajectory traj;
    traj.times.push_back(meas.empty() ? 0.0 : meas.front().step.t_start);
    traj.states.push_back(initial);
    traj.residuals.push_back(initial_residual);

    int over = 0;
    for (std::size_t k = 0; k < meas.size(); ++k)
    {
        const TargetState &cur = traj.states.back();
        const HeadingCtx ctx{cur.pos(), &meas[k], k + 1 < meas.size() ? &meas[k + 1] : nullptr, &scene, &cfg};
        const double phi = best_heading(ctx, cur.phi);

        const TargetState s{cur.x, cur.y, phi};
        ObjectiveTerms t;
        const double residual = step_terms(s, meas[k], scene, cfg, t) ? weighted(t, cfg) : kInf;
        over = residual > cfg.track_lost_threshold ? over + 1 : 0;
        if (over >= 2)
            throw Error(Errc::TrackLost, "residual " + std::to_string(residual) + " above " +
                                             std::to_string(cfg.track_lost_threshold) + " at step " +
                                             std::to_string(k) + " and the one before");

        TargetState next = propagate(s, meas[k].step.stride);
        const Point2 clamped = scene.to_canonical(scene.area().clamp(scene.to_world(next.pos())));
        next.x = clamped.x;
        next.y = clamped.y;
        traj.times.push_back(meas[k].step.t_end);
        traj.states.push_back(next);
        traj.residuals.push_back(residual);
    }
    return traj;
}

OracleResult brute_force_oracle(std::span<const StepMeasurement> meas, const Scene &scene, const FusionConfig &cfg,
                                const OracleConfig &ocfg)
{
    cfg.validate();
    if (meas.empty())
        throw Error(Errc::InsufficientData, "oracle needs at least one step");
    const auto window = meas.first(std::min<std::size_t>(meas.size(), static_cast<std::size_t>(cfg.window_steps)));
    const Rect &area = scene.area();
    const auto xs = axis(area.xmin, area.xmax, ocfg.grid_xy);
    const auto ys = axis(area.ymin, area.ymax, ocfg.grid_xy);
    const auto phis = heading_axis(ocfg.grid_phi);

    // Exact branch-and-bound: all terms are non-negative, so a partial sum above the
    // running minimum plus the tolerance can never end inside the reported set.
    double best = kInf;
    std::vector<Cell> near;
    for (double wx : xs)
        for (double wy : ys)
        {
            const Point2 p = scene.to_canonical({wx, wy});
            for (double phi : phis)
            {
                const TargetState s{p.x, p.y, phi};
                const double c = window_cost(s, window, scene, cfg, best + ocfg.ambiguity_tol);
                if (!std::isfinite(c))
                    continue;
                best = std::min(best, c);
                near.push_back({c, s});
            }
        }
    if (near.empty())
        throw Error(Errc::NoFeasibleState, "every oracle cell is degenerate or inside the exclusion margin");

    std::erase_if(near, [&](const Cell &c) { return c.cost > best + ocfg.ambiguity_tol; });
    std::stable_sort(near.begin(), near.end(), [](const Cell &a, const Cell &b) { return a.cost < b.cost; });
    OracleResult out;
    out.best = near.front().state;
    out.residual = near.front().cost;
    for (const auto &c : near)
        if (std::all_of(out.ambiguity.begin(), out.ambiguity.end(), [&](const TargetState &a) {
                return far_apart(c.state, a, ocfg.distinct_xy, ocfg.distinct_phi);
            }))
            out.ambiguity.push_back(c.state);
    return out;
}

std::vector<StepMeasurement> build_measurements(std::span<const insole::StepEvent> steps,
                                                const csi::DopplerSeries &doppler, const csi::AoaSeries &aoa)
{
    std::vector<StepMeasurement> out;
    out.reserve(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k)
    {
        const auto &st = steps[k];
        if (!(st.speed > 0.0))
            throw Error(Errc::BadConfig, "step " + std::to_string(k) + " has no walking speed attached");
        StepMeasurement m;
        m.step = st;
        m.delta_l = csi::integrate_path_change(doppler, st.t_start, st.t_end);
        m.v_ratio = std::clamp(csi::doppler_at(doppler, st.t_start) / st.speed, -2.0, 2.0);

        std::size_t flagged = 0, total = 0;
        for (std::size_t i = 0; i < doppler.size(); ++i)
            if (doppler.times[i] >= st.t_start && doppler.times[i] <= st.t_end)
            {
                ++total;
                flagged += doppler.low_confidence[i] ? 1 : 0;
            }
        if (total == 0 && doppler.size() > 0)
        {
            const double mid = 0.5 * (st.t_start + st.t_end);
            std::size_t nearest = 0;
            for (std::size_t i = 1; i < doppler.size(); ++i)
                if (std::abs(doppler.times[i] - mid) < std::abs(doppler.times[nearest] - mid))
                    nearest = i;
            total = 1;
            flagged = doppler.low_confidence[nearest] ? 1 : 0;
        }
        m.low_confidence = 2 * flagged >= total && flagged > 0;

        if (k < aoa.size() && aoa.valid[k])
            m.alpha_r_meas = aoa.alpha_r[k];
        out.push_back(m);
    }
    return out;
}

} // namespace fusetrack
