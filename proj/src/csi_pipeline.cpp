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

#include "fusetrack/csi_pipeline.hpp"
#include "fusetrack/error.hpp"
#include "fusetrack/geometry.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_fft_complex.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fusetrack::csi
{

CsiFrame sanitize_phase(const CsiFrame &frame)
{
    CsiFrame out = frame;
    constexpr double n = static_cast<double>(kSubcarriers);
    constexpr double x_mean = 0.5 * (n - 1.0);
    double sxx = 0.0;
    for (std::size_t s = 0; s < kSubcarriers; ++s)
        sxx += (s - x_mean) * (s - x_mean);

    std::array<double, kSubcarriers> raw{}, phase{};
    for (std::size_t a = 0; a < kRxAntennas; ++a)
    {
        for (std::size_t s = 0; s < kSubcarriers; ++s)
            raw[s] = std::arg(frame.at(a, s));
        // Unwrap about the current line fit and refit until the unwrapping settles; at the
        // fixed point the residual steps lie in (-pi, pi], so a second pass is the identity.
        double slope = 0.0, intercept = 0.0;
        for (int iter = 0; iter < 16; ++iter)
        {
            std::array<double, kSubcarriers> next{};
            next[0] = raw[0];
            for (std::size_t s = 1; s < kSubcarriers; ++s)
                next[s] = next[s - 1] + slope + wrap_angle(raw[s] - raw[s - 1] - slope);
            const bool settled = iter > 0 && next == phase;
            phase = next;
            const double p_mean = std::accumulate(phase.begin(), phase.end(), 0.0) / n;
            double sxy = 0.0;
            for (std::size_t s = 0; s < kSubcarriers; ++s)
                sxy += (s - x_mean) * (phase[s] - p_mean);
            slope = sxy / sxx;
            intercept = p_mean - slope * x_mean;
            if (settled)
                break;
        }
        for (std::size_t s = 0; s < kSubcarriers; ++s)
            out.at(a, s) = std::polar(std::abs(frame.at(a, s)), phase[s] - (slope * s + intercept));
    }
    return out;
}

SubcarrierSeries conjugate_multiply(std::span<const CsiFrame> stream, std::size_t ant_a, std::size_t ant_b)
{
    if (ant_a == ant_b || ant_a >= kRxAntennas || ant_b >= kRxAntennas)
        throw Error(Errc::BadConfig, "conjugate multiplication needs two distinct antennas");
    SubcarrierSeries out(kSubcarriers, stream.size());
    for (std::size_t t = 0; t < stream.size(); ++t)
        for (std::size_t s = 0; s < kSubcarriers; ++s)
            out(s, t) = stream[t].at(ant_a, s) * std::conj(stream[t].at(ant_b, s));
    return out;
}

SubcarrierSeries csi_ratio(std::span<const CsiFrame> stream, std::size_t ant_num, std::size_t ant_den)
{
    SubcarrierSeries out = conjugate_multiply(stream, ant_num, ant_den);
    for (std::size_t t = 0; t < stream.size(); ++t)
        for (std::size_t s = 0; s < kSubcarriers; ++s)
        {
            const double p = std::norm(stream[t].at(ant_den, s));
            out(s, t) = p > 0.0 ? out(s, t) / p : cplx{};
        }
    return out;
}

namespace
{
bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

double sample_rate(std::span<const CsiFrame> stream)
{
    const double span = stream.back().timestamp - stream.front().timestamp;
    if (!(span > 0.0))
        throw Error(Errc::InsufficientData, "stream timestamps do not advance");
    return static_cast<double>(stream.size() - 1) / span;
}

struct Peak
{
    bool dominant = false;
    double freq_hz = 0.0;
    std::size_t bin = 0;
};

// Accumulated power spectrum of one detrended window of a [subcarrier][time] series.
void accumulate_spectrum(const SubcarrierSeries &series, std::size_t start, std::span<const double> taper,
                         std::vector<cplx> &buf, std::vector<double> &power, double &energy)
{
    const std::size_t n = taper.size();
    for (std::size_t s = 0; s < series.subcarriers(); ++s)
    {
        // Least-squares line removal: besides the static offset, slow drifts (the reflection
        // sweeping across the array without changing path length) would otherwise leak
        // through the taper's main lobe into the first bins past the DC cut.
        const double centre = 0.5 * static_cast<double>(n - 1);
        cplx mean{}, slope{};
        double tt = 0.0;
        for (std::size_t j = 0; j < n; ++j)
        {
            const double t = static_cast<double>(j) - centre;
            mean += series(s, start + j);
            slope += t * series(s, start + j);
            tt += t * t;
            energy += std::norm(series(s, start + j));
        }
        mean /= static_cast<double>(n);
        slope /= tt;
        for (std::size_t j = 0; j < n; ++j)
            buf[j] = (series(s, start + j) - mean - (static_cast<double>(j) - centre) * slope) * taper[j];
        gsl_fft_complex_radix2_forward(reinterpret_cast<double *>(buf.data()), 1, n);
        for (std::size_t k = 0; k < n; ++k)
            power[k] += std::norm(buf[k]);
    }
}

Peak pick_peak(std::span<const double> power, double fs, double energy, const DopplerConfig &cfg, double lambda)
{
    const std::size_t n = power.size();
    const double f_max = cfg.v_max / lambda;
    std::vector<double> band;
    band.reserve(n);
    Peak best;
    double best_power = -1.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        const double f = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) * fs /
                         static_cast<double>(n);
        if (std::abs(f) < cfg.dc_cut_hz || std::abs(f) > f_max)
            continue;
        band.push_back(power[k]);
        if (power[k] > best_power)
        {
            best_power = power[k];
            best.bin = k;
            best.freq_hz = f;
        }
    }
    if (band.empty())
        return best;
    auto mid = band.begin() + band.size() / 2;
    std::nth_element(band.begin(), mid, band.end());
    const double median = *mid;
    const double floor = 1e-14 * energy * static_cast<double>(n);
    const double pm = power[(best.bin + n - 1) % n];
    const double pp = power[(best.bin + 1) % n];
    // A maximum at the edge of the search band that keeps rising towards DC is leakage
    // from motion onset or drift, not a tone.
    const bool local_max = best_power >= pm && best_power >= pp;
    best.dominant = best_power > floor && best_power >= cfg.peak_ratio * median && local_max;
    if (!best.dominant)
        return best;

    // Gaussian (log-parabolic) interpolation between neighbouring bins.
    if (pm > 0.0 && pp > 0.0)
    {
        const double lm = std::log(pm), l0 = std::log(best_power), lp = std::log(pp);
        const double denom = lm - 2.0 * l0 + lp;
        if (denom < 0.0)
        {
            const double delta = std::clamp(0.5 * (lm - lp) / denom, -0.5, 0.5);
            best.freq_hz += delta * fs / static_cast<double>(n);
        }
    }
    return best;
}
} // namespace

DopplerSeries estimate_doppler_velocity(std::span<const CsiFrame> stream, const DopplerConfig &cfg, double lambda)
{
    if (!is_power_of_two(cfg.window) || cfg.hop == 0)
        throw Error(Errc::BadFilterParams, "STFT window must be a power of two and hop positive");
    if (stream.size() < cfg.window)
        throw Error(Errc::InsufficientData, "stream has " + std::to_string(stream.size()) +
                                                " frames, STFT window needs " + std::to_string(cfg.window));
    gsl_set_error_handler_off();

    const double fs = sample_rate(stream);
    CsiStream smoothed;
    std::span<const CsiFrame> source = stream;
    if (cfg.denoise)
    {
        smoothed = denoise_stream_amplitude(stream, cfg.sg_window, cfg.sg_order);
        source = smoothed;
    }
    // Pair (1,2) drives the estimate; pair (1,3) cross-checks it.
    const SubcarrierSeries primary = csi_ratio(source, 1, 0);
    const SubcarrierSeries check = csi_ratio(source, 2, 0);

    const std::size_t n = cfg.window;
    std::vector<double> taper(n);
    for (std::size_t j = 0; j < n; ++j)
        taper[j] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n));

    DopplerSeries out;
    std::vector<cplx> buf(n);
    std::vector<double> power(n), power_check(n);
    const double bin_hz = fs / static_cast<double>(n);
    for (std::size_t start = 0; start + n <= stream.size(); start += cfg.hop)
    {
        std::fill(power.begin(), power.end(), 0.0);
        std::fill(power_check.begin(), power_check.end(), 0.0);
        double energy = 0.0, energy_check = 0.0;
        accumulate_spectrum(primary, start, taper, buf, power, energy);
        accumulate_spectrum(check, start, taper, buf, power_check, energy_check);
        const Peak peak = pick_peak(power, fs, energy, cfg, lambda);
        const Peak peak_check = pick_peak(power_check, fs, energy_check, cfg, lambda);

        bool low = !peak.dominant;
        if (peak.dominant && peak_check.dominant && std::abs(peak.freq_hz - peak_check.freq_hz) > bin_hz)
            low = true;

        out.times.push_back(0.5 * (stream[start].timestamp + stream[start + n - 1].timestamp));
        out.v_d.push_back(peak.dominant ? std::clamp(-peak.freq_hz * lambda, -cfg.v_max, cfg.v_max) : 0.0);
        out.low_confidence.push_back(low ? 1 : 0);
    }
    return out;
}

double doppler_at(const DopplerSeries &series, double t)
{
    if (series.size() == 0)
        throw Error(Errc::InsufficientData, "empty Doppler series");
    const auto &ts = series.times;
    if (t <= ts.front())
        return series.v_d.front();
    if (t >= ts.back())
        return series.v_d.back();
    const std::size_t hi = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return (1.0 - w) * series.v_d[lo] + w * series.v_d[hi];
}

double integrate_path_change(const DopplerSeries &series, double t0, double t1)
{
    if (series.size() < 2)
        throw Error(Errc::InsufficientData, "Doppler series needs at least two samples");
    if (t1 < t0)
        return -integrate_path_change(series, t1, t0);
    const auto &ts = series.times;
    const double eps = 1e-9;
    if (t0 < ts.front() - eps || t1 > ts.back() + eps)
        throw Error(Errc::OutOfRange, "[" + std::to_string(t0) + ", " + std::to_string(t1) + "] outside support [" +
                                          std::to_string(ts.front()) + ", " + std::to_string(ts.back()) + "]");
    double acc = 0.0;
    double t_prev = t0;
    double v_prev = doppler_at(series, t0);
    auto it = std::upper_bound(ts.begin(), ts.end(), t0);
    for (; it != ts.end() && *it < t1; ++it)
    {
        const std::size_t i = static_cast<std::size_t>(it - ts.begin());
        acc += 0.5 * (v_prev + series.v_d[i]) * (*it - t_prev);
        t_prev = *it;
        v_prev = series.v_d[i];
    }
    acc += 0.5 * (v_prev + doppler_at(series, t1)) * (t1 - t_prev);
    return acc;
}

double aoa_from_phase_difference(double delta_theta, double lambda, double spacing)
{
    if (spacing > 0.5 * lambda * (1.0 + 1e-9))
        throw Error(Errc::AmbiguousAoa, "antenna spacing exceeds half a wavelength");
    const double c = delta_theta * lambda / (2.0 * kPi * spacing);
    if (std::abs(c) > 1.0 + 1e-9)
        throw Error(Errc::AmbiguousAoa, "phase difference implies |cos| = " + std::to_string(std::abs(c)));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double estimate_aoa(std::span<const CsiFrame> window, double lambda, double spacing)
{
    if (window.empty())
        throw Error(Errc::InsufficientData, "empty AoA window");
    cplx acc{};
    for (const auto &frame : window)
        for (std::size_t a = 0; a + 1 < kRxAntennas; ++a)
            for (std::size_t s = 0; s < kSubcarriers; ++s)
                acc += frame.at(a + 1, s) * std::conj(frame.at(a, s));
    return aoa_from_phase_difference(std::arg(acc), lambda, spacing);
}

std::optional<double> estimate_dynamic_aoa(std::span<const CsiFrame> window, double lambda, double spacing)
{
    constexpr double kMinPairSum = 0.3;
    if (window.size() < 2)
        return std::nullopt;
    const SubcarrierSeries r2 = csi_ratio(window, 1, 0);
    const SubcarrierSeries r3 = csi_ratio(window, 2, 0);
    const std::size_t n = window.size();

    cplx cross{}, static_sum{};
    double power = 0.0, total = 0.0;
    for (std::size_t s = 0; s < kSubcarriers; ++s)
    {
        cplx m2{}, m3{};
        for (std::size_t t = 0; t < n; ++t)
        {
            m2 += r2(s, t);
            m3 += r3(s, t);
        }
        static_sum += m2;
        m2 /= static_cast<double>(n);
        m3 /= static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t)
        {
            const cplx d2 = r2(s, t) - m2;
            const cplx d3 = r3(s, t) - m3;
            cross += d3 * std::conj(d2);
            power += std::norm(d2);
            total += std::norm(r2(s, t));
        }
    }
    if (!(power > 1e-16 * total) || std::abs(static_sum) == 0.0)
        return std::nullopt;

    // Dynamic parts of the two ratios differ by the factor (u + v), u and v being the unit
    // steering phasors of the reflection and of the static path.
    const cplx c = cross / power;
    // |u + v| collapses near endfire, where the outer antennas see the same phase and the
    // split into u and v is dominated by noise.
    if (std::abs(c) < kMinPairSum)
        return std::nullopt;
    const double mag = std::min(std::abs(c), 2.0);
    const cplx dir = std::polar(1.0, std::arg(c));
    const double perp = std::sqrt(std::max(0.0, 1.0 - 0.25 * mag * mag));
    const cplx v_hat = static_sum / std::abs(static_sum);
    const cplx u1 = dir * cplx(0.5 * mag, perp);
    const cplx u2 = dir * cplx(0.5 * mag, -perp);
    const cplx u = std::abs((mag * dir - u1) - v_hat) <= std::abs((mag * dir - u2) - v_hat) ? u1 : u2;
    try
    {
        return aoa_from_phase_difference(std::arg(u), lambda, spacing);
    }
    catch (const Error &)
    {
        return std::nullopt;
    }
}

AoaSeries estimate_aoa_series(std::span<const CsiFrame> stream, std::span<const double> at_times, const AoaConfig &cfg,
                              double lambda, double spacing)
{
    AoaSeries out;
    auto by_time = [](const CsiFrame &f, double t) { return f.timestamp < t; };
    for (double t : at_times)
    {
        const auto lo = std::lower_bound(stream.begin(), stream.end(), t - 0.5 * cfg.window_s, by_time);
        const auto hi = std::lower_bound(stream.begin(), stream.end(), t + 0.5 * cfg.window_s, by_time);
        std::optional<double> alpha;
        if (hi - lo >= 16)
            alpha = estimate_dynamic_aoa(stream.subspan(static_cast<std::size_t>(lo - stream.begin()),
                                                        static_cast<std::size_t>(hi - lo)),
                                         lambda, spacing);
        out.times.push_back(t);
        out.alpha_r.push_back(alpha.value_or(std::numeric_limits<double>::quiet_NaN()));
        out.valid.push_back(alpha ? 1 : 0);
    }
    return out;
}

} // namespace fusetrack::csi
