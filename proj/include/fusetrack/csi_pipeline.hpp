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

#ifndef FUSETRACK_CSI_PIPELINE_HPP
#define FUSETRACK_CSI_PIPELINE_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fusetrack::csi
{

inline constexpr std::size_t kRxAntennas = 3;
inline constexpr std::size_t kSubcarriers = 30;
inline constexpr std::size_t kFrameEntries = kRxAntennas * kSubcarriers;

using cplx = std::complex<double>;

// One received packet: 1 Tx x 3 Rx x 30 subcarriers, antenna-major.
struct CsiFrame
{
    double timestamp = 0.0;
    std::array<cplx, kFrameEntries> h{};

    cplx &at(std::size_t antenna, std::size_t subcarrier) { return h[antenna * kSubcarriers + subcarrier]; }
    const cplx &at(std::size_t antenna, std::size_t subcarrier) const { return h[antenna * kSubcarriers + subcarrier]; }
};

using CsiStream = std::vector<CsiFrame>;

// ---- Savitzky-Golay smoothing ------------------------------------------------

enum class EdgeMode
{
    PolyFit, // evaluate the edge window's fitted polynomial (preserves polynomials of degree <= order)
    Mirror,  // reflect samples about the first/last sample
};

// Least-squares polynomial smoothing. Requires an odd window > poly_order >= 0 and
// series.size() >= window; throws Errc::BadFilterParams otherwise.
std::vector<double> denoise_amplitude(std::span<const double> series, int window, int poly_order,
                                      EdgeMode edges = EdgeMode::PolyFit);

// Smooths |h| along time for every antenna/subcarrier while keeping the phase.
CsiStream denoise_stream_amplitude(std::span<const CsiFrame> stream, int window, int poly_order);

// ---- Phase sanitization ------------------------------------------------------

// Per antenna: unwrap the phase across subcarriers and remove its least-squares line.
CsiFrame sanitize_phase(const CsiFrame &frame);

// ---- Cross-antenna products ----------------------------------------------------

// Dense [subcarrier][time] complex matrix.
class SubcarrierSeries
{
  public:
    SubcarrierSeries() = default;
    SubcarrierSeries(std::size_t n_subcarriers, std::size_t n_samples)
        : n_sub_(n_subcarriers), n_t_(n_samples), data_(n_subcarriers * n_samples) {}

    std::size_t subcarriers() const { return n_sub_; }
    std::size_t samples() const { return n_t_; }
    cplx &operator()(std::size_t s, std::size_t t) { return data_[s * n_t_ + t]; }
    const cplx &operator()(std::size_t s, std::size_t t) const { return data_[s * n_t_ + t]; }
    std::span<const cplx> row(std::size_t s) const { return {data_.data() + s * n_t_, n_t_}; }

  private:
    std::size_t n_sub_ = 0;
    std::size_t n_t_ = 0;
    std::vector<cplx> data_;
};

// out(s, t) = h[ant_a][s](t) * conj(h[ant_b][s](t)). Antenna indices are zero-based.
SubcarrierSeries conjugate_multiply(std::span<const CsiFrame> stream, std::size_t ant_a, std::size_t ant_b);

// conjugate_multiply normalized by |h[ant_b]|^2, i.e. the CSI ratio h[ant_a] / h[ant_b].
// The static-plus-reflection channel maps to v + (u - v) * z / (1 + z), which carries the
// reflection's Doppler on one side of the spectrum only.
SubcarrierSeries csi_ratio(std::span<const CsiFrame> stream, std::size_t ant_num, std::size_t ant_den);

// ---- Doppler velocity -----------------------------------------------------------

struct DopplerConfig
{
    std::size_t window = 1024;  // STFT window, samples (power of two)
    std::size_t hop = 128;      // STFT hop, samples
    double v_max = 4.0;         // m/s, bounds the peak search
    double dc_cut_hz = 1.5;     // bins with |f| below this are ignored
    double peak_ratio = 10.0;   // dominant peak must exceed this multiple of the band median
    bool denoise = true;        // Savitzky-Golay amplitude smoothing before the STFT
    int sg_window = 11;
    int sg_order = 2;
};

// Path-length rate per STFT window; positive means the reflected path is lengthening.
struct DopplerSeries
{
    std::vector<double> times;
    std::vector<double> v_d;
    std::vector<std::uint8_t> low_confidence; // 1 where no dominant peak was found (v_d forced to 0)

    std::size_t size() const { return times.size(); }
};

// Throws Errc::InsufficientData when the stream is shorter than one window and
// Errc::BadFilterParams when the window is not a power of two.
DopplerSeries estimate_doppler_velocity(std::span<const CsiFrame> stream, const DopplerConfig &cfg, double lambda);

// Trapezoidal integral of v_d over [t0, t1]; endpoints are linearly interpolated.
// Throws Errc::OutOfRange when [t0, t1] leaves the series support.
double integrate_path_change(const DopplerSeries &series, double t0, double t1);

// Linear interpolation of v_d at t (clamped to the support).
double doppler_at(const DopplerSeries &series, double t);

// ---- Angle of arrival ----------------------------------------------------------

// Uniform-linear-array phase-difference estimator over a window of frames.
// Returns the angle from the array axis in [0, pi]. Throws Errc::AmbiguousAoa when the
// spacing exceeds lambda/2 or the implied cosine leaves [-1, 1], Errc::InsufficientData
// for an empty window.
double estimate_aoa(std::span<const CsiFrame> window, double lambda, double spacing);

// Angle from a mean phase difference between adjacent antennas.
double aoa_from_phase_difference(double delta_theta, double lambda, double spacing);

// AoA of the moving reflector. The static component is cancelled through the CSI ratios
// of antennas 2 and 3 against antenna 1, which also removes any per-packet phase corruption.
// Returns nullopt when the window holds no time-varying component.
std::optional<double> estimate_dynamic_aoa(std::span<const CsiFrame> window, double lambda, double spacing);

struct AoaConfig
{
    double window_s = 0.4; // frames centred on the query instant
};

struct AoaSeries
{
    std::vector<double> times;
    std::vector<double> alpha_r;       // radians, [0, pi]; NaN where invalid
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return times.size(); }
};

// Dynamic AoA evaluated at the given instants.
AoaSeries estimate_aoa_series(std::span<const CsiFrame> stream, std::span<const double> at_times,
                              const AoaConfig &cfg, double lambda, double spacing);

} // namespace fusetrack::csi

#endif
