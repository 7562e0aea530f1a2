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

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace fusetrack::csi
{
namespace
{
// Weights w such that sum_j w[j] * y[j] equals the least-squares polynomial of the
// window evaluated at `offset` samples from the window centre.
std::vector<double> sg_weights(int window, int order, int offset)
{
    const int half = window / 2;
    const double scale = half > 0 ? static_cast<double>(half) : 1.0;
    Eigen::MatrixXd vander(window, order + 1);
    for (int j = 0; j < window; ++j)
    {
        const double x = (j - half) / scale;
        double p = 1.0;
        for (int k = 0; k <= order; ++k)
        {
            vander(j, k) = p;
            p *= x;
        }
    }
    Eigen::VectorXd basis(order + 1);
    double p = 1.0;
    for (int k = 0; k <= order; ++k)
    {
        basis(k) = p;
        p *= offset / scale;
    }
    // w = A (A^T A)^{-1} basis
    const Eigen::MatrixXd gram = vander.transpose() * vander;
    const Eigen::VectorXd solved = gram.ldlt().solve(basis);
    const Eigen::VectorXd w = vander * solved;
    return {w.data(), w.data() + w.size()};
}
} // namespace

std::vector<double> denoise_amplitude(std::span<const double> series, int window, int poly_order, EdgeMode edges)
{
    if (window <= 0 || window % 2 == 0 || poly_order < 0 || window <= poly_order ||
        series.size() < static_cast<std::size_t>(window))
        throw Error(Errc::BadFilterParams, "window=" + std::to_string(window) + " order=" + std::to_string(poly_order) +
                                               " length=" + std::to_string(series.size()));

    const int n = static_cast<int>(series.size());
    const int half = window / 2;
    std::vector<double> out(series.size());

    const auto centre = sg_weights(window, poly_order, 0);
    for (int i = half; i < n - half; ++i)
    {
        double acc = 0.0;
        for (int j = 0; j < window; ++j)
            acc += centre[j] * series[i - half + j];
        out[i] = acc;
    }

    if (edges == EdgeMode::PolyFit)
    {
        for (int i = 0; i < half; ++i)
        {
            const auto w = sg_weights(window, poly_order, i - half);
            double head = 0.0, tail = 0.0;
            for (int j = 0; j < window; ++j)
            {
                head += w[j] * series[j];
                // mirror image of the head weights for the right edge
                tail += w[j] * series[n - 1 - j];
            }
            out[i] = head;
            out[n - 1 - i] = tail;
        }
    }
    else
    {
        auto sample = [&](int k) {
            if (k < 0)
                k = -k;
            if (k >= n)
                k = 2 * (n - 1) - k;
            return series[k];
        };
        for (int i = 0; i < half; ++i)
        {
            for (int idx : {i, n - 1 - i})
            {
                double acc = 0.0;
                for (int j = 0; j < window; ++j)
                    acc += centre[j] * sample(idx - half + j);
                out[idx] = acc;
            }
        }
    }
    return out;
}

CsiStream denoise_stream_amplitude(std::span<const CsiFrame> stream, int window, int poly_order)
{
    CsiStream out(stream.begin(), stream.end());
    std::vector<double> amp(stream.size());
    for (std::size_t e = 0; e < kFrameEntries; ++e)
    {
        for (std::size_t t = 0; t < stream.size(); ++t)
            amp[t] = std::abs(stream[t].h[e]);
        const auto smooth = denoise_amplitude(amp, window, poly_order);
        for (std::size_t t = 0; t < stream.size(); ++t)
        {
            const double phase = std::arg(stream[t].h[e]);
            out[t].h[e] = std::polar(std::max(smooth[t], 0.0), phase);
        }
    }
    return out;
}

} // namespace fusetrack::csi
