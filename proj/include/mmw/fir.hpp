// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "core.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace mmw::fir {

inline double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    return std::sin(pi * x) / (pi * x);
}

// Linear-phase windowed-sinc lowpass (Hamming), normalized to unit DC gain.
inline std::vector<double> design_lowpass(double cutoff_hz, int num_taps, double sample_rate)
{
    if (num_taps < 1 || num_taps % 2 == 0)
        throw Error(ErrorCode::EvenTaps, "num_taps must be odd and positive, got " + std::to_string(num_taps));
    if (!(sample_rate > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0))
        throw Error(ErrorCode::InvalidCutoff, "cutoff must lie in (0, sample_rate/2)");

    const double fc = cutoff_hz / sample_rate;  // cycles/sample
    const int m = num_taps - 1;
    std::vector<double> h(static_cast<std::size_t>(num_taps));
    double sum = 0.0;
    for (int k = 0; k <= m / 2; ++k) {
        const double n = k - m / 2.0;
        const double w = m == 0 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * pi * k / m);
        const double v = 2.0 * fc * sinc(2.0 * fc * n) * w;
        h[static_cast<std::size_t>(k)] = v;
        h[static_cast<std::size_t>(m - k)] = v;
    }
    for (double v : h)
        sum += v;
    for (double& v : h)
        v /= sum;
    return h;
}

// Magnitude response of an FIR at a normalized frequency (cycles/sample).
inline double magnitude_response(std::span<const double> coeffs, double f_norm)
{
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        acc += coeffs[k] * std::polar(1.0, -2.0 * pi * f_norm * static_cast<double>(k));
    return std::abs(acc);
}

// Convolution with the group delay of (N-1)/2 samples removed; out-of-range
// input samples are treated as zero. Output has the input's length.
template <class T>
std::vector<T> apply_filter(std::span<const T> x, std::span<const double> coeffs)
{
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto taps = static_cast<std::ptrdiff_t>(coeffs.size());
    const std::ptrdiff_t delay = (taps - 1) / 2;
    std::vector<T> y(x.size(), T{});
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        T acc{};
        const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, i + delay - (n - 1));
        const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(taps - 1, i + delay);
        for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k)
            acc += coeffs[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(i + delay - k)];
        y[static_cast<std::size_t>(i)] = acc;
    }
    return y;
}

template <class T>
std::vector<T> apply_filter(const std::vector<T>& x, const std::vector<double>& coeffs)
{
    return apply_filter(std::span<const T>(x), std::span<const double>(coeffs));
}

} // namespace mmw::fir
