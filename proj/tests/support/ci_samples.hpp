// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include <mmw/pathloss.hpp>

#include <random>

namespace mmw::testing {

// Close-in law samples at log-uniform distances in [10, 5000] m.
inline std::vector<pathloss::PathlossSample> ci_samples(double n, double sigma, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logd(1.0, std::log10(5000.0));
    std::normal_distribution<double> shadow(0.0, sigma > 0.0 ? sigma : 1.0);
    std::vector<pathloss::PathlossSample> out;
    for (int i = 0; i < count; ++i) {
        pathloss::PathlossSample s;
        s.d3d = std::pow(10.0, logd(rng));
        s.d2d = s.d3d;
        s.pl_db = pathloss::fspl(1.0, 28.0) + 10.0 * n * std::log10(s.d3d) + (sigma > 0 ? shadow(rng) : 0.0);
        out.push_back(s);
    }
    return out;
}

} // namespace mmw::testing
