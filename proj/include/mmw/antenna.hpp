// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "core.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace mmw::antenna {

// One principal-plane cut, gain normalized so the peak is exactly 0 dB.
class PatternCut {
public:
    PatternCut() = default;

    // Validates ordering and renormalizes to a 0 dB peak.
    PatternCut(std::vector<double> angles_deg, std::vector<double> gains_db)
        : angles_(std::move(angles_deg)), gains_(std::move(gains_db))
    {
        if (angles_.empty() || angles_.size() != gains_.size())
            throw Error(ErrorCode::EmptyCut, "cut needs matching, non-empty angle and gain columns");
        for (std::size_t i = 1; i < angles_.size(); ++i)
            if (!(angles_[i] > angles_[i - 1]))
                throw Error(ErrorCode::NonMonotonicAngles, "angles must be strictly increasing");
        const double peak = *std::max_element(gains_.begin(), gains_.end());
        for (auto& g : gains_)
            g -= peak;
    }

    const std::vector<double>& angles() const { return angles_; }
    const std::vector<double>& gains() const { return gains_; }

    // True when the samples span a full turn, so interpolation wraps from the
    // last sample back to the first.
    bool periodic() const { return angles_.back() - angles_.front() >= 359.0 && angles_.back() - angles_.front() < 360.0; }

    // Relative gain (dB, <= 0) at an offset, linear in dB between samples.
    double at(double offset_deg) const
    {
        double x = offset_deg;
        if (periodic()) {
            x = angles_.front() + std::fmod(x - angles_.front(), 360.0);
            if (x < angles_.front())
                x += 360.0;
            if (x > angles_.back()) {
                const double span = angles_.front() + 360.0 - angles_.back();
                const double t = (x - angles_.back()) / span;
                return gains_.back() + t * (gains_.front() - gains_.back());
            }
        } else {
            if (x <= angles_.front())
                return gains_.front();
            if (x >= angles_.back())
                return gains_.back();
        }
        auto it = std::upper_bound(angles_.begin(), angles_.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - angles_.begin());
        if (hi == 0)
            return gains_.front();
        if (hi == angles_.size())
            return gains_.back();
        const std::size_t lo = hi - 1;
        const double t = (x - angles_[lo]) / (angles_[hi] - angles_[lo]);
        return gains_[lo] + t * (gains_[hi] - gains_[lo]);
    }

private:
    std::vector<double> angles_;
    std::vector<double> gains_;
};

struct AntennaModel {
    PatternCut azimuth_cut;
    PatternCut elevation_cut;
    double boresight_gain = 22.0;  // dBi
};

// Separable gain: boresight + azimuth term + elevation term.
inline double gain_at(const AntennaModel& model, double az_offset_deg, double el_offset_deg)
{
    return model.boresight_gain + model.azimuth_cut.at(wrap_180(az_offset_deg)) +
           model.elevation_cut.at(wrap_180(el_offset_deg));
}

// Linear amplitude (voltage) gain.
inline double amplitude_gain(const AntennaModel& model, double az_offset_deg, double el_offset_deg)
{
    return std::pow(10.0, gain_at(model, az_offset_deg, el_offset_deg) / 20.0);
}

// Width between the -3 dB crossings bracketing the global peak.
inline double hpbw(const PatternCut& cut)
{
    const auto& a = cut.angles();
    const auto& g = cut.gains();
    const std::size_t peak = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
    const double level = g[peak] - 3.0;

    std::optional<double> left, right;
    for (std::size_t i = peak; i-- > 0;) {
        if (g[i] <= level) {
            const double t = (level - g[i]) / (g[i + 1] - g[i]);
            left = a[i] + t * (a[i + 1] - a[i]);
            break;
        }
    }
    for (std::size_t i = peak + 1; i < g.size(); ++i) {
        if (g[i] <= level) {
            const double t = (g[i - 1] - level) / (g[i - 1] - g[i]);
            right = a[i - 1] + t * (a[i] - a[i - 1]);
            break;
        }
    }
    if (!left || !right)
        throw Error(ErrorCode::NoCrossingFound, "pattern never falls 3 dB below its peak on both sides");
    return *right - *left;
}

// Gaussian main lobe (quadratic in dB) with an exact -3 dB width, sampled
// over [-180, 180) and floored at floor_db.
inline PatternCut gaussian_cut(double hpbw_deg, double step_deg = 0.1, double floor_db = -40.0)
{
    std::vector<double> angles, gains;
    const auto n = static_cast<std::size_t>(std::llround(360.0 / step_deg));
    angles.reserve(n);
    gains.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -180.0 + static_cast<double>(i) * step_deg;
        const double u = 2.0 * x / hpbw_deg;
        angles.push_back(x);
        gains.push_back(std::max(floor_db, -3.0 * u * u));
    }
    return PatternCut(std::move(angles), std::move(gains));
}

// Surrogate WR-28 horn: 22 dBi, 10.1 deg azimuth and 11.5 deg elevation HPBW.
inline AntennaModel default_horn()
{
    return {gaussian_cut(10.1), gaussian_cut(11.5), 22.0};
}

// ---- pattern CSV ----------------------------------------------------------

inline PatternCut read_cut(std::istream& in)
{
    const csv::Table t = csv::read(in);
    const std::size_t ca = t.column("angle_deg"), cg = t.column("gain_db");
    std::vector<double> a, g;
    for (const auto& r : t.rows) {
        a.push_back(csv::to_double(r[ca]));
        g.push_back(csv::to_double(r[cg]));
    }
    return PatternCut(std::move(a), std::move(g));
}

// Single file with a `cut` column naming "azimuth" or "elevation".
inline AntennaModel read_pattern(std::istream& in, double boresight_gain_dbi = 22.0)
{
    const csv::Table t = csv::read(in);
    const std::size_t cc = t.column("cut"), ca = t.column("angle_deg"), cg = t.column("gain_db");
    std::vector<double> aa, ag, ea, eg;
    for (const auto& r : t.rows) {
        const double a = csv::to_double(r[ca]), g = csv::to_double(r[cg]);
        if (r[cc] == "azimuth" || r[cc] == "az") {
            aa.push_back(a);
            ag.push_back(g);
        } else if (r[cc] == "elevation" || r[cc] == "el") {
            ea.push_back(a);
            eg.push_back(g);
        } else {
            throw Error(ErrorCode::MalformedField, "unknown cut '" + r[cc] + "'");
        }
    }
    return {PatternCut(std::move(aa), std::move(ag)), PatternCut(std::move(ea), std::move(eg)), boresight_gain_dbi};
}

inline AntennaModel load_pattern(const std::string& path, double boresight_gain_dbi = 22.0)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_pattern(in, boresight_gain_dbi);
}

inline AntennaModel load_pattern(const std::string& az_path, const std::string& el_path, double boresight_gain_dbi = 22.0)
{
    std::ifstream az(az_path), el(el_path);
    if (!az || !el)
        throw Error(ErrorCode::IoError, "cannot open pattern files");
    return {read_cut(az), read_cut(el), boresight_gain_dbi};
}

} // namespace mmw::antenna
