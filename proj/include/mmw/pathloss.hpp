// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "antenna.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "sounder.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mmw::pathloss {

struct LinkGeometry {
    double d2d = 0.0;    // m
    double d3d = 0.0;    // m
    double h_bs = 25.0;  // m
    double h_ut = 2.0;   // m
    double fc_ghz = 28.0;
    double street_width_m = 20.0;         // ITU NLOS only
    double avg_building_height_m = 20.0;  // ITU NLOS only

    void validate() const
    {
        if (!(d2d > 0.0) || !(d3d >= d2d))
            throw Error(ErrorCode::InvalidInput, "need d3d >= d2d > 0");
        if (!(h_ut > 0.0) || !(h_bs > h_ut))
            throw Error(ErrorCode::InvalidInput, "need h_bs > h_ut > 0");
        if (!(fc_ghz > 0.0))
            throw Error(ErrorCode::InvalidInput, "carrier must be > 0");
    }
};

// Geometry from a ground distance and the two antenna heights.
inline LinkGeometry make_geometry(double d2d, double h_bs = 25.0, double h_ut = 2.0, double fc_ghz = 28.0)
{
    LinkGeometry g;
    g.d2d = d2d;
    g.d3d = std::hypot(d2d, h_bs - h_ut);
    g.h_bs = h_bs;
    g.h_ut = h_ut;
    g.fc_ghz = fc_ghz;
    return g;
}

// Model output plus the validity-range warnings that applied. Out-of-range
// inputs are still evaluated.
struct ModelResult {
    double pl_db = 0.0;
    std::vector<std::string> warnings;

    bool in_range() const { return warnings.empty(); }
};

inline double fspl(double d_m, double fc_ghz)
{
    if (!(d_m > 0.0) || !(fc_ghz > 0.0))
        throw Error(ErrorCode::InvalidInput, "fspl needs d > 0 and fc > 0");
    return 20.0 * std::log10(4.0 * pi * d_m * fc_ghz * 1e9 / speed_of_light);
}

// Breakpoint distance with effective heights h - 1 m.
inline double breakpoint_distance(double h_bs, double h_ut, double fc_ghz)
{
    return 4.0 * (h_bs - 1.0) * (h_ut - 1.0) * fc_ghz * 1e9 / speed_of_light;
}

// ---- 3GPP TR 38.901 UMa (Table 7.4.1-1) ------------------------------------

namespace tr38901 {

inline double los_segment1(double d3d, double fc_ghz)
{
    return 28.0 + 22.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz);
}

inline double los_segment2(double d3d, double fc_ghz, double d_bp, double h_bs, double h_ut)
{
    return 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz) -
           9.0 * std::log10(d_bp * d_bp + (h_bs - h_ut) * (h_bs - h_ut));
}

inline double nlos_prime(double d3d, double fc_ghz, double h_ut)
{
    return 13.54 + 39.08 * std::log10(d3d) + 20.0 * std::log10(fc_ghz) - 0.6 * (h_ut - 1.5);
}

inline std::vector<std::string> range_warnings(const LinkGeometry& g)
{
    std::vector<std::string> w;
    if (g.d2d < 10.0 || g.d2d > 5000.0)
        w.push_back("TR38.901 UMa: d2d outside [10, 5000] m");
    if (g.h_ut < 1.5 || g.h_ut > 22.5)
        w.push_back("TR38.901 UMa: h_ut outside [1.5, 22.5] m");
    if (g.fc_ghz < 0.5 || g.fc_ghz > 100.0)
        w.push_back("TR38.901 UMa: fc outside [0.5, 100] GHz");
    return w;
}

} // namespace tr38901

inline ModelResult tr38901_uma_los(const LinkGeometry& g)
{
    g.validate();
    const double d_bp = breakpoint_distance(g.h_bs, g.h_ut, g.fc_ghz);
    ModelResult r;
    r.pl_db = g.d2d <= d_bp ? tr38901::los_segment1(g.d3d, g.fc_ghz)
                            : tr38901::los_segment2(g.d3d, g.fc_ghz, d_bp, g.h_bs, g.h_ut);
    r.warnings = tr38901::range_warnings(g);
    return r;
}

inline ModelResult tr38901_uma_nlos(const LinkGeometry& g)
{
    ModelResult r = tr38901_uma_los(g);
    r.pl_db = std::max(r.pl_db, tr38901::nlos_prime(g.d3d, g.fc_ghz, g.h_ut));
    return r;
}

// ---- ITU-R M.2135 UMa (Table A1-2) -----------------------------------------

namespace m2135 {

// The report prints the second-segment constant rounded to 7.8, which leaves
// a 0.054 dB step at the breakpoint. The unrounded value makes the two
// segments meet exactly.
inline double los_constant(bool published = false)
{
    return published ? 7.8 : 28.0 - 18.0 * std::log10(4e9 / speed_of_light);
}

inline double los_segment1(double d, double fc_ghz)
{
    return 22.0 * std::log10(d) + 28.0 + 20.0 * std::log10(fc_ghz);
}

inline double los_segment2(double d, double fc_ghz, double h_bs, double h_ut, bool published_constant = false)
{
    return 40.0 * std::log10(d) + los_constant(published_constant) - 18.0 * std::log10(h_bs - 1.0) -
           18.0 * std::log10(h_ut - 1.0) + 2.0 * std::log10(fc_ghz);
}

inline double nlos(double d, double fc_ghz, double h_bs, double h_ut, double w, double h)
{
    const double lh = std::log10(11.75 * h_ut);
    return 161.04 - 7.1 * std::log10(w) + 7.5 * std::log10(h) - (24.37 - 3.7 * (h / h_bs) * (h / h_bs)) * std::log10(h_bs) +
           (43.42 - 3.1 * std::log10(h_bs)) * (std::log10(d) - 3.0) + 20.0 * std::log10(fc_ghz) -
           (3.2 * lh * lh - 4.97);
}

inline std::vector<std::string> range_warnings(const LinkGeometry& g, bool nlos)
{
    std::vector<std::string> w;
    if (g.d3d < 10.0 || g.d3d > 5000.0)
        w.push_back("M.2135 UMa: d outside [10, 5000] m");
    if (g.fc_ghz < 2.0 || g.fc_ghz > 6.0)
        w.push_back("M.2135 UMa: fc outside [2, 6] GHz");
    if (nlos) {
        if (g.street_width_m < 5.0 || g.street_width_m > 50.0)
            w.push_back("M.2135 UMa NLOS: street width outside [5, 50] m");
        if (g.avg_building_height_m < 5.0 || g.avg_building_height_m > 50.0)
            w.push_back("M.2135 UMa NLOS: building height outside [5, 50] m");
        if (g.h_bs < 10.0 || g.h_bs > 150.0)
            w.push_back("M.2135 UMa NLOS: h_bs outside [10, 150] m");
        if (g.h_ut < 1.0 || g.h_ut > 10.0)
            w.push_back("M.2135 UMa NLOS: h_ut outside [1, 10] m");
    }
    return w;
}

} // namespace m2135

// Distance argument is d3d for both segments and the breakpoint switch.
inline ModelResult itu_m2135_uma_los(const LinkGeometry& g, bool published_constant = false)
{
    g.validate();
    const double d_bp = breakpoint_distance(g.h_bs, g.h_ut, g.fc_ghz);
    ModelResult r;
    r.pl_db = g.d3d <= d_bp ? m2135::los_segment1(g.d3d, g.fc_ghz)
                            : m2135::los_segment2(g.d3d, g.fc_ghz, g.h_bs, g.h_ut, published_constant);
    r.warnings = m2135::range_warnings(g, false);
    return r;
}

inline ModelResult itu_m2135_uma_nlos(const LinkGeometry& g)
{
    g.validate();
    ModelResult r;
    r.pl_db = m2135::nlos(g.d3d, g.fc_ghz, g.h_bs, g.h_ut, g.street_width_m, g.avg_building_height_m);
    r.warnings = m2135::range_warnings(g, true);
    return r;
}

enum class Model { Tr38901Los, Tr38901Nlos, M2135Los, M2135Nlos };

inline constexpr Model all_models[] = {Model::Tr38901Los, Model::Tr38901Nlos, Model::M2135Los, Model::M2135Nlos};

inline std::string_view model_name(Model m)
{
    switch (m) {
    case Model::Tr38901Los: return "TR38901_UMa_LOS";
    case Model::Tr38901Nlos: return "TR38901_UMa_NLOS";
    case Model::M2135Los: return "M2135_UMa_LOS";
    case Model::M2135Nlos: return "M2135_UMa_NLOS";
    }
    return "?";
}

inline ModelResult evaluate(Model m, const LinkGeometry& g)
{
    switch (m) {
    case Model::Tr38901Los: return tr38901_uma_los(g);
    case Model::Tr38901Nlos: return tr38901_uma_nlos(g);
    case Model::M2135Los: return itu_m2135_uma_los(g);
    case Model::M2135Nlos: return itu_m2135_uma_nlos(g);
    }
    return {};
}

// ---- measured pathloss ------------------------------------------------------

struct AntennaPointing {
    const antenna::AntennaModel* model = nullptr;
    double az_offset_deg = 0.0;
    double el_offset_deg = 0.0;

    double gain_dbi() const { return antenna::gain_at(*model, az_offset_deg, el_offset_deg); }
};

struct MeasuredPathloss {
    double pl_db = 0.0;
    bool exceeds_measurable = false;
};

// PL = P_tx - cable loss + G_tx + G_rx - P_rx
inline MeasuredPathloss measured_pathloss(const sounder::SounderSpec& spec, const AntennaPointing& tx,
                                          const AntennaPointing& rx, double prx_dbm)
{
    if (tx.model == nullptr || rx.model == nullptr)
        throw Error(ErrorCode::InvalidInput, "antenna model missing");
    MeasuredPathloss out;
    out.pl_db = spec.tx_power_dbm - spec.cable_loss_db + tx.gain_dbi() + rx.gain_dbi() - prx_dbm;
    out.exceeds_measurable = out.pl_db > spec.max_measurable_pathloss_db;
    return out;
}

// ---- close-in model ---------------------------------------------------------

struct PathlossSample {
    std::int64_t time_ns = 0;
    double d2d = 0.0;
    double d3d = 0.0;
    double pl_db = 0.0;
    std::optional<bool> los;
};

struct CiFit {
    double n = 0.0;
    double shadow_sigma_db = 0.0;
    double reference_distance_m = 1.0;
    double fc_ghz = 28.0;

    double predict(double d_m) const
    {
        return fspl(reference_distance_m, fc_ghz) + 10.0 * n * std::log10(d_m / reference_distance_m);
    }
};

// Closed-form least squares for the exponent with the FSPL(d0) anchor held
// fixed; sigma is the RMS residual.
inline CiFit fit_ci(std::span<const PathlossSample> samples, double d0_m = 1.0, double fc_ghz = 28.0)
{
    if (samples.size() < 2)
        throw Error(ErrorCode::InsufficientSamples, "CI fit needs >= 2 samples");
    const double anchor = fspl(d0_m, fc_ghz);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : samples) {
        if (!(s.d3d > d0_m))
            throw Error(ErrorCode::InvalidInput, "sample at " + csv::fmt(s.d3d) + " m is not beyond d0");
        const double x = 10.0 * std::log10(s.d3d / d0_m);
        sxx += x * x;
        sxy += x * (s.pl_db - anchor);
    }
    CiFit fit;
    fit.reference_distance_m = d0_m;
    fit.fc_ghz = fc_ghz;
    fit.n = sxy / sxx;
    double ss = 0.0;
    for (const auto& s : samples) {
        const double r = s.pl_db - fit.predict(s.d3d);
        ss += r * r;
    }
    fit.shadow_sigma_db = std::sqrt(ss / static_cast<double>(samples.size()));
    return fit;
}

// ---- sample CSV -------------------------------------------------------------

inline constexpr std::string_view sample_header = "time_ns,d2d_m,d3d_m,pl_db,los";

inline void write_samples(std::ostream& out, std::span<const PathlossSample> samples)
{
    out << sample_header << '\n';
    for (const auto& s : samples)
        out << s.time_ns << ',' << csv::fmt(s.d2d) << ',' << csv::fmt(s.d3d) << ',' << csv::fmt(s.pl_db) << ','
            << (s.los ? (*s.los ? "1" : "0") : "unknown") << '\n';
}

inline std::vector<PathlossSample> read_samples(std::istream& in)
{
    const csv::Table t = csv::read(in);
    const std::size_t ct = t.column("time_ns"), c2 = t.column("d2d_m"), c3 = t.column("d3d_m"), cp = t.column("pl_db"),
                      cl = t.column("los");
    std::vector<PathlossSample> out;
    for (const auto& r : t.rows) {
        PathlossSample s;
        s.time_ns = csv::to_int(r[ct]);
        s.d2d = csv::to_double(r[c2]);
        s.d3d = csv::to_double(r[c3]);
        s.pl_db = csv::to_double(r[cp]);
        if (r[cl] == "1" || r[cl] == "los" || r[cl] == "true")
            s.los = true;
        else if (r[cl] == "0" || r[cl] == "nlos" || r[cl] == "false")
            s.los = false;
        out.push_back(s);
    }
    return out;
}

} // namespace mmw::pathloss
