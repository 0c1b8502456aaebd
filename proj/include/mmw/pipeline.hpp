// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "antenna.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "geo.hpp"
#include "pathloss.hpp"
#include "sounder.hpp"

#include <json.hpp>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace mmw::pipeline {

// Per-capture antenna misalignment (offset of the true link direction from
// each horn's boresight).
struct AlignmentSample {
    std::int64_t time_ns = 0;
    double tx_az_offset_deg = 0.0, tx_el_offset_deg = 0.0;
    double rx_az_offset_deg = 0.0, rx_el_offset_deg = 0.0;
};

struct LosLabel {
    std::int64_t time_ns = 0;
    bool los = true;
};

inline constexpr std::string_view alignment_header =
    "time_ns,tx_az_offset_deg,tx_el_offset_deg,rx_az_offset_deg,rx_el_offset_deg";

inline std::vector<AlignmentSample> read_alignment(std::istream& in)
{
    const csv::Table t = csv::read(in);
    const std::size_t c0 = t.column("time_ns"), c1 = t.column("tx_az_offset_deg"), c2 = t.column("tx_el_offset_deg"),
                      c3 = t.column("rx_az_offset_deg"), c4 = t.column("rx_el_offset_deg");
    std::vector<AlignmentSample> out;
    for (const auto& r : t.rows)
        out.push_back({csv::to_int(r[c0]), csv::to_double(r[c1]), csv::to_double(r[c2]), csv::to_double(r[c3]),
                       csv::to_double(r[c4])});
    return out;
}

inline void write_alignment(std::ostream& out, std::span<const AlignmentSample> rows)
{
    out << alignment_header << '\n';
    for (const auto& a : rows)
        out << a.time_ns << ',' << csv::fmt(a.tx_az_offset_deg) << ',' << csv::fmt(a.tx_el_offset_deg) << ','
            << csv::fmt(a.rx_az_offset_deg) << ',' << csv::fmt(a.rx_el_offset_deg) << '\n';
}

inline std::vector<LosLabel> read_los(std::istream& in)
{
    const csv::Table t = csv::read(in);
    const std::size_t c0 = t.column("time_ns"), c1 = t.column("los");
    std::vector<LosLabel> out;
    for (const auto& r : t.rows)
        out.push_back({csv::to_int(r[c0]), csv::to_int(r[c1]) != 0});
    return out;
}

inline void write_los(std::ostream& out, std::span<const LosLabel> rows)
{
    out << "time_ns,los\n";
    for (const auto& l : rows)
        out << l.time_ns << ',' << (l.los ? 1 : 0) << '\n';
}

struct LogRecord {
    std::string level;  // info | warning | error
    std::string code;
    std::string message;
    std::optional<std::size_t> segment;

    nlohmann::ordered_json json() const
    {
        nlohmann::ordered_json j{{"level", level}, {"code", code}, {"message", message}};
        if (segment)
            j["segment"] = *segment;
        return j;
    }
};

struct ProcessInputs {
    std::vector<sounder::PowerDelayProfile> segments;
    std::vector<geo::GeoFix> tx_track;  // a single fix means a static Tx
    std::vector<geo::GeoFix> rx_track;
    std::vector<AlignmentSample> alignment;
    std::vector<LosLabel> los;
    sounder::CalibrationMap calibration;
    double gain_setting_db = 76.0;
    antenna::AntennaModel antenna = antenna::default_horn();
    sounder::SounderSpec spec;
};

struct ProcessOptions {
    sounder::ProcessingConfig processing;
    std::int64_t max_skew_ns = 50'000'000;
    unsigned threads = 1;
};

struct ProcessOutput {
    std::vector<pathloss::PathlossSample> samples;  // time order
    std::vector<std::pair<std::size_t, sounder::ProcessedPdp>> profiles;  // by segment index
    std::vector<LogRecord> log;
};

namespace detail {

template <class T>
std::optional<std::size_t> nearest_by_time(const std::vector<T>& rows, std::int64_t t, std::int64_t max_skew)
{
    std::optional<std::size_t> best;
    std::int64_t best_skew = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::int64_t s = std::abs(rows[i].time_ns - t);
        if (s <= max_skew && (!best || s < best_skew)) {
            best = i;
            best_skew = s;
        }
    }
    return best;
}

struct SegmentResult {
    std::optional<pathloss::PathlossSample> sample;
    std::optional<sounder::ProcessedPdp> profile;
    std::vector<LogRecord> log;
};

inline SegmentResult process_segment(const ProcessInputs& in, const ProcessOptions& opt, std::size_t k)
{
    SegmentResult r;
    const auto& seg = in.segments[k];
    const std::int64_t t = seg.start_time_ns;
    const auto rx = geo::nearest_fix(in.rx_track, t, opt.max_skew_ns);
    const auto tx = in.tx_track.size() == 1 ? std::optional<std::size_t>(0)
                                            : geo::nearest_fix(in.tx_track, t, opt.max_skew_ns);
    if (!rx || !tx) {
        r.log.push_back({"warning", "NoFixWithinSkew", "segment skipped: no geo fix within skew", k});
        return r;
    }
    try {
        const auto processed = sounder::process_pdp(seg, in.spec, opt.processing);
        r.profile = processed;
        const double prx = sounder::received_power(processed, in.calibration, in.gain_setting_db);
        pathloss::AntennaPointing tx_p{&in.antenna, 0.0, 0.0}, rx_p{&in.antenna, 0.0, 0.0};
        if (!in.alignment.empty()) {
            if (const auto a = nearest_by_time(in.alignment, t, opt.max_skew_ns)) {
                const auto& s = in.alignment[*a];
                tx_p = {&in.antenna, s.tx_az_offset_deg, s.tx_el_offset_deg};
                rx_p = {&in.antenna, s.rx_az_offset_deg, s.rx_el_offset_deg};
            } else {
                r.log.push_back({"warning", "NoAlignmentWithinSkew", "boresight alignment assumed", k});
            }
        }
        const auto pl = pathloss::measured_pathloss(in.spec, tx_p, rx_p, prx);
        if (pl.exceeds_measurable)
            r.log.push_back({"warning", "ExceedsMeasurable", "pathloss above the measurable limit", k});
        const auto sep = geo::distance(in.tx_track[*tx], in.rx_track[*rx]);
        pathloss::PathlossSample s{t, sep.d2d, sep.d3d, pl.pl_db, std::nullopt};
        if (!in.los.empty())
            if (const auto l = nearest_by_time(in.los, t, opt.max_skew_ns))
                s.los = in.los[*l].los;
        r.sample = s;
    } catch (const Error& e) {
        const bool soft = e.code() == ErrorCode::NoPeaksDetected;
        r.log.push_back({soft ? "warning" : "error", std::string(to_string(e.code())), e.what(), k});
    }
    return r;
}

} // namespace detail

// Segments are independent; results are merged in segment order, so the
// output does not depend on the thread count.
inline ProcessOutput run_process(const ProcessInputs& in, const ProcessOptions& opt)
{
    if (in.rx_track.empty() || in.tx_track.empty())
        throw Error(ErrorCode::NoTemporalOverlap, "geo logs are empty");
    const std::int64_t lo = in.rx_track.front().fix_time - opt.max_skew_ns;
    const std::int64_t hi = in.rx_track.back().fix_time + opt.max_skew_ns;
    const bool overlap = std::any_of(in.segments.begin(), in.segments.end(), [&](const auto& s) {
        return s.start_time_ns >= lo && s.start_time_ns <= hi;
    });
    if (!overlap)
        throw Error(ErrorCode::NoTemporalOverlap, "no I/Q segment falls within the geo log span");

    const std::size_t n = in.segments.size();
    std::vector<detail::SegmentResult> results(n);
    const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t k = 0; k < n; ++k)
            results[k] = detail::process_segment(in, opt, k);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < n; k += threads)
                    results[k] = detail::process_segment(in, opt, k);
            });
        for (auto& t : pool)
            t.join();
    }

    ProcessOutput out;
    for (std::size_t k = 0; k < n; ++k) {
        auto& r = results[k];
        if (r.profile)
            out.profiles.emplace_back(k, std::move(*r.profile));
        if (r.sample)
            out.samples.push_back(*r.sample);
        for (auto& l : r.log)
            out.log.push_back(std::move(l));
    }
    std::stable_sort(out.samples.begin(), out.samples.end(),
                     [](const auto& a, const auto& b) { return a.time_ns < b.time_ns; });
    return out;
}

// ---- synthetic measurement fixture -------------------------------------------

// A small drive with known geometry: a static rooftop Tx, Rx fixes at 10 Hz
// and one I/Q capture per `capture_stride` fixes. Captured paths follow a
// close-in law with shadowing so downstream fits have a known answer.
struct FixtureConfig {
    std::uint64_t seed = 7;
    std::size_t num_segments = 12;
    std::size_t bins_per_segment = 128;
    double path_loss_exponent = 2.1;
    double shadow_sigma_db = 2.0;
    double start_distance_m = 60.0;
    double step_m = 25.0;
    double calibration_offset_db = -100.0;  // measured = calculated + offset
    double noise_power_dbm = -95.0;
};

struct Fixture {
    std::vector<std::uint8_t> iq;
    std::vector<sounder::SegmentMeta> meta;
    std::vector<geo::GeoFix> tx_track, rx_track;
    std::vector<AlignmentSample> alignment;
    std::vector<LosLabel> los;
    std::vector<sounder::CalibrationPoint> calibration;
};

inline Fixture make_fixture(const FixtureConfig& cfg = {})
{
    const sounder::SounderSpec spec;
    const auto ant = antenna::default_horn();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Fixture fx;

    const std::int64_t t0 = 1'700'000'000'000'000'000LL;
    geo::GeoFix tx{40.767, -111.845, 1425.0};
    tx.fix_time = t0;
    fx.tx_track.push_back(tx);
    const geo::GeoFix ground{40.767, -111.845, 1400.0};

    const std::size_t fixes = cfg.num_segments * 10 + 10;
    for (std::size_t i = 0; i < fixes; ++i) {
        const double d = cfg.start_distance_m + cfg.step_m * static_cast<double>(i) / 10.0;
        geo::GeoFix f = geo::offset_fix(ground, {d * std::sin(deg2rad(30.0)), d * std::cos(deg2rad(30.0)), 2.0});
        f.heading = 30.0;
        f.speed = cfg.step_m;
        f.fix_time = t0 + static_cast<std::int64_t>(i) * 100'000'000LL;
        fx.rx_track.push_back(f);
    }

    for (double calc : {20.0, 30.0, 40.0, 50.0, 60.0})
        fx.calibration.push_back({spec.usrp_gain_db, calc, calc + cfg.calibration_offset_db});

    const double fs = spec.usrp_sampling_rate_sps;
    const std::size_t spb = sounder::samples_per_bin(spec, fs);
    const double noise_lin = db_to_linear(cfg.noise_power_dbm - cfg.calibration_offset_db);
    for (std::size_t k = 0; k < cfg.num_segments; ++k) {
        // Capture k sits 6 ms after fix 10k+5 (inside the default skew).
        const auto& rxf = fx.rx_track[10 * k + 5];
        const std::int64_t t = rxf.fix_time + 6'000'000LL;
        const auto sep = geo::distance(tx, rxf);
        const double pl = pathloss::fspl(1.0, 28.0) + 10.0 * cfg.path_loss_exponent * std::log10(sep.d3d) +
                          cfg.shadow_sigma_db * nd(rng);
        const double az_off = 1.5 * nd(rng), el_off = 0.8 * nd(rng);
        fx.alignment.push_back({t, az_off, el_off, -az_off, el_off});
        fx.los.push_back({t, k % 4 != 3});
        const double prx = spec.tx_power_dbm + antenna::gain_at(ant, az_off, el_off) +
                           antenna::gain_at(ant, -az_off, el_off) - pl;
        const double calc_total = prx - cfg.calibration_offset_db;

        // LOS tap at a fixed excess delay plus two weaker reflections whose
        // delays drift along the route; power split so the taps sum to the
        // received power.
        const std::size_t b0 = 10;
        const std::vector<std::pair<std::size_t, double>> taps{{b0, 0.0}, {b0 + 6 + k, -6.0}, {b0 + 20 + 2 * k, -9.0}};
        double share = 0.0;
        for (const auto& [b, rel] : taps)
            share += db_to_linear(rel);
        std::vector<std::complex<float>> samples(cfg.bins_per_segment * spb);
        for (std::size_t s = 0; s < samples.size(); ++s)
            samples[s] = {static_cast<float>(std::sqrt(noise_lin / 2.0) * nd(rng)),
                          static_cast<float>(std::sqrt(noise_lin / 2.0) * nd(rng))};
        for (const auto& [b, rel] : taps) {
            const double p = db_to_linear(calc_total) * db_to_linear(rel) / share;
            const double phase = 2.0 * pi * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const auto amp = std::polar(std::sqrt(p), phase);
            for (std::size_t s = b * spb; s < (b + 1) * spb; ++s)
                samples[s] += std::complex<float>(static_cast<float>(amp.real()), static_cast<float>(amp.imag()));
        }
        sounder::append_iq(fx.iq, samples);
        fx.meta.push_back({t, samples.size(), fs});
    }
    return fx;
}

inline void write_metadata(std::ostream& out, std::span<const sounder::SegmentMeta> meta)
{
    for (const auto& m : meta) {
        nlohmann::ordered_json j{{"start_time_ns", m.start_time_ns},
                                 {"num_samples", m.num_samples},
                                 {"sample_rate_sps", m.sample_rate_sps}};
        out << j.dump() << '\n';
    }
}

inline void write_calibration(std::ostream& out, std::span<const sounder::CalibrationPoint> pts)
{
    out << "gain_setting_db,calculated_db,measured_db\n";
    for (const auto& p : pts)
        out << csv::fmt(p.gain_setting_db) << ',' << csv::fmt(p.calculated_db) << ',' << csv::fmt(p.measured_db)
            << '\n';
}

} // namespace mmw::pipeline
