// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "core.hpp"
#include "csv.hpp"
#include "fir.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmw::sounder {

// Sliding-correlator operating point. Defaults are the 28 GHz campaign sounder.
struct SounderSpec {
    double carrier_hz = 28e9;
    int pn_length = 2047;                     // chips
    double tx_chip_rate_cps = 400e6;
    double rx_chip_rate_cps = 399.95e6;
    double tx_power_dbm = 23.0;
    double antenna_gain_dbi = 22.0;
    double max_measurable_pathloss_db = 182.0;
    double usrp_sampling_rate_sps = 2e6;
    double usrp_gain_db = 76.0;
    double cable_loss_db = 0.0;               // fixed Tx-side feed loss

    void validate() const
    {
        if (!(rx_chip_rate_cps > 0.0) || !(tx_chip_rate_cps > rx_chip_rate_cps))
            throw Error(ErrorCode::InvalidInput, "need tx_chip_rate > rx_chip_rate > 0");
        if (pn_length < 1)
            throw Error(ErrorCode::InvalidInput, "pn_length must be >= 1");
    }
};

// gamma = f_tx / (f_tx - f_rx)
inline double slide_factor(const SounderSpec& s)
{
    s.validate();
    return s.tx_chip_rate_cps / (s.tx_chip_rate_cps - s.rx_chip_rate_cps);
}

inline double temporal_resolution(const SounderSpec& s)
{
    s.validate();
    return 1.0 / s.tx_chip_rate_cps;
}

inline double max_excess_delay(const SounderSpec& s)
{
    s.validate();
    return static_cast<double>(s.pn_length) / s.tx_chip_rate_cps;
}

// Duration of one time-dilated PN period at the receiver.
inline double dilated_period(const SounderSpec& s)
{
    s.validate();
    return static_cast<double>(s.pn_length) / (s.tx_chip_rate_cps - s.rx_chip_rate_cps);
}

struct PowerDelayProfile {
    std::int64_t start_time_ns = 0;
    double sample_rate_sps = 0.0;
    std::vector<std::complex<float>> samples;
};

struct ProcessedPdp {
    std::int64_t start_time_ns = 0;
    std::vector<double> delay_bins;  // excess delay, s
    std::vector<double> power_db;    // calculated (uncalibrated) power per bin
    double noise_floor_db = 0.0;
    double threshold_db = 0.0;
    std::vector<bool> peak_mask;
};

// ---- I/Q ingestion ----------------------------------------------------------

struct SegmentMeta {
    std::int64_t start_time_ns = 0;
    std::size_t num_samples = 0;
    double sample_rate_sps = 0.0;
};

inline std::vector<SegmentMeta> read_metadata(std::istream& in)
{
    std::vector<SegmentMeta> out;
    std::string line;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            SegmentMeta m;
            m.start_time_ns = j.at("start_time_ns").get<std::int64_t>();
            m.num_samples = j.at("num_samples").get<std::size_t>();
            m.sample_rate_sps = j.at("sample_rate_sps").get<double>();
            out.push_back(m);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedField, std::string("metadata record: ") + e.what());
        }
        if (!(out.back().sample_rate_sps > 0.0) || out.back().num_samples == 0)
            throw Error(ErrorCode::MetadataMismatch, "segment needs num_samples > 0 and sample_rate_sps > 0");
        if (out.size() > 1 && out.back().start_time_ns < out[out.size() - 2].start_time_ns)
            throw Error(ErrorCode::MetadataMismatch, "metadata not ordered by time");
    }
    return out;
}

// Little-endian float32 interleaved I,Q; segments laid out back to back in
// metadata order.
inline std::vector<PowerDelayProfile> load_iq(std::span<const std::uint8_t> data, std::span<const SegmentMeta> meta)
{
    if (data.size() % 8 != 0)
        throw Error(ErrorCode::TruncatedFile, std::to_string(data.size()) + " bytes is not a whole number of I/Q pairs");
    const std::size_t total = data.size() / 8;
    auto read_f32 = [&](std::size_t byte) {
        const std::uint32_t u = static_cast<std::uint32_t>(data[byte]) | static_cast<std::uint32_t>(data[byte + 1]) << 8 |
                                static_cast<std::uint32_t>(data[byte + 2]) << 16 |
                                static_cast<std::uint32_t>(data[byte + 3]) << 24;
        return std::bit_cast<float>(u);
    };
    std::vector<PowerDelayProfile> out;
    std::size_t offset = 0;
    for (const auto& m : meta) {
        if (offset + m.num_samples > total)
            throw Error(ErrorCode::MetadataMismatch, "segment at " + std::to_string(m.start_time_ns) +
                                                         " ns exceeds the data file");
        PowerDelayProfile p;
        p.start_time_ns = m.start_time_ns;
        p.sample_rate_sps = m.sample_rate_sps;
        p.samples.reserve(m.num_samples);
        for (std::size_t i = 0; i < m.num_samples; ++i) {
            const std::size_t b = (offset + i) * 8;
            p.samples.emplace_back(read_f32(b), read_f32(b + 4));
        }
        offset += m.num_samples;
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<PowerDelayProfile> load_iq(const std::string& data_path, const std::string& metadata_path)
{
    std::ifstream d(data_path, std::ios::binary);
    std::ifstream m(metadata_path);
    if (!d || !m)
        throw Error(ErrorCode::IoError, "cannot open " + data_path + " or " + metadata_path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(d)), std::istreambuf_iterator<char>());
    const auto meta = read_metadata(m);
    return load_iq(bytes, meta);
}

inline void append_iq(std::vector<std::uint8_t>& out, std::span<const std::complex<float>> samples)
{
    auto put = [&](float f) {
        const auto u = std::bit_cast<std::uint32_t>(f);
        for (int s = 0; s < 32; s += 8)
            out.push_back(static_cast<std::uint8_t>(u >> s));
    };
    for (const auto& c : samples) {
        put(c.real());
        put(c.imag());
    }
}

// ---- conditioning -----------------------------------------------------------

inline PowerDelayProfile apply_filter(const PowerDelayProfile& pdp, std::span<const double> coeffs)
{
    std::vector<std::complex<double>> x(pdp.samples.begin(), pdp.samples.end());
    const auto y = fir::apply_filter(std::span<const std::complex<double>>(x), coeffs);
    PowerDelayProfile out{pdp.start_time_ns, pdp.sample_rate_sps, {}};
    out.samples.reserve(y.size());
    for (const auto& v : y)
        out.samples.emplace_back(static_cast<float>(v.real()), static_cast<float>(v.imag()));
    return out;
}

inline PowerDelayProfile time_window(const PowerDelayProfile& pdp, double start_s, double duration_s)
{
    const double fs = pdp.sample_rate_sps;
    const double n = static_cast<double>(pdp.samples.size());
    const double first = std::round(start_s * fs);
    const double last = std::round((start_s + duration_s) * fs);
    if (!(start_s >= 0.0) || !(duration_s > 0.0) || last > n || first >= last)
        throw Error(ErrorCode::WindowOutOfRange, "window [" + csv::fmt(start_s) + ", +" + csv::fmt(duration_s) +
                                                     "] s outside segment of " + csv::fmt(n / fs) + " s");
    PowerDelayProfile out;
    out.sample_rate_sps = fs;
    out.start_time_ns = pdp.start_time_ns + static_cast<std::int64_t>(std::llround(first / fs * 1e9));
    out.samples.assign(pdp.samples.begin() + static_cast<std::ptrdiff_t>(first),
                       pdp.samples.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
}

// Mean (in dB) of the lowest `fraction` of bins.
inline double estimate_noise_floor(std::span<const double> power_db, double fraction = 0.25)
{
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(ErrorCode::InvalidInput, "fraction must be in (0, 1]");
    if (power_db.empty())
        throw Error(ErrorCode::InvalidInput, "no bins");
    std::vector<double> sorted(power_db.begin(), power_db.end());
    std::sort(sorted.begin(), sorted.end());
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(sorted.size()) + 1e-9)));
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        sum += sorted[i];
    return sum / static_cast<double>(k);
}

struct Peak {
    std::size_t bin = 0;
    double power_db = 0.0;
};

struct PeakSearch {
    std::vector<bool> mask;
    std::vector<Peak> peaks;  // descending power
};

// Local maxima strictly above noise_floor + k_db, kept greedily by descending
// power while honoring a minimum bin separation.
inline PeakSearch detect_peaks(std::span<const double> power_db, double noise_floor_db, double k_db = 5.0,
                               std::size_t min_separation_bins = 2)
{
    if (!(k_db > 0.0))
        throw Error(ErrorCode::InvalidInput, "k_db must be > 0");
    const double threshold = noise_floor_db + k_db;
    const std::size_t n = power_db.size();
    std::vector<Peak> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = power_db[i];
        if (!(p > threshold))
            continue;
        if (i > 0 && power_db[i - 1] > p)
            continue;
        if (i + 1 < n && power_db[i + 1] > p)
            continue;
        candidates.push_back({i, p});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Peak& a, const Peak& b) { return a.power_db > b.power_db; });
    PeakSearch out;
    out.mask.assign(n, false);
    for (const auto& c : candidates) {
        bool clear = true;
        for (const auto& kept : out.peaks) {
            const std::size_t gap = c.bin > kept.bin ? c.bin - kept.bin : kept.bin - c.bin;
            if (gap < min_separation_bins) {
                clear = false;
                break;
            }
        }
        if (clear) {
            out.peaks.push_back(c);
            out.mask[c.bin] = true;
        }
    }
    return out;
}

// ---- calibration ------------------------------------------------------------

struct CalibrationPoint {
    double gain_setting_db = 0.0;
    double calculated_db = 0.0;
    double measured_db = 0.0;
};

struct CalibrationLine {
    double slope = 1.0;   // dB/dB
    double offset = 0.0;  // dB
};

class CalibrationMap {
public:
    static CalibrationMap identity(double gain_setting_db)
    {
        CalibrationMap m;
        m.lines_[gain_setting_db] = {};
        return m;
    }

    void set(double gain_setting_db, CalibrationLine line)
    {
        if (!(line.slope > 0.0))
            throw Error(ErrorCode::InvalidInput, "calibration slope must be > 0");
        lines_[gain_setting_db] = line;
    }

    const CalibrationLine& line(double gain_setting_db) const
    {
        for (const auto& [g, l] : lines_)
            if (std::abs(g - gain_setting_db) < 1e-9)
                return l;
        throw Error(ErrorCode::UnknownGainSetting, "no calibration for gain " + csv::fmt(gain_setting_db) + " dB");
    }

    const std::map<double, CalibrationLine>& lines() const { return lines_; }

private:
    std::map<double, CalibrationLine> lines_;
};

// Ordinary least-squares line per gain setting.
inline CalibrationMap fit_calibration(std::span<const CalibrationPoint> points)
{
    std::map<double, std::vector<CalibrationPoint>> by_gain;
    for (const auto& p : points)
        by_gain[p.gain_setting_db].push_back(p);
    if (by_gain.empty())
        throw Error(ErrorCode::InsufficientPoints, "no calibration points");
    CalibrationMap map;
    for (const auto& [gain, pts] : by_gain) {
        if (pts.size() < 2)
            throw Error(ErrorCode::InsufficientPoints, "gain " + csv::fmt(gain) + " dB has fewer than 2 points");
        double mx = 0.0, my = 0.0;
        for (const auto& p : pts) {
            mx += p.calculated_db;
            my += p.measured_db;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxx = 0.0, sxy = 0.0;
        for (const auto& p : pts) {
            sxx += (p.calculated_db - mx) * (p.calculated_db - mx);
            sxy += (p.calculated_db - mx) * (p.measured_db - my);
        }
        if (sxx == 0.0)
            throw Error(ErrorCode::InsufficientPoints, "gain " + csv::fmt(gain) + " dB: calculated values are all equal");
        const double slope = sxy / sxx;
        map.set(gain, {slope, my - slope * mx});
    }
    return map;
}

inline double apply_calibration(const CalibrationMap& map, double gain_setting_db, double calculated_db)
{
    const auto& l = map.line(gain_setting_db);
    return l.slope * calculated_db + l.offset;
}

inline std::vector<CalibrationPoint> read_calibration(std::istream& in)
{
    const csv::Table t = csv::read(in);
    const std::size_t cg = t.column("gain_setting_db"), cc = t.column("calculated_db"), cm = t.column("measured_db");
    std::vector<CalibrationPoint> out;
    for (const auto& r : t.rows)
        out.push_back({csv::to_double(r[cg]), csv::to_double(r[cc]), csv::to_double(r[cm])});
    return out;
}

inline std::vector<CalibrationPoint> read_calibration_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_calibration(in);
}

// Linear-domain sum over peak bins, then calibrated.
inline double received_power(const ProcessedPdp& processed, const CalibrationMap& map, double gain_setting_db)
{
    double sum = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < processed.power_db.size(); ++i) {
        if (i < processed.peak_mask.size() && processed.peak_mask[i]) {
            sum += db_to_linear(processed.power_db[i]);
            any = true;
        }
    }
    if (!any)
        throw Error(ErrorCode::NoPeaksDetected, "no peak bins at " + std::to_string(processed.start_time_ns) + " ns");
    return apply_calibration(map, gain_setting_db, linear_to_db(sum));
}

// ---- processing chain -------------------------------------------------------

struct ProcessingConfig {
    bool prefilter = true;
    double cutoff_hz = 100e3;
    int num_taps = 129;
    double window_start_s = 0.0;
    std::optional<double> window_duration_s;  // default: through end of segment
    double noise_fraction = 0.25;
    double threshold_db = 5.0;
    std::size_t min_separation_bins = 2;
};

// Samples of the dilated capture that make up one temporal-resolution bin.
inline std::size_t samples_per_bin(const SounderSpec& spec, double sample_rate_sps)
{
    const double v = sample_rate_sps * slide_factor(spec) * temporal_resolution(spec);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(v)));
}

// Low-pass, window, per-bin power (I^2 + Q^2 averaged over each
// temporal-resolution bin of the dilated axis), noise floor and peak search.
inline ProcessedPdp process_pdp(const PowerDelayProfile& pdp, const SounderSpec& spec, const ProcessingConfig& cfg = {})
{
    if (pdp.samples.empty() || !(pdp.sample_rate_sps > 0.0))
        throw Error(ErrorCode::InvalidInput, "empty PDP or non-positive sample rate");
    PowerDelayProfile work = pdp;
    if (cfg.prefilter) {
        const auto h = fir::design_lowpass(cfg.cutoff_hz, cfg.num_taps, pdp.sample_rate_sps);
        work = apply_filter(work, h);
    }
    const double seg_s = static_cast<double>(work.samples.size()) / work.sample_rate_sps;
    const double dur = cfg.window_duration_s.value_or(seg_s - cfg.window_start_s);
    if (cfg.window_start_s != 0.0 || dur != seg_s)
        work = time_window(work, cfg.window_start_s, dur);

    const std::size_t spb = samples_per_bin(spec, work.sample_rate_sps);
    const std::size_t nbins = work.samples.size() / spb;
    if (nbins == 0)
        throw Error(ErrorCode::InvalidInput, "segment shorter than one delay bin");
    const double bin_s = static_cast<double>(spb) / (work.sample_rate_sps * slide_factor(spec));

    ProcessedPdp out;
    out.start_time_ns = work.start_time_ns;
    out.delay_bins.resize(nbins);
    out.power_db.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) {
        double acc = 0.0;
        for (std::size_t s = 0; s < spb; ++s) {
            const auto& c = work.samples[b * spb + s];
            const double i = c.real(), q = c.imag();
            acc += i * i + q * q;
        }
        out.delay_bins[b] = static_cast<double>(b) * bin_s;
        out.power_db[b] = linear_to_db(acc / static_cast<double>(spb));
    }
    out.noise_floor_db = estimate_noise_floor(out.power_db, cfg.noise_fraction);
    out.threshold_db = out.noise_floor_db + cfg.threshold_db;
    auto peaks = detect_peaks(out.power_db, out.noise_floor_db, cfg.threshold_db, cfg.min_separation_bins);
    out.peak_mask = std::move(peaks.mask);
    return out;
}

} // namespace mmw::sounder
