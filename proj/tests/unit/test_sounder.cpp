// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include <mmw/sounder.hpp>

#include <numeric>
#include <random>
#include <sstream>

using namespace mmw;
using namespace mmw::sounder;
using Catch::Matchers::WithinAbs;

namespace {

template <class F>
ErrorCode code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

ProcessedPdp with_mask(std::vector<double> power, std::vector<bool> mask)
{
    ProcessedPdp p;
    p.power_db = std::move(power);
    p.peak_mask = std::move(mask);
    p.delay_bins.assign(p.power_db.size(), 0.0);
    return p;
}

} // namespace

TEST_CASE("sounder timing constants", "[sounder]")
{
    const SounderSpec s;
    CHECK(slide_factor(s) == 8000.0);
    CHECK(temporal_resolution(s) == 2.5e-9);
    CHECK(max_excess_delay(s) == 5.1175e-6);
    CHECK(dilated_period(s) == 0.04094);
    CHECK(samples_per_bin(s, 2e6) == 40);

    SounderSpec half;
    half.rx_chip_rate_cps = half.tx_chip_rate_cps / 2.0;
    CHECK(slide_factor(half) == 2.0);

    SounderSpec unit;
    unit.tx_chip_rate_cps = 1.0;
    unit.rx_chip_rate_cps = 0.5;
    unit.pn_length = 1;
    CHECK(temporal_resolution(unit) == 1.0);
    CHECK(max_excess_delay(unit) == 1.0);

    SounderSpec bad;
    bad.rx_chip_rate_cps = bad.tx_chip_rate_cps;
    CHECK(code_of([&] { (void)slide_factor(bad); }) == ErrorCode::InvalidInput);
}

TEST_CASE("load_iq splits the byte stream by metadata", "[sounder]")
{
    std::vector<std::uint8_t> bytes;
    const std::vector<std::complex<float>> s{{1.0f, -2.0f}, {0.5f, 0.25f}, {3.0f, 4.0f}};
    append_iq(bytes, s);
    REQUIRE(bytes.size() == 24);

    const std::vector<SegmentMeta> one{{100, 2, 2e6}};
    const auto a = load_iq(std::span<const std::uint8_t>(bytes.data(), 16), one);
    REQUIRE(a.size() == 1);
    CHECK(a[0].samples == std::vector<std::complex<float>>{s[0], s[1]});

    const std::vector<SegmentMeta> two{{100, 1, 2e6}, {900, 2, 2e6}};
    const auto b = load_iq(bytes, two);
    REQUIRE(b.size() == 2);
    CHECK(b[0].start_time_ns == 100);
    CHECK(b[1].start_time_ns == 900);
    CHECK(b[1].samples[1] == s[2]);

    CHECK(code_of([&] { (void)load_iq(std::span<const std::uint8_t>(bytes.data(), 15), one); }) ==
          ErrorCode::TruncatedFile);
    const std::vector<SegmentMeta> too_long{{0, 4, 2e6}};
    CHECK(code_of([&] { (void)load_iq(bytes, too_long); }) == ErrorCode::MetadataMismatch);
}

TEST_CASE("metadata JSON-lines parsing", "[sounder]")
{
    std::stringstream ok("{\"start_time_ns\":5,\"num_samples\":40,\"sample_rate_sps\":2000000}\n\n"
                         "{\"start_time_ns\":9,\"num_samples\":8,\"sample_rate_sps\":2e6}\n");
    const auto m = read_metadata(ok);
    REQUIRE(m.size() == 2);
    CHECK(m[1].num_samples == 8);

    std::stringstream unordered("{\"start_time_ns\":9,\"num_samples\":1,\"sample_rate_sps\":1}\n"
                                "{\"start_time_ns\":5,\"num_samples\":1,\"sample_rate_sps\":1}\n");
    CHECK(code_of([&] { (void)read_metadata(unordered); }) == ErrorCode::MetadataMismatch);
    std::stringstream junk("{\"start_time_ns\":\n");
    CHECK(code_of([&] { (void)read_metadata(junk); }) == ErrorCode::MalformedField);
}

TEST_CASE("time_window examples", "[sounder]")
{
    PowerDelayProfile p{1000, 10.0, std::vector<std::complex<float>>(20, {1.0f, 0.0f})};
    const auto full = time_window(p, 0.0, 2.0);
    CHECK(full.samples.size() == 20);
    CHECK(full.start_time_ns == 1000);
    const auto half = time_window(p, 1.0, 1.0);
    CHECK(half.samples.size() == 10);
    CHECK(half.start_time_ns == 1000 + 1'000'000'000LL);
    CHECK(code_of([&] { (void)time_window(p, 1.5, 1.0); }) == ErrorCode::WindowOutOfRange);
    CHECK(code_of([&] { (void)time_window(p, 0.0, 0.0); }) == ErrorCode::WindowOutOfRange);
}

TEST_CASE("noise floor examples", "[sounder]")
{
    CHECK(estimate_noise_floor(std::vector<double>(40, -90.0)) == -90.0);
    std::vector<double> spike(99, -90.0);
    spike.push_back(-60.0);
    CHECK(estimate_noise_floor(spike, 0.25) == -90.0);
    std::vector<double> alt;
    for (int i = 0; i < 40; ++i)
        alt.push_back(i % 2 ? -80.0 : -100.0);
    CHECK(estimate_noise_floor(alt, 0.5) == -100.0);
    CHECK(code_of([] { (void)estimate_noise_floor(std::vector<double>{1.0}, 0.0); }) == ErrorCode::InvalidInput);
}

TEST_CASE("noise floor is invariant to bin order", "[sounder][property]")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-110.0, -40.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(128);
        for (auto& x : v)
            x = u(rng);
        const double ref = estimate_noise_floor(v);
        std::shuffle(v.begin(), v.end(), rng);
        REQUIRE(estimate_noise_floor(v) == ref);
    }
}

TEST_CASE("peak detection examples", "[sounder]")
{
    std::vector<double> p(32, -90.0);
    p[7] = -60.0;
    auto one = detect_peaks(p, -90.0, 5.0, 2);
    REQUIRE(one.peaks.size() == 1);
    CHECK(one.peaks[0].bin == 7);
    CHECK(one.mask[7]);

    p[8] = -61.0;
    auto pair = detect_peaks(p, -90.0, 5.0, 2);
    REQUIRE(pair.peaks.size() == 1);
    CHECK(pair.peaks[0].bin == 7);

    CHECK(detect_peaks(std::vector<double>(16, -88.0), -90.0, 5.0, 2).peaks.empty());

    std::vector<double> spaced(32, -90.0);
    spaced[4] = -50.0;
    spaced[6] = -55.0;
    spaced[20] = -70.0;
    const auto s = detect_peaks(spaced, -90.0, 5.0, 2);
    REQUIRE(s.peaks.size() == 3);
    CHECK(s.peaks[0].bin == 4);
    CHECK(s.peaks[1].bin == 6);
    CHECK(s.peaks[2].bin == 20);
    CHECK(code_of([&] { (void)detect_peaks(spaced, -90.0, 0.0, 2); }) == ErrorCode::InvalidInput);
}

TEST_CASE("calibration fit and lookup", "[sounder]")
{
    const std::vector<CalibrationPoint> two{{76, -60, -30}, {76, -40, -10}};
    const auto m = fit_calibration(two);
    CHECK_THAT(m.line(76).slope, WithinAbs(1.0, 1e-12));
    CHECK_THAT(m.line(76).offset, WithinAbs(30.0, 1e-12));
    CHECK_THAT(apply_calibration(m, 76, -50.0), WithinAbs(-20.0, 1e-12));

    const std::vector<CalibrationPoint> ident{{0, -80, -80}, {0, -20, -20}, {0, -50, -50}};
    const auto id = fit_calibration(ident);
    CHECK_THAT(id.line(0).slope, WithinAbs(1.0, 1e-12));
    CHECK_THAT(id.line(0).offset, WithinAbs(0.0, 1e-12));

    const std::vector<CalibrationPoint> single{{76, -60, -30}};
    CHECK(code_of([&] { (void)fit_calibration(single); }) == ErrorCode::InsufficientPoints);
    CHECK(code_of([&] { (void)apply_calibration(m, 0, -50.0); }) == ErrorCode::UnknownGainSetting);

    std::stringstream csv("gain_setting_db,calculated_db,measured_db\n76,-60,-30\n76,-40,-10\n");
    CHECK(read_calibration(csv).size() == 2);
}

TEST_CASE("received power examples", "[sounder]")
{
    const auto id = CalibrationMap::identity(76);
    CHECK_THAT(received_power(with_mask({-90, -60, -90}, {false, true, false}), id, 76), WithinAbs(-60.0, 1e-12));
    CHECK_THAT(received_power(with_mask({-60, -90, -60}, {true, false, true}), id, 76),
               WithinAbs(-60.0 + 3.010299956639812, 1e-9));
    CHECK(code_of([&] { (void)received_power(with_mask({-60, -60}, {false, false}), id, 76); }) ==
          ErrorCode::NoPeaksDetected);
}

TEST_CASE("received power grows as bins are unmasked", "[sounder][property]")
{
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-100.0, -40.0);
    const auto id = CalibrationMap::identity(76);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> p(64);
        for (auto& x : p)
            x = u(rng);
        std::vector<std::size_t> order(64);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<bool> mask(64, false);
        double prev = -1e300;
        for (std::size_t i : order) {
            mask[i] = true;
            const double r = received_power(with_mask(p, mask), id, 76);
            REQUIRE(r >= prev);
            prev = r;
        }
    }
}

TEST_CASE("process_pdp bins the dilated capture onto the delay grid", "[sounder]")
{
    const SounderSpec spec;
    std::mt19937_64 rng(33);
    std::normal_distribution<float> n(0.0f, 1e-5f);
    PowerDelayProfile pdp{0, 2e6, {}};
    for (int b = 0; b < 64; ++b)
        for (int k = 0; k < 40; ++k) {
            const float a = (b == 12) ? 1e-2f : (b == 30 ? 3e-3f : 0.0f);
            pdp.samples.emplace_back(a + n(rng), n(rng));
        }
    ProcessingConfig cfg;
    cfg.prefilter = false;
    const auto out = process_pdp(pdp, spec, cfg);
    REQUIRE(out.power_db.size() == 64);
    CHECK_THAT(out.delay_bins[1] - out.delay_bins[0], WithinAbs(2.5e-9, 1e-21));
    CHECK(out.peak_mask[12]);
    CHECK(out.peak_mask[30]);
    CHECK(std::count(out.peak_mask.begin(), out.peak_mask.end(), true) == 2);
    CHECK(out.threshold_db == out.noise_floor_db + cfg.threshold_db);
    for (std::size_t b = 0; b < out.power_db.size(); ++b)
        if (out.peak_mask[b])
            CHECK(out.power_db[b] >= out.threshold_db);
    CHECK_THAT(out.power_db[12], WithinAbs(-40.0, 0.05));

    const auto again = process_pdp(pdp, spec, cfg);
    CHECK(again.power_db == out.power_db);
    CHECK(again.peak_mask == out.peak_mask);

    cfg.prefilter = true;
    const auto filtered = process_pdp(pdp, spec, cfg);
    CHECK(filtered.peak_mask[12]);
}
