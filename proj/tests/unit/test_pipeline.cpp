// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include "../support/fixture_inputs.hpp"

#include <algorithm>

using namespace mmw;
using namespace mmw::pipeline;
using Catch::Matchers::WithinAbs;

namespace {

bool has_warning(const ProcessOutput& out, const std::string& code)
{
    return std::any_of(out.log.begin(), out.log.end(),
                       [&](const LogRecord& r) { return r.level == "warning" && r.code == code; });
}

} // namespace

TEST_CASE("fixture processes to one row per segment", "[pipeline]")
{
    const auto fx = make_fixture();
    const auto out = run_process(testing::fixture_inputs(fx), {});
    REQUIRE(out.samples.size() == fx.meta.size());
    CHECK(out.profiles.size() == fx.meta.size());
    for (std::size_t i = 1; i < out.samples.size(); ++i)
        CHECK(out.samples[i].time_ns > out.samples[i - 1].time_ns);
    for (const auto& r : out.log)
        CHECK(r.level != "error");
    for (const auto& s : out.samples) {
        CHECK(s.d3d > s.d2d);
        CHECK(s.los.has_value());
    }

    // The recovered exponent sits near the generating one.
    const auto fit = pathloss::fit_ci(out.samples);
    CHECK_THAT(fit.n, WithinAbs(2.1, 0.3));
}

TEST_CASE("output does not depend on the thread count", "[pipeline][property]")
{
    const auto in = testing::fixture_inputs(make_fixture());
    const std::string one = testing::samples_csv(run_process(in, {}));
    CHECK(one == testing::samples_csv(run_process(in, {})));
    for (unsigned t : {2u, 3u, 4u, 16u}) {
        ProcessOptions opt;
        opt.threads = t;
        CHECK(testing::samples_csv(run_process(in, opt)) == one);
    }
}

TEST_CASE("a single segment with matching logs gives one row", "[pipeline]")
{
    FixtureConfig cfg;
    cfg.num_segments = 1;
    const auto out = run_process(testing::fixture_inputs(make_fixture(cfg)), {});
    CHECK(out.samples.size() == 1);
}

TEST_CASE("two segments come out in time order", "[pipeline]")
{
    FixtureConfig cfg;
    cfg.num_segments = 2;
    auto in = testing::fixture_inputs(make_fixture(cfg));
    std::swap(in.segments[0], in.segments[1]);
    const auto out = run_process(in, {});
    REQUIRE(out.samples.size() == 2);
    CHECK(out.samples[0].time_ns < out.samples[1].time_ns);
}

TEST_CASE("a segment without a fix inside the skew is skipped with a warning", "[pipeline]")
{
    FixtureConfig cfg;
    cfg.num_segments = 3;
    auto in = testing::fixture_inputs(make_fixture(cfg));
    // The middle capture's fix is removed; its neighbours are ~100 ms away.
    in.rx_track.erase(in.rx_track.begin() + 15);
    const auto out = run_process(in, {});
    REQUIRE(out.samples.size() == 2);
    CHECK(has_warning(out, "NoFixWithinSkew"));
    CHECK(out.log.front().segment == std::optional<std::size_t>{1});

    ProcessOptions tight;
    tight.max_skew_ns = 1'000'000;  // every capture sits 6 ms after its fix
    CHECK(run_process(in, tight).samples.empty());
}

TEST_CASE("missing alignment falls back to boresight with a warning", "[pipeline]")
{
    FixtureConfig cfg;
    cfg.num_segments = 2;
    auto in = testing::fixture_inputs(make_fixture(cfg));
    in.alignment = {AlignmentSample{0}};
    const auto out = run_process(in, {});
    CHECK(out.samples.size() == 2);
    CHECK(has_warning(out, "NoAlignmentWithinSkew"));
}

TEST_CASE("no overlap between captures and geo logs is an error", "[pipeline]")
{
    auto in = testing::fixture_inputs(make_fixture());
    for (auto& f : in.rx_track)
        f.fix_time += 3'600'000'000'000LL;
    try {
        (void)run_process(in, {});
        FAIL("expected NoTemporalOverlap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoTemporalOverlap);
    }
    in.rx_track.clear();
    CHECK_THROWS_AS(run_process(in, {}), Error);
}

TEST_CASE("fixture generation is deterministic in its seed", "[pipeline]")
{
    const auto a = make_fixture(), b = make_fixture();
    CHECK(a.iq == b.iq);
    FixtureConfig other;
    other.seed = 8;
    CHECK_FALSE(make_fixture(other).iq == a.iq);
}

TEST_CASE("alignment and LOS CSV round trips", "[pipeline]")
{
    const auto fx = make_fixture();
    std::stringstream a;
    write_alignment(a, fx.alignment);
    const auto back = read_alignment(a);
    REQUIRE(back.size() == fx.alignment.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].time_ns == fx.alignment[i].time_ns);
        CHECK_THAT(back[i].rx_az_offset_deg, WithinAbs(fx.alignment[i].rx_az_offset_deg, 1e-12));
    }
    std::stringstream l;
    write_los(l, fx.los);
    const auto lb = read_los(l);
    REQUIRE(lb.size() == fx.los.size());
    for (std::size_t i = 0; i < lb.size(); ++i)
        CHECK(lb[i].los == fx.los[i].los);
}
