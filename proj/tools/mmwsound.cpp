// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------
//
// mmwsound: batch front end. Every subcommand writes its outputs, a JSON-lines
// run log and a run manifest into --out-dir. The exit status is 0 exactly
// when the run log holds no error records.

#include <mmw/mmw.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mmw;

namespace {

class Run {
public:
    fs::path out_dir = ".";
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string config_path;
    nlohmann::json config = nlohmann::json::object();
    unsigned threads = 1;

    ordered_json inputs = ordered_json::object();
    ordered_json effective_config = ordered_json::object();

    void record(pipeline::LogRecord r) { log_.push_back(std::move(r)); }
    void info(std::string code, std::string msg) { record({"info", std::move(code), std::move(msg), std::nullopt}); }
    void warn(std::string code, std::string msg) { record({"warning", std::move(code), std::move(msg), std::nullopt}); }
    void error(std::string code, std::string msg)
    {
        std::cerr << "mmwsound: " << msg << '\n';
        record({"error", std::move(code), std::move(msg), std::nullopt});
    }

    // Section of --config for a subcommand; empty object when absent.
    nlohmann::json section(const std::string& name) const
    {
        return config.contains(name) ? config[name] : nlohmann::json::object();
    }

    std::string input(const std::string& key, const std::string& path)
    {
        if (!fs::exists(path))
            throw Error(ErrorCode::IoError, "input file not found: " + path);
        inputs[key] = path;
        return path;
    }

    void write(const std::string& name, const std::string& content)
    {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f)
            throw Error(ErrorCode::IoError, "cannot write " + (out_dir / name).string());
        f << content;
        outputs_.push_back(name);
    }

    void write_bytes(const std::string& name, const std::vector<std::uint8_t>& bytes)
    {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f)
            throw Error(ErrorCode::IoError, "cannot write " + (out_dir / name).string());
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        outputs_.push_back(name);
    }

    int finish(const std::string& subcommand)
    {
        bool failed = false;
        std::ostringstream log;
        for (const auto& r : log_) {
            log << r.json().dump() << '\n';
            failed = failed || r.level == "error";
        }
        ordered_json m;
        m["tool"] = "mmwsound";
        m["versions"] = {{"mmwsound", mmw::version},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                         {"cli11", CLI11_VERSION}};
        m["subcommand"] = subcommand;
        m["seed"] = seed;
        m["config_file"] = config_path.empty() ? ordered_json(nullptr) : ordered_json(config_path);
        m["inputs"] = inputs;
        m["config"] = effective_config;
        m["outputs"] = outputs_;
        m["status"] = failed ? "error" : "ok";
        try {
            std::ofstream(out_dir / "run.log", std::ios::binary) << log.str();
            std::ofstream(out_dir / "run_manifest.json", std::ios::binary) << m.dump(2) << '\n';
        } catch (...) {
            return 2;
        }
        return failed ? 1 : 0;
    }

private:
    std::vector<pipeline::LogRecord> log_;
    std::vector<std::string> outputs_;
};

std::string read_text(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const std::string& path)
{
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
    }
}

template <class F>
std::string render(F&& f)
{
    std::ostringstream ss;
    f(ss);
    return ss.str();
}

antenna::AntennaModel load_antenna(Run& run, const std::string& pattern)
{
    if (pattern.empty())
        return antenna::default_horn();
    return antenna::load_pattern(run.input("pattern", pattern));
}

sounder::ProcessingConfig processing_from(const nlohmann::json& j)
{
    sounder::ProcessingConfig c;
    c.prefilter = j.value("prefilter", c.prefilter);
    c.cutoff_hz = j.value("cutoff_hz", c.cutoff_hz);
    c.num_taps = j.value("num_taps", c.num_taps);
    c.window_start_s = j.value("window_start_s", c.window_start_s);
    if (j.contains("window_duration_s") && !j["window_duration_s"].is_null())
        c.window_duration_s = j["window_duration_s"].get<double>();
    c.noise_fraction = j.value("noise_fraction", c.noise_fraction);
    c.threshold_db = j.value("threshold_db", c.threshold_db);
    c.min_separation_bins = j.value("min_separation_bins", c.min_separation_bins);
    return c;
}

ordered_json to_json(const sounder::ProcessingConfig& c)
{
    return {{"prefilter", c.prefilter},
            {"cutoff_hz", c.cutoff_hz},
            {"num_taps", c.num_taps},
            {"window_start_s", c.window_start_s},
            {"window_duration_s", c.window_duration_s ? ordered_json(*c.window_duration_s) : ordered_json(nullptr)},
            {"noise_fraction", c.noise_fraction},
            {"threshold_db", c.threshold_db},
            {"min_separation_bins", c.min_separation_bins}};
}

// ---- fixture ------------------------------------------------------------------

struct FixtureArgs {
    std::size_t segments = 12;
};

void cmd_fixture(Run& run, const FixtureArgs& a)
{
    pipeline::FixtureConfig fc;
    fc.seed = run.seed;
    fc.num_segments = a.segments;
    run.effective_config = {{"num_segments", fc.num_segments},
                            {"bins_per_segment", fc.bins_per_segment},
                            {"path_loss_exponent", fc.path_loss_exponent},
                            {"shadow_sigma_db", fc.shadow_sigma_db}};
    const auto fx = pipeline::make_fixture(fc);
    run.write_bytes("iq.bin", fx.iq);
    run.write("iq_meta.jsonl", render([&](auto& o) { pipeline::write_metadata(o, fx.meta); }));
    run.write("calibration.csv", render([&](auto& o) { pipeline::write_calibration(o, fx.calibration); }));
    run.write("tx_track.csv", render([&](auto& o) { geo::write_track(o, fx.tx_track); }));
    run.write("rx_track.csv", render([&](auto& o) { geo::write_track(o, fx.rx_track); }));
    run.write("alignment.csv", render([&](auto& o) { pipeline::write_alignment(o, fx.alignment); }));
    run.write("los.csv", render([&](auto& o) { pipeline::write_los(o, fx.los); }));

    // Two-path SAGE observation set on a raster schedule.
    const sounder::SounderSpec spec;
    const auto ant = antenna::default_horn();
    const double dtau = sounder::temporal_resolution(spec);
    std::vector<sage::MultipathComponent> truth{{std::polar(1.0, 0.4), 12.0 * dtau, 0.0, -6.0, 2.0},
                                                {std::polar(0.6, -1.1), 15.0 * dtau, 0.0, 9.0, -1.0}};
    const auto schedule = sage::raster_schedule(-20.0, 20.0, 2.0, -10.0, 10.0, 2.5, 1e-3);
    const double g0 = antenna::amplitude_gain(ant, 0.0, 0.0);
    const auto obs = sage::synthesize_observations(truth, schedule, spec, ant, g0 * g0 / 100.0, run.seed, 48);
    run.write("sage_truth.csv", render([&](auto& o) { sage::write_components(o, truth); }));
    run.write("sage_observations.json", sage::to_json(obs).dump() + "\n");

    tracksim::ScenarioConfig sc;
    sc.seed = run.seed;
    run.write("scenario.json", tracksim::to_json(sc).dump(2) + "\n");
    run.info("FixtureWritten", std::to_string(fx.meta.size()) + " segments");
}

// ---- process --------------------------------------------------------------------

struct ProcessArgs {
    std::string iq, meta, calibration, rx_track, tx_track, alignment, los, pattern;
    double gain_db = 76.0;
    double max_skew_ms = 50.0;
};

void cmd_process(Run& run, const ProcessArgs& a)
{
    const auto cfg = run.section("process");
    pipeline::ProcessOptions opt;
    opt.processing = processing_from(cfg);
    opt.max_skew_ns = static_cast<std::int64_t>(std::llround(cfg.value("max_skew_ms", a.max_skew_ms) * 1e6));
    opt.threads = run.threads;
    const double gain = cfg.value("gain_setting_db", a.gain_db);

    pipeline::ProcessInputs in;
    in.segments = sounder::load_iq(run.input("iq", a.iq), run.input("metadata", a.meta));
    in.calibration = sounder::fit_calibration(sounder::read_calibration_file(run.input("calibration", a.calibration)));
    in.rx_track = geo::read_track_file(run.input("rx_track", a.rx_track));
    in.tx_track = geo::read_track_file(run.input("tx_track", a.tx_track));
    if (!a.alignment.empty()) {
        std::ifstream f(run.input("alignment", a.alignment));
        in.alignment = pipeline::read_alignment(f);
    }
    if (!a.los.empty()) {
        std::ifstream f(run.input("los", a.los));
        in.los = pipeline::read_los(f);
    }
    in.antenna = load_antenna(run, a.pattern);
    in.gain_setting_db = gain;
    run.effective_config = {{"processing", to_json(opt.processing)},
                            {"max_skew_ns", opt.max_skew_ns},
                            {"gain_setting_db", gain}};

    const auto out = pipeline::run_process(in, opt);
    for (const auto& r : out.log)
        run.record(r);
    run.write("pathloss_samples.csv", render([&](auto& o) { pathloss::write_samples(o, out.samples); }));
    run.write("pdp_profiles.csv", render([&](auto& o) {
                  o << "segment,time_ns,delay_s,power_db,peak\n";
                  for (const auto& [k, p] : out.profiles)
                      for (std::size_t b = 0; b < p.power_db.size(); ++b)
                          o << k << ',' << p.start_time_ns << ',' << csv::fmt(p.delay_bins[b]) << ','
                            << csv::fmt(p.power_db[b]) << ',' << (p.peak_mask[b] ? 1 : 0) << '\n';
              }));
    run.info("Processed", std::to_string(out.samples.size()) + " of " + std::to_string(in.segments.size()) +
                              " segments produced pathloss samples");
}

// ---- models ---------------------------------------------------------------------

struct ModelsArgs {
    double d_min = 10.0, d_max = 5000.0;
    std::size_t points = 50;
    double h_bs = 25.0, h_ut = 2.0, fc_ghz = 28.0, street_width = 20.0, building_height = 20.0;
};

void cmd_models(Run& run, const ModelsArgs& a)
{
    if (a.points == 0 || !(a.d_min > 0.0) || !(a.d_max >= a.d_min))
        throw Error(ErrorCode::InvalidInput, "need points >= 1 and 0 < d_min <= d_max");
    run.effective_config = {{"d_min_m", a.d_min},      {"d_max_m", a.d_max}, {"points", a.points},
                            {"h_bs_m", a.h_bs},        {"h_ut_m", a.h_ut},   {"fc_ghz", a.fc_ghz},
                            {"street_width_m", a.street_width}, {"avg_building_height_m", a.building_height}};
    std::ostringstream o;
    o << "model,d2d_m,d3d_m,pl_db,in_range,warnings\n";
    std::size_t flagged = 0;
    for (const auto m : pathloss::all_models)
        for (std::size_t i = 0; i < a.points; ++i) {
            const double d = a.points == 1 ? a.d_min
                                           : a.d_min * std::pow(a.d_max / a.d_min,
                                                                static_cast<double>(i) / static_cast<double>(a.points - 1));
            auto g = pathloss::make_geometry(d, a.h_bs, a.h_ut, a.fc_ghz);
            g.street_width_m = a.street_width;
            g.avg_building_height_m = a.building_height;
            const auto r = pathloss::evaluate(m, g);
            std::string w;
            for (const auto& s : r.warnings)
                w += (w.empty() ? "" : ";") + s;
            if (!r.in_range())
                ++flagged;
            o << pathloss::model_name(m) << ',' << csv::fmt(g.d2d) << ',' << csv::fmt(g.d3d) << ','
              << csv::fmt(r.pl_db) << ',' << (r.in_range() ? 1 : 0) << ',' << w << '\n';
        }
    run.write("model_curves.csv", o.str());
    if (flagged > 0)
        run.warn("OutOfRange", std::to_string(flagged) + " rows outside a model's validity range");
}

// ---- sage -----------------------------------------------------------------------

struct SageArgs {
    std::vector<std::string> observations;
    std::string pattern;
    int paths = 1;
    int max_iterations = 30;
};

void cmd_sage(Run& run, const SageArgs& a)
{
    const auto j = run.section("sage");
    sage::SageConfig cfg;
    cfg.num_paths = j.value("num_paths", a.paths);
    cfg.max_iterations = j.value("max_iterations", a.max_iterations);
    cfg.tol_tau_s = j.value("tol_tau_s", cfg.tol_tau_s);
    cfg.tol_nu_hz = j.value("tol_nu_hz", cfg.tol_nu_hz);
    cfg.tol_angle_deg = j.value("tol_angle_deg", cfg.tol_angle_deg);
    cfg.tol_alpha_rel = j.value("tol_alpha_rel", cfg.tol_alpha_rel);
    cfg.tau_step_bins = j.value("tau_step_bins", cfg.tau_step_bins);
    cfg.angle_step_deg = j.value("angle_step_deg", cfg.angle_step_deg);
    cfg.max_doppler_hz = j.value("max_doppler_hz", cfg.max_doppler_hz);
    if (j.contains("nu_step_hz"))
        cfg.nu_step_hz = j["nu_step_hz"].get<double>();
    cfg.refine_levels = j.value("refine_levels", cfg.refine_levels);
    cfg.validate();
    run.effective_config = {{"num_paths", cfg.num_paths},         {"max_iterations", cfg.max_iterations},
                            {"tol_tau_s", cfg.tol_tau_s},         {"tol_nu_hz", cfg.tol_nu_hz},
                            {"tol_angle_deg", cfg.tol_angle_deg}, {"tol_alpha_rel", cfg.tol_alpha_rel},
                            {"tau_step_bins", cfg.tau_step_bins}, {"angle_step_deg", cfg.angle_step_deg},
                            {"max_doppler_hz", cfg.max_doppler_hz}, {"refine_levels", cfg.refine_levels}};

    if (a.observations.empty())
        throw Error(ErrorCode::InvalidInput, "at least one --observations file is required");
    const auto ant = load_antenna(run, a.pattern);
    const sounder::SounderSpec spec;
    std::vector<double> spreads;
    ordered_json summary = ordered_json::array();
    std::ostringstream spread_csv;
    spread_csv << "route,sigma_omega\n";
    for (std::size_t i = 0; i < a.observations.size(); ++i) {
        const auto path = run.input("observations_" + std::to_string(i), a.observations[i]);
        const auto obs = sage::observations_from_json(read_json(path), spec, ant);
        const auto res = sage::run_sage(obs, cfg);
        if (!res.converged)
            run.warn("NonConvergence", path + ": stopped after " + std::to_string(res.iterations) + " iterations");
        const double s = sage::direction_spread(res.components);
        spreads.push_back(s);
        spread_csv << i << ',' << csv::fmt(s) << '\n';
        const std::string tag = std::to_string(i);
        run.write("sage_components_" + tag + ".csv", render([&](auto& o) { sage::write_components(o, res.components); }));
        run.write("sage_trace_" + tag + ".csv", render([&](auto& o) {
                      o << "iteration,objective\n";
                      for (std::size_t k = 0; k < res.objective_trace.size(); ++k)
                          o << k << ',' << csv::fmt(res.objective_trace[k]) << '\n';
                  }));
        summary.push_back({{"route", i}, {"input", path}, {"iterations", res.iterations},
                           {"converged", res.converged}, {"sigma_omega", s}});
    }
    run.write("direction_spread.csv", spread_csv.str());
    run.write("spread_cdf.csv", render([&](auto& o) { sage::write_cdf(o, sage::spread_cdf(spreads)); }));
    run.write("sage_summary.json", summary.dump(2) + "\n");
}

// ---- consistency ----------------------------------------------------------------

struct ConsistencyArgs {
    std::string iq, meta, rx_track, alignment;
    bool angular = false;
    double bin_width = 0.0;  // 0: 1 m spatial, 1 deg angular
    double max_skew_ms = 50.0;
};

void cmd_consistency(Run& run, const ConsistencyArgs& a)
{
    const auto j = run.section("consistency");
    const auto proc = processing_from(run.section("process"));
    const double width = j.value("bin_width", a.bin_width > 0.0 ? a.bin_width : 1.0);
    const auto skew = static_cast<std::int64_t>(std::llround(j.value("max_skew_ms", a.max_skew_ms) * 1e6));
    run.effective_config = {{"mode", a.angular ? "angular" : "spatial"},
                            {"bin_width", width},
                            {"max_skew_ns", skew},
                            {"processing", to_json(proc)}};

    const sounder::SounderSpec spec;
    const auto segments = sounder::load_iq(run.input("iq", a.iq), run.input("metadata", a.meta));
    std::vector<geo::GeoFix> track;
    std::vector<pipeline::AlignmentSample> align;
    if (a.angular) {
        std::ifstream f(run.input("alignment", a.alignment));
        align = pipeline::read_alignment(f);
    } else {
        track = geo::read_track_file(run.input("rx_track", a.rx_track));
    }

    std::vector<consistency::AmplitudeVector> vectors;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto p = sounder::process_pdp(segments[k], spec, proc);
        consistency::AmplitudeVector v;
        v.magnitudes = consistency::amplitude_vector(p);
        if (a.angular) {
            const auto i = pipeline::detail::nearest_by_time(align, p.start_time_ns, skew);
            if (!i) {
                run.record({"warning", "NoAlignmentWithinSkew", "segment skipped", k});
                continue;
            }
            v.tag = align[*i].rx_az_offset_deg;
        } else {
            const auto i = geo::nearest_fix(track, p.start_time_ns, skew);
            if (!i) {
                run.record({"warning", "NoFixWithinSkew", "segment skipped", k});
                continue;
            }
            v.tag = track[*i];
        }
        vectors.push_back(std::move(v));
    }
    double max_lag = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i)
        for (std::size_t k = i + 1; k < vectors.size(); ++k)
            max_lag = std::max(max_lag, consistency::lag_between(vectors[i], vectors[k]));
    const auto edges = consistency::uniform_edges(width, max_lag);
    const auto ac = consistency::autocorr(vectors, edges);
    if (ac.degenerate_pairs > 0)
        run.warn("DegenerateVector", std::to_string(ac.degenerate_pairs) + " zero-variance pairs skipped");
    run.write("autocorr.csv", render([&](auto& o) { consistency::write_points(o, ac.points); }));
    const auto fit = consistency::fit_exponential(ac.points);
    if (!fit.decay_identifiable)
        run.warn("DecayUnidentifiable", "points are consistent with a constant; decay length not identifiable");
    run.write("autocorr_fit.json", consistency::to_json(fit).dump(2) + "\n");
}

// ---- simulate -------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario;
};

void cmd_simulate(Run& run, const SimulateArgs& a)
{
    nlohmann::json j = run.section("scenario");
    std::string base;
    if (!a.scenario.empty()) {
        j = read_json(run.input("scenario", a.scenario));
        base = fs::path(a.scenario).parent_path().string();
    }
    auto cfg = tracksim::scenario_from_json(j, base);
    if (run.seed_given)
        cfg.seed = run.seed;
    run.seed = cfg.seed;
    run.effective_config = tracksim::to_json(cfg);
    const auto res = tracksim::run_scenario(cfg);
    run.write("events.jsonl", render([&](auto& o) { tracksim::write_log(o, res.log); }));
    run.write("metrics.json", tracksim::to_json(res.metrics).dump(2) + "\n");
}

// ---- fitci ----------------------------------------------------------------------

struct FitCiArgs {
    std::string samples;
    double d0 = 1.0, fc_ghz = 28.0;
    std::string los = "all";
};

void cmd_fitci(Run& run, const FitCiArgs& a)
{
    if (a.los != "all" && a.los != "los" && a.los != "nlos")
        throw Error(ErrorCode::InvalidInput, "--los must be all, los or nlos");
    run.effective_config = {{"d0_m", a.d0}, {"fc_ghz", a.fc_ghz}, {"los", a.los}};
    std::ifstream f(run.input("samples", a.samples));
    auto all = pathloss::read_samples(f);
    std::vector<pathloss::PathlossSample> use;
    for (const auto& s : all)
        if (a.los == "all" || (s.los && *s.los == (a.los == "los")))
            use.push_back(s);
    const auto fit = pathloss::fit_ci(use, a.d0, a.fc_ghz);
    ordered_json out{{"n", fit.n},
                     {"shadow_sigma_db", fit.shadow_sigma_db},
                     {"reference_distance_m", fit.reference_distance_m},
                     {"fc_ghz", fit.fc_ghz},
                     {"num_samples", use.size()}};
    run.write("ci_fit.json", out.dump(2) + "\n");
    double lo = use.front().d3d, hi = lo;
    for (const auto& s : use) {
        lo = std::min(lo, s.d3d);
        hi = std::max(hi, s.d3d);
    }
    run.write("ci_curve.csv", render([&](auto& o) {
                  o << "d_m,pl_ci_db,fspl_db\n";
                  constexpr int n = 50;
                  for (int i = 0; i < n; ++i) {
                      const double d = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
                      o << csv::fmt(d) << ',' << csv::fmt(fit.predict(d)) << ',' << csv::fmt(pathloss::fspl(d, a.fc_ghz))
                        << '\n';
                  }
              }));
}

// ---- calibrate ------------------------------------------------------------------

struct CalibrateArgs {
    std::string points;
};

void cmd_calibrate(Run& run, const CalibrateArgs& a)
{
    const auto pts = sounder::read_calibration_file(run.input("points", a.points));
    const auto map = sounder::fit_calibration(pts);
    run.write("calibration_lines.csv", render([&](auto& o) {
                  o << "gain_setting_db,slope,offset_db\n";
                  for (const auto& [g, l] : map.lines())
                      o << csv::fmt(g) << ',' << csv::fmt(l.slope) << ',' << csv::fmt(l.offset) << '\n';
              }));
    run.write("calibration_curve.csv", render([&](auto& o) {
                  o << "gain_setting_db,calculated_db,measured_db,fitted_db\n";
                  for (const auto& p : pts)
                      o << csv::fmt(p.gain_setting_db) << ',' << csv::fmt(p.calculated_db) << ','
                        << csv::fmt(p.measured_db) << ','
                        << csv::fmt(sounder::apply_calibration(map, p.gain_setting_db, p.calculated_db)) << '\n';
              }));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mmwsound: 28 GHz channel-sounding analysis and beam-tracking simulation"};
    app.require_subcommand(1);
    app.fallthrough();
    Run run;
    std::string out_dir = ".";
    app.add_option("--config", run.config_path, "JSON file with per-subcommand sections");
    app.add_option("--seed", run.seed, "Random seed")->each([&](const std::string&) { run.seed_given = true; });
    app.add_option("--out-dir", out_dir, "Output directory (created if missing)");
    app.add_option("--threads", run.threads, "Worker threads for segment processing")->check(CLI::Range(1u, 256u));

    std::function<void()> action;
    std::string name;

    FixtureArgs fx;
    auto* c_fx = app.add_subcommand("fixture", "Write the bundled synthetic measurement fixture");
    c_fx->add_option("--segments", fx.segments, "Number of I/Q captures")->check(CLI::Range(1, 10000));
    c_fx->callback([&] { name = "fixture"; action = [&] { cmd_fixture(run, fx); }; });

    ProcessArgs pa;
    auto* c_p = app.add_subcommand("process", "I/Q captures + logs -> per-location pathloss samples");
    c_p->add_option("--iq", pa.iq, "Interleaved float32 I/Q file")->required();
    c_p->add_option("--meta", pa.meta, "Segment metadata (JSON lines)")->required();
    c_p->add_option("--calibration", pa.calibration, "Calibration points CSV")->required();
    c_p->add_option("--rx-track", pa.rx_track, "Rx geo log CSV")->required();
    c_p->add_option("--tx-track", pa.tx_track, "Tx geo log CSV (one row: static Tx)")->required();
    c_p->add_option("--alignment", pa.alignment, "Alignment log CSV");
    c_p->add_option("--los", pa.los, "LOS label CSV");
    c_p->add_option("--pattern", pa.pattern, "Antenna pattern CSV (cut,angle_deg,gain_db)");
    c_p->add_option("--gain", pa.gain_db, "USRP gain setting, dB");
    c_p->add_option("--max-skew-ms", pa.max_skew_ms, "Association skew cap, ms");
    c_p->callback([&] { name = "process"; action = [&] { cmd_process(run, pa); }; });

    ModelsArgs ma;
    auto* c_m = app.add_subcommand("models", "Reference UMa model curves over a log-spaced distance grid");
    c_m->add_option("--d-min", ma.d_min, "Smallest 2-D distance, m");
    c_m->add_option("--d-max", ma.d_max, "Largest 2-D distance, m");
    c_m->add_option("--points", ma.points, "Grid points per model");
    c_m->add_option("--h-bs", ma.h_bs, "Base-station height, m");
    c_m->add_option("--h-ut", ma.h_ut, "UT height, m");
    c_m->add_option("--fc", ma.fc_ghz, "Carrier, GHz");
    c_m->add_option("--street-width", ma.street_width, "Street width W, m");
    c_m->add_option("--building-height", ma.building_height, "Average building height h, m");
    c_m->callback([&] { name = "models"; action = [&] { cmd_models(run, ma); }; });

    SageArgs sa;
    auto* c_s = app.add_subcommand("sage", "SAGE multipath estimation and direction spread");
    c_s->add_option("--observations", sa.observations, "Observation set JSON (repeatable)")->required();
    c_s->add_option("--pattern", sa.pattern, "Antenna pattern CSV");
    c_s->add_option("--paths", sa.paths, "Number of paths M");
    c_s->add_option("--max-iterations", sa.max_iterations, "Iteration cap");
    c_s->callback([&] { name = "sage"; action = [&] { cmd_sage(run, sa); }; });

    ConsistencyArgs ca;
    auto* c_c = app.add_subcommand("consistency", "Spatial or angular autocorrelation with exponential fit");
    c_c->add_option("--iq", ca.iq, "Interleaved float32 I/Q file")->required();
    c_c->add_option("--meta", ca.meta, "Segment metadata (JSON lines)")->required();
    c_c->add_option("--rx-track", ca.rx_track, "Rx geo log CSV (spatial mode)");
    c_c->add_option("--alignment", ca.alignment, "Alignment log CSV (angular mode)");
    c_c->add_flag("--angular", ca.angular, "Lag by Rx yaw misalignment instead of distance");
    c_c->add_option("--bin-width", ca.bin_width, "Lag bin width (m or deg)");
    c_c->add_option("--max-skew-ms", ca.max_skew_ms, "Association skew cap, ms");
    c_c->callback([&] { name = "consistency"; action = [&] { cmd_consistency(run, ca); }; });

    SimulateArgs si;
    auto* c_si = app.add_subcommand("simulate", "Beam-tracking discrete-event simulation");
    c_si->add_option("--scenario", si.scenario, "Scenario JSON");
    c_si->callback([&] { name = "simulate"; action = [&] { cmd_simulate(run, si); }; });

    FitCiArgs fa;
    auto* c_f = app.add_subcommand("fitci", "Close-in pathloss fit");
    c_f->add_option("--samples", fa.samples, "Pathloss samples CSV")->required();
    c_f->add_option("--d0", fa.d0, "Reference distance, m");
    c_f->add_option("--fc", fa.fc_ghz, "Carrier, GHz");
    c_f->add_option("--los", fa.los, "Subset: all, los or nlos");
    c_f->callback([&] { name = "fitci"; action = [&] { cmd_fitci(run, fa); }; });

    CalibrateArgs cb;
    auto* c_cb = app.add_subcommand("calibrate", "Fit calibration lines per gain setting");
    c_cb->add_option("--points", cb.points, "Calibration points CSV")->required();
    c_cb->callback([&] { name = "calibrate"; action = [&] { cmd_calibrate(run, cb); }; });

    CLI11_PARSE(app, argc, argv);

    run.out_dir = out_dir;
    try {
        fs::create_directories(run.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "mmwsound: cannot create " << out_dir << ": " << e.what() << '\n';
        return 2;
    }
    try {
        if (!run.config_path.empty())
            run.config = read_json(run.input("config", run.config_path));
        action();
    } catch (const Error& e) {
        run.error(std::string(to_string(e.code())), e.what());
    } catch (const std::exception& e) {
        run.error("Internal", e.what());
    }
    return run.finish(name);
}
