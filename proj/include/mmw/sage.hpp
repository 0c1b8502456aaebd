// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "antenna.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "fir.hpp"
#include "sounder.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace mmw::sage {

using cplx = std::complex<double>;

// One specular path: complex amplitude, delay (s), Doppler (Hz), azimuth and
// elevation of arrival (deg, elevation up from the horizontal plane).
struct MultipathComponent {
    cplx alpha{1.0, 0.0};
    double tau = 0.0;
    double nu = 0.0;
    double phi = 0.0;
    double theta = 0.0;
};

// Mechanical pointing of the receive horn at a capture instant.
struct Pointing {
    double az = 0.0;  // deg
    double el = 0.0;  // deg
    double t = 0.0;   // s
};

struct Snapshot {
    Pointing pointing;
    std::vector<cplx> y;  // complex baseband on the delay grid
};

struct ObservationSet {
    std::vector<Snapshot> snapshots;
    sounder::SounderSpec spec;
    antenna::AntennaModel antenna;
    double noise_power = 0.0;  // E|w|^2 per sample

    std::size_t num_bins() const { return snapshots.empty() ? 0 : snapshots.front().y.size(); }
    double delay_step() const { return sounder::temporal_resolution(spec); }

    double energy() const
    {
        double e = 0.0;
        for (const auto& s : snapshots)
            for (const auto& v : s.y)
                e += std::norm(v);
        return e;
    }
};

struct SageConfig {
    int num_paths = 1;
    int max_iterations = 30;

    // Convergence: every parameter of every path moved less than these.
    double tol_tau_s = 1e-12;
    double tol_nu_hz = 1e-2;
    double tol_angle_deg = 1e-3;
    double tol_alpha_rel = 1e-4;

    // Search grids. The Doppler grid defaults to 1/(2 T_obs); with
    // max_doppler_hz == 0 Doppler is held at zero.
    double tau_step_bins = 1.0;
    double angle_step_deg = 1.0;
    double max_doppler_hz = 0.0;
    std::optional<double> nu_step_hz;
    int refine_levels = 4;  // parabolic refinements, each at a quarter of the previous step

    // Angular search window; defaults to the pointing span plus a margin.
    std::optional<std::pair<double, double>> phi_range;
    std::optional<std::pair<double, double>> theta_range;
    double range_margin_deg = 5.0;

    void validate() const
    {
        if (num_paths < 1)
            throw Error(ErrorCode::ConfigInvalid, "num_paths must be >= 1");
        if (max_iterations < 0)
            throw Error(ErrorCode::ConfigInvalid, "max_iterations must be >= 0");
        if (!(tol_tau_s > 0.0 && tol_nu_hz > 0.0 && tol_angle_deg > 0.0 && tol_alpha_rel > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "convergence thresholds must be > 0");
        if (!(tau_step_bins > 0.0 && angle_step_deg > 0.0) || max_doppler_hz < 0.0)
            throw Error(ErrorCode::ConfigInvalid, "grid steps must be > 0");
    }
};

struct SageResult {
    std::vector<MultipathComponent> components;
    // Explained energy ||y||^2 - ||y - model||^2; entry 0 is the initialization.
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
};

// ---- signal model -----------------------------------------------------------

// Band-limited delay kernel on the delay grid.
inline std::vector<double> delay_kernel(std::size_t num_bins, double delay_step, double tau)
{
    std::vector<double> c(num_bins);
    for (std::size_t n = 0; n < num_bins; ++n)
        c[n] = fir::sinc((static_cast<double>(n) * delay_step - tau) / delay_step);
    return c;
}

// Pattern gain times Doppler phase, one entry per snapshot.
inline std::vector<cplx> angle_doppler(const ObservationSet& obs, double nu, double phi, double theta)
{
    std::vector<cplx> a(obs.snapshots.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto& p = obs.snapshots[k].pointing;
        const double g = antenna::amplitude_gain(obs.antenna, phi - p.az, theta - p.el);
        a[k] = g * std::polar(1.0, 2.0 * pi * nu * p.t);
    }
    return a;
}

// Noise-free contribution of one component, added into `out`.
inline void accumulate_model(const ObservationSet& obs, const MultipathComponent& c, std::vector<std::vector<cplx>>& out,
                             double sign = 1.0)
{
    const auto kern = delay_kernel(obs.num_bins(), obs.delay_step(), c.tau);
    const auto a = angle_doppler(obs, c.nu, c.phi, c.theta);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const cplx ak = sign * c.alpha * a[k];
        for (std::size_t n = 0; n < kern.size(); ++n)
            out[k][n] += ak * kern[n];
    }
}

inline std::vector<std::vector<cplx>> observations(const ObservationSet& obs)
{
    std::vector<std::vector<cplx>> y;
    y.reserve(obs.snapshots.size());
    for (const auto& s : obs.snapshots)
        y.push_back(s.y);
    return y;
}

inline double energy(const std::vector<std::vector<cplx>>& x)
{
    double e = 0.0;
    for (const auto& row : x)
        for (const auto& v : row)
            e += std::norm(v);
    return e;
}

// y - sum of all component models.
inline std::vector<std::vector<cplx>> residual(const ObservationSet& obs, std::span<const MultipathComponent> comps)
{
    auto r = observations(obs);
    for (const auto& c : comps)
        accumulate_model(obs, c, r, -1.0);
    return r;
}

inline std::vector<Pointing> raster_schedule(double az_min, double az_max, double az_step, double el_min, double el_max,
                                             double el_step, double dt)
{
    std::vector<Pointing> s;
    double t = 0.0;
    for (double el = el_min; el <= el_max + 1e-9; el += el_step)
        for (double az = az_min; az <= az_max + 1e-9; az += az_step) {
            s.push_back({az, el, t});
            t += dt;
        }
    return s;
}

// Ground-truth observations: snapshot k is
//   sum_i alpha_i g(phi_i - az_k, theta_i - el_k) c(tau - tau_i) exp(j 2 pi nu_i t_k) + w
// with w circular complex Gaussian of power noise_power.
inline ObservationSet synthesize_observations(std::span<const MultipathComponent> components,
                                              std::span<const Pointing> schedule, const sounder::SounderSpec& spec,
                                              const antenna::AntennaModel& antenna, double noise_power,
                                              std::uint64_t seed, std::size_t num_bins)
{
    if (schedule.empty() || num_bins == 0)
        throw Error(ErrorCode::InvalidInput, "need a non-empty schedule and delay grid");
    if (noise_power < 0.0)
        throw Error(ErrorCode::InvalidInput, "noise_power must be >= 0");
    ObservationSet obs;
    obs.spec = spec;
    obs.antenna = antenna;
    obs.noise_power = noise_power;
    const double dtau = sounder::temporal_resolution(spec);
    const double tau_max = std::min(static_cast<double>(num_bins - 1) * dtau, sounder::max_excess_delay(spec));
    for (const auto& c : components) {
        if (!(c.tau >= 0.0 && c.tau <= tau_max + 1e-18) || !(c.phi >= -180.0 && c.phi < 180.0) ||
            !(c.theta >= -90.0 && c.theta <= 90.0) || std::abs(c.alpha) == 0.0)
            throw Error(ErrorCode::ComponentOutOfGrid, "component outside the delay/angle grid");
    }
    for (const auto& p : schedule)
        obs.snapshots.push_back({p, std::vector<cplx>(num_bins)});
    auto sig = observations(obs);
    for (const auto& c : components)
        accumulate_model(obs, c, sig);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(noise_power / 2.0));
    for (std::size_t k = 0; k < sig.size(); ++k)
        for (std::size_t b = 0; b < num_bins; ++b) {
            const double re = noise_power > 0.0 ? n(rng) : 0.0;
            const double im = noise_power > 0.0 ? n(rng) : 0.0;
            obs.snapshots[k].y[b] = sig[k][b] + cplx(re, im);
        }
    return obs;
}

// ---- search machinery -------------------------------------------------------

namespace detail {

struct Grid {
    double lo = 0.0, hi = 0.0, step = 1.0;

    std::size_t size() const { return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1; }
    double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct SearchSpace {
    Grid tau, nu, phi, theta;
    bool doppler = false;
};

inline SearchSpace search_space(const ObservationSet& obs, const SageConfig& cfg)
{
    SearchSpace s;
    const double dtau = obs.delay_step();
    s.tau = {0.0, static_cast<double>(obs.num_bins() - 1) * dtau, cfg.tau_step_bins * dtau};
    double az_lo = std::numeric_limits<double>::infinity(), az_hi = -az_lo, el_lo = az_lo, el_hi = -az_lo;
    double t_lo = az_lo, t_hi = -az_lo;
    for (const auto& sn : obs.snapshots) {
        az_lo = std::min(az_lo, sn.pointing.az);
        az_hi = std::max(az_hi, sn.pointing.az);
        el_lo = std::min(el_lo, sn.pointing.el);
        el_hi = std::max(el_hi, sn.pointing.el);
        t_lo = std::min(t_lo, sn.pointing.t);
        t_hi = std::max(t_hi, sn.pointing.t);
    }
    const auto phi = cfg.phi_range.value_or(std::pair{az_lo - cfg.range_margin_deg, az_hi + cfg.range_margin_deg});
    const auto theta = cfg.theta_range.value_or(std::pair{std::max(-90.0, el_lo - cfg.range_margin_deg),
                                                          std::min(90.0, el_hi + cfg.range_margin_deg)});
    s.phi = {phi.first, phi.second, cfg.angle_step_deg};
    s.theta = {theta.first, theta.second, cfg.angle_step_deg};
    s.doppler = cfg.max_doppler_hz > 0.0;
    if (s.doppler) {
        const double t_obs = std::max(t_hi - t_lo, 1e-12);
        const double step = cfg.nu_step_hz.value_or(1.0 / (2.0 * t_obs));
        s.nu = {-cfg.max_doppler_hz, cfg.max_doppler_hz, step};
    } else {
        s.nu = {0.0, 0.0, 1.0};
    }
    return s;
}

// Matched filter for a separable signature a_k c_n:
//   z = sum_k conj(a_k) sum_n c_n x_k[n],  objective = |z|^2 / (||a||^2 ||c||^2)
struct Match {
    double objective = 0.0;
    cplx alpha{0.0, 0.0};
};

inline Match match(std::span<const cplx> a, std::span<const double> c, const std::vector<std::vector<cplx>>& x)
{
    cplx z{0.0, 0.0};
    double a2 = 0.0, c2 = 0.0;
    for (double v : c)
        c2 += v * v;
    for (std::size_t k = 0; k < a.size(); ++k) {
        cplx inner{0.0, 0.0};
        for (std::size_t n = 0; n < c.size(); ++n)
            inner += c[n] * x[k][n];
        z += std::conj(a[k]) * inner;
        a2 += std::norm(a[k]);
    }
    const double s2 = a2 * c2;
    if (s2 <= 0.0)
        return {};
    return {std::norm(z) / s2, z / s2};
}

// Maximize f over a grid, then parabolic refinement at successively finer
// steps. Returns the argmax among the grid, refined points and `current`.
inline double maximize_1d(const std::function<double(double)>& f, const Grid& grid, double current, int refine_levels)
{
    double best_x = current;
    double best_f = f(current);
    const std::size_t n = grid.size();
    std::size_t gi = 0;
    double gf = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = f(grid.at(i));
        if (v > gf) {
            gf = v;
            gi = i;
        }
    }
    double x0 = grid.at(gi), f0 = gf;
    if (f0 > best_f) {
        best_f = f0;
        best_x = x0;
    }
    double h = grid.step;
    for (int level = 0; level < refine_levels && n > 1; ++level) {
        const double fm = f(x0 - h), fp = f(x0 + h);
        const double denom = fm - 2.0 * f0 + fp;
        double xr = x0;
        if (denom < 0.0) {
            const double delta = std::clamp(0.5 * (fm - fp) / denom, -1.0, 1.0);
            xr = x0 + delta * h;
        } else if (fm > f0 || fp > f0) {
            xr = fm > fp ? x0 - h : x0 + h;
        }
        xr = std::clamp(xr, grid.lo, grid.hi);
        const double fr = f(xr);
        if (fr > f0) {
            x0 = xr;
            f0 = fr;
        }
        if (f0 > best_f) {
            best_f = f0;
            best_x = x0;
        }
        h *= 0.25;
    }
    return best_x;
}

} // namespace detail

// ---- SAGE steps -------------------------------------------------------------

// x_i = y - sum_{j != i} model(xi_j)
inline std::vector<std::vector<cplx>> e_step(const ObservationSet& obs, std::span<const MultipathComponent> estimates,
                                             std::size_t i)
{
    if (i >= estimates.size())
        throw Error(ErrorCode::InvalidInput, "path index out of range");
    auto x = observations(obs);
    for (std::size_t j = 0; j < estimates.size(); ++j)
        if (j != i)
            accumulate_model(obs, estimates[j], x, -1.0);
    return x;
}

// Matched-filter objective of a candidate parameter vector against x.
inline detail::Match objective(const ObservationSet& obs, const std::vector<std::vector<cplx>>& x,
                               const MultipathComponent& c)
{
    const auto kern = delay_kernel(obs.num_bins(), obs.delay_step(), c.tau);
    const auto a = angle_doppler(obs, c.nu, c.phi, c.theta);
    return detail::match(a, kern, x);
}

// Coordinate-wise maximization in the order tau, nu, phi, theta, then the
// closed-form least-squares amplitude.
inline MultipathComponent m_step(const ObservationSet& obs, const std::vector<std::vector<cplx>>& x,
                                 const MultipathComponent& current, const SageConfig& cfg)
{
    const auto space = detail::search_space(obs, cfg);
    const std::size_t nb = obs.num_bins();
    const double dtau = obs.delay_step();
    MultipathComponent c = current;

    {
        // u[n] = sum_k conj(a_k) x_k[n] collapses the snapshot axis.
        const auto a = angle_doppler(obs, c.nu, c.phi, c.theta);
        double a2 = 0.0;
        std::vector<cplx> u(nb);
        for (std::size_t k = 0; k < a.size(); ++k) {
            a2 += std::norm(a[k]);
            for (std::size_t n = 0; n < nb; ++n)
                u[n] += std::conj(a[k]) * x[k][n];
        }
        auto f = [&](double tau) {
            const auto kern = delay_kernel(nb, dtau, tau);
            cplx z{0.0, 0.0};
            double c2 = 0.0;
            for (std::size_t n = 0; n < nb; ++n) {
                z += kern[n] * u[n];
                c2 += kern[n] * kern[n];
            }
            return a2 * c2 > 0.0 ? std::norm(z) / (a2 * c2) : 0.0;
        };
        c.tau = detail::maximize_1d(f, space.tau, c.tau, cfg.refine_levels);
    }

    // w_k = sum_n c_n x_k[n] collapses the delay axis for the angle/Doppler updates.
    const auto kern = delay_kernel(nb, dtau, c.tau);
    std::vector<cplx> w(x.size());
    double c2 = 0.0;
    for (double v : kern)
        c2 += v * v;
    for (std::size_t k = 0; k < x.size(); ++k)
        for (std::size_t n = 0; n < nb; ++n)
            w[k] += kern[n] * x[k][n];
    auto eval = [&](double nu, double phi, double theta) {
        cplx z{0.0, 0.0};
        double a2 = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const auto& p = obs.snapshots[k].pointing;
            const cplx ak = antenna::amplitude_gain(obs.antenna, phi - p.az, theta - p.el) *
                            std::polar(1.0, 2.0 * pi * nu * p.t);
            z += std::conj(ak) * w[k];
            a2 += std::norm(ak);
        }
        return a2 * c2 > 0.0 ? std::norm(z) / (a2 * c2) : 0.0;
    };
    if (space.doppler)
        c.nu = detail::maximize_1d([&](double nu) { return eval(nu, c.phi, c.theta); }, space.nu, c.nu,
                                   cfg.refine_levels);
    c.phi = detail::maximize_1d([&](double phi) { return eval(c.nu, phi, c.theta); }, space.phi, c.phi,
                                cfg.refine_levels);
    c.theta = detail::maximize_1d([&](double theta) { return eval(c.nu, c.phi, theta); }, space.theta, c.theta,
                                  cfg.refine_levels);
    c.alpha = objective(obs, x, c).alpha;
    if (std::abs(c.alpha) == 0.0)
        c.alpha = current.alpha;
    return c;
}

// Successive cancellation over the on-grid (tau, nu, phi, theta) cells.
inline std::vector<MultipathComponent> initialize(const ObservationSet& obs, int num_paths, const SageConfig& cfg = {})
{
    if (num_paths < 1)
        throw Error(ErrorCode::ConfigInvalid, "num_paths must be >= 1");
    const auto space = detail::search_space(obs, cfg);
    const std::size_t nb = obs.num_bins();
    const std::size_t K = obs.snapshots.size();
    const double dtau = obs.delay_step();

    // Pattern gains per angle cell and snapshot.
    const std::size_t nphi = space.phi.size(), nth = space.theta.size(), nnu = space.nu.size();
    std::vector<double> gains(nphi * nth * K);
    std::vector<double> g2(nphi * nth, 0.0);
    for (std::size_t ip = 0; ip < nphi; ++ip)
        for (std::size_t it = 0; it < nth; ++it)
            for (std::size_t k = 0; k < K; ++k) {
                const auto& p = obs.snapshots[k].pointing;
                const double g = antenna::amplitude_gain(obs.antenna, space.phi.at(ip) - p.az, space.theta.at(it) - p.el);
                gains[(ip * nth + it) * K + k] = g;
                g2[ip * nth + it] += g * g;
            }

    std::vector<MultipathComponent> out;
    auto r = observations(obs);
    const std::size_t ntau = space.tau.size();
    std::vector<cplx> col(K);
    for (int i = 0; i < num_paths; ++i) {
        double best = -1.0;
        MultipathComponent pick;
        for (std::size_t itau = 0; itau < ntau; ++itau) {
            const double tau = space.tau.at(itau);
            const double pos = tau / dtau;
            const bool on_grid = std::abs(pos - std::round(pos)) < 1e-9;
            double c2 = 1.0;
            if (on_grid) {
                const auto m = static_cast<std::size_t>(std::llround(pos));
                for (std::size_t k = 0; k < K; ++k)
                    col[k] = r[k][m];
            } else {
                const auto kern = delay_kernel(nb, dtau, tau);
                c2 = 0.0;
                for (double v : kern)
                    c2 += v * v;
                for (std::size_t k = 0; k < K; ++k) {
                    col[k] = {0.0, 0.0};
                    for (std::size_t n = 0; n < nb; ++n)
                        col[k] += kern[n] * r[k][n];
                }
            }
            for (std::size_t inu = 0; inu < nnu; ++inu) {
                const double nu = space.nu.at(inu);
                std::vector<cplx> rot(K);
                for (std::size_t k = 0; k < K; ++k)
                    rot[k] = col[k] * std::polar(1.0, -2.0 * pi * nu * obs.snapshots[k].pointing.t);
                for (std::size_t cell = 0; cell < nphi * nth; ++cell) {
                    const double* g = &gains[cell * K];
                    cplx z{0.0, 0.0};
                    for (std::size_t k = 0; k < K; ++k)
                        z += g[k] * rot[k];
                    const double s2 = g2[cell] * c2;
                    const double obj = s2 > 0.0 ? std::norm(z) / s2 : 0.0;
                    if (obj > best) {
                        best = obj;
                        pick.tau = tau;
                        pick.nu = nu;
                        pick.phi = space.phi.at(cell / nth);
                        pick.theta = space.theta.at(cell % nth);
                        pick.alpha = s2 > 0.0 ? z / s2 : cplx{};
                    }
                }
            }
        }
        if (std::abs(pick.alpha) == 0.0)
            pick.alpha = {std::numeric_limits<double>::min(), 0.0};
        accumulate_model(obs, pick, r, -1.0);
        out.push_back(pick);
    }
    return out;
}

inline double explained_energy(const ObservationSet& obs, std::span<const MultipathComponent> comps)
{
    return obs.energy() - energy(residual(obs, comps));
}

inline SageResult run_sage(const ObservationSet& obs, const SageConfig& cfg)
{
    cfg.validate();
    if (obs.snapshots.empty() || obs.num_bins() == 0)
        throw Error(ErrorCode::InvalidInput, "empty observation set");
    SageResult res;
    res.components = initialize(obs, cfg.num_paths, cfg);
    res.objective_trace.push_back(explained_energy(obs, res.components));
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const auto previous = res.components;
        bool small = true;
        for (std::size_t i = 0; i < res.components.size(); ++i) {
            const auto x = e_step(obs, res.components, i);
            const MultipathComponent before = res.components[i];
            const MultipathComponent after = m_step(obs, x, before, cfg);
            const double mag = std::abs(before.alpha);
            small = small && std::abs(after.tau - before.tau) < cfg.tol_tau_s &&
                    std::abs(after.nu - before.nu) < cfg.tol_nu_hz &&
                    std::abs(after.phi - before.phi) < cfg.tol_angle_deg &&
                    std::abs(after.theta - before.theta) < cfg.tol_angle_deg &&
                    std::abs(std::abs(after.alpha) - mag) <= cfg.tol_alpha_rel * mag;
            res.components[i] = after;
        }
        res.iterations = it + 1;
        const double value = explained_energy(obs, res.components);
        if (value < res.objective_trace.back()) {
            // Each coordinate update is non-decreasing in exact arithmetic; a
            // drop here is rounding at the optimum, so keep the better set.
            res.components = previous;
            res.objective_trace.push_back(res.objective_trace.back());
            res.converged = small;
            break;
        }
        res.objective_trace.push_back(value);
        if (small) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// ---- direction spread -------------------------------------------------------

// sqrt(sum P_i ||e_i - mu||^2 / sum P_i), mu the power-weighted mean arrival
// unit vector. Equal to sqrt(1 - ||mu||^2), but without the cancellation
// that form suffers when the spread is small.
inline double direction_spread(std::span<const MultipathComponent> comps)
{
    if (comps.empty())
        throw Error(ErrorCode::InvalidInput, "direction spread needs >= 1 component");
    struct Unit {
        double p, x, y, z;
    };
    std::vector<Unit> e;
    e.reserve(comps.size());
    double total = 0.0, mx = 0.0, my = 0.0, mz = 0.0;
    for (const auto& c : comps) {
        const double th = deg2rad(c.theta), ph = deg2rad(c.phi);
        const Unit u{std::norm(c.alpha), std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), std::sin(th)};
        mx += u.p * u.x;
        my += u.p * u.y;
        mz += u.p * u.z;
        total += u.p;
        e.push_back(u);
    }
    if (!(total > 0.0))
        throw Error(ErrorCode::InvalidInput, "total path power is zero");
    mx /= total;
    my /= total;
    mz /= total;
    double acc = 0.0;
    for (const auto& u : e)
        acc += u.p * ((u.x - mx) * (u.x - mx) + (u.y - my) * (u.y - my) + (u.z - mz) * (u.z - mz));
    return std::sqrt(std::clamp(acc / total, 0.0, 1.0));
}

struct CdfPoint {
    double value = 0.0;
    double probability = 0.0;
};

// Empirical CDF with one step per distinct value.
inline std::vector<CdfPoint> spread_cdf(std::span<const double> values)
{
    if (values.empty())
        throw Error(ErrorCode::InvalidInput, "CDF of an empty set");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::vector<CdfPoint> out;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i])
            continue;
        out.push_back({v[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

// ---- files ------------------------------------------------------------------

inline constexpr std::string_view component_header = "path_id,alpha_mag,alpha_phase_rad,tau_s,nu_hz,phi_deg,theta_deg";

inline void write_components(std::ostream& out, std::span<const MultipathComponent> comps)
{
    out << component_header << '\n';
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto& c = comps[i];
        out << i << ',' << csv::fmt(std::abs(c.alpha)) << ',' << csv::fmt(std::arg(c.alpha)) << ',' << csv::fmt(c.tau)
            << ',' << csv::fmt(c.nu) << ',' << csv::fmt(c.phi) << ',' << csv::fmt(c.theta) << '\n';
    }
}

inline std::vector<MultipathComponent> read_components(std::istream& in)
{
    const csv::Table t = csv::read(in);
    const std::size_t cm = t.column("alpha_mag"), cp = t.column("alpha_phase_rad"), ct = t.column("tau_s"),
                      cn = t.column("nu_hz"), cf = t.column("phi_deg"), ch = t.column("theta_deg");
    std::vector<MultipathComponent> out;
    for (const auto& r : t.rows) {
        MultipathComponent c;
        c.alpha = std::polar(csv::to_double(r[cm]), csv::to_double(r[cp]));
        c.tau = csv::to_double(r[ct]);
        c.nu = csv::to_double(r[cn]);
        c.phi = csv::to_double(r[cf]);
        c.theta = csv::to_double(r[ch]);
        out.push_back(c);
    }
    return out;
}

inline void write_cdf(std::ostream& out, std::span<const CdfPoint> cdf)
{
    out << "value,probability\n";
    for (const auto& p : cdf)
        out << csv::fmt(p.value) << ',' << csv::fmt(p.probability) << '\n';
}

// Observation sets as JSON: pointing, capture time and re/im vectors per
// snapshot. Spec and antenna are supplied by the reader.
inline nlohmann::json to_json(const ObservationSet& obs)
{
    nlohmann::json j;
    j["noise_power"] = obs.noise_power;
    j["snapshots"] = nlohmann::json::array();
    for (const auto& s : obs.snapshots) {
        std::vector<double> re, im;
        for (const auto& v : s.y) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        j["snapshots"].push_back({{"az_deg", s.pointing.az}, {"el_deg", s.pointing.el}, {"t_s", s.pointing.t},
                                  {"re", re}, {"im", im}});
    }
    return j;
}

inline ObservationSet observations_from_json(const nlohmann::json& j, const sounder::SounderSpec& spec,
                                             const antenna::AntennaModel& antenna)
{
    ObservationSet obs;
    obs.spec = spec;
    obs.antenna = antenna;
    try {
        obs.noise_power = j.value("noise_power", 0.0);
        for (const auto& s : j.at("snapshots")) {
            Snapshot sn;
            sn.pointing = {s.at("az_deg").get<double>(), s.at("el_deg").get<double>(), s.at("t_s").get<double>()};
            const auto re = s.at("re").get<std::vector<double>>();
            const auto im = s.at("im").get<std::vector<double>>();
            if (re.size() != im.size() || re.empty())
                throw Error(ErrorCode::MalformedField, "snapshot re/im length mismatch");
            for (std::size_t i = 0; i < re.size(); ++i)
                sn.y.emplace_back(re[i], im[i]);
            if (!obs.snapshots.empty() && sn.y.size() != obs.num_bins())
                throw Error(ErrorCode::MalformedField, "snapshots do not share one delay grid");
            obs.snapshots.push_back(std::move(sn));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedField, std::string("observation JSON: ") + e.what());
    }
    return obs;
}

} // namespace mmw::sage
