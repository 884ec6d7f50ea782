#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "pinlayer/errors.hpp"
#include "pinlayer/model.hpp"
#include "pinlayer/num/tridiag.hpp"
#include "pinlayer/steady.hpp"

namespace pinlayer {

struct SimConfig {
    double dt = 0.05;
    double t_end = 200.0;
    double theta = 0.5; // implicitness of the diffusion solve
    double perturbation_amplitude = 1e-4;
    unsigned seed = 1;
    double sample_interval = 0.5; // time between recorded samples
};

struct TimeSample {
    double t = 0.0;
    double mass = 0.0;
    double layer_position = 0.0;
    double deviation = 0.0;
};

struct SimReport {
    double mass_drift_max = 0.0;
    double final_layer_position = 0.0;
    double growth_rate_fit = 0.0;
    bool converged = false;
    double fit_r2 = 0.0;
    double fit_t_lo = 0.0, fit_t_hi = 0.0;
    double max_deviation = 0.0;
    double final_deviation = 0.0;
    bool dt_accuracy_ok = true; // dt <= 0.1 / max |f_u| over the initial data
    std::vector<TimeSample> series;
};

// Neumaier-compensated trapezoid mass; the per-step conservation identity is
// exact in exact arithmetic, so the measurement must not be the noisiest part.
inline double mass_functional(const std::vector<double>& u, const std::vector<double>& v,
                              double h) {
    double s = 0.0, comp = 0.0;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double term = w * (u[i] + v[i]);
        const double t = s + term;
        comp += (std::abs(s) >= std::abs(term)) ? (s - t) + term : (term - t) + s;
        s = t;
    }
    return (s + comp) * h;
}

// IMEX theta scheme: diffusion theta-implicit through tridiagonal solves,
// reaction explicit with one shared f-evaluation added to u and subtracted
// from v, so the trapezoid mass of u+v is conserved identically. Reaction uses
// two-step Adams-Bashforth after an Euler start, keeping theta = 1/2 second
// order in time.
class ImexThetaScheme {
public:
    ImexThetaScheme(const BistableModel& m, const ProblemParams& p, int n, const SimConfig& cfg)
        : m_(m), eps2_(p.epsilon * p.epsilon), D_(p.D), n_(n), h_(1.0 / (n - 1)),
          dt_(cfg.dt), theta_(cfg.theta) {
        if (theta_ < 0.5 || theta_ > 1.0)
            throw ValidationError({"grid.theta"}, "ImexThetaScheme: theta must be in [0.5, 1]");
        build_bands(eps2_, lo_u_, di_u_, up_u_);
        build_bands(D_, lo_v_, di_v_, up_v_);
    }

    void reset_history() { have_prev_ = false; }

    void step(std::vector<double>& u, std::vector<double>& v) {
        std::vector<double> f(n_);
        for (int i = 0; i < n_; ++i) f[i] = m_.f(u[i], v[i]);
        std::vector<double> reaction(n_);
        if (have_prev_)
            for (int i = 0; i < n_; ++i) reaction[i] = 1.5 * f[i] - 0.5 * f_prev_[i];
        else
            reaction = f;
        f_prev_ = std::move(f);
        have_prev_ = true;

        advance_field(u, eps2_, lo_u_, di_u_, up_u_, reaction, +1.0);
        advance_field(v, D_, lo_v_, di_v_, up_v_, reaction, -1.0);
    }

    // Single explicit-Euler-reaction step; used where a self-contained pure
    // step is wanted (conservation holds step by step either way).
    void step_euler_reaction(std::vector<double>& u, std::vector<double>& v) const {
        std::vector<double> f(n_);
        for (int i = 0; i < n_; ++i) f[i] = m_.f(u[i], v[i]);
        advance_field(u, eps2_, lo_u_, di_u_, up_u_, f, +1.0);
        advance_field(v, D_, lo_v_, di_v_, up_v_, f, -1.0);
    }

    double h() const { return h_; }

private:
    void build_bands(double diff, std::vector<double>& lo, std::vector<double>& di,
                     std::vector<double>& up) const {
        const double c = dt_ * theta_ * diff / (h_ * h_);
        lo.assign(n_, -c);
        di.assign(n_, 1.0 + 2.0 * c);
        up.assign(n_, -c);
        up[0] = -2.0 * c;
        lo[n_ - 1] = -2.0 * c;
    }

    // Increment form: (I - dt*theta*diff*D2) delta = dt*(diff*D2 w + reaction).
    // Solving for the O(dt) increment instead of the full state keeps the
    // linear-solver roundoff far below the conservation budget.
    void advance_field(std::vector<double>& w, double diff, const std::vector<double>& lo,
                       const std::vector<double>& di, const std::vector<double>& up,
                       const std::vector<double>& reaction, double sign) const {
        std::vector<double> lap;
        second_difference(w, h_, lap);
        std::vector<double> delta(n_);
        for (int i = 0; i < n_; ++i)
            delta[i] = dt_ * (diff * lap[i] + sign * reaction[i]);
        try {
            num::tridiag_solve(lo, di, up, delta);
        } catch (const LinearSolveFailure& e) {
            throw LinearSolveFailure(std::string("ImexThetaScheme: ") + e.what());
        }
        for (int i = 0; i < n_; ++i) w[i] += delta[i];
    }

    const BistableModel& m_;
    double eps2_, D_;
    int n_;
    double h_, dt_, theta_;
    std::vector<double> lo_u_, di_u_, up_u_, lo_v_, di_v_, up_v_;
    std::vector<double> f_prev_;
    bool have_prev_ = false;
};

// One scheme step as a pure operation.
inline void sim_step(const BistableModel& m, const ProblemParams& p, std::vector<double>& u,
                     std::vector<double>& v, const SimConfig& cfg) {
    ImexThetaScheme scheme(m, p, static_cast<int>(u.size()), cfg);
    scheme.step_euler_reaction(u, v);
}

namespace detail {

inline double layer_position_or_nan(const std::vector<double>& x, const std::vector<double>& u) {
    double lo = u.front(), hi = u.front();
    for (double w : u) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    try {
        return detect_crossing(x, u, 0.5 * (lo + hi));
    } catch (const RootFindingFailure&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

struct LogLinearFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

inline LogLinearFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& lnd) {
    const std::size_t n = t.size();
    double st = 0, sd = 0, stt = 0, std_ = 0, sdd = 0;
    for (std::size_t i = 0; i < n; ++i) {
        st += t[i];
        sd += lnd[i];
        stt += t[i] * t[i];
        std_ += t[i] * lnd[i];
        sdd += lnd[i] * lnd[i];
    }
    LogLinearFit f;
    const double den = n * stt - st * st;
    f.slope = (n * std_ - st * sd) / den;
    f.intercept = (sd - f.slope * st) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sd / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = f.intercept + f.slope * t[i];
        ss_res += (lnd[i] - pred) * (lnd[i] - pred);
        ss_tot += (lnd[i] - mean) * (lnd[i] - mean);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

} // namespace detail

// Evolve (u0, v0) and record mass, layer position and the L2 deviation from a
// reference state at regular sample times.
inline SimReport run_simulation(const BistableModel& m, const ProblemParams& p,
                                std::vector<double> u, std::vector<double> v,
                                const std::vector<double>& base_u,
                                const std::vector<double>& base_v, const SimConfig& cfg) {
    const int n = static_cast<int>(u.size());
    ImexThetaScheme scheme(m, p, n, cfg);
    const double h = scheme.h();
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = i * h;

    const double mass0 = mass_functional(u, v, h);
    auto deviation = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            const double du = u[i] - base_u[i], dv = v[i] - base_v[i];
            s += w * (du * du + dv * dv);
        }
        return std::sqrt(s * h);
    };

    SimReport rep;
    double fu_max = 0.0;
    for (int i = 0; i < n; ++i) fu_max = std::max(fu_max, std::abs(m.f_u(u[i], v[i])));
    rep.dt_accuracy_ok = cfg.dt <= 0.1 / std::max(fu_max, 1e-300);
    const long steps = std::lround(cfg.t_end / cfg.dt);
    const long sample_every = std::max<long>(1, std::lround(cfg.sample_interval / cfg.dt));
    auto record = [&](double t) {
        TimeSample smp;
        smp.t = t;
        smp.mass = mass_functional(u, v, h);
        smp.layer_position = detail::layer_position_or_nan(x, u);
        smp.deviation = deviation();
        rep.mass_drift_max = std::max(rep.mass_drift_max, std::abs(smp.mass - mass0));
        rep.max_deviation = std::max(rep.max_deviation, smp.deviation);
        rep.series.push_back(smp);
    };
    record(0.0);
    for (long k = 1; k <= steps; ++k) {
        scheme.step(u, v);
        if (k % sample_every == 0 || k == steps) record(k * cfg.dt);
    }
    rep.final_layer_position = rep.series.back().layer_position;
    rep.final_deviation = rep.series.back().deviation;
    return rep;
}

// Perturb a refined steady state inside the mass-zero subspace, evolve, and
// fit the exponential growth/decay rate of the deviation on a window with
// log-linear R^2 >= 0.999 (front-trimmed until the transient is gone).
inline SimReport run_stability_experiment(const BistableModel& m, const ProblemParams& p,
                                          const SteadyState& base, const SimConfig& cfg) {
    const int n = base.n();
    std::vector<double> u = base.u, v = base.v;

    if (cfg.perturbation_amplitude != 0.0) {
        std::mt19937 rng(cfg.seed);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        std::vector<double> du(n, 0.0);
        for (int k = 1; k <= 4; ++k) {
            const double c = coef(rng);
            for (int i = 0; i < n; ++i)
                du[i] += c * std::cos(k * M_PI * i / (n - 1.0));
        }
        double sup = 0.0;
        for (double w : du) sup = std::max(sup, std::abs(w));
        for (double& w : du) w *= cfg.perturbation_amplitude / sup;
        const double mean_shift = trapz(du, base.h());
        for (int i = 0; i < n; ++i) {
            u[i] += du[i];
            v[i] -= mean_shift; // constant offset keeps the total mass exact
        }
    }

    SimReport rep = run_simulation(m, p, u, v, base.u, base.v, cfg);
    if (cfg.perturbation_amplitude == 0.0) {
        rep.converged = rep.max_deviation <= 1e-9;
        return rep;
    }

    // Window: deviation between 10x the refine tolerance and a tenth of the
    // layer amplitude.
    double u_lo = base.u.front(), u_hi = base.u.front();
    for (double w : base.u) {
        u_lo = std::min(u_lo, w);
        u_hi = std::max(u_hi, w);
    }
    const double amp_hi = 0.1 * (u_hi - u_lo);
    const double amp_lo = 10.0 * 1e-10;
    std::vector<double> t, lnd;
    for (const auto& smp : rep.series)
        if (smp.t > 0.0 && smp.deviation > amp_lo && smp.deviation < amp_hi) {
            t.push_back(smp.t);
            lnd.push_back(std::log(smp.deviation));
        }
    if (t.size() < 10)
        throw WindowNotFound("run_stability_experiment: deviation left the fit range too fast");

    detail::LogLinearFit fit;
    std::size_t start = 0;
    while (true) {
        std::vector<double> tw(t.begin() + start, t.end());
        std::vector<double> dw(lnd.begin() + start, lnd.end());
        fit = detail::fit_log_linear(tw, dw);
        if (fit.r2 >= 0.999 || tw.size() <= 10) break;
        start += std::max<std::size_t>(1, (t.size() - start) / 10);
        if (t.size() - start < 10) break;
    }
    if (fit.r2 < 0.999)
        throw WindowNotFound("run_stability_experiment: no window reached R^2 >= 0.999");
    rep.growth_rate_fit = fit.slope;
    rep.fit_r2 = fit.r2;
    rep.fit_t_lo = t[start];
    rep.fit_t_hi = t.back();
    rep.converged = true;
    return rep;
}

} // namespace pinlayer
