#pragma once

#include <cmath>
#include <vector>

#include "pinlayer/errors.hpp"
#include "pinlayer/layer.hpp"
#include "pinlayer/model.hpp"
#include "pinlayer/num/tridiag.hpp"

namespace pinlayer {

struct NewtonConfig {
    int max_iters = 50;
    double tol = 5e-12;        // target on max(|r|_inf, |mass residual|)
    double accept_tol = 1e-10; // stalled iterations may stop here
    double min_damping = 1.0 / 1024.0;
};

struct SteadyState {
    std::vector<double> x_grid;
    std::vector<double> u;
    std::vector<double> v;
    double C = 0.0;
    double residual_inf = 0.0;
    int newton_iters = 0;
    double epsilon = 0.0;
    double D = 1.0;
    double xi = 0.0;

    double h() const { return x_grid[1] - x_grid[0]; }
    int n() const { return static_cast<int>(x_grid.size()); }
};

// Composite trapezoid rule on a uniform grid.
inline double trapz(const std::vector<double>& y, double h) {
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * h;
}

// Second difference with ghost-node Neumann closure: the weighted row sums of
// this operator telescope to zero exactly, which is what makes the discrete
// mass identities hold to machine precision.
inline void second_difference(const std::vector<double>& y, double h, std::vector<double>& out) {
    const std::size_t n = y.size();
    out.resize(n);
    const double ih2 = 1.0 / (h * h);
    out[0] = 2.0 * (y[1] - y[0]) * ih2;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (y[i - 1] - 2.0 * y[i] + y[i + 1]) * ih2;
    out[n - 1] = 2.0 * (y[n - 2] - y[n - 1]) * ih2;
}

// x-location where a grid function crosses a level, by linear interpolation
// on the segment nearest the steepest crossing.
inline double detect_crossing(const std::vector<double>& x, const std::vector<double>& y,
                              double level) {
    double best_x = x.front();
    double best_slope = -1.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const double a = y[i] - level, b = y[i + 1] - level;
        if (a == 0.0) return x[i];
        if (a * b < 0.0) {
            const double slope = std::abs(b - a);
            if (slope > best_slope) {
                best_slope = slope;
                best_x = x[i] + (x[i + 1] - x[i]) * a / (a - b);
            }
        }
    }
    if (best_slope < 0.0) throw RootFindingFailure("detect_crossing: no crossing found");
    return best_x;
}

namespace detail {

struct ReducedSystem {
    const BistableModel& m;
    double eps, D, xi, h;
    int n;

    // Residual of eps^2 u_xx + f(u, (C - eps^2 u)/D) = 0 plus the trapezoid
    // mass constraint, with v eliminated through the first integral.
    void residual(const std::vector<double>& u, double C, std::vector<double>& r,
                  double& mass_res) const {
        std::vector<double> lap;
        second_difference(u, h, lap);
        r.resize(n);
        double mass = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = (C - eps * eps * u[i]) / D;
            r[i] = eps * eps * lap[i] + m.f(u[i], v);
            const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            mass += w * (u[i] + v);
        }
        mass_res = mass * h - xi;
    }

    double merit(const std::vector<double>& u, double C) const {
        std::vector<double> r;
        double mr;
        residual(u, C, r, mr);
        double s = mr * mr;
        for (double v : r) s += v * v;
        return s;
    }
};

} // namespace detail

// Damped Newton refinement of the composite to a finite-eps steady state.
// Unknowns are u at the nodes plus the first-integral constant C; the
// tridiagonal-plus-border Jacobian is solved by bordered elimination.
inline SteadyState refine(const BistableModel& m, const ProblemParams& p,
                          const CompositeApprox& init, const NewtonConfig& cfg = {}) {
    const int n = static_cast<int>(init.x_grid.size());
    const double h = init.x_grid[1] - init.x_grid[0];
    if (h > p.epsilon / 8.0 + 1e-15)
        throw ValidationError({"grid.n"}, "refine: grid spacing must satisfy h <= epsilon/8");

    detail::ReducedSystem sys{m, p.epsilon, p.D, p.xi, h, n};
    std::vector<double> u = init.u;
    double C = init.C;

    std::vector<double> r(n);
    double mass_res = 0.0;
    double best = std::numeric_limits<double>::infinity();
    int stalled = 0;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        sys.residual(u, C, r, mass_res);
        double rinf = std::abs(mass_res);
        for (double v : r) rinf = std::max(rinf, std::abs(v));
        if (rinf <= cfg.tol) break;
        if (rinf >= best * 0.999) {
            if (++stalled >= 3 && rinf <= cfg.accept_tol) break;
        } else {
            stalled = 0;
        }
        best = std::min(best, rinf);

        // Assemble bands and border.
        const double e2h2 = p.epsilon * p.epsilon / (h * h);
        std::vector<double> lo(n, e2h2), di(n), up(n, e2h2), dC(n), bu(n);
        for (int i = 0; i < n; ++i) {
            const double v = (C - p.epsilon * p.epsilon * u[i]) / p.D;
            const double fu = m.f_u(u[i], v), fv = m.f_v(u[i], v);
            di[i] = -2.0 * e2h2 + fu - (p.epsilon * p.epsilon / p.D) * fv;
            dC[i] = fv / p.D;
            const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            bu[i] = w * h * (1.0 - p.epsilon * p.epsilon / p.D);
        }
        up[0] = 2.0 * e2h2;
        lo[n - 1] = 2.0 * e2h2;
        const double bC = 1.0 / p.D; // d(mass)/dC with trapezoid weights summing to 1

        std::vector<double> y(n), g(n);
        for (int i = 0; i < n; ++i) {
            y[i] = -r[i];
            g[i] = -dC[i];
        }
        try {
            num::tridiag_solve(lo, di, up, y);
            num::tridiag_solve(lo, di, up, g);
        } catch (const LinearSolveFailure& e) {
            throw JacobianSingular(std::string("refine: ") + e.what());
        }
        double num_dC = -mass_res, den_dC = bC;
        for (int i = 0; i < n; ++i) {
            num_dC -= bu[i] * y[i];
            den_dC += bu[i] * g[i];
        }
        if (std::abs(den_dC) < 1e-14 * (1.0 + std::abs(bC)))
            throw JacobianSingular("refine: bordered system singular (layer at boundary?)");
        const double deltaC = num_dC / den_dC;

        // Armijo backtracking on the squared residual norm. A stall at the
        // minimal damping means the residual sits at its roundoff floor; that
        // is acceptable if the floor is already below accept_tol.
        const double merit0 = sys.merit(u, C);
        double step = 1.0;
        bool stalled_floor = false;
        std::vector<double> u_try(n);
        while (true) {
            for (int i = 0; i < n; ++i) u_try[i] = u[i] + step * (y[i] + deltaC * g[i]);
            const double C_try = C + step * deltaC;
            if (sys.merit(u_try, C_try) <= (1.0 - 1e-4 * step) * merit0) {
                u.swap(u_try);
                C = C_try;
                break;
            }
            step *= 0.5;
            if (step < cfg.min_damping) {
                if (rinf <= cfg.accept_tol) {
                    stalled_floor = true;
                    break;
                }
                throw NoConvergence("refine: line search stalled at minimal damping");
            }
        }
        if (stalled_floor) break;
    }

    sys.residual(u, C, r, mass_res);
    double rinf = std::abs(mass_res);
    for (double v : r) rinf = std::max(rinf, std::abs(v));
    if (rinf > cfg.accept_tol)
        throw NoConvergence("refine: residual " + std::to_string(rinf) + " after " +
                            std::to_string(it) + " iterations");

    SteadyState s;
    s.x_grid = init.x_grid;
    s.u = std::move(u);
    s.v.resize(n);
    for (int i = 0; i < n; ++i) s.v[i] = (C - p.epsilon * p.epsilon * s.u[i]) / p.D;
    s.C = C;
    s.newton_iters = it;
    s.epsilon = p.epsilon;
    s.D = p.D;
    s.xi = p.xi;
    s.residual_inf = rinf;
    return s;
}

// Independent check of both equations of the stationary system on the refined
// state (second-order central differences, ghost-node Neumann closure).
inline std::pair<double, double> full_residual(const BistableModel& m, const ProblemParams& p,
                                               const SteadyState& s) {
    const double h = s.h();
    std::vector<double> lap_u, lap_v;
    second_difference(s.u, h, lap_u);
    second_difference(s.v, h, lap_v);
    double ru = 0.0, rv = 0.0;
    for (int i = 0; i < s.n(); ++i) {
        const double f = m.f(s.u[i], s.v[i]);
        ru = std::max(ru, std::abs(p.epsilon * p.epsilon * lap_u[i] + f));
        rv = std::max(rv, std::abs(p.D * lap_v[i] - f));
    }
    return {ru, rv};
}

} // namespace pinlayer
