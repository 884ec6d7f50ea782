#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pinlayer/errors.hpp"

namespace pinlayer {

// Reaction nonlinearity f(u,v) with caller-supplied partial derivatives, the
// v-interval on which bistability is expected, and a u-range for root scans.
// Immutable after construction; all evaluations are pure.
struct BistableModel {
    using Fn = std::function<double(double, double)>;

    Fn f;
    Fn f_u;
    Fn f_v;
    Fn f_uu;
    Fn f_uv;
    double v_lo = 0.0;
    double v_hi = 0.0;
    double u_scan_lo = -2.0; // bracket for the three-root scan in u
    double u_scan_hi = 2.0;
    std::string label;

    bool v_in_interval(double v) const { return v > v_lo && v < v_hi; }
};

struct ProblemParams {
    double epsilon = 0.02;
    double D = 1.0;
    double xi = 0.0;

    bool scale_separation_ok() const { return epsilon > 0.0 && epsilon < D / 10.0; }
};

// Canonical test family f(u,v) = u - u^3 + s*v. Exact derivatives; the
// v-interval is sized so the cubic keeps three real roots throughout
// (discriminant 4 - 27 s^2 v^2 > 0 needs |s v| < 2/(3 sqrt 3) ~ 0.385).
inline BistableModel builtin_cubic(double s) {
    if (s == 0.0)
        throw ValidationError({"model.s"}, "builtin_cubic: s = 0 makes J'(v*) vanish");
    if (s <= -2.0)
        throw ValidationError({"model.s"},
                              "builtin_cubic: s <= -2 breaks f_u(h^pm) < f_v(h^pm)");
    BistableModel m;
    m.f = [s](double u, double v) { return u - u * u * u + s * v; };
    m.f_u = [](double u, double) { return 1.0 - 3.0 * u * u; };
    m.f_v = [s](double, double) { return s; };
    m.f_uu = [](double u, double) { return -6.0 * u; };
    m.f_uv = [](double, double) { return 0.0; };
    const double w = 0.2 / std::max(std::abs(s), 1.0);
    m.v_lo = -w;
    m.v_hi = w;
    m.u_scan_lo = -2.0;
    m.u_scan_hi = 2.0;
    m.label = "cubic(s=" + std::to_string(s) + ")";
    return m;
}

// Central finite-difference check of the supplied derivatives at one point.
inline bool derivatives_consistent_at(const BistableModel& m, double u, double v,
                                      double rel_tol = 1e-6, double step = 1e-5) {
    const double fu_fd = (m.f(u + step, v) - m.f(u - step, v)) / (2.0 * step);
    const double fv_fd = (m.f(u, v + step) - m.f(u, v - step)) / (2.0 * step);
    const double su = std::max({1.0, std::abs(fu_fd), std::abs(m.f_u(u, v))});
    const double sv = std::max({1.0, std::abs(fv_fd), std::abs(m.f_v(u, v))});
    return std::abs(fu_fd - m.f_u(u, v)) <= rel_tol * su &&
           std::abs(fv_fd - m.f_v(u, v)) <= rel_tol * sv;
}

struct ValidationReport {
    bool a1_bistable = false;        // three roots with the right f_u signs on sampled v
    bool a2_balanced = false;        // J has a nondegenerate zero v*
    bool a3_cross_inequality = false; // f_u(h^pm) < f_v(h^pm) on sampled v
    bool a4_mass_admissible = false; // h^-(v*)+v* < xi < h^+(v*)+v*
    bool derivatives_ok = false;
    double v_star = 0.0;
    double J_prime_star = 0.0;
    std::vector<std::string> messages;

    bool all_pass() const {
        return a1_bistable && a2_balanced && a3_cross_inequality && a4_mass_admissible &&
               derivatives_ok;
    }
};

} // namespace pinlayer
