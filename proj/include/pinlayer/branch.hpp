#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "pinlayer/errors.hpp"
#include "pinlayer/model.hpp"
#include "pinlayer/num/quadrature.hpp"
#include "pinlayer/num/roots.hpp"

namespace pinlayer {

inline constexpr int kRootScanPoints = 2048;
inline constexpr double kQuadTol = 1e-12;

// The three equilibrium branches f(h,v) = 0 at fixed v, ordered
// h^- < h^0 < h^+, found by a sign-change scan plus Newton polish.
inline std::array<double, 3> roots_at(const BistableModel& m, double v) {
    if (!m.v_in_interval(v))
        throw BistabilityLost(v, "roots_at: v outside the bistable interval");
    auto fv = [&](double u) { return m.f(u, v); };
    auto brackets = num::scan_brackets(fv, m.u_scan_lo, m.u_scan_hi, kRootScanPoints);
    if (brackets.size() != 3)
        throw BistabilityLost(v, "roots_at: expected 3 roots, scan found " +
                                     std::to_string(brackets.size()) + " at v=" + std::to_string(v));
    std::array<double, 3> h{};
    for (int i = 0; i < 3; ++i) {
        double r = brackets[i].first == brackets[i].second
                       ? brackets[i].first
                       : num::brent(fv, brackets[i].first, brackets[i].second);
        h[i] = num::newton_polish(fv, [&](double u) { return m.f_u(u, v); }, r, 1e-15);
    }
    const double sign_tol = 1e-10;
    if (!(h[0] < h[1] && h[1] < h[2]) || m.f_u(h[0], v) >= -sign_tol ||
        m.f_u(h[1], v) <= sign_tol || m.f_u(h[2], v) >= -sign_tol)
        throw BistabilityLost(v, "roots_at: root ordering or f_u signs violate bistability");
    return h;
}

// Balance function J(v) = int_{h^-}^{h^+} f(u,v) du.
inline double balance_J(const BistableModel& m, double v) {
    const auto h = roots_at(m, v);
    return num::integrate([&](double u) { return m.f(u, v); }, h[0], h[2], kQuadTol);
}

struct BranchData {
    double v_star = 0.0;
    double J_prime_star = 0.0;
    double h_minus_star = 0.0;
    double h_zero_star = 0.0;
    double h_plus_star = 0.0;
    std::function<std::array<double, 3>(double)> branch_sampler;

    double jump() const { return h_plus_star - h_minus_star; }
    double midpoint() const { return 0.5 * (h_minus_star + h_plus_star); }
};

// Locates the balanced level v* with J(v*) = 0 and J'(v*) != 0.
inline BranchData find_v_star(const BistableModel& m, int scan_points = 64) {
    const double margin = 1e-9 * (m.v_hi - m.v_lo);
    const double lo = m.v_lo + margin, hi = m.v_hi - margin;
    auto J = [&](double v) { return balance_J(m, v); };
    auto brackets = num::scan_brackets(J, lo, hi, scan_points);
    if (brackets.empty())
        throw NoBalancedState("find_v_star: J(v) has no sign change on the interval");
    const auto& br = brackets.front();
    const double v_star =
        br.first == br.second ? br.first : num::brent(J, br.first, br.second, 1e-15);
    if (std::abs(J(v_star)) > 1e-10)
        throw NoBalancedState("find_v_star: root polish left |J| > 1e-10");

    BranchData bd;
    bd.v_star = v_star;
    const auto h = roots_at(m, v_star);
    bd.h_minus_star = h[0];
    bd.h_zero_star = h[1];
    bd.h_plus_star = h[2];
    bd.J_prime_star =
        num::integrate([&](double u) { return m.f_v(u, v_star); }, h[0], h[2], kQuadTol);
    if (std::abs(bd.J_prime_star) <= 1e-8)
        throw DegenerateBalance("find_v_star: |J'(v*)| <= 1e-8");
    bd.branch_sampler = [m](double v) { return roots_at(m, v); };
    return bd;
}

// Admissible layer-value window at level v: the lower bound solves
// int_{alpha_lo}^{h^+} f du = 0, the upper solves int_{h^-}^{alpha_hi} f du = 0.
// At v = v* both integrals degenerate and the window is the full (h^-, h^+).
inline std::pair<double, double> alpha_bounds(const BistableModel& m, double v) {
    const auto h = roots_at(m, v);
    auto F = [&](double w) { // int_{h^-}^{w} f du
        return num::integrate([&](double u) { return m.f(u, v); }, h[0], w, kQuadTol);
    };
    const double J = F(h[2]);
    double alpha_hi;
    if (J > kQuadTol * 10)
        alpha_hi = num::brent(F, h[1], h[2], 1e-14);
    else
        alpha_hi = h[2];
    auto G = [&](double w) { return J - F(w); }; // int_{w}^{h^+} f du
    double alpha_lo;
    if (J < -kQuadTol * 10)
        alpha_lo = num::brent(G, h[0], h[1], 1e-14);
    else
        alpha_lo = h[0];
    return {alpha_lo, alpha_hi};
}

} // namespace pinlayer
