#pragma once

#include <random>

#include "pinlayer/branch.hpp"
#include "pinlayer/model.hpp"

namespace pinlayer {

// Numerical check of assumptions (A1)-(A4) for a model/parameter pair.
// Failures are recorded in the report, not thrown; only malformed inputs throw.
inline ValidationReport validate_assumptions(const BistableModel& m, const ProblemParams& p,
                                             int n_samples = 16) {
    if (n_samples < 8)
        throw ValidationError({"n_samples"}, "validate_assumptions: n_samples must be >= 8");
    ValidationReport rep;

    rep.a1_bistable = true;
    rep.a3_cross_inequality = true;
    const double margin = 1e-6 * (m.v_hi - m.v_lo);
    for (int i = 0; i < n_samples; ++i) {
        const double v = m.v_lo + margin +
                         (m.v_hi - m.v_lo - 2 * margin) * static_cast<double>(i) / (n_samples - 1);
        try {
            const auto h = roots_at(m, v);
            for (double hk : {h[0], h[2]})
                if (!(m.f_u(hk, v) < m.f_v(hk, v))) {
                    rep.a3_cross_inequality = false;
                    rep.messages.push_back("(A3) fails at v=" + std::to_string(v));
                }
        } catch (const BistabilityLost&) {
            rep.a1_bistable = false;
            rep.messages.push_back("(A1) fails at v=" + std::to_string(v));
        }
    }

    rep.derivatives_ok = true;
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> uu(m.u_scan_lo, m.u_scan_hi);
    std::uniform_real_distribution<double> uv(m.v_lo, m.v_hi);
    for (int i = 0; i < n_samples; ++i)
        if (!derivatives_consistent_at(m, uu(rng), uv(rng))) {
            rep.derivatives_ok = false;
            rep.messages.push_back("derivative self-check failed");
            break;
        }

    try {
        const BranchData bd = find_v_star(m);
        rep.a2_balanced = true;
        rep.v_star = bd.v_star;
        rep.J_prime_star = bd.J_prime_star;
        rep.a4_mass_admissible =
            bd.h_minus_star + bd.v_star < p.xi && p.xi < bd.h_plus_star + bd.v_star;
        if (!rep.a4_mass_admissible)
            rep.messages.push_back("(A4) fails: xi outside (h^-(v*)+v*, h^+(v*)+v*)");
    } catch (const Error& e) {
        rep.a2_balanced = false;
        rep.messages.push_back(std::string("(A2) fails: ") + e.what());
    }

    if (!p.scale_separation_ok())
        rep.messages.push_back("warning: epsilon not small against D (epsilon >= D/10)");
    return rep;
}

} // namespace pinlayer
