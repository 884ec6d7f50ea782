#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pinlayer/branch.hpp"
#include "pinlayer/errors.hpp"
#include "pinlayer/model.hpp"
#include "pinlayer/num/chebyshev.hpp"
#include "pinlayer/num/interp.hpp"
#include "pinlayer/num/quadrature.hpp"

namespace pinlayer {

enum class Orientation { jump_up, jump_down };

inline std::string to_string(Orientation o) {
    return o == Orientation::jump_up ? "jump_up" : "jump_down";
}

// Heteroclinic front W(z) of W'' + f(W, v*) = 0 with W(-inf) = h^-, W(+inf) = h^+,
// phase-fixed by W(0) = alpha. Built by energy quadrature in W: each half uses
// the potential anchored at its own rest state, so the radicand stays clean
// near the endpoints even when J(v*) carries roundoff. The z-table is computed
// with a log-distance substitution and extended by analytic exponential tails.
class FrontProfile {
public:
    static constexpr double kTailLogSpan = 30.0; // e-folds of endpoint approach in the table

    FrontProfile(const BistableModel& m, const BranchData& bd, double alpha) {
        h_minus_ = bd.h_minus_star;
        h_plus_ = bd.h_plus_star;
        v_star_ = bd.v_star;
        alpha_ = alpha;
        if (!(h_minus_ < alpha && alpha < h_plus_))
            throw ValidationError({"alpha"}, "front_profile: alpha must lie in (h^-(v*), h^+(v*))");

        mu_minus_ = std::sqrt(-m.f_u(h_minus_, v_star_));
        mu_plus_ = std::sqrt(-m.f_u(h_plus_, v_star_));

        // Potential via a Chebyshev antiderivative of f(., v*): spectral accuracy,
        // one fit amortized over every radicand evaluation. Within delta_switch_
        // of an endpoint the antiderivative cancels catastrophically (the true
        // value is O(delta^2) against 1e-16 evaluation noise), so the radicand
        // switches to a Taylor expansion anchored at the endpoint there.
        auto fslice = [&](double u) { return m.f(u, v_star_); };
        potential_ = num::Chebyshev::fit(fslice, h_minus_, h_plus_).antiderivative();
        J_residual_ = potential_(h_plus_); // = J(v*), ~0 after find_v_star
        delta_switch_ = 1e-3 * (h_plus_ - h_minus_);
        auto fuuu = [&](double u) {
            const double d = 1e-5;
            return (m.f_uu(u + d, v_star_) - m.f_uu(u - d, v_star_)) / (2.0 * d);
        };
        fu_m_ = m.f_u(h_minus_, v_star_);
        fuu_m_ = m.f_uu(h_minus_, v_star_);
        fuuu_m_ = fuuu(h_minus_);
        fu_p_ = m.f_u(h_plus_, v_star_);
        fuu_p_ = m.f_uu(h_plus_, v_star_);
        fuuu_p_ = fuuu(h_plus_);

        double rad_scale = 0.0;
        for (int i = 1; i < 64; ++i) {
            const double w = h_minus_ + (h_plus_ - h_minus_) * i / 64.0;
            rad_scale = std::max(rad_scale, std::abs(radicand(w)));
        }
        if (std::abs(2.0 * J_residual_) > 1e-8 * std::max(1.0, rad_scale))
            throw UnbalancedFront("front_profile: J(v*) != 0 within tolerance; "
                                  "the two half-front energies do not match");
        for (int i = 1; i < 256; ++i) {
            const double w = h_minus_ + (h_plus_ - h_minus_) * i / 256.0;
            if (radicand(w) <= 0.0)
                throw UnbalancedFront("front_profile: negative radicand inside (h^-, h^+)");
        }

        wdot0_ = 0.5 * (std::sqrt(std::max(radicand_left(alpha_), 0.0)) +
                        std::sqrt(std::max(radicand_right(alpha_), 0.0)));

        build_table();
        compute_integrals();
    }

    // W and dW/dz at arbitrary z (analytic tails beyond the table).
    double value(double z) const {
        if (z <= table_.front_x()) {
            const double d = table_.front_y() - h_minus_;
            return h_minus_ + d * std::exp(mu_minus_ * (z - table_.front_x()));
        }
        if (z >= table_.back_x()) {
            const double d = h_plus_ - table_.back_y();
            return h_plus_ - d * std::exp(-mu_plus_ * (z - table_.back_x()));
        }
        return table_.value(z);
    }

    double derivative(double z) const {
        if (z <= table_.front_x()) {
            const double d = table_.front_y() - h_minus_;
            return mu_minus_ * d * std::exp(mu_minus_ * (z - table_.front_x()));
        }
        if (z >= table_.back_x()) {
            const double d = h_plus_ - table_.back_y();
            return mu_plus_ * d * std::exp(-mu_plus_ * (z - table_.back_x()));
        }
        return table_.derivative(z);
    }

    // Wdot as a function of the front VALUE (energy identity), using the
    // half-specific anchor.
    double wdot_of_value(double w) const { return std::sqrt(std::max(radicand(w), 0.0)); }

    // z-coordinate at which W crosses a level (quadrature of dz = dW / Wdot).
    double z_of_level(double level) const {
        if (!(h_minus_ < level && level < h_plus_))
            throw ValidationError({"level"}, "z_of_level: level outside (h^-, h^+)");
        if (level == alpha_) return 0.0;
        auto integrand = [&](double w) { return 1.0 / wdot_of_value(w); };
        if (level < alpha_) return -num::integrate(integrand, level, alpha_, 1e-13);
        return num::integrate(integrand, alpha_, level, 1e-13);
    }

    double h_minus() const { return h_minus_; }
    double h_plus() const { return h_plus_; }
    double v_star() const { return v_star_; }
    double alpha() const { return alpha_; }
    double wdot0() const { return wdot0_; }
    double mu_minus() const { return mu_minus_; }
    double mu_plus() const { return mu_plus_; }
    double tail_minus() const { return tail_minus_; } // int_{-inf}^0 (W - h^-) dz
    double tail_plus() const { return tail_plus_; }   // int_0^inf  (W - h^+) dz
    double energy() const { return energy_; }         // int Wdot^2 dz
    double j_residual() const { return J_residual_; }

    const std::vector<double>& z_grid() const { return table_.xs(); }
    const std::vector<double>& W() const { return table_.ys(); }
    const std::vector<double>& W_dot() const { return table_.dys(); }

private:
    // -2 * int_{h}^{h+delta} f(u, v*) du from the cubic Taylor model of f at a
    // root h of f(., v*); exact to O(delta^5) with no cancellation.
    static double endpoint_radicand(double delta, double fu, double fuu, double fuuu) {
        return -(fu + fuu * delta / 3.0 + fuuu * delta * delta / 12.0) * delta * delta;
    }

    double radicand_left(double w) const {
        const double d = w - h_minus_;
        if (d < delta_switch_) return endpoint_radicand(d, fu_m_, fuu_m_, fuuu_m_);
        return -2.0 * potential_(w);
    }
    double radicand_right(double w) const {
        const double d = w - h_plus_;
        if (-d < delta_switch_) return endpoint_radicand(d, fu_p_, fuu_p_, fuuu_p_);
        return 2.0 * (J_residual_ - potential_(w));
    }
    double radicand(double w) const {
        return w <= alpha_ ? radicand_left(w) : radicand_right(w);
    }

    void build_table() {
        // Seven-point Gauss panels in the log-distance variable t, where
        // W = h^- + (alpha - h^-) e^t on the left half (mirrored on the right).
        // The integrand dz/dt = (W - anchor)/Wdot is smooth and tends to 1/mu.
        static const double gx[7] = {-0.949107912342759, -0.741531185599394, -0.405845151377397,
                                     0.0, 0.405845151377397, 0.741531185599394, 0.949107912342759};
        static const double gw[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                     0.417959183673469, 0.381830050505119, 0.279705391489277,
                                     0.129484966168870};
        const int panels = 4096;
        const double T = kTailLogSpan;
        const double dt = T / panels;

        auto half_table = [&](bool left, std::vector<double>& zs, std::vector<double>& ws) {
            const double amp = left ? (alpha_ - h_minus_) : (h_plus_ - alpha_);
            const double anchor = left ? h_minus_ : h_plus_;
            auto w_of_t = [&](double t) {
                return left ? anchor + amp * std::exp(t) : anchor - amp * std::exp(t);
            };
            auto dz_dt = [&](double t) {
                const double w = w_of_t(t);
                const double wd = std::sqrt(std::max(left ? radicand_left(w) : radicand_right(w),
                                                     1e-300));
                return amp * std::exp(t) / wd; // |dW/dt| / Wdot
            };
            zs.assign(panels + 1, 0.0);
            ws.assign(panels + 1, 0.0);
            // t runs 0 -> -T; z accumulates away from the center.
            double z = 0.0;
            zs[0] = 0.0;
            ws[0] = alpha_;
            for (int p = 0; p < panels; ++p) {
                const double t_hi = -p * dt, t_lo = -(p + 1) * dt;
                double acc = 0.0;
                for (int q = 0; q < 7; ++q)
                    acc += gw[q] * dz_dt(0.5 * (t_lo + t_hi) + 0.5 * dt * gx[q]);
                z += acc * 0.5 * dt;
                zs[p + 1] = z;
                ws[p + 1] = w_of_t(t_lo);
            }
        };

        std::vector<double> zl, wl, zr, wr;
        half_table(true, zl, wl);
        half_table(false, zr, wr);

        std::vector<double> z(2 * panels + 1), w(2 * panels + 1), wd(2 * panels + 1);
        for (int j = 0; j <= panels; ++j) {
            z[panels - j] = -zl[j];
            w[panels - j] = wl[j];
        }
        for (int j = 1; j <= panels; ++j) {
            z[panels + j] = zr[j];
            w[panels + j] = wr[j];
        }
        for (int j = 0; j < 2 * panels + 1; ++j) {
            const double rad = (j < panels) ? radicand_left(w[j])
                             : (j > panels) ? radicand_right(w[j])
                                            : 0.0;
            wd[j] = (j == panels) ? wdot0_ : std::sqrt(std::max(rad, 0.0));
        }
        table_ = num::HermiteTable(std::move(z), std::move(w), std::move(wd));
    }

    void compute_integrals() {
        // Tail integrals in W space; the integrands extend continuously to the
        // endpoints with values 1/mu. Analytic completion covers the last
        // e^-T sliver beyond the table.
        auto tleft = [&](double w) {
            const double wd = wdot_of_value(w);
            const double d = w - h_minus_;
            return wd > 0.0 ? d / wd : 1.0 / mu_minus_;
        };
        auto tright = [&](double w) {
            const double wd = wdot_of_value(w);
            const double d = w - h_plus_;
            return wd > 0.0 ? d / wd : -1.0 / mu_plus_;
        };
        tail_minus_ = num::integrate(tleft, h_minus_, alpha_, 1e-13);
        tail_plus_ = num::integrate(tright, alpha_, h_plus_, 1e-13);
        energy_ = num::integrate([&](double w) { return wdot_of_value(w); }, h_minus_, h_plus_,
                                 1e-13);
    }

    num::Chebyshev potential_; // int_{h^-}^{W} f(u, v*) du
    num::HermiteTable table_;
    double h_minus_ = 0, h_plus_ = 0, v_star_ = 0, alpha_ = 0;
    double mu_minus_ = 0, mu_plus_ = 0, wdot0_ = 0;
    double tail_minus_ = 0, tail_plus_ = 0, energy_ = 0, J_residual_ = 0;
    double delta_switch_ = 0;
    double fu_m_ = 0, fuu_m_ = 0, fuuu_m_ = 0, fu_p_ = 0, fuu_p_ = 0, fuuu_p_ = 0;
};

inline FrontProfile front_profile(const BistableModel& m, const BranchData& bd, double alpha) {
    return FrontProfile(m, bd, alpha);
}

struct LayerGeometry {
    double x0 = 0.0;
    double x1 = 0.0;    // referenced to the midpoint level crossing (alpha-invariant)
    double beta0 = 0.0; // = v*
    double beta1 = 0.0; // = 0
    double alpha = 0.0;
    Orientation orientation = Orientation::jump_up;

    double layer_position(double epsilon) const { return x0 + epsilon * x1; }
};

// Leading layer position from the mass constraint plus the first-order
// correction from the front's tail mass defects.
inline LayerGeometry geometry(const BranchData& bd, const FrontProfile& profile,
                              const ProblemParams& p,
                              Orientation orientation = Orientation::jump_up) {
    const double jump = bd.jump();
    double x0;
    if (orientation == Orientation::jump_up)
        x0 = (bd.v_star + bd.h_plus_star - p.xi) / jump;
    else
        x0 = (bd.h_minus_star + bd.v_star - p.xi) / (bd.h_minus_star - bd.h_plus_star);
    if (!(x0 > 0.0 && x0 < 1.0))
        throw MassOutOfRange("geometry: xi violates (A4); layer position x0 = " +
                             std::to_string(x0) + " not inside (0,1)");

    // I1 = x0 * int phi0^- dz + (1-x0) * int phi0^+ dz collapses to the sum of
    // the two tail integrals after substituting phi0^-(z) = W(x0 z) - h^-.
    // Referencing the crossing to the midpoint level makes x1 independent of
    // the phase choice alpha.
    const double z_mid = profile.z_of_level(bd.midpoint());
    const double x1_up = (profile.tail_minus() + profile.tail_plus()) / jump + z_mid;

    LayerGeometry g;
    g.x0 = x0;
    g.x1 = orientation == Orientation::jump_up ? x1_up : -x1_up;
    g.beta0 = bd.v_star;
    g.beta1 = 0.0;
    g.alpha = profile.alpha();
    g.orientation = orientation;
    return g;
}

struct MatchReport {
    double phi0 = 0.0;    // C^1 mismatch of the leading inner derivatives
    double K = 0.0;       // coefficient of x1 in Phi_1
    double M = 0.0;       // coefficient of beta1 in Phi_1
    double R = 0.0;       // x1- and beta1-free remainder of Phi_1
    double phidot_minus0 = 0.0;
    double phidot_plus0 = 0.0;
    bool pass = false;
};

// Residuals of the C^1-matching identities at (x0, v*, alpha), each assembled
// from independent adaptive quadratures of f and f_v.
inline MatchReport matching_identities(const BistableModel& m, const BranchData& bd,
                                       const FrontProfile& profile, const LayerGeometry& geom) {
    const double v = bd.v_star, a = profile.alpha();
    const double x0 = geom.x0;
    const double IL = num::integrate([&](double u) { return m.f(u, v); }, bd.h_minus_star, a,
                                     kQuadTol);
    const double IR = num::integrate([&](double u) { return m.f(u, v); }, a, bd.h_plus_star,
                                     kQuadTol);
    const double FvL = num::integrate([&](double u) { return m.f_v(u, v); }, bd.h_minus_star, a,
                                      kQuadTol);
    const double FvR = num::integrate([&](double u) { return m.f_v(u, v); }, a, bd.h_plus_star,
                                      kQuadTol);

    MatchReport r;
    const double sqL = std::sqrt(std::max(-2.0 * IL, 0.0));
    const double sqR = std::sqrt(std::max(2.0 * IR, 0.0));
    r.phidot_minus0 = x0 * sqL;
    r.phidot_plus0 = (1.0 - x0) * sqR;
    r.phi0 = (1.0 - x0) * r.phidot_minus0 - x0 * r.phidot_plus0;

    r.K = x0 * (1.0 - x0) / r.phidot_minus0 * (-2.0 * IL) - r.phidot_minus0 +
          x0 * (1.0 - x0) / r.phidot_plus0 * (2.0 * IR) - r.phidot_plus0;
    r.M = -x0 * x0 * (1.0 - x0) / r.phidot_minus0 * FvL -
          x0 * (1.0 - x0) * (1.0 - x0) / r.phidot_plus0 * FvR;

    // Phi_1 at (x1, beta1) = (1, 1) minus K and M isolates the remainder.
    auto phi1 = [&](double x1, double beta1) {
        const double pdm1 = (-2.0 * x0 * x1 * IL - x0 * x0 * beta1 * FvL) / r.phidot_minus0;
        const double pdp1 =
            (-2.0 * (1.0 - x0) * x1 * IR + (1.0 - x0) * (1.0 - x0) * beta1 * FvR) / r.phidot_plus0;
        return (1.0 - x0) * pdm1 - x1 * r.phidot_minus0 - x0 * pdp1 - x1 * r.phidot_plus0;
    };
    r.R = phi1(1.0, 1.0) - r.K - r.M;

    r.pass = std::abs(r.phi0) <= 1e-8 && std::abs(r.K) <= 1e-8 && std::abs(r.R) <= 1e-8 &&
             std::abs(r.M) >= 1e-8;
    return r;
}

struct CompositeApprox {
    std::vector<double> x_grid;
    std::vector<double> u;
    std::vector<double> v;
    double layer_position = 0.0; // x*(eps) = x0 + eps*x1
    double C = 0.0;              // first-integral constant eps^2 u + D v
};

// O(eps) composite approximation on a uniform grid. The layer is glued at the
// alpha crossing so u equals alpha there exactly; v rides the first integral,
// v = v* - (eps^2/D)(u - alpha), which keeps eps^2 u + D v constant to
// machine precision.
inline CompositeApprox composite(const BranchData& bd, const LayerGeometry& geom,
                                 const FrontProfile& profile, const ProblemParams& p, int n) {
    if (n < 256) throw ValidationError({"grid.n"}, "composite: need n >= 256");
    const double eps = p.epsilon;
    const double z_mid = profile.z_of_level(bd.midpoint());
    const bool up = geom.orientation == Orientation::jump_up;
    const double x1_alpha = up ? (geom.x1 - z_mid) : (geom.x1 + z_mid);
    const double xs = geom.x0 + eps * x1_alpha; // alpha-crossing gluing point

    CompositeApprox c;
    c.x_grid.resize(n);
    c.u.resize(n);
    c.v.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        double z;
        if (x <= xs)
            z = geom.x0 * (x - xs) / (eps * xs);
        else
            z = (1.0 - geom.x0) * (x - xs) / (eps * (1.0 - xs));
        if (!up) z = -z;
        const double u = profile.value(z);
        c.x_grid[i] = x;
        c.u[i] = u;
        c.v[i] = bd.v_star - (eps * eps / p.D) * (u - profile.alpha());
    }
    c.layer_position = geom.layer_position(eps);
    c.C = p.D * bd.v_star + eps * eps * profile.alpha();
    return c;
}

} // namespace pinlayer
