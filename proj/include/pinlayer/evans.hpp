#pragma once

#include <Eigen/Dense>

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <future>
#include <thread>
#include <vector>

#include "pinlayer/errors.hpp"
#include "pinlayer/num/interp.hpp"
#include "pinlayer/num/quadrature.hpp"
#include "pinlayer/num/rk45.hpp"
#include "pinlayer/spectrum.hpp"
#include "pinlayer/steady.hpp"

namespace pinlayer {

struct EvansSample {
    Complex lambda;
    Complex g_value;        // renormalized determinant (matching-point normalization)
    double log_scale = 0.0; // accumulated log of the discarded frame growth factors
};

namespace detail {

// Two-solution frame of the 4D first-order system V' = A(x) V in the scaled
// variables (p, eps p_x, q, q_x). After every accepted step the pair is
// re-orthonormalized (modified Gram-Schmidt) and the log of the discarded
// positive factors accumulated; this keeps the span well conditioned through
// the e^{O(1/eps)} growth without touching the determinant's zeros.
struct EvansShooter {
    const BistableModel& m;
    double eps, D;
    num::UniformGridInterpolant u_of_x, v_of_x;
    Complex lambda;

    void rhs(double x, const std::array<Complex, 8>& y, std::array<Complex, 8>& dy) const {
        const double u = u_of_x(x);
        const double v = v_of_x(x);
        const double fu = m.f_u(u, v);
        const double fv = m.f_v(u, v);
        for (int k = 0; k < 2; ++k) {
            const Complex p = y[4 * k + 0], ep = y[4 * k + 1], q = y[4 * k + 2], qx = y[4 * k + 3];
            dy[4 * k + 0] = ep / eps;
            dy[4 * k + 1] = ((lambda - fu) * p - fv * q) / eps;
            dy[4 * k + 2] = qx;
            dy[4 * k + 3] = (fu * p + (lambda + fv) * q) / D;
        }
    }

    // Returns the orthonormal frame at x_end plus the accumulated log scale.
    std::pair<std::array<Complex, 8>, double> shoot(double x_start, double x_end,
                                                    std::array<Complex, 8> y) const {
        double log_scale = 0.0;
        auto renormalize = [&log_scale](std::array<Complex, 8>& f) {
            double n1 = 0.0;
            for (int i = 0; i < 4; ++i) n1 += std::norm(f[i]);
            n1 = std::sqrt(n1);
            for (int i = 0; i < 4; ++i) f[i] /= n1;
            Complex c = 0.0;
            for (int i = 0; i < 4; ++i) c += std::conj(f[i]) * f[4 + i];
            for (int i = 0; i < 4; ++i) f[4 + i] -= c * f[i];
            double n2 = 0.0;
            for (int i = 4; i < 8; ++i) n2 += std::norm(f[i]);
            n2 = std::sqrt(n2);
            for (int i = 4; i < 8; ++i) f[i] /= n2;
            log_scale += std::log(n1) + std::log(n2);
        };
        num::Rk45Options opt;
        opt.abs_tol = 1e-11;
        opt.rel_tol = 1e-9;
        opt.initial_step = (x_end > x_start ? 1.0 : -1.0) * std::min(1e-3, eps / 4.0);
        num::integrate_rk45(
            [this](double x, const std::array<Complex, 8>& y, std::array<Complex, 8>& dy) {
                rhs(x, y, dy);
            },
            x_start, x_end, y, opt,
            [&](double, std::array<Complex, 8>& f) { renormalize(f); });
        renormalize(y);
        return {y, log_scale};
    }
};

inline EvansShooter make_shooter(const BistableModel& m, const ProblemParams& p,
                                 const SteadyState& s, Complex lambda) {
    return EvansShooter{m, p.epsilon, p.D,
                        num::UniformGridInterpolant(0.0, s.h(), s.u),
                        num::UniformGridInterpolant(0.0, s.h(), s.v), lambda};
}

} // namespace detail

// Matching point for the Evans determinant: the layer crossing detected from
// the refined state at its mid-range level.
inline double evans_match_point(const SteadyState& s) {
    double lo = s.u.front(), hi = s.u.front();
    for (double v : s.u) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return detect_crossing(s.x_grid, s.u, 0.5 * (lo + hi));
}

// Evans function by two-sided renormalized shooting. The returned value is the
// 4x4 determinant of the boundary frames at the matching point, normalized so
// each side's pair has unit (p,q) data there -- the exponential growth factors
// cancel out of this ratio, and its zeros are exactly the eigenvalues.
inline EvansSample evans_value(const BistableModel& m, const ProblemParams& p,
                               const SteadyState& s, Complex lambda, double lambda_max = 10.0) {
    if (std::abs(lambda) > lambda_max)
        throw ValidationError({"spectrum.lambda_max"},
                              "evans_value: lambda outside the resolvent-study region");
    const double xs = evans_match_point(s);
    auto shooter = detail::make_shooter(m, p, s, lambda);

    std::array<Complex, 8> left{};
    left[0] = 1.0; // (p, eps p_x, q, q_x) = e1: Neumann data, p(0) = 1
    left[4 + 2] = 1.0; // e3: Neumann data, q(0) = 1
    auto [L, logL] = shooter.shoot(0.0, xs, left);

    std::array<Complex, 8> right{};
    right[0] = 1.0;
    right[4 + 2] = 1.0;
    auto [R, logR] = shooter.shoot(1.0, xs, right);

    Eigen::Matrix4cd M;
    for (int i = 0; i < 4; ++i) {
        M(i, 0) = L[i];
        M(i, 1) = L[4 + i];
        M(i, 2) = R[i];
        M(i, 3) = R[4 + i];
    }
    Eigen::Matrix2cd PL, PR;
    PL << L[0], L[4 + 0], L[2], L[4 + 2];
    PR << R[0], R[4 + 0], R[2], R[4 + 2];
    const Complex denom = PL.determinant() * PR.determinant();
    if (std::abs(denom) < 1e-300)
        throw Error("EvansResonance", "evans_value: matching-point normalization degenerate");

    EvansSample out;
    out.lambda = lambda;
    out.g_value = M.determinant() / denom;
    out.log_scale = logL + logR;
    return out;
}

// Local magnitude of g on a small circle around a point; used to make the
// zero-finding tolerance scale-free.
inline double evans_local_scale(const BistableModel& m, const ProblemParams& p,
                                const SteadyState& s, Complex center, double radius) {
    double scale = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double th = 0.25 * M_PI + 0.5 * M_PI * k;
        const Complex lam = center + radius * Complex(std::cos(th), std::sin(th));
        scale = std::max(scale, std::abs(evans_value(m, p, s, lam).g_value));
    }
    return scale;
}

// Root of g on the real axis near a seed (the critical eigenvalue is real for
// these problems). Bracket by outward steps inside the trust region
// |lambda - seed| <= 5 eps, then Brent down to |g| <= 1e-10 * local scale.
inline Complex evans_zero_search(const BistableModel& m, const ProblemParams& p,
                                 const SteadyState& s, Complex seed) {
    const double trust = 5.0 * p.epsilon;
    const double x0 = seed.real();
    auto g = [&](double x) { return evans_value(m, p, s, Complex(x, 0.0)).g_value.real(); };

    const double g0 = g(x0);
    const double step = 0.25 * p.epsilon;
    double lo = 0.0, hi = 0.0;
    bool found = false;
    double xr_prev = x0, gr_prev = g0, xl_prev = x0, gl_prev = g0;
    for (int k = 1; k * step <= trust && !found; ++k) {
        const double xr = x0 + k * step;
        const double gr = g(xr);
        if (gr_prev * gr <= 0.0) {
            lo = xr_prev; hi = xr;
            found = true;
            break;
        }
        xr_prev = xr; gr_prev = gr;
        const double xl = x0 - k * step;
        const double gl = g(xl);
        if (gl_prev * gl <= 0.0) {
            lo = xl; hi = xl_prev;
            found = true;
            break;
        }
        xl_prev = xl; gl_prev = gl;
    }
    if (!found)
        throw NoZeroFound("evans_zero_search: no sign change of g within |lambda - seed| <= 5 eps");

    double root = num::brent([&](double x) { return g(x); }, lo, hi, 1e-14);
    const double scale = evans_local_scale(m, p, s, Complex(root, 0.0),
                                           std::max(p.epsilon, 0.5 * std::abs(root)));
    const double gv = std::abs(g(root));
    if (gv > 1e-10 * scale && gv > 1e-13)
        throw NoZeroFound("evans_zero_search: Brent converged but |g| stayed above tolerance");
    return Complex(root, 0.0);
}

// Simple deterministic parallel map for the embarrassingly parallel contour
// and regime samplings.
template <typename T, typename F>
auto parallel_map(const std::vector<T>& inputs, const F& fn)
    -> std::vector<decltype(fn(inputs.front()))> {
    using R = decltype(fn(inputs.front()));
    std::vector<R> out(inputs.size());
    const unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(inputs.size())));
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w)
        futs.push_back(std::async(std::launch::async, [&]() {
            for (std::size_t i = next.fetch_add(1); i < inputs.size(); i = next.fetch_add(1))
                out[i] = fn(inputs[i]);
        }));
    for (auto& f : futs) f.get();
    return out;
}

struct Case2Report {
    double min_abs_g = 0.0;
    std::vector<EvansSample> samples;
    bool pass = false;
};

// Intermediate-regime non-vanishing check: |g| at lambda = eps*omega*lhat for
// lhat on the closed right unit half-circle.
inline Case2Report case2_sampling(const BistableModel& m, const ProblemParams& p,
                                  const SteadyState& s, const std::vector<double>& omega_grid) {
    std::vector<Complex> lambdas;
    for (double omega : omega_grid) {
        const double mag = p.epsilon * omega;
        if (!(mag > 5.0 * p.epsilon && mag < 0.5))
            throw ValidationError({"omega_grid"},
                                  "case2_sampling: eps*omega must lie in (5 eps, 0.5)");
        for (int k = 0; k < 8; ++k) {
            const double th = -0.5 * M_PI + M_PI * k / 7.0;
            lambdas.push_back(mag * Complex(std::cos(th), std::sin(th)));
        }
    }
    Case2Report rep;
    rep.samples = parallel_map(lambdas, [&](const Complex& lam) {
        return evans_value(m, p, s, lam);
    });
    rep.min_abs_g = std::numeric_limits<double>::infinity();
    for (const auto& smp : rep.samples) rep.min_abs_g = std::min(rep.min_abs_g, std::abs(smp.g_value));
    rep.pass = rep.min_abs_g >= 1e-6;
    return rep;
}

struct Case3Report {
    Complex g_minus, g_plus;
    Complex H1, H2;
    double rho_sq_minus = 0.0; // int rho_0^-(z)^2 dz (real lambda-hat only)
    double rho_sq_plus = 0.0;
    bool nonvanishing = false;
};

namespace detail {

// Shoots rho'' + c^2 (fu_tilde(z) - w0*lhat) rho = 0 from the decaying end to
// z = 0 and returns (rho_dot(0)/rho(0), int rho^2 dz / rho(0)^2). The state is
// renormalized whenever it grows to keep the exponential dichotomy harmless.
inline std::pair<Complex, Complex> rho_log_derivative(const FrontProfile& profile,
                                                      const BistableModel& m, double stretch,
                                                      bool left, Complex wl) {
    const double v = profile.v_star();
    const double fu_inf = left ? m.f_u(profile.h_minus(), v) : m.f_u(profile.h_plus(), v);
    const Complex nu = stretch * std::sqrt(wl - fu_inf); // Re > 0 branch
    const double z_far = (left ? profile.z_grid().front() : profile.z_grid().back()) / stretch;

    std::array<Complex, 3> y{};
    y[0] = 1.0;
    y[1] = left ? nu : -nu;
    // Seed the running int rho^2 with the analytic contribution of the pure
    // exponential beyond z_far, so later renormalizations scale it too.
    y[2] = (left ? 1.0 : -1.0) * 0.5 / nu;
    auto rhs = [&](double z, const std::array<Complex, 3>& y, std::array<Complex, 3>& dy) {
        const double w = profile.value(stretch * z);
        const Complex coef = stretch * stretch * (m.f_u(w, v) - wl);
        dy[0] = y[1];
        dy[1] = -coef * y[0];
        dy[2] = y[0] * y[0];
    };
    num::Rk45Options opt;
    opt.abs_tol = 1e-12;
    opt.rel_tol = 1e-10;
    opt.initial_step = left ? 1e-3 : -1e-3;
    num::integrate_rk45(rhs, z_far, 0.0, y, opt, [](double, std::array<Complex, 3>& y) {
        const double mag = std::max(std::abs(y[0]), std::abs(y[1]));
        if (mag > 1e100) {
            y[0] /= mag;
            y[1] /= mag;
            y[2] /= mag * mag;
        }
    });
    // Backward integration on the right half accumulates the integral with a
    // minus sign; undo it and normalize by rho(0)^2.
    const Complex rho0_sq = y[0] * y[0];
    const Complex integral = (left ? y[2] : -y[2]) / rho0_sq;
    return {y[1] / y[0], integral};
}

} // namespace detail

// Case III: the O(1)-eigenvalue exclusion factors H1 (outer, closed form) and
// H2 (inner, shooting). Their product is the leading part of g there.
inline Case3Report case3_nonvanishing(const BistableModel& m, const BranchData& bd,
                                      const FrontProfile& profile, const LayerGeometry& geom,
                                      const ProblemParams& p, Complex lambda_hat,
                                      double omega0 = 1.0) {
    if (lambda_hat.real() < 0.0 || lambda_hat == Complex(0.0))
        throw ValidationError({"lambda_hat"},
                              "case3_nonvanishing: need Re(lambda_hat) >= 0 and lambda_hat != 0");
    const double v = bd.v_star;
    const Complex wl = omega0 * lambda_hat;
    const double fum = m.f_u(bd.h_minus_star, v), fvm = m.f_v(bd.h_minus_star, v);
    const double fup = m.f_u(bd.h_plus_star, v), fvp = m.f_v(bd.h_plus_star, v);
    if (std::abs(fum - wl) < 1e-10 || std::abs(fup - wl) < 1e-10)
        throw ResonantDenominator("case3_nonvanishing: f_u^pm - omega0*lambda_hat vanishes");

    Case3Report rep;
    rep.g_minus = wl * (fum - fvm - wl) / (fum - wl);
    rep.g_plus = wl * (fup - fvp - wl) / (fup - wl);

    const double x0 = geom.x0;
    const Complex sm = std::sqrt(rep.g_minus / p.D);
    const Complex sp = std::sqrt(rep.g_plus / p.D);
    rep.H1 = sm * std::tanh(x0 * sm) + sp * std::tanh((1.0 - x0) * sp);

    auto [ldm, ism] = detail::rho_log_derivative(profile, m, x0, true, wl);
    auto [ldp, isp] = detail::rho_log_derivative(profile, m, 1.0 - x0, false, wl);
    rep.H2 = ldp / (1.0 - x0) - ldm / x0;
    rep.rho_sq_minus = ism.real();
    rep.rho_sq_plus = isp.real();
    rep.nonvanishing = std::abs(rep.H1) > 1e-10 && std::abs(rep.H2) > 1e-10;
    return rep;
}

struct ZeroModeReport {
    double constraint_integral = 0.0; // int (du/dxi + dv/dxi) dx, should be 1
    double L_residual_inf = 0.0;      // ||L^eps applied to the difference quotient||_inf
    double L_residual_rel = 0.0;      // relative to the quotient's sup norm
    double quotient_sup = 0.0;
};

// The lambda = 0 direction: the xi-derivative of the steady family solves the
// linearized problem but carries unit total mass, so it violates the domain
// constraint; lambda = 0 is therefore not an eigenvalue of the constrained
// operator. Verified by central differences of two refined states.
inline ZeroModeReport zero_mode_exclusion(const BistableModel& m, ProblemParams params, double xi,
                                          double delta, int n, double alpha_offset = 0.0) {
    const BranchData bd = find_v_star(m);
    const FrontProfile prof = front_profile(m, bd, bd.midpoint() + alpha_offset * bd.jump());
    auto state_at = [&](double mass) {
        ProblemParams p2 = params;
        p2.xi = mass;
        const LayerGeometry geo = geometry(bd, prof, p2);
        const CompositeApprox comp = composite(bd, geo, prof, p2, n);
        return refine(m, p2, comp);
    };
    const SteadyState sm_ = state_at(xi - delta);
    const SteadyState sp_ = state_at(xi + delta);
    const SteadyState sc = state_at(xi);

    const int N = sc.n();
    Eigen::VectorXcd quotient(2 * N);
    double sup = 0.0;
    std::vector<double> du(N), dv(N);
    for (int i = 0; i < N; ++i) {
        du[i] = (sp_.u[i] - sm_.u[i]) / (2.0 * delta);
        dv[i] = (sp_.v[i] - sm_.v[i]) / (2.0 * delta);
        quotient[2 * i] = du[i];
        quotient[2 * i + 1] = dv[i];
        sup = std::max({sup, std::abs(du[i]), std::abs(dv[i])});
    }

    ZeroModeReport rep;
    const double h = sc.h();
    std::vector<double> sum(N);
    for (int i = 0; i < N; ++i) sum[i] = du[i] + dv[i];
    rep.constraint_integral = trapz(sum, h);

    LinearizedOperator op(m, sc);
    Eigen::VectorXcd r = op.apply(quotient);
    rep.L_residual_inf = r.cwiseAbs().maxCoeff();
    rep.quotient_sup = sup;
    rep.L_residual_rel = rep.L_residual_inf / std::max(sup, 1e-300);
    return rep;
}

} // namespace pinlayer
