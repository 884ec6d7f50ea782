#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>

#include "pinlayer/errors.hpp"

namespace pinlayer::num {

struct Rk45Options {
    double abs_tol = 1e-11;
    double rel_tol = 1e-9;
    double initial_step = 1e-4;
    double min_step = 1e-13; // relative to the span; underflow triggers StiffnessOverflow
    std::size_t max_steps = 50'000'000;
};

namespace detail {
inline double mag(double v) { return std::abs(v); }
inline double mag(const std::complex<double>& v) { return std::abs(v); }
} // namespace detail

// Adaptive embedded Dormand-Prince 5(4) on a fixed-size state. rhs(x, y, dydx)
// fills the derivative. post_step(x, y) runs after every accepted step and may
// modify y in place (used for frame renormalization).
template <typename Scalar, std::size_t N, typename RHS, typename PostStep>
void integrate_rk45(const RHS& rhs, double x0, double x1, std::array<Scalar, N>& y,
                    const Rk45Options& opt, PostStep&& post_step) {
    using State = std::array<Scalar, N>;
    if (x0 == x1) return;
    const double span = x1 - x0;
    const double dir = span > 0 ? 1.0 : -1.0;
    double h = dir * std::min(std::abs(opt.initial_step), std::abs(span));

    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a2[] = {1.0 / 5};
    static constexpr double a3[] = {3.0 / 40, 9.0 / 40};
    static constexpr double a4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
    static constexpr double a5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
    static constexpr double a6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                                    -5103.0 / 18656};
    static constexpr double b5[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                    11.0 / 84, 0.0};
    static constexpr double b4[] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    auto stage = [](State& out, const State& base, double h, const double* a, int na,
                    const std::array<State, 7>& k) {
        out = base;
        for (int j = 0; j < na; ++j)
            for (std::size_t i = 0; i < N; ++i) out[i] += h * a[j] * k[j][i];
    };

    double x = x0;
    std::array<State, 7> k;
    State ytmp, y5;
    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (dir * (x - x1) >= 0.0) return;
        if (dir * (x + h - x1) > 0.0) h = x1 - x;
        if (std::abs(h) < opt.min_step * std::abs(span))
            throw StiffnessOverflow(
                "integrate_rk45: step size underflow; system too stiff at this epsilon "
                "(feasible epsilon is roughly the current one scaled by min_step/step)");

        rhs(x, y, k[0]);
        stage(ytmp, y, h, a2, 1, k); rhs(x + c[1] * h, ytmp, k[1]);
        stage(ytmp, y, h, a3, 2, k); rhs(x + c[2] * h, ytmp, k[2]);
        stage(ytmp, y, h, a4, 3, k); rhs(x + c[3] * h, ytmp, k[3]);
        stage(ytmp, y, h, a5, 4, k); rhs(x + c[4] * h, ytmp, k[4]);
        stage(ytmp, y, h, a6, 5, k); rhs(x + c[5] * h, ytmp, k[5]);
        stage(y5, y, h, b5, 6, k);   rhs(x + h, y5, k[6]);

        double err_norm = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            Scalar e{};
            for (int j = 0; j < 7; ++j) e += h * (b5[j] - b4[j]) * k[j][i];
            const double sc = opt.abs_tol + opt.rel_tol * std::max(detail::mag(y[i]), detail::mag(y5[i]));
            err_norm = std::max(err_norm, detail::mag(e) / sc);
        }
        if (!std::isfinite(err_norm)) { // overflowed stage: retry with a smaller step
            h *= 0.2;
            continue;
        }
        if (err_norm <= 1.0 || std::abs(h) <= 1.01 * opt.min_step * std::abs(span)) {
            x += h;
            y = y5;
            post_step(x, y);
        }
        const double factor = (err_norm > 0.0)
                                  ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0)
                                  : 5.0;
        h *= factor;
    }
    throw StiffnessOverflow("integrate_rk45: max step count exceeded");
}

template <typename Scalar, std::size_t N, typename RHS>
void integrate_rk45(const RHS& rhs, double x0, double x1, std::array<Scalar, N>& y,
                    const Rk45Options& opt = {}) {
    integrate_rk45(rhs, x0, x1, y, opt, [](double, std::array<Scalar, N>&) {});
}

} // namespace pinlayer::num
