#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "pinlayer/errors.hpp"

namespace pinlayer::num {

// Brent's method on a sign-changing bracket [a,b]. Tolerance is on the
// abscissa; the residual at the returned point is whatever Brent leaves.
template <typename F>
double brent(const F& f, double a, double b, double x_tol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw RootFindingFailure("brent: no sign change on bracket");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) {
            c = a; fc = fa;
            d = b - a; e = d;
        }
    }
    return b;
}

// Newton polish from a seed; falls back to the seed if the iteration wanders.
template <typename F, typename DF>
double newton_polish(const F& f, const DF& df, double x0, double tol = 1e-13, int max_iter = 40) {
    double x = x0;
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        const double dfx = df(x);
        if (dfx == 0.0) break;
        const double step = fx / dfx;
        x -= step;
        if (std::abs(step) <= tol * (1.0 + std::abs(x))) return x;
    }
    return x;
}

// Scan [a,b] on n uniform points and return every sign-change bracket.
template <typename F>
std::vector<std::pair<double, double>> scan_brackets(const F& f, double a, double b, int n) {
    std::vector<std::pair<double, double>> out;
    double x_prev = a, f_prev = f(a);
    for (int i = 1; i < n; ++i) {
        const double x = a + (b - a) * static_cast<double>(i) / (n - 1);
        const double fx = f(x);
        if (f_prev == 0.0)
            out.emplace_back(x_prev, x_prev);
        else if (f_prev * fx < 0.0)
            out.emplace_back(x_prev, x);
        x_prev = x;
        f_prev = fx;
    }
    if (f_prev == 0.0) out.emplace_back(x_prev, x_prev);
    return out;
}

} // namespace pinlayer::num
