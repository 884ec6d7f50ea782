#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "pinlayer/errors.hpp"

namespace pinlayer::num {

// Gauss-Kronrod 7-15 pair on [-1,1]. Abscissae/weights from the usual tables,
// accurate to ~1e-20 which is below double roundoff.
namespace gk15 {
inline constexpr double xk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};
inline constexpr double wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};
} // namespace gk15

struct PanelEstimate {
    double integral;
    double error;
};

template <typename F>
PanelEstimate gauss_kronrod_panel(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double result_k = gk15::wk[7] * fc;
    double result_g = gk15::wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = gk15::xk[j] * h;
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        result_k += gk15::wk[j] * (f1 + f2);
        if (j % 2 == 1) result_g += gk15::wg[j / 2] * (f1 + f2);
    }
    result_k *= h;
    result_g *= h;
    return {result_k, std::abs(result_k - result_g)};
}

// Adaptive bisection on the GK15 pair with an absolute tolerance. Depth cap
// keeps pathological integrands from recursing forever.
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12, int max_depth = 48) {
    if (a == b) return 0.0;
    struct Rec {
        const F& f;
        double tol_floor;
        double run(double a, double b, double tol, int depth) const {
            PanelEstimate e = gauss_kronrod_panel(f, a, b);
            if (e.error <= std::max(tol, tol_floor) || depth <= 0) return e.integral;
            const double m = 0.5 * (a + b);
            return run(a, m, 0.5 * tol, depth - 1) + run(m, b, 0.5 * tol, depth - 1);
        }
    };
    // Floor at a few ulps of the panel magnitude so roundoff-limited panels terminate.
    PanelEstimate whole = gauss_kronrod_panel(f, a, b);
    const double tol_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(whole.integral));
    Rec rec{f, tol_floor};
    return rec.run(a, b, abs_tol, max_depth);
}

} // namespace pinlayer::num
