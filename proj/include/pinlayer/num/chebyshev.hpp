#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace pinlayer::num {

// Chebyshev interpolant of a smooth function on [a,b], with an exact
// antiderivative in the same basis. Degree doubles until the coefficient
// tail drops below a relative cutoff.
class Chebyshev {
public:
    Chebyshev() = default;

    template <typename F>
    static Chebyshev fit(const F& f, double a, double b, double rel_tail = 1e-15, int max_n = 2048) {
        Chebyshev c;
        c.a_ = a;
        c.b_ = b;
        int n = 16;
        while (true) {
            c.coef_ = coeffs_at_lobatto(f, a, b, n);
            double scale = 0.0;
            for (double v : c.coef_) scale = std::max(scale, std::abs(v));
            const int tail = std::max(2, n / 8);
            double tail_max = 0.0;
            for (int k = n + 1 - tail; k <= n; ++k) tail_max = std::max(tail_max, std::abs(c.coef_[k]));
            if (tail_max <= rel_tail * scale || n >= max_n) break;
            n *= 2;
        }
        // Trim negligible trailing coefficients.
        double scale = 0.0;
        for (double v : c.coef_) scale = std::max(scale, std::abs(v));
        while (c.coef_.size() > 2 && std::abs(c.coef_.back()) < 0.5 * rel_tail * scale)
            c.coef_.pop_back();
        return c;
    }

    double operator()(double x) const { return eval(coef_, to_unit(x)); }

    // Antiderivative G with G(a) = 0.
    Chebyshev antiderivative() const {
        const int n = static_cast<int>(coef_.size()) - 1;
        Chebyshev g;
        g.a_ = a_;
        g.b_ = b_;
        g.coef_.assign(n + 2, 0.0);
        const double half = 0.5 * (b_ - a_);
        auto c = [&](int k) { return (k <= n) ? coef_[k] : 0.0; };
        // C_m = (c_{m-1} - c_{m+1}) / (2m) with the doubled-c0 convention;
        // coef_[0] stores the plain constant, so it enters twice at m = 1.
        for (int k = 2; k <= n + 1; ++k)
            g.coef_[k] = half * (c(k - 1) - c(k + 1)) / (2.0 * k);
        g.coef_[1] = half * (2.0 * c(0) - c(2)) / 2.0;
        // Fix the constant so G(a) = 0 (t = -1: T_k(-1) = (-1)^k).
        double at_a = 0.0;
        for (std::size_t k = 0; k < g.coef_.size(); ++k)
            at_a += (k % 2 == 0 ? 1.0 : -1.0) * g.coef_[k];
        g.coef_[0] -= at_a;
        return g;
    }

    double lower() const { return a_; }
    double upper() const { return b_; }
    std::size_t size() const { return coef_.size(); }

private:
    double to_unit(double x) const { return (2.0 * x - a_ - b_) / (b_ - a_); }

    static double eval(const std::vector<double>& c, double t) {
        // Clenshaw recurrence.
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t k = c.size(); k-- > 1;) {
            const double b0 = 2.0 * t * b1 - b2 + c[k];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c[0];
    }

    template <typename F>
    static std::vector<double> coeffs_at_lobatto(const F& f, double a, double b, int n) {
        std::vector<double> fv(n + 1);
        for (int j = 0; j <= n; ++j) {
            const double t = std::cos(M_PI * j / n);
            fv[j] = f(0.5 * (a + b) + 0.5 * (b - a) * t);
        }
        std::vector<double> c(n + 1, 0.0);
        for (int k = 0; k <= n; ++k) {
            double s = 0.5 * (fv[0] + (k % 2 == 0 ? 1.0 : -1.0) * fv[n]);
            for (int j = 1; j < n; ++j) s += fv[j] * std::cos(M_PI * k * j / n);
            c[k] = 2.0 * s / n;
        }
        c[0] *= 0.5;
        return c;
    }

    double a_ = -1.0, b_ = 1.0;
    std::vector<double> coef_{0.0};
};

} // namespace pinlayer::num
