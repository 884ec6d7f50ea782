#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace pinlayer::num {

// Cubic Hermite interpolation on a strictly increasing node table with known
// derivatives. Evaluation outside the table clamps to the end segments; the
// callers that need analytic tails handle those before asking.
class HermiteTable {
public:
    HermiteTable() = default;
    HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> dydx)
        : x_(std::move(x)), y_(std::move(y)), d_(std::move(dydx)) {}

    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    double front_y() const { return y_.front(); }
    double back_y() const { return y_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    const std::vector<double>& dys() const { return d_; }

    double value(double x) const { return eval(x).first; }
    double derivative(double x) const { return eval(x).second; }

    std::pair<double, double> eval(double x) const {
        std::size_t i = segment(x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        const double v = h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
        const double dh00 = 6 * t2 - 6 * t, dh10 = 3 * t2 - 4 * t + 1;
        const double dh01 = -6 * t2 + 6 * t, dh11 = 3 * t2 - 2 * t;
        const double dv = (dh00 * y_[i] + dh01 * y_[i + 1]) / h + dh10 * d_[i] + dh11 * d_[i + 1];
        return {v, dv};
    }

    // x-location where the (monotone) table crosses level y, by bisection on
    // the Hermite interpolant within the bracketing segment.
    double inverse(double ylevel) const {
        const bool increasing = y_.back() > y_.front();
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if ((y_[mid] < ylevel) == increasing) lo = mid; else hi = mid;
        }
        double a = x_[lo], b = x_[hi];
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            if ((value(m) < ylevel) == increasing) a = m; else b = m;
            if (b - a < 1e-15 * (1.0 + std::abs(a))) break;
        }
        return 0.5 * (a + b);
    }

private:
    std::size_t segment(double x) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = static_cast<std::size_t>(std::distance(x_.begin(), it));
        if (i == 0) return 0;
        if (i >= x_.size()) return x_.size() - 2;
        return i - 1;
    }

    std::vector<double> x_, y_, d_;
};

// Local cubic Lagrange interpolation on a uniform grid; used to sample steady
// profiles at arbitrary points for the shooting integrators.
class UniformGridInterpolant {
public:
    UniformGridInterpolant() = default;
    UniformGridInterpolant(double x0, double h, std::vector<double> y)
        : x0_(x0), h_(h), y_(std::move(y)) {}

    double operator()(double x) const {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y_.size());
        double s = (x - x0_) / h_;
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
        i = std::clamp<std::ptrdiff_t>(i, 0, n - 4);
        const double t = s - static_cast<double>(i); // in [1,2] for interior points
        const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
        const double c0 = -t1 * t2 * t3 / 6.0;
        const double c1 = t0 * t2 * t3 / 2.0;
        const double c2 = -t0 * t1 * t3 / 2.0;
        const double c3 = t0 * t1 * t2 / 6.0;
        return c0 * y_[i] + c1 * y_[i + 1] + c2 * y_[i + 2] + c3 * y_[i + 3];
    }

private:
    double x0_ = 0.0, h_ = 1.0;
    std::vector<double> y_;
};

} // namespace pinlayer::num
