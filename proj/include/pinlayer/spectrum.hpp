#pragma once
#include <optional>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include "pinlayer/branch.hpp"
#include "pinlayer/errors.hpp"
#include "pinlayer/layer.hpp"
#include "pinlayer/model.hpp"
#include "pinlayer/steady.hpp"

namespace pinlayer {

using Complex = std::complex<double>;

// Discrete linearization around a steady state: 2n x 2n block operator
//   [ eps^2 d_xx + f_u     f_v            ]
//   [ -f_u                 D d_xx - f_v   ]
// in interleaved (p_i, q_i) ordering with ghost-node Neumann closure. The
// trapezoid-weighted sum of the two block rows telescopes to zero, so discrete
// eigenvectors with lambda != 0 satisfy the mass constraint exactly.
class LinearizedOperator {
public:
    LinearizedOperator(const BistableModel& m, const SteadyState& s) {
        n_ = s.n();
        h_ = s.h();
        eps_ = s.epsilon;
        D_ = s.D;
        fu_.resize(n_);
        fv_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            fu_[i] = m.f_u(s.u[i], s.v[i]);
            fv_[i] = m.f_v(s.u[i], s.v[i]);
        }
        assemble();
    }

    int n() const { return n_; }
    double h() const { return h_; }
    double epsilon() const { return eps_; }
    const Eigen::SparseMatrix<double>& matrix() const { return mat_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
        return mat_ * x.real() + Complex(0, 1) * (mat_ * x.imag());
    }

    // Mass functional int (p + q) dx on an interleaved eigenvector.
    Complex constraint(const Eigen::VectorXcd& x) const {
        Complex s = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double w = (i == 0 || i == n_ - 1) ? 0.5 : 1.0;
            s += w * (x[2 * i] + x[2 * i + 1]);
        }
        return s * h_;
    }

    double l2_norm(const Eigen::VectorXcd& x) const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double w = (i == 0 || i == n_ - 1) ? 0.5 : 1.0;
            s += w * (std::norm(x[2 * i]) + std::norm(x[2 * i + 1]));
        }
        return std::sqrt(s * h_);
    }

private:
    void assemble() {
        const double ih2 = 1.0 / (h_ * h_);
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(8 * n_);
        auto lap_row = [&](int row, int i, double coef) {
            const int stride = 2; // interleaved (p,q)
            const int self = row;
            if (i == 0) {
                t.emplace_back(self, self, -2.0 * coef * ih2);
                t.emplace_back(self, self + stride, 2.0 * coef * ih2);
            } else if (i == n_ - 1) {
                t.emplace_back(self, self, -2.0 * coef * ih2);
                t.emplace_back(self, self - stride, 2.0 * coef * ih2);
            } else {
                t.emplace_back(self, self, -2.0 * coef * ih2);
                t.emplace_back(self, self - stride, coef * ih2);
                t.emplace_back(self, self + stride, coef * ih2);
            }
        };
        for (int i = 0; i < n_; ++i) {
            const int pr = 2 * i, qr = 2 * i + 1;
            lap_row(pr, i, eps_ * eps_);
            lap_row(qr, i, D_);
            t.emplace_back(pr, pr, fu_[i]);
            t.emplace_back(pr, qr, fv_[i]);
            t.emplace_back(qr, pr, -fu_[i]);
            t.emplace_back(qr, qr, -fv_[i]);
        }
        mat_.resize(2 * n_, 2 * n_);
        mat_.setFromTriplets(t.begin(), t.end());
        mat_.makeCompressed();
    }

    int n_ = 0;
    double h_ = 0, eps_ = 0, D_ = 1;
    std::vector<double> fu_, fv_;
    Eigen::SparseMatrix<double> mat_;
};

struct EigenMode {
    Complex lambda;
    Complex constraint;    // int (p+q) dx with the eigenvector at unit L2 norm
    double residual = 0.0; // ||L x - lambda x||_2 / ||x||_2
    Eigen::VectorXcd vec;
};

// Shift-invert Arnoldi around sigma via a sparse LU factorization. Returns the
// k eigenvalues closest to sigma. A shift landing on an eigenvalue is retried
// with a perturbed sigma before FactorizationFailed propagates.
//
// The discrete operator has the xi-family mode at lambda = 0 up to Newton
// tolerance, so a shift of exactly zero factorizes a numerically singular
// matrix. The default shift is therefore offset by a quarter of eps, which is
// still "at zero" on the O(1) spectral scale but keeps the factorization sane.
inline std::vector<EigenMode> direct_spectrum_at(const LinearizedOperator& op, int k,
                                                 double sigma, int subspace = 0) {
    const int N = 2 * op.n();
    if (subspace <= 0) subspace = std::min(N, std::max(48, 4 * k + 8));
    const int m = std::min(subspace, N);

    Eigen::SparseMatrix<double> shifted = op.matrix();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double sig = sigma;
    bool ok = false;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
        shifted = op.matrix();
        for (int i = 0; i < N; ++i) shifted.coeffRef(i, i) -= sig;
        shifted.makeCompressed();
        lu.compute(shifted);
        if (lu.info() == Eigen::Success) {
            ok = true;
        } else {
            sig += (attempt + 1) * 1e-6 * (1.0 + std::abs(sigma));
        }
    }
    if (!ok) throw FactorizationFailed("direct_spectrum: sparse LU failed at shifted matrix");

    // Arnoldi on (L - sigma I)^{-1} with full MGS and one re-orthogonalization.
    std::mt19937 rng(777);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd V(N, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd v0(N);
    for (int i = 0; i < N; ++i) v0[i] = gauss(rng);
    V.col(0) = v0 / v0.norm();
    int built = m;
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd w = lu.solve(V.col(j));
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i) {
                const double hij = V.col(i).dot(w);
                H(i, j) += hij;
                w -= hij * V.col(i);
            }
        const double beta = w.norm();
        H(j + 1, j) = beta;
        if (beta < 1e-13 * std::max(1.0, H.cwiseAbs().maxCoeff())) {
            built = j + 1;
            break;
        }
        V.col(j + 1) = w / beta;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(built, built));
    if (es.info() != Eigen::Success)
        throw FactorizationFailed("direct_spectrum: Hessenberg eigensolve failed");

    struct Ritz {
        Complex theta;
        int idx;
    };
    std::vector<Ritz> ritz;
    for (int i = 0; i < built; ++i) ritz.push_back({es.eigenvalues()[i], i});
    // Largest |theta| of the inverted operator = closest to sigma.
    std::sort(ritz.begin(), ritz.end(),
              [](const Ritz& a, const Ritz& b) { return std::abs(a.theta) > std::abs(b.theta); });

    std::vector<EigenMode> out;
    const int want = std::min<int>(k, built);
    for (int r = 0; r < want; ++r) {
        const auto& rz = ritz[r];
        if (std::abs(rz.theta) == 0.0) continue;
        Eigen::VectorXcd y = es.eigenvectors().col(rz.idx);
        Eigen::VectorXcd x = V.leftCols(built) * y;
        x /= std::max(op.l2_norm(x), 1e-300);
        EigenMode mode;
        mode.lambda = sig + 1.0 / rz.theta;
        Eigen::VectorXcd Lx = op.apply(x);
        mode.residual = (Lx - mode.lambda * x).norm() / x.norm();
        mode.constraint = op.constraint(x);
        mode.vec = std::move(x);
        out.push_back(std::move(mode));
    }
    return out;
}

inline std::vector<EigenMode> direct_spectrum(const LinearizedOperator& op, int k,
                                              std::optional<double> sigma = std::nullopt,
                                              int subspace = 0) {
    const double sig = sigma.value_or(0.25 * op.epsilon());
    auto modes = direct_spectrum_at(op, k, sig, subspace);
    double worst = 0.0;
    for (const auto& m : modes)
        if (std::abs(m.lambda) < 1.0) worst = std::max(worst, m.residual);
    if (worst > 1e-4) modes = direct_spectrum_at(op, k, sig, std::max(96, 2 * (4 * k + 8)));
    return modes;
}

// Largest-real-part eigenvalue among modes satisfying the mass constraint.
inline const EigenMode* leading_constrained(const std::vector<EigenMode>& modes,
                                            double constraint_tol = 1e-4) {
    const EigenMode* best = nullptr;
    for (const auto& m : modes) {
        if (std::abs(m.constraint) > constraint_tol) continue;
        if (!best || m.lambda.real() > best->lambda.real()) best = &m;
    }
    return best;
}

struct AsymptoticEigen {
    double kappa_star = 0.0;     // critical eigenvalue = eps * kappa_star + o(eps)
    double W_energy = 0.0;       // int Wdot^2 dz
    double fv_integral = 0.0;    // int_{h^-}^{h^+} f_v(u, v*) du  (= J'(v*))
    double slope_integral = 0.0; // int_0^1 (f_u^* - f_v^*)/f_u^* dx
    double jump = 0.0;           // h^+(v*) - h^-(v*)
    double wdot0 = 0.0;

    double lambda(double eps) const { return eps * kappa_star; }
    bool stable() const { return kappa_star < 0.0; }
};

// Closed-form leading eigenvalue coefficient. The slope integral is piecewise
// constant because f_u^*, f_v^* take their outer values on [0,x0] and (x0,1].
inline AsymptoticEigen kappa_star(const BistableModel& m, const BranchData& bd,
                                  const FrontProfile& profile, const LayerGeometry& geom) {
    AsymptoticEigen ae;
    ae.jump = bd.jump();
    ae.W_energy = profile.energy();
    ae.wdot0 = profile.wdot0();
    ae.fv_integral = num::integrate([&](double u) { return m.f_v(u, bd.v_star); },
                                    bd.h_minus_star, bd.h_plus_star, kQuadTol);
    const double fum = m.f_u(bd.h_minus_star, bd.v_star), fvm = m.f_v(bd.h_minus_star, bd.v_star);
    const double fup = m.f_u(bd.h_plus_star, bd.v_star), fvp = m.f_v(bd.h_plus_star, bd.v_star);
    ae.slope_integral =
        geom.x0 * (fum - fvm) / fum + (1.0 - geom.x0) * (fup - fvp) / fup;
    ae.kappa_star = -ae.jump * ae.fv_integral / (ae.W_energy * ae.slope_integral);
    return ae;
}

struct LeadingOrderCoefficients {
    Complex a11_minus_c11;
    Complex a22_minus_c22;
    Complex b10_minus_d10;
    Complex b21_minus_d21;
    Complex tg_evaluated; // (a22-c22)(b10-d10) - (a11-c11)(b21-d21)
    Complex tg_quadratic; // -kappa (kappa A + B)/C with A,B,C from the asymptotic data
};

inline LeadingOrderCoefficients leading_order_coefficients(const BistableModel& m, const BranchData& bd,
                                                const FrontProfile& profile,
                                                const LayerGeometry& geom,
                                                const ProblemParams& p, Complex kappa) {
    const AsymptoticEigen ae = kappa_star(m, bd, profile, geom);
    const double w0 = profile.wdot0();
    LeadingOrderCoefficients c;
    c.a11_minus_c11 = kappa * ae.W_energy / (w0 * w0);
    c.a22_minus_c22 = (-c.a11_minus_c11 + kappa * ae.jump / w0) / p.D;
    c.b10_minus_d10 = -ae.fv_integral / w0;
    c.b21_minus_d21 = (-c.b10_minus_d10 + kappa * ae.slope_integral) / p.D;
    c.tg_evaluated =
        c.a22_minus_c22 * c.b10_minus_d10 - c.a11_minus_c11 * c.b21_minus_d21;
    c.tg_quadratic = -kappa * (kappa * ae.W_energy * ae.slope_integral + ae.jump * ae.fv_integral) /
                     (p.D * w0 * w0);
    return c;
}

} // namespace pinlayer
