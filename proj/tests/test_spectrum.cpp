#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pinlayer/evans.hpp"
#include "pinlayer/spectrum.hpp"

using namespace pinlayer;

namespace {
struct Setup {
    BistableModel m;
    BranchData bd;
    FrontProfile prof;
    explicit Setup(double s) : m(builtin_cubic(s)), bd(find_v_star(m)), prof(m, bd, bd.midpoint()) {}

    SteadyState steady(const ProblemParams& p, int n) const {
        auto geo = geometry(bd, prof, p);
        return refine(m, p, composite(bd, geo, prof, p, n));
    }
};

SteadyState uniform_state(const BranchData& bd, const ProblemParams& p, int n) {
    SteadyState s;
    s.x_grid.resize(n);
    for (int i = 0; i < n; ++i) s.x_grid[i] = i / (n - 1.0);
    s.u.assign(n, bd.h_plus_star);
    s.v.assign(n, bd.v_star);
    s.C = p.epsilon * p.epsilon * bd.h_plus_star + p.D * bd.v_star;
    s.epsilon = p.epsilon;
    s.D = p.D;
    s.xi = bd.h_plus_star + bd.v_star;
    return s;
}
} // namespace

TEST_CASE("block row sums collapse to the Laplacian of eps^2 p + D q") {
    Setup su(0.1);
    ProblemParams p{0.02, 1.0, 0.0};
    auto s = su.steady(p, 512);
    LinearizedOperator op(su.m, s);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int n = s.n();
    Eigen::VectorXcd x(2 * n);
    std::vector<double> combo(n);
    for (int i = 0; i < n; ++i) {
        x[2 * i] = uni(rng);
        x[2 * i + 1] = uni(rng);
        combo[i] = p.epsilon * p.epsilon * x[2 * i].real() + p.D * x[2 * i + 1].real();
    }
    Eigen::VectorXcd Lx = op.apply(x);
    std::vector<double> lap;
    second_difference(combo, s.h(), lap);
    double scale = 0.0, worst = 0.0;
    for (int i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(lap[i]));
        worst = std::max(worst, std::abs((Lx[2 * i] + Lx[2 * i + 1]).real() - lap[i]));
    }
    CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("uniform-state smoke test against the 2x2 symbol oracle") {
    Setup su(0.1);
    ProblemParams p{0.02, 1.0, 0.0};
    const int n = 512;
    auto s = uniform_state(su.bd, p, n);
    LinearizedOperator op(su.m, s);

    // oracle: cos(k pi x) modes diagonalize the constant-coefficient operator;
    // the discrete Laplacian eigenvalue is -4 sin^2(k pi h / 2) / h^2
    const double fu = su.m.f_u(su.bd.h_plus_star, su.bd.v_star);
    const double fv = su.m.f_v(su.bd.h_plus_star, su.bd.v_star);
    const double h = s.h();
    std::vector<double> oracle;
    for (int k = 0; k <= 40; ++k) {
        const double sk = std::sin(0.5 * k * M_PI * h);
        const double dk = -4.0 * sk * sk / (h * h);
        const double a = p.epsilon * p.epsilon * dk + fu;
        const double d = p.D * dk - fv;
        const double tr = a + d, det = a * d + fu * fv;
        const double disc = tr * tr - 4.0 * det;
        if (disc >= 0.0) {
            oracle.push_back(0.5 * (tr + std::sqrt(disc)));
            oracle.push_back(0.5 * (tr - std::sqrt(disc)));
        }
    }
    auto nearest = [](const std::vector<double>& vals, double target) {
        double best = vals.front();
        for (double v : vals)
            if (std::abs(v - target) < std::abs(best - target)) best = v;
        return best;
    };
    const double oracle_near = nearest(oracle, fu);

    auto modes = direct_spectrum(op, 10, fu);
    double solver_near = modes.front().lambda.real();
    for (const auto& md : modes)
        if (std::abs(md.lambda.real() - fu) < std::abs(solver_near - fu))
            solver_near = md.lambda.real();

    CHECK(solver_near == doctest::Approx(oracle_near).epsilon(1e-6));
    CHECK(std::abs(oracle_near - fu) < 2.2e-2); // the k=2 mode sits ~0.0105 from f_u
    for (const auto& md : modes) CHECK(md.lambda.real() < 1e-10); // uniform state is stable
}

TEST_CASE("layered operator: critical eigenvalue approaches eps*kappa*") {
    for (double s : {0.1, -0.5}) {
        Setup su(s);
        ProblemParams p{0.02, 1.0, 0.0};
        auto st = su.steady(p, 2048);
        LinearizedOperator op(su.m, st);
        auto modes = direct_spectrum(op, 8);
        const auto* lead = leading_constrained(modes);
        REQUIRE(lead != nullptr);
        CHECK(lead->residual < 1e-6);

        auto geo = geometry(su.bd, su.prof, p);
        auto ae = kappa_star(su.m, su.bd, su.prof, geo);
        CHECK(std::abs(lead->lambda.real() / p.epsilon - ae.kappa_star) <=
              0.2 * std::abs(ae.kappa_star));
        CHECK(std::abs(lead->lambda.imag()) < 1e-8);

        // Richardson cross-check at two resolutions: the h^2 extrapolation
        // moves the eigenvalue by little, i.e. the grid is converged
        auto st2 = su.steady(p, 1024);
        LinearizedOperator op2(su.m, st2);
        const auto* lead2 = leading_constrained(direct_spectrum(op2, 8));
        REQUIRE(lead2 != nullptr);
        const double lam1 = lead2->lambda.real(), lam2 = lead->lambda.real();
        const double lamR = (4.0 * lam2 - lam1) / 3.0;
        CHECK(std::abs(lam2 - lamR) <= 1e-2 * std::abs(lam2));
    }
}

TEST_CASE("the leading eigenvalue coefficient is independent of D") {
    // kappa* = -jump * J'(v*) / (int Wdot^2 dz * slope integral) carries no D;
    // the large diffusivity only enters at the next order.
    Setup su(0.1);
    auto geo = geometry(su.bd, su.prof, ProblemParams{0.02, 1.0, 0.0});
    auto ae = kappa_star(su.m, su.bd, su.prof, geo);
    for (double D : {1.0, 2.0, 5.0}) {
        ProblemParams p{0.02, D, 0.0};
        auto st = su.steady(p, 2048);
        LinearizedOperator op(su.m, st);
        const auto* lead = leading_constrained(direct_spectrum(op, 8));
        REQUIRE(lead != nullptr);
        CHECK(std::abs(lead->lambda.real() / p.epsilon - ae.kappa_star) <=
              0.05 * std::abs(ae.kappa_star));
    }
}

TEST_CASE("direct eigenvalue approaches eps*kappa* monotonically in eps") {
    Setup su(0.1);
    auto geo = geometry(su.bd, su.prof, ProblemParams{0.02, 1.0, 0.0});
    auto ae = kappa_star(su.m, su.bd, su.prof, geo);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.04, 0.03, 0.02}) {
        ProblemParams p{eps, 1.0, 0.0};
        auto st = su.steady(p, 2048);
        LinearizedOperator op(su.m, st);
        const auto* lead = leading_constrained(direct_spectrum(op, 8));
        REQUIRE(lead != nullptr);
        const double gap = std::abs(lead->lambda.real() / eps - ae.kappa_star);
        CHECK(gap < prev);
        prev = gap;
        if (eps == 0.02) CHECK(gap <= 0.2 * std::abs(ae.kappa_star));
    }
}

TEST_CASE("the unconstrained xi-mode near zero is flagged by the mass functional") {
    Setup su(0.1);
    ProblemParams p{0.02, 1.0, 0.0};
    auto st = su.steady(p, 1024);
    LinearizedOperator op(su.m, st);
    auto modes = direct_spectrum(op, 8);

    bool found_xi_mode = false;
    for (const auto& md : modes)
        if (std::abs(md.lambda) < 1e-8 && std::abs(md.constraint) > 0.05) found_xi_mode = true;
    CHECK(found_xi_mode);
    const auto* lead = leading_constrained(modes);
    REQUIRE(lead != nullptr);
    CHECK(std::abs(lead->constraint) < 1e-6);
}

TEST_CASE("kappa_star closed form and sign law") {
    {
        Setup su(0.1);
        auto geo = geometry(su.bd, su.prof, ProblemParams{0.02, 1.0, 0.0});
        auto ae = kappa_star(su.m, su.bd, su.prof, geo);
        const double exact = -6.0 * std::sqrt(2.0) * 0.1 / 2.1;
        CHECK(ae.kappa_star == doctest::Approx(exact).epsilon(1e-10));
        CHECK(ae.kappa_star == doctest::Approx(-0.40406).epsilon(1e-4));
        CHECK(ae.jump == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(ae.fv_integral == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(ae.W_energy == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-11));
        CHECK(ae.slope_integral == doctest::Approx(1.05).epsilon(1e-12));
        CHECK(ae.stable());
    }
    {
        Setup su(-0.5);
        auto geo = geometry(su.bd, su.prof, ProblemParams{0.02, 1.0, 0.0});
        auto ae = kappa_star(su.m, su.bd, su.prof, geo);
        CHECK(ae.kappa_star == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-10));
        CHECK_FALSE(ae.stable());
    }
    // sign(Re kappa*) = -sign(J'(v*)) across the admissible coupling range
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const double s = trial % 2 == 0 ? -1.9 * uni(rng) - 0.05 : 3.0 * uni(rng) + 0.05;
        Setup su(s);
        auto geo = geometry(su.bd, su.prof, ProblemParams{0.02, 1.0, 0.0});
        auto ae = kappa_star(su.m, su.bd, su.prof, geo);
        CHECK(ae.kappa_star * ae.fv_integral < 0.0);
        CHECK(ae.slope_integral > 0.0);
    }
}

TEST_CASE("leading-order frame coefficients: endpoint values and identities") {
    Setup su(0.1);
    ProblemParams p{0.02, 1.0, 0.0};
    auto geo = geometry(su.bd, su.prof, p);

    auto c0 = leading_order_coefficients(su.m, su.bd, su.prof, geo, p, Complex(0.0, 0.0));
    CHECK(std::abs(c0.a11_minus_c11) < 1e-14);
    CHECK(std::abs(c0.b21_minus_d21 + c0.b10_minus_d10 / p.D) < 1e-14);

    auto c1 = leading_order_coefficients(su.m, su.bd, su.prof, geo, p, Complex(1.0, 0.0));
    CHECK(c1.a11_minus_c11.real() ==
          doctest::Approx(4.0 * std::sqrt(2.0) / 3.0).epsilon(1e-10));
    CHECK(c1.b10_minus_d10.real() ==
          doctest::Approx(-0.2 * std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("case-I determinant follows the displayed quadratic in kappa") {
    Setup su(0.1);
    ProblemParams p{0.02, 1.0, 0.0};
    auto geo = geometry(su.bd, su.prof, p);
    auto ae = kappa_star(su.m, su.bd, su.prof, geo);
    const double k = std::abs(ae.kappa_star);
    const std::vector<Complex> kappas{Complex(ae.kappa_star, 0), Complex(0.5 * ae.kappa_star, 0),
                                      Complex(2.0 * ae.kappa_star, 0), Complex(0, k),
                                      Complex(0, -k)};
    // residual relative to the quadratic's scale over the sample set: at
    // kappa = kappa* both sides vanish and a pointwise ratio is meaningless
    double scale = 0.0;
    for (Complex kappa : kappas)
        scale = std::max(scale,
                         std::abs(leading_order_coefficients(su.m, su.bd, su.prof, geo, p, kappa)
                                      .tg_quadratic));
    for (Complex kappa : kappas) {
        auto c = leading_order_coefficients(su.m, su.bd, su.prof, geo, p, kappa);
        CHECK(std::abs(c.tg_evaluated - c.tg_quadratic) <= 1e-8 * scale);
    }
    // at kappa = kappa* the quadratic annihilates by construction
    auto cz = leading_order_coefficients(su.m, su.bd, su.prof, geo, p, Complex(ae.kappa_star, 0));
    CHECK(std::abs(cz.tg_evaluated) < 1e-12);
}

TEST_CASE("zero-mode exclusion: unit mass derivative, O(delta^2) operator residual") {
    auto m = builtin_cubic(0.1);
    ProblemParams p{0.02, 1.0, 0.0};
    auto zm1 = zero_mode_exclusion(m, p, 0.0, 1e-3, 1024);
    CHECK(zm1.constraint_integral == doctest::Approx(1.0).epsilon(1e-6));

    auto zm2 = zero_mode_exclusion(m, p, 0.0, 5e-4, 1024);
    const double ratio = zm1.L_residual_rel / zm2.L_residual_rel;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);

    auto zm3 = zero_mode_exclusion(m, p, 0.0, 2.5e-4, 1024);
    CHECK(zm3.L_residual_rel <= 1e-4);
}
