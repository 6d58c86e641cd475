#include <doctest.h>

#include <cmath>
#include <random>

#include "parobs/closed_forms.hpp"
#include "parobs/lcp.hpp"
#include "support/oracles.hpp"

using namespace parobs;

TEST_SUITE_BEGIN("lcp");

TEST_CASE("assembly of the model stencil") {
    // a=1, b=c=0, f=1, theta=1, u_prev=0: interior rows are
    // (-1/h^2, 1/tau + 2/h^2, -1/h^2) with q = -1
    const GridSpec g(0.0, 1.0, 0.0, 0.1, 11, 11);
    const double h = g.dx(), tau = g.dt();
    std::vector<double> u_prev(g.nx, 0.0);
    const TimeStepSystem sys = assemble_step(CoefficientSet::unit(), g, u_prev, 0, 1.0);

    REQUIRE(sys.size() == g.nx - 2);
    for (int i = 1; i + 1 < sys.size(); ++i) {
        CHECK(sys.sub[i] == doctest::Approx(-1.0 / (h * h)));
        CHECK(sys.diag[i] == doctest::Approx(1.0 / tau + 2.0 / (h * h)));
        CHECK(sys.super[i] == doctest::Approx(-1.0 / (h * h)));
        CHECK(sys.q[i] == doctest::Approx(-1.0));
    }
    // boundary-coupling entries are folded into q
    CHECK(sys.sub[0] == 0.0);
    CHECK(sys.super[sys.size() - 1] == 0.0);
}

TEST_CASE("upwinding keeps off-diagonals non-positive under strong convection") {
    // |b| h / (2a) = 4 at h = 0.1, a = 1, b = 80
    CoefficientSet c = CoefficientSet::unit();
    c.b = Expr::constant(80.0);
    const GridSpec g(0.0, 1.0, 0.0, 0.01, 11, 11);
    std::vector<double> u_prev(g.nx, 0.0);
    const TimeStepSystem sys = assemble_step(c, g, u_prev, 0, 1.0);
    for (int i = 0; i < sys.size(); ++i) {
        CHECK(sys.sub[i] <= 0.0);
        CHECK(sys.super[i] <= 0.0);
        CHECK(sys.diag[i] + sys.sub[i] + sys.super[i] > 0.0);
    }
}

TEST_CASE("dominance violation is rejected with the required time step") {
    // c = 2 and tau = 1: diagonal 1/tau - theta c = -1
    CoefficientSet c = CoefficientSet::unit();
    c.c = Expr::constant(2.0);
    const GridSpec g(0.0, 1.0, 0.0, 10.0, 11, 11);   // tau = 1
    std::vector<double> u_prev(g.nx, 0.0);
    try {
        assemble_step(c, g, u_prev, 0, 1.0);
        FAIL("expected AssemblyError");
    } catch (const AssemblyError& e) {
        CHECK(e.required_dt() == doctest::Approx(0.5));
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("PSOR solves the tiny spec'd systems") {
    SolveConfig cfg;
    cfg.tol = 1e-12;

    SUBCASE("1x1, A=1, q=-1: constraint active") {
        TimeStepSystem sys;
        sys.sub = {0.0};
        sys.diag = {1.0};
        sys.super = {0.0};
        sys.q = {-1.0};
        const PsorResult r = psor_solve(sys, cfg);
        CHECK(r.solution[0] == doctest::Approx(0.0));
    }

    SUBCASE("1x1, A=1, q=1: unconstrained") {
        TimeStepSystem sys;
        sys.sub = {0.0};
        sys.diag = {1.0};
        sys.super = {0.0};
        sys.q = {1.0};
        const PsorResult r = psor_solve(sys, cfg);
        CHECK(r.solution[0] == doctest::Approx(1.0));
    }

    SUBCASE("2x2 mixed active set, checked against enumeration") {
        TimeStepSystem sys;
        sys.sub = {0.0, -1.0};
        sys.diag = {2.0, 2.0};
        sys.super = {-1.0, 0.0};
        sys.q = {-1.0, 1.0};

        const auto oracle = oracles::lcp_enumerate({{2.0, -1.0}, {-1.0, 2.0}}, {-1.0, 1.0});
        REQUIRE(oracle.has_value());
        CHECK((*oracle)[0] == doctest::Approx(0.0));
        CHECK((*oracle)[1] == doctest::Approx(0.5));

        const PsorResult r = psor_solve(sys, cfg);
        CHECK(r.solution[0] == doctest::Approx((*oracle)[0]).epsilon(1e-9));
        CHECK(r.solution[1] == doctest::Approx((*oracle)[1]).epsilon(1e-9));
    }
}

TEST_CASE("PSOR agrees with active-set enumeration on random M-matrix LCPs") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> off(0.0, 1.0), rhs(-2.0, 2.0);
    std::uniform_int_distribution<int> size(1, 8);

    SolveConfig cfg;
    cfg.tol = 1e-12;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        TimeStepSystem sys;
        sys.sub.assign(n, 0.0);
        sys.super.assign(n, 0.0);
        sys.diag.assign(n, 0.0);
        sys.q.assign(n, 0.0);
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i) {
            const double lo = i > 0 ? -off(rng) : 0.0;
            const double hi = i + 1 < n ? -off(rng) : 0.0;
            sys.sub[i] = lo;
            sys.super[i] = hi;
            sys.diag[i] = -lo - hi + 0.2 + off(rng);
            sys.q[i] = rhs(rng);
            if (i > 0) dense[i][i - 1] = lo;
            if (i + 1 < n) dense[i][i + 1] = hi;
            dense[i][i] = sys.diag[i];
        }
        const auto expect = oracles::lcp_enumerate(dense, sys.q);
        REQUIRE(expect.has_value());
        const PsorResult got = psor_solve(sys, cfg);
        for (int i = 0; i < n; ++i)
            CHECK(got.solution[i] == doctest::Approx((*expect)[i]).epsilon(1e-8));
    }
}

TEST_CASE("non-convergence carries the residual") {
    TimeStepSystem sys;
    sys.sub = {0.0, -1.0};
    sys.diag = {2.0, 2.0};
    sys.super = {-1.0, 0.0};
    sys.q = {5.0, 5.0};
    SolveConfig cfg;
    cfg.tol = 1e-16;   // unreachable
    cfg.max_iter = 3;
    CHECK_THROWS_AS(psor_solve(sys, cfg), ConvergenceError);
}

TEST_CASE("solve_parabolic basics") {
    SolveConfig cfg;
    cfg.tol = 1e-11;

    SUBCASE("zero data stays identically zero (residual f >= 0)") {
        const GridSpec g(-1.0, 1.0, 0.0, 0.5, 41, 41);
        const Field u = solve_parabolic(CoefficientSet::unit(), g, parse_expression("0"),
                                        parse_expression("0"), parse_expression("0"), cfg);
        CHECK(u.max_abs() == 0.0);
        CHECK(u.nonnegative());
    }

    SUBCASE("reproduces max(0,-t) through the kink") {
        const GridSpec g(-1.0, 1.0, -1.0, 1.0, 41, 81);
        const Expr data = parse_expression("max(0, -t)");
        const Field u = solve_parabolic(CoefficientSet::unit(), g, data, data, data, cfg);
        double worst = 0.0;
        for (int n = 0; n < g.nt; ++n)
            for (int i = 0; i < g.nx; ++i)
                worst = std::max(worst, std::abs(u(i, n) - std::max(0.0, -g.t(n))));
        CHECK(worst < 1e-8);   // the discrete LCP is exact on this solution
    }

    SUBCASE("reproduces the stationary half-space solution v_plus") {
        const GridSpec g(-1.0, 1.0, 0.0, 0.5, 41, 41);
        const Expr data = parse_expression("0.5*max(0, x)^2");
        const Field u = solve_parabolic(CoefficientSet::unit(), g, data,
                                        parse_expression("0"), parse_expression("0.5"), cfg);
        double worst = 0.0;
        for (int n = 0; n < g.nt; ++n)
            for (int i = 0; i < g.nx; ++i) {
                const double exact = eval_closed_form(ClosedForm::v_plus(), g.x(i), 0.0);
                worst = std::max(worst, std::abs(u(i, n) - exact));
            }
        CHECK(worst < 1e-8);
    }

    SUBCASE("hypothesis gate: f below delta is a validation error") {
        CoefficientSet c = CoefficientSet::unit();
        c.f = Expr::constant(0.0);
        c.delta = 0.5;
        const GridSpec g(-1.0, 1.0, 0.0, 0.5, 11, 11);
        CHECK_THROWS_AS(solve_parabolic(c, g, parse_expression("0"), parse_expression("0"),
                                        parse_expression("0"), cfg),
                        ValidationError);
    }

    SUBCASE("negative data beyond the clamp window is rejected") {
        const GridSpec g(-1.0, 1.0, 0.0, 0.5, 11, 11);
        CHECK_THROWS_AS(solve_parabolic(CoefficientSet::unit(), g, parse_expression("0 - 1"),
                                        parse_expression("0"), parse_expression("0"), cfg),
                        ValidationError);
    }

    SUBCASE("tiny negatives are clamped and counted") {
        const GridSpec g(-1.0, 1.0, 0.0, 0.5, 11, 11);
        SolveStats stats;
        const Field u =
            solve_parabolic(CoefficientSet::unit(), g, parse_expression("0 - 1e-13"),
                            parse_expression("0"), parse_expression("0"), cfg, &stats);
        CHECK(stats.clamped_data_values > 0);
        CHECK(u.min_value() >= 0.0);
    }
}

TEST_CASE("discrete comparison: raising f does not raise u") {
    const GridSpec g(-1.0, 1.0, -1.0, 0.0, 81, 81);
    const Expr data = parse_expression("0.2 + 0.5*x^2");
    SolveConfig cfg;
    cfg.tol = 1e-11;

    CoefficientSet hi = CoefficientSet::unit();
    hi.f = Expr::constant(1.2);
    const Field u_low = solve_parabolic(CoefficientSet::unit(), g, data, data, data, cfg);
    const Field u_high = solve_parabolic(hi, g, data, data, data, cfg);
    for (int n = 0; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i)
            CHECK(u_high(i, n) <= u_low(i, n) + 1e-9);
}

TEST_CASE("identical configs produce bit-identical fields") {
    const GridSpec g(-1.0, 1.0, -1.0, 0.0, 61, 41);
    const Expr data = parse_expression("0.1 + 0.5*x^2 + 0.05*sin(3*x)");
    SolveConfig cfg;

    const Field a = solve_parabolic(CoefficientSet::unit(), g, data, data, data, cfg);
    const Field b = solve_parabolic(CoefficientSet::unit(), g, data, data, data, cfg);
    REQUIRE(a.values().size() == b.values().size());
    for (std::size_t k = 0; k < a.values().size(); ++k)
        CHECK(a.values()[k] == b.values()[k]);
}

TEST_CASE("discrete operator consistency on exact closed-form samples") {
    // residual uxx - ut - 1_{u>0} measured away from the free boundary is
    // O(h^2 + tau); here the forms are piecewise polynomial, so it sits at
    // the interpolation floor except for the v_m profile branch
    const GridSpec g(-1.0, 1.0, -0.05, 0.05, 201, 401);
    CHECK(residual_on_grid(ClosedForm::v_plus(), g) < 1e-10);
    CHECK(residual_on_grid(ClosedForm::v_minus_one(), g) < 1e-10);
    CHECK(residual_on_grid(ClosedForm::v_zero(), g) < 1e-10);
}

TEST_SUITE_END();
