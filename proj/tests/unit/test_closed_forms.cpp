#include <doctest.h>

#include <cmath>
#include <future>
#include <random>
#include <sstream>

#include "parobs/closed_forms.hpp"

using namespace parobs;

TEST_SUITE_BEGIN("closed_forms");

TEST_CASE("printed formula spot values") {
    CHECK(eval_closed_form(ClosedForm::v_zero(), 0.4, 7.0) == doctest::Approx(0.08));
    CHECK(eval_closed_form(ClosedForm::v_minus_one(), 5.0, -0.25) == doctest::Approx(0.25));
    // t <= 0 branch of v_m at m = -0.5, (x,t) = (1,-1): -m + (1+m)/2
    CHECK(eval_closed_form(ClosedForm::v_m(-0.5), 1.0, -1.0) == doctest::Approx(0.75));
    CHECK(eval_closed_form(ClosedForm::v_plus(), -3.0, 0.0) == doctest::Approx(0.0));
    CHECK(eval_closed_form(ClosedForm::v_minus(), -3.0, 0.0) == doctest::Approx(4.5));
}

TEST_CASE("name round trip and parameter domain") {
    CHECK(ClosedForm::from_name("v_plus").name() == "v_plus");
    CHECK(ClosedForm::from_name("counterexample").name() == "v_minus_one");
    CHECK(ClosedForm::from_name("v_m(-0.5)").m == doctest::Approx(-0.5));
    CHECK_THROWS_AS(ClosedForm::v_m(0.5), std::invalid_argument);
    CHECK_THROWS_AS(ClosedForm::v_m(-1.5), std::invalid_argument);
    CHECK_THROWS_AS(ClosedForm::from_name("bogus"), std::invalid_argument);
}

TEST_CASE("m = 0 shooting lands on the exact profile xi^2/2") {
    const SelfSimilarProfile p = solve_profile(0.0, 1e-10);
    CHECK(p.xi_m == doctest::Approx(0.0).epsilon(1e-10));
    double worst = 0.0;
    for (std::size_t k = 0; k < p.xi.size(); ++k)
        worst = std::max(worst, std::abs(p.V[k] - 0.5 * p.xi[k] * p.xi[k]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("m = -1 degenerates without shooting") {
    const SelfSimilarProfile p = solve_profile(-1.0, 1e-10);
    CHECK(p.C_m == 0.0);
    CHECK(std::isinf(p.xi_m));
    // eval path: the positive set for t > 0 is empty
    CHECK(eval_closed_form(ClosedForm::v_minus_one(), 2.0, 0.5) == 0.0);
}

TEST_CASE("shooting profile for m = -0.5") {
    const SelfSimilarProfile& p = profile_for(-0.5);

    SUBCASE("smooth fit at the free boundary") {
        CHECK(p.xi_m > 0.0);
        CHECK(p.C_m == doctest::Approx(1.0 / (p.xi_m * p.xi_m)));
        CHECK(p.V.front() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(p.Vp.front() == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("V positive beyond xi_m") {
        for (std::size_t k = 1; k < p.xi.size(); ++k) CHECK(p.V[k] > 0.0);
    }

    SUBCASE("table consistent with the ODE") { CHECK(p.table_defect <= 1e-8); }

    SUBCASE("far field matches (1+m) xi^2/2 + m") {
        const double xi = p.xi_max;
        const double asym = 0.5 * (1.0 + p.m) * xi * xi + p.m;
        CHECK(p.eval(xi) == doctest::Approx(asym).epsilon(1e-7));
        // the additive constant is the second consistency check
        const double mid = 0.5 * (p.xi_m + p.xi_max) + 7.0;
        CHECK(p.eval(mid) - 0.5 * (1.0 + p.m) * mid * mid == doctest::Approx(p.m).epsilon(1e-5));
    }

    SUBCASE("Hermite interpolation is smooth through table points") {
        const double xi = p.xi[40] + 0.5 * (p.xi[41] - p.xi[40]);
        const double left = p.eval(p.xi[40]);
        const double right = p.eval(p.xi[41]);
        const double mid = p.eval(xi);
        CHECK(mid > std::min(left, right) - 1e-12);
        CHECK(mid < std::max(left, right) + 1e-12);
    }
}

TEST_CASE("C_m increases strictly in m") {
    double prev = 0.0;   // C_{-1} = 0
    for (double m = -0.9; m < -0.05; m += 0.1) {
        const SelfSimilarProfile& p = profile_for(m);
        CHECK(p.C_m > prev);
        prev = p.C_m;
    }
}

TEST_CASE("parabolic 2-homogeneity holds exactly under power-of-two scaling") {
    std::mt19937 rng(515151);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), ut(-2.0, 2.0);
    const ClosedForm forms[] = {ClosedForm::v_plus(), ClosedForm::v_minus(),
                                ClosedForm::v_zero(), ClosedForm::v_minus_one(),
                                ClosedForm::v_m(-0.5)};
    for (const auto& form : forms) {
        for (int k = 0; k < 100; ++k) {
            const double x = ux(rng), t = ut(rng);
            const double base = eval_closed_form(form, x, t);
            for (double lambda : {0.5, 2.0}) {
                const double scaled = eval_closed_form(form, lambda * x, lambda * lambda * t);
                CHECK(scaled == lambda * lambda * base);
            }
        }
    }
}

TEST_CASE("closed forms are non-negative") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), ut(-4.0, 4.0);
    const ClosedForm forms[] = {ClosedForm::v_plus(), ClosedForm::v_minus(),
                                ClosedForm::v_zero(), ClosedForm::v_minus_one(),
                                ClosedForm::v_m(-0.25), ClosedForm::v_m(-0.75)};
    for (const auto& form : forms)
        for (int k = 0; k < 500; ++k)
            CHECK(eval_closed_form(form, ux(rng), ut(rng)) >= 0.0);
}

TEST_CASE("discrete model-equation residual of sampled closed forms") {
    // tau must be small against h^2-level targets: the t > 0 profile branch
    // carries O(tau |u_tt|) from the backward difference
    const GridSpec g(-1.0, 1.0, -0.04, 0.04, 401, 4001);

    SUBCASE("exact piecewise-polynomial forms sit at machine precision") {
        CHECK(residual_on_grid(ClosedForm::v_plus(), g) < 1e-10);
        CHECK(residual_on_grid(ClosedForm::v_zero(), g) < 1e-10);
        CHECK(residual_on_grid(ClosedForm::v_minus_one(), g) < 1e-10);
    }

    SUBCASE("the tabulated v_m branch stays below 1e-4") {
        CHECK(residual_on_grid(ClosedForm::v_m(-0.5), g) <= 1e-4);
    }
}

TEST_CASE("profile cache computes one object per m") {
    auto req = [] { return &profile_for(-0.35); };
    auto f1 = std::async(std::launch::async, req);
    auto f2 = std::async(std::launch::async, req);
    CHECK(f1.get() == f2.get());
}

TEST_CASE("profile CSV carries the header comment") {
    const SelfSimilarProfile& p = profile_for(-0.5);
    std::ostringstream os;
    write_profile_csv(p, os);
    const std::string text = os.str();
    CHECK(text.rfind("# m=", 0) == 0);
    CHECK(text.find("xi,V,Vp\n") != std::string::npos);
}

TEST_SUITE_END();
