#include <doctest.h>

#include <cmath>
#include <sstream>

#include "parobs/closed_forms.hpp"
#include "parobs/free_boundary.hpp"

using namespace parobs;

TEST_SUITE_BEGIN("free_boundary");

TEST_CASE("v_plus: the boundary is x = 0 at every slice, localized to h^2") {
    const GridSpec g(-1.0, 1.0, -1.0, 1.0, 201, 41);
    const Field u = sample_closed_form(ClosedForm::v_plus(), g);
    const FreeBoundarySet gamma = extract(u);

    REQUIRE_FALSE(gamma.empty());
    int spatial = 0;
    for (const auto& p : gamma.points) {
        if (p.orientation == FreeBoundaryPoint::Orientation::Spatial) {
            ++spatial;
            CHECK(std::abs(p.x) <= g.dx() * g.dx());
            CHECK(p.side == +1);
            CHECK(p.quad_coeff == doctest::Approx(0.5).epsilon(1e-9));
        }
    }
    CHECK(spatial == g.nt);   // one transversal crossing per slice
}

TEST_CASE("v_minus_one: temporal transitions at t = 0 within tau") {
    const GridSpec g(-1.0, 1.0, -1.0, 1.0, 41, 161);
    const Field u = sample_closed_form(ClosedForm::v_minus_one(), g);
    const FreeBoundarySet gamma = extract(u);

    REQUIRE_FALSE(gamma.empty());
    for (const auto& p : gamma.points) {
        CHECK(p.orientation == FreeBoundaryPoint::Orientation::Temporal);
        CHECK(std::abs(p.t) <= g.dt());
        CHECK(p.side == -1);   // u grows toward negative t
    }
}

TEST_CASE("v_m: the t > 0 boundary tracks the parabola t = C_m x^2") {
    const GridSpec g(-1.0, 1.0, -0.2, 0.4, 401, 241);
    const ClosedForm form = ClosedForm::v_m(-0.5);
    const Field u = sample_closed_form(form, g);
    const FreeBoundarySet gamma = extract(u);
    const double h = g.dx();

    REQUIRE_FALSE(gamma.empty());
    int checked = 0;
    for (const auto& p : gamma.points) {
        if (p.t < 4.0 * g.dt()) continue;   // skip the vertex region
        CHECK(analytic_boundary_distance(form, p.x, p.t) <= 2.0 * h);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("all-zero and all-positive fields have empty boundaries") {
    const GridSpec g(-1.0, 1.0, 0.0, 1.0, 21, 11);
    Field zero(g);
    CHECK(extract(zero).empty());
    Field pos(g);
    for (int n = 0; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i) pos.at(i, n) = 1.0;
    CHECK(extract(pos).empty());
}

TEST_CASE("default zero tolerance scales with delta / max a and h^2") {
    const GridSpec g(-1.0, 1.0, 0.0, 1.0, 101, 11);
    CoefficientSet c = CoefficientSet::unit();
    const double base = default_zero_tol(&c, g);
    CHECK(base == doctest::Approx(0.25 * g.dx() * g.dx()));
    c.a = Expr::constant(4.0);
    CHECK(default_zero_tol(&c, g) == doctest::Approx(base / 4.0));
}

TEST_CASE("ut_jump on the closed forms") {
    SUBCASE("v_zero has no jump anywhere") {
        const GridSpec g(-1.0, 1.0, -1.0, 1.0, 101, 101);
        const Field u = sample_closed_form(ClosedForm::v_zero(), g);
        const DerivedFields d = derived_fields(u);
        const UtJump j = ut_jump(u, d, 0.0, 0.0, 0.5);
        CHECK(j.jump == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("v_minus_one jumps by exactly 1 across t = 0") {
        const GridSpec g(-1.0, 1.0, -1.0, 1.0, 101, 401);
        const Field u = sample_closed_form(ClosedForm::v_minus_one(), g);
        const DerivedFields d = derived_fields(u);
        const UtJump j = ut_jump(u, d, 0.0, 0.0, 0.5);
        CHECK(j.sup == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(j.inf == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(j.jump == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("v_m at m = -0.5 jumps by |m| at the origin") {
        const GridSpec g(-1.0, 1.0, -0.5, 0.5, 401, 1601);
        const Field u = sample_closed_form(ClosedForm::v_m(-0.5), g);
        const DerivedFields d = derived_fields(u);
        const UtJump j = ut_jump(u, d, 0.0, 0.0, 0.25);
        CHECK(j.jump == doctest::Approx(0.5).epsilon(2e-2));
    }

    SUBCASE("radius below the resolution scale is rejected") {
        const GridSpec g(-1.0, 1.0, -1.0, 1.0, 11, 11);
        const Field u = sample_closed_form(ClosedForm::v_zero(), g);
        const DerivedFields d = derived_fields(u);
        CHECK_THROWS_AS(ut_jump(u, d, 0.0, 0.0, 0.1), AdmissibilityError);
    }
}

TEST_CASE("liminf of u_t at boundary points is never positive (Eq.-style check)") {
    SUBCASE("v_plus: u_t identically zero passes") {
        const GridSpec g(-1.0, 1.0, -1.0, 1.0, 101, 101);
        const Field u = sample_closed_form(ClosedForm::v_plus(), g);
        const DerivedFields d = derived_fields(u);
        FreeBoundaryPoint p0;
        p0.x = 0.0;
        p0.t = 0.0;
        const LiminfCheck c = liminf_ut_check(u, d, p0, {0.5, 0.25});
        CHECK(c.pass);
        CHECK(c.inf_ut.back() == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("v_minus_one: inf u_t = -1 passes") {
        const GridSpec g(-1.0, 1.0, -1.0, 1.0, 101, 401);
        const Field u = sample_closed_form(ClosedForm::v_minus_one(), g);
        const DerivedFields d = derived_fields(u);
        FreeBoundaryPoint p0;
        p0.x = 0.0;
        p0.t = 0.0;
        const LiminfCheck c = liminf_ut_check(u, d, p0, {0.5, 0.25});
        CHECK(c.pass);
        CHECK(c.inf_ut.back() == doctest::Approx(-1.0).epsilon(1e-12));
    }
}

TEST_CASE("extracted boundary stays within (2h, 2tau) of the analytic one") {
    const GridSpec g(-1.0, 1.0, -0.5, 0.5, 201, 201);
    for (const auto& form : {ClosedForm::v_plus(), ClosedForm::v_minus_one()}) {
        const Field u = sample_closed_form(form, g);
        const FreeBoundarySet gamma = extract(u);
        for (const auto& p : gamma.points) {
            const double d = analytic_boundary_distance(form, p.x, p.t);
            CHECK(d <= 2.0 * std::max(g.dx(), g.dt()));
        }
    }
}

TEST_CASE("quad_coeff of solver-style data sits in the non-degeneracy window") {
    // v_plus has q = 1/2 exactly; the window from a = f = 1, delta = 1 is
    // [delta/(2 max a), max f/(2 delta)] = [1/2, 1/2]
    const GridSpec g(-1.0, 1.0, -1.0, 0.0, 401, 41);
    const Field u = sample_closed_form(ClosedForm::v_plus(), g);
    const FreeBoundarySet gamma = extract(u);
    for (const auto& p : gamma.points) {
        if (p.orientation != FreeBoundaryPoint::Orientation::Spatial) continue;
        CHECK(p.quad_coeff > 0.5 - 1e-6);
        CHECK(p.quad_coeff < 0.5 + 1e-6);
    }
}

TEST_CASE("boundary CSV columns") {
    const GridSpec g(-1.0, 1.0, -1.0, 1.0, 51, 21);
    const Field u = sample_closed_form(ClosedForm::v_plus(), g);
    const FreeBoundarySet gamma = extract(u);
    std::ostringstream os;
    write_boundary_csv(gamma, os);
    CHECK(os.str().rfind("t,x,orientation,side,quad_coeff\n", 0) == 0);
    CHECK(os.str().find("spatial") != std::string::npos);
}

TEST_SUITE_END();
