#include <doctest.h>

#include <cmath>

#include "parobs/classifier.hpp"
#include "parobs/closed_forms.hpp"

using namespace parobs;

namespace {

Field wide_field(const ClosedForm& form, int nx = 1921, int nt = 141) {
    const GridSpec g(-12.0, 12.0, -1.3, 0.1, nx, nt);
    return sample_closed_form(form, g);
}

ClassifyOptions closed_form_options() {
    ClassifyOptions opts;
    opts.epsilons = {0.3, 0.2, 0.1};
    opts.radii = {0.4, 0.2};
    opts.refine_factor = 2;
    opts.ref_box = GridSpec(-6.0, 6.0, -1.25, 0.05, 361, 53);
    return opts;
}

FreeBoundaryPoint make_point(double x, double t) {
    FreeBoundaryPoint p;
    p.x = x;
    p.t = t;
    return p;
}

} // namespace

TEST_SUITE_BEGIN("classifier");

TEST_CASE("calibrated energies keep the factor-2 dichotomy") {
    const Calibration& cal = calibration();
    CHECK(cal.e_regular == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cal.e_singular == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cal.e_regular / cal.e_singular == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("normalize_at") {
    SUBCASE("unit coefficients: the identity transformation") {
        const GridSpec g(-2.0, 2.0, -1.0, 0.5, 161, 61);
        const Field u = sample_closed_form(ClosedForm::v_plus(), g);
        const NormalizedField nf = normalize_at(u, CoefficientSet::unit(), {0.0, 0.0});
        CHECK(nf.a0 == doctest::Approx(1.0));
        CHECK(nf.f0 == doctest::Approx(1.0));
        CHECK(nf.drift_bound <= 1e-12);
        for (double x : {-1.0, 0.3, 1.5})
            CHECK(sample(nf.u, x, -0.5) ==
                  doctest::Approx(eval_closed_form(ClosedForm::v_plus(), x, -0.5))
                      .epsilon(1e-10));
    }

    SUBCASE("a = 4, f = 2, u = 2 v_plus(x/2, t) normalizes back to v_plus") {
        // u(x,t) = 2 v_plus(x/2, t) satisfies 4 u_xx - u_t = 2 on {u > 0}
        const GridSpec g(-4.0, 4.0, -1.0, 0.5, 321, 61);
        Field u(g);
        for (int n = 0; n < g.nt; ++n)
            for (int i = 0; i < g.nx; ++i)
                u.at(i, n) = 2.0 * eval_closed_form(ClosedForm::v_plus(), g.x(i) / 2.0, g.t(n));
        u.set_nonnegative(true);

        CoefficientSet c = CoefficientSet::unit();
        c.a = Expr::constant(4.0);
        c.f = Expr::constant(2.0);
        const NormalizedField nf = normalize_at(u, c, {0.0, 0.0});
        CHECK(nf.a0 == doctest::Approx(4.0));
        CHECK(nf.f0 == doctest::Approx(2.0));
        for (double x : {-1.0, 0.5, 1.2})
            CHECK(sample(nf.u, x, -0.25) ==
                  doctest::Approx(eval_closed_form(ClosedForm::v_plus(), x, -0.25))
                      .epsilon(1e-9));
    }

    SUBCASE("variable a records a drift bound proportional to its modulus") {
        const GridSpec g(-2.0, 2.0, -1.0, 0.5, 161, 61);
        const Field u = sample_closed_form(ClosedForm::v_plus(), g);
        CoefficientSet c = CoefficientSet::unit();
        c.a = parse_expression("1 + 0.1*x");
        c.delta = 0.5;
        const NormalizedField nf = normalize_at(u, c, {0.0, 0.0});
        CHECK(nf.a0 == doctest::Approx(1.0));
        CHECK(nf.drift_bound > 0.0);
        CHECK(nf.drift_bound < 0.5);   // 0.1 * box reach * |uxx| <= 0.2-ish
    }
}

TEST_CASE("normalized coefficient sets pull back to the unit model at the origin") {
    CoefficientSet c;
    c.a = parse_expression("1 + 0.1*x");
    c.b = parse_expression("0.1");
    c.c = parse_expression("-0.2");
    c.f = parse_expression("1 + 0.1*t");
    c.delta = 0.5;
    const CoefficientSet n = normalized_coefficients(c, {0.5, -0.25});
    CHECK(n.a(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.f(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // pullback identity at a displaced point
    const double a0 = c.a(0.5, -0.25);
    CHECK(n.a(1.0, 0.1) ==
          doctest::Approx(c.a(0.5 + std::sqrt(a0) * 1.0, -0.25 + 0.1) / a0).epsilon(1e-12));
}

TEST_CASE("classification of the closed-form boundary points") {
    const CoefficientSet unit = CoefficientSet::unit();
    const ClassifyOptions opts = closed_form_options();

    SUBCASE("v_plus at the origin is regular") {
        const Field u = wide_field(ClosedForm::v_plus());
        const PointDiagnosis d = classify_point(u, unit, make_point(0.0, 0.0), opts);
        CHECK(d.label == PointDiagnosis::Label::Regular);
        CHECK(d.e0 == doctest::Approx(0.5).epsilon(5e-3));
        CHECK(d.liminf_ok);
        REQUIRE_FALSE(d.ladder.empty());
        CHECK(d.ladder.back().match.label == "v_plus");
    }

    SUBCASE("max(0,-t) is singular with m_hat near -1") {
        const Field u = wide_field(ClosedForm::v_minus_one());
        const PointDiagnosis d = classify_point(u, unit, make_point(0.3, 0.0), opts);
        CHECK(d.label == PointDiagnosis::Label::Singular);
        REQUIRE(d.m_hat.has_value());
        CHECK(*d.m_hat == doctest::Approx(-1.0).epsilon(0.05));
        CHECK(d.m_ut_probe == doctest::Approx(-1.0).epsilon(0.05));
        CHECK(d.phi_monotone);
    }

    SUBCASE("v_zero is singular with m_hat near 0") {
        const Field u = wide_field(ClosedForm::v_zero());
        const PointDiagnosis d = classify_point(u, unit, make_point(0.0, -0.4), opts);
        CHECK(d.label == PointDiagnosis::Label::Singular);
        REQUIRE(d.m_hat.has_value());
        CHECK(std::abs(*d.m_hat) <= 0.05);
        CHECK(std::abs(d.m_ut_probe) <= 0.05);
    }

    SUBCASE("labels are stable under grid refinement") {
        for (int scale : {1, 2}) {
            const Field u = wide_field(ClosedForm::v_plus(), 960 * scale + 1, 70 * scale + 1);
            const PointDiagnosis d = classify_point(u, unit, make_point(0.0, 0.0), opts);
            CHECK(d.label == PointDiagnosis::Label::Regular);
        }
    }
}

TEST_CASE("smooth-fit report on the counterexample") {
    const GridSpec g(-1.0, 1.0, -1.0, 1.0, 101, 201);
    const Field u = sample_closed_form(ClosedForm::v_minus_one(), g);
    const DerivedFields d = derived_fields(u);
    const FreeBoundarySet gamma = extract(u);
    const SmoothFitReport rep = smoothfit_report(u, d, gamma, {0.4, 0.2});

    // the jump lives on the slice at t = 0 only
    CHECK(rep.global_max_jump == doctest::Approx(1.0).epsilon(1e-6));
    int bad = 0;
    for (const auto& [slice, jump] : rep.slice_max_jump)
        if (jump > rep.theta_jump) ++bad;
    CHECK(bad <= 2);
    CHECK(rep.bad_slice_fraction <= 2.0 / g.nt);
    CHECK_FALSE(rep.ut_nonnegative);   // u_t = -1 below the kink
}

TEST_CASE("smooth-fit report on v_zero: all jumps vanish, monotone flag set") {
    const GridSpec g(-1.0, 1.0, -1.0, 1.0, 101, 101);
    const Field u = sample_closed_form(ClosedForm::v_zero(), g);
    const DerivedFields d = derived_fields(u);
    const FreeBoundarySet gamma = extract(u);
    const SmoothFitReport rep = smoothfit_report(u, d, gamma, {0.4, 0.2});
    CHECK(rep.global_max_jump <= 1e-10);
    CHECK(rep.bad_slice_fraction == 0.0);
    CHECK(rep.ut_nonnegative);
}

TEST_CASE("counterexample bad-slice fraction halves as nt doubles") {
    auto fraction = [](int nt) {
        const GridSpec g(-1.0, 1.0, -1.0, 1.0, 101, nt);
        const Field u = sample_closed_form(ClosedForm::v_minus_one(), g);
        const DerivedFields d = derived_fields(u);
        const FreeBoundarySet gamma = extract(u);
        return smoothfit_report(u, d, gamma, {0.4, 0.2}).bad_slice_fraction;
    };
    const double f1 = fraction(101);
    const double f2 = fraction(201);
    CHECK(f1 > 0.0);
    CHECK(f2 <= 0.6 * f1);
}

TEST_SUITE_END();
