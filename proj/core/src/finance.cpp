#include "parobs/finance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "parobs/csv.hpp"

namespace parobs {

double european_put(double s, double K, double r, double sigma, double tau) {
    if (tau <= 0.0) return std::max(0.0, K - s);
    const double vol = sigma * std::sqrt(tau);
    const double d1 = (std::log(s / K) + (r + 0.5 * sigma * sigma) * tau) / vol;
    const double d2 = d1 - vol;
    auto norm_cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
    return K * std::exp(-r * tau) * norm_cdf(-d2) - s * norm_cdf(-d1);
}

namespace {

/// Reference American put solve in p-coordinates on a wide box: PSOR with
/// the payoff as obstacle, European value on the far OTM edge. Returns the
/// premium u = p - psi.
Field reference_premium(const PutScenario& scn, const GridSpec& wide) {
    CoefficientSet coeffs;
    coeffs.a = Expr::constant(0.5 * scn.sigma * scn.sigma);
    coeffs.b = Expr::constant(scn.r - 0.5 * scn.sigma * scn.sigma);
    coeffs.c = Expr::constant(-scn.r);
    coeffs.f = Expr::constant(0.0);   // homogeneous equation in p
    coeffs.delta = 0.0;

    auto payoff = [&](double y) { return std::max(0.0, scn.K - std::exp(y)); };

    Field p(wide);
    std::vector<double> prev(wide.nx), interior(wide.nx - 2), obstacle(wide.nx - 2);
    for (int i = 0; i < wide.nx; ++i) p.at(i, 0) = payoff(wide.x(i));
    for (int k = 0; k < wide.nx - 2; ++k) obstacle[k] = payoff(wide.x(k + 1));

    for (int n = 0; n + 1 < wide.nt; ++n) {
        const double tau_next = wide.t(n + 1);
        const double bl = payoff(wide.x_min);   // deep ITM: exercised
        const double br = european_put(std::exp(wide.x_max), scn.K, scn.r, scn.sigma, tau_next);

        auto s = p.slice(n);
        std::copy(s.begin(), s.end(), prev.begin());
        TimeStepSystem sys =
            assemble_step(coeffs, wide, prev, n, scn.solver.theta, bl, br);
        std::copy(prev.begin() + 1, prev.end() - 1, interior.begin());
        PsorResult res = psor_solve(sys, scn.solver, interior, obstacle);

        p.at(0, n + 1) = bl;
        for (int k = 0; k < sys.size(); ++k) p.at(k + 1, n + 1) = res.solution[k];
        p.at(wide.nx - 1, n + 1) = br;
    }

    Field u(wide);
    for (int n = 0; n < wide.nt; ++n)
        for (int i = 0; i < wide.nx; ++i)
            u.at(i, n) = std::max(0.0, p(i, n) - payoff(wide.x(i)));
    u.set_nonnegative(true);
    return u;
}

} // namespace

PutObstacleProblem to_obstacle(const PutScenario& scn) {
    if (!(scn.K > 0.0) || !(scn.sigma > 0.0) || !(scn.T > 0.0))
        throw ValidationError("put scenario requires K > 0, sigma > 0, T > 0");
    if (scn.r == 0.0)
        throw ValidationError(
            "r = 0 is rejected: f = rK vanishes and the non-degeneracy hypothesis "
            "f >= delta > 0 fails on any box");
    if (scn.r < 0.0) throw ValidationError("put scenario requires r >= 0");
    if (!(scn.s_min > 0.0) || !(scn.s_min < scn.K * (1.0 - scn.margin)))
        throw ValidationError("put scenario requires 0 < s_min < K (1 - margin)");

    PutObstacleProblem out;
    out.coeffs.a = Expr::constant(0.5 * scn.sigma * scn.sigma);
    out.coeffs.b = Expr::constant(scn.r - 0.5 * scn.sigma * scn.sigma);
    out.coeffs.c = Expr::constant(-scn.r);
    out.coeffs.f = Expr::constant(scn.r * scn.K);
    out.coeffs.delta = 0.5 * scn.r * scn.K;

    const double y_min = std::log(scn.s_min);
    const double y_max = std::log(scn.K * (1.0 - scn.margin));
    out.grid = GridSpec(y_min, y_max, 0.0, scn.T, scn.nx, scn.nt);

    // reference solve on the wide box, matching the working resolution
    const double y_wide = std::log(scn.K) + scn.wide_mult * scn.sigma * std::sqrt(scn.T);
    const double h = out.grid.dx();
    const int wide_nx = static_cast<int>(std::ceil((y_wide - y_min) / h)) + 1;
    out.wide_grid = GridSpec(y_min, y_min + (wide_nx - 1) * h, 0.0, scn.T, wide_nx, scn.nt);
    out.reference_u = std::make_shared<const Field>(reference_premium(scn, out.wide_grid));

    out.initial = [](double) { return 0.0; };
    out.left = [](double) { return 0.0; };
    std::shared_ptr<const Field> ref = out.reference_u;
    const double edge = out.grid.x_max;
    out.right = [ref, edge](double t) { return std::max(0.0, sample(*ref, edge, t)); };
    return out;
}

ExerciseBoundaryReport exercise_boundary_report(const PutScenario& scn, double jump_radius) {
    PutObstacleProblem ob = to_obstacle(scn);
    SolveStats stats;
    Field u = solve_parabolic(ob.coeffs, ob.grid, ob.initial, ob.left, ob.right, scn.solver,
                              &stats);
    const DerivedFields d = derived_fields(u);
    FreeBoundarySet gamma = extract(u, &ob.coeffs);

    ExerciseBoundaryReport rep(std::move(u));

    // one boundary location per time slice: the spatial transition
    const GridSpec& g = rep.u.grid();
    for (const auto& p : gamma.points) {
        if (p.orientation != FreeBoundaryPoint::Orientation::Spatial) continue;
        ExerciseBoundaryReport::Row row;
        row.tau = p.t;
        row.s_star = std::exp(p.x);
        row.ut_jump = std::numeric_limits<double>::quiet_NaN();
        try {
            row.ut_jump = ut_jump(rep.u, d, p.x, p.t, jump_radius, &gamma).jump;
            rep.max_jump = std::max(rep.max_jump, row.ut_jump);
        } catch (const AdmissibilityError&) {
            // window leaves the box near tau = 0 or tau = T
        }
        rep.rows.push_back(row);
    }
    std::sort(rep.rows.begin(), rep.rows.end(),
              [](const auto& a, const auto& b) { return a.tau < b.tau; });

    // monotonicity of s*(tau): reported, not assumed
    rep.boundary_monotone = true;
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        const double rise = rep.rows[k].s_star - rep.rows[k - 1].s_star;
        if (rise > 0.0) {
            rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, rise);
            if (rise > 2.0 * (std::exp(g.dx()) - 1.0) * rep.rows[k].s_star)
                rep.boundary_monotone = false;
        }
    }

    rep.perpetual_level = 2.0 * scn.r * scn.K / (2.0 * scn.r + scn.sigma * scn.sigma);
    if (!rep.rows.empty()) {
        rep.long_maturity_level = rep.rows.back().s_star;
        rep.rel_gap_perpetual =
            std::abs(rep.long_maturity_level - rep.perpetual_level) / rep.perpetual_level;
    }

    double min_ut = std::numeric_limits<double>::infinity();
    for (int n = 1; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i) min_ut = std::min(min_ut, d.ut(i, n));
    rep.min_ut = min_ut;
    rep.gamma = std::move(gamma);
    return rep;
}

void write_exercise_csv(const ExerciseBoundaryReport& rep, std::ostream& os) {
    os << "tau,s_star,ut_jump\n";
    for (const auto& row : rep.rows)
        csv::write_row(os, {row.tau, row.s_star, row.ut_jump});
}

} // namespace parobs
