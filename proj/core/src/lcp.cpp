#include "parobs/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace parobs {

std::vector<double> TimeStepSystem::residual(std::span<const double> u) const {
    const int m = size();
    std::vector<double> r(m);
    for (int i = 0; i < m; ++i) {
        double v = diag[i] * u[i];
        if (i > 0) v += sub[i] * u[i - 1];
        if (i + 1 < m) v += super[i] * u[i + 1];
        r[i] = v - q[i];
    }
    return r;
}

TimeStepSystem assemble_step(const CoefficientSet& coeffs, const GridSpec& grid,
                             std::span<const double> u_prev, int n, double theta,
                             double bc_left_next, double bc_right_next) {
    const int nx = grid.nx;
    const int m = nx - 2;
    const double h = grid.dx();
    const double tau = grid.dt();
    const double t_eval = grid.t_min + (n + theta) * tau;

    TimeStepSystem sys;
    sys.sub.assign(m, 0.0);
    sys.diag.assign(m, 0.0);
    sys.super.assign(m, 0.0);
    sys.q.assign(m, 0.0);
    sys.time_level = n;
    sys.theta = theta;
    sys.tau = tau;
    sys.h = h;

    for (int k = 0; k < m; ++k) {
        const int i = k + 1;
        const double xi = grid.x(i);
        const double a = coeffs.a(xi, t_eval);
        const double b = coeffs.b(xi, t_eval);
        const double c = coeffs.c(xi, t_eval);
        const double f = coeffs.f(xi, t_eval);

        // L_h row: a*D2 + b*D1 + c, with D1 upwinded when convection
        // dominates the cell (keeps off-diagonals of A non-positive).
        double lw = a / (h * h);
        double ld = -2.0 * a / (h * h) + c;
        double le = a / (h * h);
        const double peclet = std::abs(b) * h / (2.0 * a);
        if (peclet <= 1.0) {
            lw -= b / (2.0 * h);
            le += b / (2.0 * h);
        } else if (b > 0.0) {
            ld -= b / h;
            le += b / h;
        } else {
            ld += b / h;
            lw -= b / h;
        }

        sys.sub[k] = -theta * lw;
        sys.diag[k] = 1.0 / tau - theta * ld;
        sys.super[k] = -theta * le;

        // strict diagonal dominance: row sum of A equals 1/tau - theta*c
        const double dominance = 1.0 / tau - theta * c;
        if (!(dominance > 0.0)) {
            std::ostringstream os;
            const double required = 1.0 / (theta * c);
            os << "time step too large for an M-matrix at node i=" << i << " (x=" << xi
               << ", t=" << t_eval << "): 1/tau - theta*c = " << dominance
               << " <= 0; requires tau < " << required;
            throw AssemblyError(os.str(), i, required);
        }

        // q = u_prev/tau + (1-theta)*L_h u_prev - f
        const double lhu = lw * u_prev[i - 1] + ld * u_prev[i] + le * u_prev[i + 1];
        sys.q[k] = u_prev[i] / tau + (1.0 - theta) * lhu - f;

        // fold the Dirichlet values of the new level into q
        if (k == 0) {
            sys.q[k] -= sys.sub[k] * bc_left_next;
            sys.sub[k] = 0.0;
        }
        if (k == m - 1) {
            sys.q[k] -= sys.super[k] * bc_right_next;
            sys.super[k] = 0.0;
        }
    }
    return sys;
}

PsorResult psor_solve(const TimeStepSystem& sys, const SolveConfig& cfg,
                      std::span<const double> initial_guess,
                      std::span<const double> lower_bound) {
    const int m = sys.size();
    auto lo = [&](int i) { return lower_bound.empty() ? 0.0 : lower_bound[i]; };

    std::vector<double> u(m);
    for (int i = 0; i < m; ++i)
        u[i] = initial_guess.empty() ? lo(i) : std::max(initial_guess[i], lo(i));

    for (int it = 1; it <= cfg.max_iter; ++it) {
        for (int i = 0; i < m; ++i) {
            double rhs = sys.q[i];
            if (i > 0) rhs -= sys.sub[i] * u[i - 1];
            if (i + 1 < m) rhs -= sys.super[i] * u[i + 1];
            const double y = rhs / sys.diag[i];
            u[i] = std::max(lo(i), u[i] + cfg.omega * (y - u[i]));
        }

        auto r = sys.residual(u);
        double err = 0.0;
        for (int i = 0; i < m; ++i)
            err = std::max(err, std::abs(std::min(u[i] - lo(i), r[i])));
        if (err <= cfg.tol) return {std::move(u), it, err};
    }

    auto r = sys.residual(u);
    double err = 0.0;
    for (int i = 0; i < m; ++i)
        err = std::max(err, std::abs(std::min(u[i] - lo(i), r[i])));
    std::ostringstream os;
    os << "PSOR did not reach tol " << cfg.tol << " in " << cfg.max_iter
       << " sweeps (residual " << err << ")";
    throw ConvergenceError(os.str(), err, sys.time_level);
}

BoundaryData boundary_from_expr(const Expr& e, double x_edge) {
    return [e, x_edge](double t) { return e(x_edge, t); };
}

namespace {

double clamp_data(double v, double tol, SolveStats* stats, const char* what, double coord,
                  double tcoord) {
    if (v >= 0.0) return v;
    if (v >= -tol) {
        if (stats) ++stats->clamped_data_values;
        return 0.0;
    }
    std::ostringstream os;
    os << what << " data negative (" << v << ") at (x=" << coord << ", t=" << tcoord << ")";
    throw ValidationError(os.str());
}

} // namespace

Field solve_parabolic(const CoefficientSet& coeffs, const GridSpec& grid,
                      const SpatialData& initial, const BoundaryData& bc_left,
                      const BoundaryData& bc_right, const SolveConfig& cfg, SolveStats* stats) {
    ValidationReport report = validate(coeffs, grid);
    if (!report.pass)
        throw ValidationError("coefficient hypotheses fail on the grid: " + report.summary());

    Field u(grid);
    for (int i = 0; i < grid.nx; ++i)
        u.at(i, 0) = clamp_data(initial(grid.x(i)), cfg.tol, stats, "initial", grid.x(i),
                                grid.t_min);
    u.at(0, 0) = clamp_data(bc_left(grid.t_min), cfg.tol, stats, "left boundary", grid.x_min,
                            grid.t_min);
    u.at(grid.nx - 1, 0) = clamp_data(bc_right(grid.t_min), cfg.tol, stats, "right boundary",
                                      grid.x_max, grid.t_min);

    std::vector<double> prev(grid.nx), interior(grid.nx - 2);
    for (int n = 0; n + 1 < grid.nt; ++n) {
        const double t_next = grid.t(n + 1);
        const double bl = clamp_data(bc_left(t_next), cfg.tol, stats, "left boundary",
                                     grid.x_min, t_next);
        const double br = clamp_data(bc_right(t_next), cfg.tol, stats, "right boundary",
                                     grid.x_max, t_next);

        auto s = u.slice(n);
        std::copy(s.begin(), s.end(), prev.begin());
        TimeStepSystem sys = assemble_step(coeffs, grid, prev, n, cfg.theta, bl, br);

        std::copy(prev.begin() + 1, prev.end() - 1, interior.begin());
        PsorResult res;
        try {
            res = psor_solve(sys, cfg, interior);
        } catch (const ConvergenceError& e) {
            std::ostringstream os;
            os << "time level " << n + 1 << " (t=" << t_next << "): " << e.what();
            throw ConvergenceError(os.str(), e.residual(), n + 1);
        }
        if (stats) {
            stats->total_psor_iterations += res.iterations;
            stats->max_psor_iterations = std::max(stats->max_psor_iterations, res.iterations);
            stats->max_complementarity_residual =
                std::max(stats->max_complementarity_residual, res.residual);
        }

        u.at(0, n + 1) = bl;
        for (int k = 0; k < sys.size(); ++k) u.at(k + 1, n + 1) = res.solution[k];
        u.at(grid.nx - 1, n + 1) = br;
    }

    u.require_finite();
    u.set_nonnegative(true);
    return u;
}

Field solve_parabolic(const CoefficientSet& coeffs, const GridSpec& grid, const Expr& initial,
                      const Expr& bc_left, const Expr& bc_right, const SolveConfig& cfg,
                      SolveStats* stats) {
    const double t0 = grid.t_min;
    SpatialData init = [&initial, t0](double x) { return initial(x, t0); };
    return solve_parabolic(coeffs, grid, init, boundary_from_expr(bc_left, grid.x_min),
                           boundary_from_expr(bc_right, grid.x_max), cfg, stats);
}

} // namespace parobs
