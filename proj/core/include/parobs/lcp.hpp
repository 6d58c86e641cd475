#pragma once

#include <functional>
#include <span>
#include <vector>

#include "parobs/coefficients.hpp"
#include "parobs/grid.hpp"

namespace parobs {

/// One implicit time step of the discretized obstacle problem, as the
/// linear complementarity problem U >= 0, A U - q >= 0, U^T (A U - q) = 0
/// on the interior nodes. A is tridiagonal and, after assembly under the
/// time step restriction, a strictly diagonally dominant M-matrix.
struct TimeStepSystem {
    std::vector<double> sub;     // A(i, i-1), sub[0] unused (boundary folded into q)
    std::vector<double> diag;    // A(i, i)
    std::vector<double> super;   // A(i, i+1), super[last] unused
    std::vector<double> q;

    int time_level = 0;
    double theta = 1.0;
    double tau = 0.0;
    double h = 0.0;

    int size() const { return static_cast<int>(diag.size()); }

    /// r = A*U - q
    std::vector<double> residual(std::span<const double> u) const;
};

struct SolveConfig {
    double theta = 1.0;     // time scheme parameter in [0.5, 1]
    double omega = 1.5;     // PSOR relaxation in (0, 2)
    double tol = 1e-10;     // complementarity tolerance
    int max_iter = 50000;   // PSOR sweep cap
};

/// Assemble the LCP for the step from time level n to n+1:
/// A = I/tau - theta*L_h, q = u_prev/tau + (1-theta)*L_h u_prev - f, with
/// coefficients and f evaluated at time level n+theta. The first-derivative
/// stencil is central unless the cell Peclet number |b|h/(2a) exceeds 1 at
/// a node, where it switches to first-order upwind. Dirichlet values of the
/// new time level enter q through the first and last interior rows.
/// Throws AssemblyError (offending node, required tau) if strict diagonal
/// dominance fails.
TimeStepSystem assemble_step(const CoefficientSet& coeffs, const GridSpec& grid,
                             std::span<const double> u_prev, int n, double theta,
                             double bc_left_next = 0.0, double bc_right_next = 0.0);

struct PsorResult {
    std::vector<double> solution;
    int iterations = 0;
    double residual = 0.0;   // max |min(U_i - lo_i, r_i)| at exit
};

/// Projected SOR on the system, sweeping ascending indices. `lower_bound`
/// defaults to zero (the obstacle); `initial_guess` defaults to the lower
/// bound. Converged when max_i |min(U_i - lo_i, r_i)| <= cfg.tol.
/// Throws ConvergenceError carrying the last residual at the sweep cap.
PsorResult psor_solve(const TimeStepSystem& sys, const SolveConfig& cfg,
                      std::span<const double> initial_guess = {},
                      std::span<const double> lower_bound = {});

/// Dirichlet data on one edge of the box, as a function of time. Scenario
/// configs provide expressions; resampled data (nested solves, finance
/// reference boundaries) provide tabulated functions.
using BoundaryData = std::function<double(double t)>;
/// Initial data as a function of x.
using SpatialData = std::function<double(double x)>;

BoundaryData boundary_from_expr(const Expr& e, double x_edge);

struct SolveStats {
    int clamped_data_values = 0;   // inputs in [-tol, 0) clamped to the obstacle
    long total_psor_iterations = 0;
    int max_psor_iterations = 0;
    double max_complementarity_residual = 0.0;
};

/// March the obstacle problem forward in time with the theta-scheme + PSOR.
/// Initial and boundary data must be >= 0 at their nodes (values within
/// -cfg.tol are clamped to 0 and counted in stats). The returned field is
/// non-negative everywhere and satisfies the discrete complementarity
/// conditions to cfg.tol at interior nodes; boundary rows are imposed
/// exactly. Throws ValidationError if the coefficients fail their
/// hypotheses on the grid.
Field solve_parabolic(const CoefficientSet& coeffs, const GridSpec& grid,
                      const SpatialData& initial, const BoundaryData& bc_left,
                      const BoundaryData& bc_right, const SolveConfig& cfg = {},
                      SolveStats* stats = nullptr);

/// Expression-data convenience: initial is evaluated as u0(x) at t_min,
/// boundary expressions as functions of t at the respective edge.
Field solve_parabolic(const CoefficientSet& coeffs, const GridSpec& grid, const Expr& initial,
                      const Expr& bc_left, const Expr& bc_right, const SolveConfig& cfg = {},
                      SolveStats* stats = nullptr);

} // namespace parobs
