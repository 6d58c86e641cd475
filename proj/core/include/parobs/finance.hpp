#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "parobs/coefficients.hpp"
#include "parobs/free_boundary.hpp"
#include "parobs/grid.hpp"
#include "parobs/lcp.hpp"

namespace parobs {

/// American put in log-price y = ln s, forward time t = time to maturity.
/// With u = p - psi (price minus payoff) the pricing problem becomes the
/// variable-coefficient obstacle form with constant a = sigma^2/2,
/// b = r - sigma^2/2, c = -r, and f = rK on {s < K}; the working box is
/// truncated to {s <= K (1 - margin)} where f >= delta := rK/2 holds.
struct PutScenario {
    double K = 1.0;
    double r = 0.05;
    double sigma = 0.3;
    double T = 1.0;
    double s_min = 0.15;     // left edge of the working box, in price
    double margin = 0.02;    // right truncation: s_max = K (1 - margin)
    int nx = 401;
    int nt = 801;
    double wide_mult = 5.0;  // right reach of the reference solve, in sigma sqrt(T)
    SolveConfig solver{1.0, 1.5, 1e-10, 50000};
};

/// Black-Scholes European put (closed form).
double european_put(double s, double K, double r, double sigma, double tau);

/// The obstacle form of the scenario. `right` carries the American premium
/// at the truncation edge, produced by a reference solve in p-coordinates
/// on a wide box (no closed form exists for the finite-maturity put).
struct PutObstacleProblem {
    CoefficientSet coeffs;
    GridSpec grid{0.0, 1.0, 0.0, 1.0, 3, 2};        // set by to_obstacle
    SpatialData initial;       // u(.,0) = 0
    BoundaryData left;         // exercise region: u = 0
    BoundaryData right;        // from the reference solve
    std::shared_ptr<const Field> reference_u;       // wide-box premium p - psi
    GridSpec wide_grid{0.0, 1.0, 0.0, 1.0, 3, 2};
};

/// Throws ValidationError for r = 0 (f would vanish and the
/// non-degeneracy hypothesis fails).
PutObstacleProblem to_obstacle(const PutScenario& scn);

struct ExerciseBoundaryReport {
    explicit ExerciseBoundaryReport(Field field) : u(std::move(field)) {}

    struct Row {
        double tau;       // time to maturity
        double s_star;    // exercise boundary in price
        double ut_jump;   // time-derivative jump at the boundary point
    };
    std::vector<Row> rows;

    bool boundary_monotone = false;       // s* non-increasing in tau
    double max_monotonicity_violation = 0.0;
    double perpetual_level = 0.0;         // 2rK / (2r + sigma^2)
    double long_maturity_level = 0.0;     // s* at tau = T
    double rel_gap_perpetual = 0.0;
    double min_ut = 0.0;                  // over the whole box (u_t >= 0 expected)
    double max_jump = 0.0;
    Field u;                              // the truncated-box premium field
    FreeBoundarySet gamma;
};

ExerciseBoundaryReport exercise_boundary_report(const PutScenario& scn,
                                                double jump_radius = 0.1);

/// Boundary dump in financial coordinates: `tau,s_star,ut_jump`.
void write_exercise_csv(const ExerciseBoundaryReport& rep, std::ostream& os);

} // namespace parobs
