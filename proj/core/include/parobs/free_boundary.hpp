#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "parobs/coefficients.hpp"
#include "parobs/grid.hpp"

namespace parobs {

struct FreeBoundaryPoint {
    double x = 0.0;
    double t = 0.0;
    enum class Orientation { Spatial, Temporal } orientation = Orientation::Spatial;
    /// +1 when u grows toward +x (spatial) or +t (temporal), else -1.
    int side = +1;
    /// Fitted coefficient of u = q (x - x0)^2 at spatial transitions;
    /// NaN at temporal ones.
    double quad_coeff = 0.0;
};

struct FreeBoundarySet {
    std::vector<FreeBoundaryPoint> points;   // sorted by (t, x), deduplicated

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
};

/// Contact threshold 0.25 * (delta / max a) * h^2: the quadratic
/// non-degeneracy scale below which a nodal value counts as zero.
double default_zero_tol(const CoefficientSet* coeffs, const GridSpec& grid);

/// Locate the discrete free boundary: per time slice, zero/positive
/// transitions in x localized by a quadratic fit on the three nearest
/// positive nodes; per space column, transitions in t localized linearly
/// from the two nearest positive nodes. An entirely zero or entirely
/// positive field yields an empty set.
FreeBoundarySet extract(const Field& u, const CoefficientSet* coeffs = nullptr,
                        std::optional<double> zero_tol = {});

struct UtJump {
    double sup = 0.0;
    double inf = 0.0;
    double jump = 0.0;
    int nodes = 0;   // stencil-clean nodes inspected
};

/// sup/inf/jump of the discrete u_t over the parabolic box Q_r(P0),
/// excluding a band of width (h, tau) around the free boundary where the
/// backward stencil straddles the kink. `gamma` defaults to extract(u).
UtJump ut_jump(const Field& u, const DerivedFields& d, double x0, double t0, double r,
               const FreeBoundarySet* gamma = nullptr);

struct LiminfCheck {
    std::vector<double> radii;
    std::vector<double> inf_ut;
    double tol_pos = 0.0;
    bool pass = false;
};

/// inf of u_t over a shrinking ladder of parabolic boxes at P0; passes when
/// the final value is <= tol_pos (default 10 (h + tau)).
LiminfCheck liminf_ut_check(const Field& u, const DerivedFields& d,
                            const FreeBoundaryPoint& p0, std::vector<double> radii,
                            const FreeBoundarySet* gamma = nullptr,
                            std::optional<double> tol_pos = {});

/// Boundary dump: `t,x,orientation,side,quad_coeff`.
void write_boundary_csv(const FreeBoundarySet& gamma, std::ostream& os);

} // namespace parobs
