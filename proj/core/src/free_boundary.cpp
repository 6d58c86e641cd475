#include "parobs/free_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "parobs/csv.hpp"

namespace parobs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Sub-grid location of a spatial transition from the three nearest
/// positive nodes (x1 < x2 < x3 equally spaced, values u1, u2, u3):
/// for u = q (x - x0)^2 the second difference gives q and the first
/// difference gives x0. Falls back to the cell edge if the fit degenerates.
struct QuadFit {
    double x0;
    double q;
    bool ok;
};

QuadFit fit_quadratic(double x1, double h, double u1, double u2, double u3) {
    const double q = (u1 - 2.0 * u2 + u3) / (2.0 * h * h);
    if (!(q > 0.0)) return {0.0, 0.0, false};
    const double x0 = (x1 + (x1 + h)) / 2.0 - (u2 - u1) / (2.0 * q * h);
    return {x0, q, true};
}

} // namespace

double default_zero_tol(const CoefficientSet* coeffs, const GridSpec& grid) {
    const double h = grid.dx();
    if (!coeffs) return 0.25 * h * h;
    double max_a = 0.0;
    for (int n = 0; n < grid.nt; ++n)
        for (int i = 0; i < grid.nx; ++i)
            max_a = std::max(max_a, coeffs->a(grid.x(i), grid.t(n)));
    return 0.25 * (coeffs->delta / max_a) * h * h;
}

FreeBoundarySet extract(const Field& u, const CoefficientSet* coeffs,
                        std::optional<double> zero_tol) {
    const GridSpec& g = u.grid();
    const double tol = zero_tol ? *zero_tol : default_zero_tol(coeffs, g);
    const double h = g.dx();
    const double tau = g.dt();

    auto is_zero = [&](int i, int n) { return u(i, n) <= tol; };

    std::vector<FreeBoundaryPoint> pts;

    // spatial transitions per time slice
    for (int n = 0; n < g.nt; ++n) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const bool z0 = is_zero(i, n);
            const bool z1 = is_zero(i + 1, n);
            if (z0 == z1) continue;

            FreeBoundaryPoint p;
            p.t = g.t(n);
            p.orientation = FreeBoundaryPoint::Orientation::Spatial;
            p.side = z0 ? +1 : -1;   // positive values on the +x side iff left node is zero
            p.quad_coeff = kNaN;

            // three nearest positive nodes, walking away from the zero side
            const int first = z0 ? i + 1 : i;
            const int step = z0 ? +1 : -1;
            const int i2 = first + step, i3 = first + 2 * step;
            bool fitted = false;
            if (i3 >= 0 && i3 < g.nx && !is_zero(i2, n) && !is_zero(i3, n)) {
                // order the stencil left-to-right for the fit
                const int a = std::min(first, i3);
                const QuadFit fit = fit_quadratic(g.x(a), h, u(a, n), u(a + std::abs(step), n),
                                                  u(a + 2 * std::abs(step), n));
                if (fit.ok && std::abs(fit.x0 - g.x(first)) <= 2.0 * h) {
                    p.x = fit.x0;
                    p.quad_coeff = fit.q;
                    fitted = true;
                }
            }
            if (!fitted) {
                // linear zero crossing between the transition nodes
                const double ua = u(i, n), ub = u(i + 1, n);
                const double w = (ub - ua) != 0.0 ? (tol - ua) / (ub - ua) : 0.5;
                p.x = g.x(i) + std::clamp(w, 0.0, 1.0) * h;
            }
            pts.push_back(p);
        }
    }

    // temporal transitions per space column
    for (int i = 0; i < g.nx; ++i) {
        for (int n = 0; n + 1 < g.nt; ++n) {
            const bool z0 = is_zero(i, n);
            const bool z1 = is_zero(i, n + 1);
            if (z0 == z1) continue;

            FreeBoundaryPoint p;
            p.x = g.x(i);
            p.orientation = FreeBoundaryPoint::Orientation::Temporal;
            p.side = z0 ? +1 : -1;
            p.quad_coeff = kNaN;

            // extrapolate linearly from the two nearest positive nodes
            const int np = z0 ? n + 1 : n;       // positive node of the pair
            const int np2 = z0 ? np + 1 : np - 1; // next node into the positive set
            if (np2 >= 0 && np2 < g.nt && !is_zero(i, np2)) {
                const double u1 = u(i, np);
                const double u2 = u(i, np2);
                const double slope = (u2 - u1) / (g.t(np2) - g.t(np));
                if (slope != 0.0) {
                    const double root = g.t(np) - u1 / slope;
                    p.t = std::clamp(root, std::min(g.t(n), g.t(n + 1)) - tau,
                                     std::max(g.t(n), g.t(n + 1)) + tau);
                } else {
                    p.t = 0.5 * (g.t(n) + g.t(n + 1));
                }
            } else {
                const double ua = u(i, n), ub = u(i, n + 1);
                const double w = (ub - ua) != 0.0 ? (tol - ua) / (ub - ua) : 0.5;
                p.t = g.t(n) + std::clamp(w, 0.0, 1.0) * tau;
            }
            pts.push_back(p);
        }
    }

    // sort by (t, x) and drop near-duplicates, keeping spatial points
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.x != b.x) return a.x < b.x;
        return a.orientation < b.orientation;
    });
    std::vector<FreeBoundaryPoint> out;
    for (const auto& p : pts) {
        bool dup = false;
        for (auto it = out.rbegin(); it != out.rend(); ++it) {
            if (p.t - it->t > tau / 2.0) break;
            if (std::abs(p.x - it->x) <= h / 2.0 && std::abs(p.t - it->t) <= tau / 2.0) {
                if (p.orientation == FreeBoundaryPoint::Orientation::Spatial &&
                    it->orientation == FreeBoundaryPoint::Orientation::Temporal)
                    *it = p;   // prefer the better-localized spatial fit
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(p);
    }

    FreeBoundarySet set;
    set.points = std::move(out);
    return set;
}

namespace {

/// Band test: a node within (h, tau) of some boundary point has a
/// contaminated backward u_t stencil.
struct BandIndex {
    std::vector<FreeBoundaryPoint> by_x;
    double h, tau;

    BandIndex(const FreeBoundarySet& gamma, double h_, double tau_) : h(h_), tau(tau_) {
        by_x = gamma.points;
        std::sort(by_x.begin(), by_x.end(),
                  [](const auto& a, const auto& b) { return a.x < b.x; });
    }

    bool in_band(double x, double t) const {
        auto lo = std::lower_bound(by_x.begin(), by_x.end(), x - h,
                                   [](const FreeBoundaryPoint& p, double v) { return p.x < v; });
        for (auto it = lo; it != by_x.end() && it->x <= x + h; ++it)
            if (std::abs(t - it->t) <= tau) return true;
        return false;
    }
};

} // namespace

UtJump ut_jump(const Field& u, const DerivedFields& d, double x0, double t0, double r,
               const FreeBoundarySet* gamma) {
    const GridSpec& g = u.grid();
    const double h = g.dx();
    const double tau = g.dt();

    const double r_min = 2.0 * std::max(h, std::sqrt(tau));
    if (r < r_min)
        throw AdmissibilityError("ut_jump radius below resolution scale", r_min);
    if (x0 - r < g.x_min || x0 + r > g.x_max || t0 - r * r < g.t_min || t0 + r * r > g.t_max) {
        const double rx = std::min(x0 - g.x_min, g.x_max - x0);
        const double rt = std::sqrt(std::max(0.0, std::min(t0 - g.t_min, g.t_max - t0)));
        throw AdmissibilityError("Q_r(P0) exits the box", std::min(rx, rt));
    }

    FreeBoundarySet local;
    if (!gamma) {
        local = extract(u);
        gamma = &local;
    }
    BandIndex band(*gamma, h, tau);

    UtJump res;
    res.sup = -std::numeric_limits<double>::infinity();
    res.inf = std::numeric_limits<double>::infinity();

    const int i_lo = static_cast<int>(std::ceil((x0 - r - g.x_min) / h - 1e-9));
    const int i_hi = static_cast<int>(std::floor((x0 + r - g.x_min) / h + 1e-9));
    const int n_lo = std::max(1, static_cast<int>(std::ceil((t0 - r * r - g.t_min) / tau - 1e-9)));
    const int n_hi = static_cast<int>(std::floor((t0 + r * r - g.t_min) / tau + 1e-9));

    for (int n = n_lo; n <= std::min(n_hi, g.nt - 1); ++n) {
        for (int i = std::max(0, i_lo); i <= std::min(i_hi, g.nx - 1); ++i) {
            if (band.in_band(g.x(i), g.t(n))) continue;
            const double v = d.ut(i, n);
            res.sup = std::max(res.sup, v);
            res.inf = std::min(res.inf, v);
            ++res.nodes;
        }
    }
    if (res.nodes == 0) {
        res.sup = res.inf = 0.0;
        res.jump = 0.0;
        return res;
    }
    res.jump = res.sup - res.inf;
    return res;
}

LiminfCheck liminf_ut_check(const Field& u, const DerivedFields& d, const FreeBoundaryPoint& p0,
                            std::vector<double> radii, const FreeBoundarySet* gamma,
                            std::optional<double> tol_pos) {
    const GridSpec& g = u.grid();
    LiminfCheck out;
    out.tol_pos = tol_pos ? *tol_pos : 10.0 * (g.dx() + g.dt());
    std::sort(radii.begin(), radii.end(), std::greater<>());
    for (double r : radii) {
        const UtJump j = ut_jump(u, d, p0.x, p0.t, r, gamma);
        out.radii.push_back(r);
        out.inf_ut.push_back(j.nodes > 0 ? j.inf : 0.0);
    }
    out.pass = !out.inf_ut.empty() && out.inf_ut.back() <= out.tol_pos;
    return out;
}

void write_boundary_csv(const FreeBoundarySet& gamma, std::ostream& os) {
    os << "t,x,orientation,side,quad_coeff\n";
    for (const auto& p : gamma.points) {
        os << csv::format(p.t) << ',' << csv::format(p.x) << ','
           << (p.orientation == FreeBoundaryPoint::Orientation::Spatial ? "spatial" : "temporal")
           << ',' << p.side << ',';
        if (std::isnan(p.quad_coeff))
            os << "";
        else
            os << csv::format(p.quad_coeff);
        os << '\n';
    }
}

} // namespace parobs
