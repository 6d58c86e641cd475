#include "parobs/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "parobs/closed_forms.hpp"
#include "parobs/csv.hpp"

namespace parobs {

double heat_kernel(double x, double t) {
    if (!(t < 0.0)) throw EvalError("heat kernel requires t < 0");
    const double s = -t;
    return std::exp(-x * x / (4.0 * s)) / (2.0 * std::sqrt(std::numbers::pi * s));
}

double scaling_operator(const Field& u, const DerivedFields& d, double x, double t) {
    const double uv = sample(u, x, t);
    const double uxv = sample(d.ux, x, t);
    const double utv = sample(d.ut, x, t);
    return -2.0 * uv + x * uxv + 2.0 * t * utv;
}

namespace {

/// Composite Simpson over [a,b] with panels aligned to the grid cells of
/// width `cell` anchored at `anchor` (integrand kinks live on cell edges).
/// Each panel starts at 4 subintervals and the whole rule is doubled until
/// the change is below tol.
double integrate_cells(const std::function<double(double)>& f, double a, double b, double anchor,
                       double cell, double tol) {
    if (b <= a) return 0.0;

    std::vector<double> edges;
    edges.push_back(a);
    const long k0 = static_cast<long>(std::ceil((a - anchor) / cell - 1e-12));
    for (long k = k0; anchor + k * cell < b - 1e-12 * (1.0 + std::abs(b)); ++k) {
        const double e = anchor + k * cell;
        if (e > a + 1e-12 * (1.0 + std::abs(a))) edges.push_back(e);
    }
    edges.push_back(b);

    auto simpson = [&](int per_cell) {
        double total = 0.0;
        for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
            const double lo = edges[j], hi = edges[j + 1];
            const double hstep = (hi - lo) / per_cell;
            double acc = f(lo) + f(hi);
            for (int i = 1; i < per_cell; ++i)
                acc += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * hstep);
            total += acc * hstep / 3.0;
        }
        return total;
    };

    double prev = simpson(4);
    for (int per_cell = 8; per_cell <= 64; per_cell *= 2) {
        const double cur = simpson(per_cell);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

struct Slab {
    double radius;      // half-width integrated
    double t_abs;       // absolute field time of the slice
    double tail_mass;   // Gaussian mass beyond the slab
};

Slab admissible_slab(const GridSpec& g, Point p0, double t) {
    if (!(t < 0.0)) throw EvalError("energy offsets must satisfy t < 0");
    const double t_abs = p0.t + t;
    if (t_abs < g.t_min || t_abs > g.t_max) {
        const double max_abs_t = p0.t - g.t_min;
        std::ostringstream os;
        os << "slab time " << t_abs << " outside box [" << g.t_min << ", " << g.t_max << "]";
        throw AdmissibilityError(os.str(), std::max(0.0, max_abs_t));
    }
    const double reach = std::min(p0.x - g.x_min, g.x_max - p0.x);
    if (reach <= 2.0 * g.dx())
        throw AdmissibilityError("base point too close to the lateral boundary", 0.0);

    const double s = -t;
    Slab slab;
    slab.t_abs = t_abs;
    slab.radius = std::min(reach, 8.0 * std::sqrt(2.0 * s));
    slab.tail_mass = std::erfc(slab.radius / (2.0 * std::sqrt(s)));
    return slab;
}

constexpr double kQuadTol = 1e-11;

} // namespace

EnergyValue energy(const Field& u, const DerivedFields& d, Point p0, double t) {
    const GridSpec& g = u.grid();
    const Slab slab = admissible_slab(g, p0, t);
    const double s = -t;

    double max_poly = 0.0;
    auto integrand = [&](double xi) {
        const double x_abs = p0.x + xi;
        const double uv = sample(u, x_abs, slab.t_abs);
        const double uxv = sample(d.ux, x_abs, slab.t_abs);
        const double poly = (uxv * uxv + 2.0 * uv) / s - (uv * uv) / (s * s);
        max_poly = std::max(max_poly, std::abs(poly));
        return poly * heat_kernel(xi, t);
    };

    EnergyValue out;
    out.radius = slab.radius;
    out.value = integrate_cells(integrand, -slab.radius, slab.radius, g.x_min - p0.x, g.dx(),
                                kQuadTol);
    out.tail_bound = max_poly * slab.tail_mass;
    return out;
}

EnergyValue l2_norm_lu(const Field& u, const DerivedFields& d, Point p0, double t) {
    const GridSpec& g = u.grid();
    const Slab slab = admissible_slab(g, p0, t);

    double max_poly = 0.0;
    auto integrand = [&](double xi) {
        const double x_abs = p0.x + xi;
        const double uv = sample(u, x_abs, slab.t_abs);
        const double uxv = sample(d.ux, x_abs, slab.t_abs);
        const double utv = sample(d.ut, x_abs, slab.t_abs);
        const double lu = -2.0 * uv + xi * uxv + 2.0 * t * utv;
        max_poly = std::max(max_poly, lu * lu);
        return lu * lu * heat_kernel(xi, t);
    };

    EnergyValue out;
    out.radius = slab.radius;
    out.value = integrate_cells(integrand, -slab.radius, slab.radius, g.x_min - p0.x, g.dx(),
                                kQuadTol);
    out.tail_bound = max_poly * slab.tail_mass;
    return out;
}

EnergyValue phi(const Field& u, Point p0, double m, double t) {
    const GridSpec& g = u.grid();
    const Slab slab = admissible_slab(g, p0, t);
    const ClosedForm vm = ClosedForm::v_m(m);

    double max_poly = 0.0;
    auto integrand = [&](double xi) {
        const double uv = sample(u, p0.x + xi, slab.t_abs);
        const double diff = uv - eval_closed_form(vm, xi, t);
        const double poly = diff * diff / (t * t);
        max_poly = std::max(max_poly, poly);
        return poly * heat_kernel(xi, t);
    };

    EnergyValue out;
    out.radius = slab.radius;
    out.value = integrate_cells(integrand, -slab.radius, slab.radius, g.x_min - p0.x, g.dx(),
                                kQuadTol);
    out.tail_bound = max_poly * slab.tail_mass;
    return out;
}

EnergyTrace energy_trace(const Field& u, const DerivedFields& d, Point p0,
                         std::vector<double> t_ladder, std::vector<double> phi_ms) {
    std::sort(t_ladder.begin(), t_ladder.end());   // increasing toward 0-
    EnergyTrace trace;
    trace.base = p0;
    trace.phi_ms = phi_ms;

    for (double t : t_ladder) {
        EnergyTrace::Record rec;
        rec.t = t;
        const EnergyValue e = energy(u, d, p0, t);
        rec.energy = e.value;
        rec.energy_tail = e.tail_bound;
        rec.l_norm = l2_norm_lu(u, d, p0, t).value;
        for (double m : phi_ms) rec.phi.push_back(phi(u, p0, m, t).value);
        trace.records.push_back(std::move(rec));
    }

    if (trace.records.size() < 3)
        throw AdmissibilityError("energy trace needs at least 3 admissible offsets",
                                 static_cast<double>(trace.records.size()));

    // Aitken extrapolation of the last three values toward t -> 0-
    const std::size_t n = trace.records.size();
    const double e1 = trace.records[n - 3].energy;
    const double e2 = trace.records[n - 2].energy;
    const double e3 = trace.records[n - 1].energy;
    const double denom = e1 - 2.0 * e2 + e3;
    if (std::abs(denom) > 1e-14 * (1.0 + std::abs(e3))) {
        const double aitken = e3 - (e3 - e2) * (e3 - e2) / denom;
        // reject wild extrapolations from non-geometric residuals
        trace.e0 = std::abs(aitken - e3) < 2.0 * std::abs(e3 - e2) + 1e-6 ? aitken : e3;
    } else {
        trace.e0 = e3;
    }
    return trace;
}

double energy_derivative_residual(const Field& u, const DerivedFields& d, Point p0, double t,
                                  double dt) {
    const double e_plus = energy(u, d, p0, t + dt).value;
    const double e_minus = energy(u, d, p0, t - dt).value;
    const double lhs = (e_plus - e_minus) / (2.0 * dt);
    const double s = -t;
    const double rhs = -l2_norm_lu(u, d, p0, t).value / (2.0 * s * s * s);
    return std::abs(lhs - rhs);
}

void write_trace_csv(const EnergyTrace& trace, std::ostream& os) {
    os << "t,E,Lnorm";
    for (double m : trace.phi_ms) os << ",phi_" << m;
    os << '\n';
    for (const auto& rec : trace.records) {
        os << csv::format(rec.t) << ',' << csv::format(rec.energy) << ','
           << csv::format(rec.l_norm);
        for (double p : rec.phi) os << ',' << csv::format(p);
        os << '\n';
    }
}

} // namespace parobs
