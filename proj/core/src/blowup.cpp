#include "parobs/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "parobs/closed_forms.hpp"
#include "parobs/csv.hpp"
#include "parobs/energetics.hpp"

namespace parobs {

double max_rescale_eps(const Field& u, Point p0, const GridSpec& ref_box) {
    const GridSpec& g = u.grid();
    double eps = std::numeric_limits<double>::infinity();
    auto bound = [&](double room, double extent) {
        if (extent > 0.0) eps = std::min(eps, room / extent);
    };
    bound(p0.x - g.x_min, -ref_box.x_min);   // left reach (ref_box.x_min < 0)
    bound(g.x_max - p0.x, ref_box.x_max);
    if (ref_box.t_min < 0.0) {
        const double room = p0.t - g.t_min;
        if (room <= 0.0) return 0.0;
        eps = std::min(eps, std::sqrt(room / -ref_box.t_min));
    }
    if (ref_box.t_max > 0.0) {
        const double room = g.t_max - p0.t;
        if (room <= 0.0) return 0.0;
        eps = std::min(eps, std::sqrt(room / ref_box.t_max));
    }
    return eps;
}

Field rescale(const Field& u, Point p0, double eps, const GridSpec& ref_box) {
    const double eps_max = max_rescale_eps(u, p0, ref_box);
    if (eps > eps_max) {
        std::ostringstream os;
        os << "rescale image leaves the box at eps = " << eps << " (max admissible " << eps_max
           << ")";
        throw AdmissibilityError(os.str(), eps_max);
    }

    Field out(ref_box);
    const double e2 = eps * eps;
    for (int n = 0; n < ref_box.nt; ++n) {
        const double t_src = p0.t + e2 * ref_box.t(n);
        for (int i = 0; i < ref_box.nx; ++i) {
            out.at(i, n) = sample(u, p0.x + eps * ref_box.x(i), t_src) / e2;
        }
    }
    return out;
}

Field refine_local(const CoefficientSet& coeffs, const Field& u, Point p0, double eps,
                   int factor, const GridSpec& ref_box, const SolveConfig& cfg) {
    if (factor < 1) throw std::invalid_argument("refine_local factor must be >= 1");
    const double eps_max = max_rescale_eps(u, p0, ref_box);
    if (eps > eps_max)
        throw AdmissibilityError("refine_local window leaves the box", eps_max);

    const GridSpec& g = u.grid();
    const double x_lo = p0.x + eps * ref_box.x_min;
    const double x_hi = p0.x + eps * ref_box.x_max;
    const double t_lo = p0.t + eps * eps * ref_box.t_min;
    const double t_hi = p0.t + eps * eps * ref_box.t_max;

    const double h_fine = g.dx() / factor;
    const double tau_fine = g.dt() / factor;
    const int nx = std::max(5, static_cast<int>(std::lround((x_hi - x_lo) / h_fine)) + 1);
    const int nt = std::max(3, static_cast<int>(std::lround((t_hi - t_lo) / tau_fine)) + 1);
    const GridSpec fine(x_lo, x_hi, t_lo, t_hi, nx, nt);

    // Dirichlet data sampled from the parent; interpolation overshoot near
    // the contact kink is clipped when the parent is a certified solution.
    const bool clip = u.nonnegative();
    auto clipped = [clip](double v) { return clip ? std::max(0.0, v) : v; };
    SpatialData initial = [&u, &fine, clipped](double x) {
        return clipped(sample(u, x, fine.t_min));
    };
    BoundaryData left = [&u, x_lo, clipped](double t) { return clipped(sample(u, x_lo, t)); };
    BoundaryData right = [&u, x_hi, clipped](double t) { return clipped(sample(u, x_hi, t)); };

    return solve_parabolic(coeffs, fine, initial, left, right, cfg);
}

double homogeneity_defect(const Field& u_ref, const DerivedFields& d) {
    const GridSpec& g = u_ref.grid();
    if (!(g.t_min < 0.0)) throw AdmissibilityError("reference box has no t < 0 part", 0.0);
    const double tau = g.dt();

    // x-integral of |Lu|^2 G per slice time, then composite Simpson over
    // the t-cells that sit strictly below 0
    auto slice_integral = [&](double t) {
        const double radius = std::min(std::min(-g.x_min, g.x_max),
                                       8.0 * std::sqrt(2.0 * (-t)));
        auto f = [&](double x) {
            const double lu = scaling_operator(u_ref, d, x, t);
            return lu * lu * heat_kernel(x, t);
        };
        // reuse the cell-aligned rule through a local Simpson: the
        // integrand is smooth except on grid lines
        const int cells = std::max(8, static_cast<int>(std::ceil(2.0 * radius / g.dx())));
        const int nsub = 2 * cells;
        const double lo = -radius;
        const double hstep = 2.0 * radius / nsub;
        double acc = f(lo) + f(radius);
        for (int i = 1; i < nsub; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * hstep);
        return acc * hstep / 3.0;
    };

    // t-panels: grid cells [t_n, t_{n+1}] with t_{n+1} <= -tau/2
    double total = 0.0;
    for (int n = 0; n + 1 < g.nt; ++n) {
        const double t0 = g.t(n);
        const double t1 = g.t(n + 1);
        if (t1 > -tau / 2.0) break;
        const double mid = 0.5 * (t0 + t1);
        total += (t1 - t0) / 6.0 *
                 (slice_integral(t0) + 4.0 * slice_integral(mid) + slice_integral(t1));
    }
    return total;
}

namespace {

/// t-normalized L2(G) distance between a centered field and a closed form
/// at offset t_match: sqrt( int (u - v)^2 G / t^2 dx ).
double form_distance(const Field& u0, const ClosedForm& form, double t_match) {
    const GridSpec& g = u0.grid();
    const double radius =
        std::min(std::min(-g.x_min, g.x_max), 8.0 * std::sqrt(2.0 * (-t_match)));
    const int cells = std::max(16, static_cast<int>(std::ceil(2.0 * radius / g.dx())));
    const int nsub = 2 * cells;
    const double lo = -radius;
    const double hstep = 2.0 * radius / nsub;
    auto f = [&](double x) {
        const double diff = sample(u0, x, t_match) - eval_closed_form(form, x, t_match);
        return diff * diff * heat_kernel(x, t_match);
    };
    double acc = f(lo) + f(radius);
    for (int i = 1; i < nsub; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * hstep);
    const double integral = acc * hstep / 3.0;
    return std::sqrt(std::max(0.0, integral) / (t_match * t_match));
}

} // namespace

ProfileMatch match_profile(const Field& u0, double t_match) {
    const GridSpec& g = u0.grid();
    if (!(t_match < 0.0) || t_match < g.t_min)
        throw AdmissibilityError("t_match must be negative and inside the reference box",
                                 g.t_min);
    if (u0.max_abs() < 1e-12)
        throw ValidationError("match_profile: field is identically zero (excluded blow-up)");

    ProfileMatch best;
    best.distance = std::numeric_limits<double>::infinity();

    auto consider = [&](const std::string& label, double m, double dist) {
        if (dist < best.distance) {
            best.label = label;
            best.m_hat = m;
            best.distance = dist;
        }
    };

    consider("v_plus", 0.0, form_distance(u0, ClosedForm::v_plus(), t_match));
    consider("v_minus", 0.0, form_distance(u0, ClosedForm::v_minus(), t_match));

    // family scan on a 101-point grid, then golden-section refinement
    auto family_distance = [&](double m) {
        return form_distance(u0, ClosedForm::v_m(m), t_match);
    };
    double best_m = -1.0;
    double best_md = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 100; ++k) {
        const double m = -1.0 + 0.01 * k;
        const double dm = family_distance(m);
        if (dm < best_md) {
            best_md = dm;
            best_m = m;
        }
    }
    double lo = std::max(-1.0, best_m - 0.01);
    double hi = std::min(0.0, best_m + 0.01);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = family_distance(x1), f2 = family_distance(x2);
    for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = family_distance(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = family_distance(x2);
        }
    }
    const double m_refined = 0.5 * (lo + hi);
    const double d_refined = family_distance(m_refined);
    if (d_refined < best_md) {
        best_md = d_refined;
        best_m = m_refined;
    }
    if (best_md < best.distance) {
        best.label = "v_m";
        best.m_hat = best_m;
        best.distance = best_md;
    }
    return best;
}

GridSpec default_reference_box() { return GridSpec(-6.0, 6.0, -1.25, 0.25, 241, 121); }

BlowupLadder blowup_ladder(const CoefficientSet* coeffs, const Field& u, Point p0,
                           std::vector<double> epsilons, const GridSpec& ref_box,
                           int refine_factor, const SolveConfig& cfg, double t_match) {
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
    BlowupLadder ladder;
    ladder.base = p0;
    ladder.ref_box = ref_box;

    for (double eps : epsilons) {
        const Field* source = &u;
        std::optional<Field> refined;
        if (refine_factor > 1 && coeffs) {
            refined.emplace(refine_local(*coeffs, u, p0, eps, refine_factor, ref_box, cfg));
            source = &*refined;
        }
        Field ueps = rescale(*source, p0, eps, ref_box);
        const DerivedFields d = derived_fields(ueps);

        BlowupLadder::Entry entry;
        entry.eps = eps;
        entry.defect = homogeneity_defect(ueps, d);
        entry.match = match_profile(ueps, t_match);
        ladder.entries.push_back(entry);
        ladder.fields.push_back(std::move(ueps));
    }
    return ladder;
}

void write_ladder_entries_csv(const std::vector<BlowupLadder::Entry>& entries,
                              std::ostream& os) {
    os << "eps,defect,label,m_hat,distance\n";
    for (const auto& e : entries) {
        os << csv::format(e.eps) << ',' << csv::format(e.defect) << ',' << e.match.label << ',';
        if (e.match.label == "v_m")
            os << csv::format(e.match.m_hat);
        os << ',' << csv::format(e.match.distance) << '\n';
    }
}

void write_ladder_csv(const BlowupLadder& ladder, std::ostream& os) {
    write_ladder_entries_csv(ladder.entries, os);
}

} // namespace parobs
