#include "parobs/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include "parobs/closed_forms.hpp"
#include "parobs/csv.hpp"

namespace parobs {

const Calibration& calibration() {
    static Calibration cal;
    static std::once_flag flag;
    std::call_once(flag, [] {
        // wide box so the Gaussian slab at t = -1 is untruncated
        const GridSpec box(-12.0, 12.0, -1.05, -0.95, 4801, 11);
        const Point origin{0.0, 0.0};
        {
            const Field u = sample_closed_form(ClosedForm::v_plus(), box);
            const DerivedFields d = derived_fields(u);
            cal.e_regular = energy(u, d, origin, -1.0).value;
        }
        {
            const Field u = sample_closed_form(ClosedForm::v_zero(), box);
            const DerivedFields d = derived_fields(u);
            cal.e_singular = energy(u, d, origin, -1.0).value;
        }
    });
    return cal;
}

NormalizedField normalize_at(const Field& u, const CoefficientSet& coeffs, Point p0) {
    const GridSpec& g = u.grid();
    if (!g.contains(p0.x, p0.t))
        throw AdmissibilityError("normalize_at: P0 outside the box", 0.0);

    const double a0 = coeffs.a(p0.x, p0.t);
    const double f0 = coeffs.f(p0.x, p0.t);
    if (!(a0 >= coeffs.delta) || !(f0 >= coeffs.delta))
        throw ValidationError("normalize_at: a(P0) or f(P0) below delta");
    const double alpha = std::sqrt(a0);

    const double half = std::min(p0.x - g.x_min, g.x_max - p0.x) / alpha;
    if (half <= 4.0 * g.dx() / alpha)
        throw AdmissibilityError("normalize_at: admissible box too small", half);

    const double h_n = g.dx() / alpha;
    const int nx = 2 * static_cast<int>(std::floor(half / h_n)) + 1;
    const double half_snap = (nx - 1) / 2 * h_n;
    const GridSpec ng(-half_snap, half_snap, g.t_min - p0.t, g.t_max - p0.t, nx, g.nt);

    NormalizedField nf{Field(ng), a0, f0, 0.0, p0};
    const bool clip = u.nonnegative();
    for (int n = 0; n < ng.nt; ++n) {
        const double t_src = p0.t + ng.t(n);
        for (int i = 0; i < ng.nx; ++i) {
            double v = sample(u, p0.x + alpha * ng.x(i), t_src) / f0;
            if (clip) v = std::max(0.0, v);
            nf.u.at(i, n) = v;
        }
    }
    nf.u.set_nonnegative(clip);

    // drift bound of the frozen-coefficient error over the normalized box:
    // |(a0-a) uxx - b ux - c u + (f-f0)| / f0, coefficients subsampled
    const DerivedFields du = derived_fields(u);
    double drift = 0.0;
    const int sx = std::max(1, g.nx / 48), st = std::max(1, g.nt / 48);
    for (int n = 0; n < g.nt; n += st) {
        for (int i = 0; i < g.nx; i += sx) {
            const double x = g.x(i), t = g.t(n);
            if (std::abs(x - p0.x) > alpha * half) continue;
            const double term = std::abs(a0 - coeffs.a(x, t)) * std::abs(du.uxx(i, n)) +
                                std::abs(coeffs.b(x, t)) * std::abs(du.ux(i, n)) +
                                std::abs(coeffs.c(x, t)) * std::abs(u(i, n)) +
                                std::abs(coeffs.f(x, t) - f0);
            drift = std::max(drift, term / f0);
        }
    }
    nf.drift_bound = drift;
    return nf;
}

CoefficientSet normalized_coefficients(const CoefficientSet& coeffs, Point p0) {
    const double a0 = coeffs.a(p0.x, p0.t);
    const double f0 = coeffs.f(p0.x, p0.t);
    const double alpha = std::sqrt(a0);

    const Expr xmap = Expr::constant(p0.x) + Expr::constant(alpha) * Expr::var_x();
    const Expr tmap = Expr::constant(p0.t) + Expr::var_t();

    CoefficientSet out;
    out.a = substitute(coeffs.a, xmap, tmap) / Expr::constant(a0);
    out.b = substitute(coeffs.b, xmap, tmap) / Expr::constant(alpha);
    out.c = substitute(coeffs.c, xmap, tmap);
    out.f = substitute(coeffs.f, xmap, tmap) / Expr::constant(f0);
    out.delta = coeffs.delta / std::max(a0, f0);
    return out;
}

std::string PointDiagnosis::label_name() const {
    switch (label) {
        case Label::Regular: return "regular";
        case Label::Singular: return "singular";
        case Label::Unresolved: return "unresolved";
    }
    return "?";
}

namespace {

/// Geometric ladder of negative offsets fitting both the Gaussian slab and
/// the box history at the normalized origin.
std::vector<double> trace_ladder(const GridSpec& g, int count) {
    const double half = std::min(-g.x_min, g.x_max);
    const double by_slab = (half / (8.0 * std::sqrt(2.0))) * (half / (8.0 * std::sqrt(2.0)));
    const double by_history = 0.95 * (-g.t_min);
    const double t_deep = std::min(by_slab, by_history);
    const double t_shallow_floor = 3.0 * g.dt();

    std::vector<double> ladder;
    double t = t_deep;
    for (int k = 0; k < count; ++k) {
        if (t < t_shallow_floor) break;
        ladder.push_back(-t);
        t *= 0.5;
    }
    while (ladder.size() < 3 && !ladder.empty())
        ladder.push_back(ladder.back() * 0.5);
    return ladder;
}

double golden_min_phi(const Field& u, Point origin, double t_small, double lo, double hi) {
    auto f = [&](double m) { return phi(u, origin, m, t_small).value; };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-4; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    double best = 0.5 * (lo + hi);
    // compare against the interval endpoints: the minimizer may sit on the
    // family boundary (m = -1 or m = 0)
    for (double cand : {-1.0, 0.0})
        if (cand >= lo - 1e-9 && cand <= hi + 1e-9 && f(cand) < f(best)) best = cand;
    return best;
}

} // namespace

PointDiagnosis classify_point(const Field& u, const CoefficientSet& coeffs,
                              const FreeBoundaryPoint& p0, const ClassifyOptions& opts) {
    PointDiagnosis diag;
    diag.point = p0;
    const Point point{p0.x, p0.t};

    NormalizedField nf = normalize_at(u, coeffs, point);
    diag.drift_bound = nf.drift_bound;
    if (nf.drift_bound > 0.05) diag.flags.push_back("coefficient-drift");
    const CoefficientSet ncoeffs = normalized_coefficients(coeffs, point);
    const DerivedFields nd = derived_fields(nf.u);
    const Point origin{0.0, 0.0};

    // blow-up ladder (refined re-solves when a factor is configured)
    std::vector<double> usable;
    const double eps_cap = max_rescale_eps(nf.u, origin, opts.ref_box);
    for (double e : opts.epsilons)
        if (e <= eps_cap) usable.push_back(e);
    std::optional<BlowupLadder> ladder;
    if (!usable.empty()) {
        ladder.emplace(blowup_ladder(&ncoeffs, nf.u, origin, usable, opts.ref_box,
                                     opts.refine_factor, opts.solver));
        diag.ladder = ladder->entries;
    } else {
        diag.flags.push_back("no-admissible-eps");
    }

    // energy trace toward 0- and the extrapolated E(0^-)
    const std::vector<double> ladder_t = trace_ladder(nf.u.grid(), opts.trace_points);
    if (ladder_t.size() < 3) {
        diag.flags.push_back("trace-too-short");
        diag.label = PointDiagnosis::Label::Unresolved;
    } else {
        const EnergyTrace trace = energy_trace(nf.u, nd, origin, ladder_t);
        diag.e0 = trace.e0;

        const Calibration& cal = calibration();
        const double mid = 0.5 * (cal.e_regular + cal.e_singular);
        if (std::abs(diag.e0 - mid) <= 0.10 * mid) {
            diag.label = PointDiagnosis::Label::Unresolved;
            diag.flags.push_back("energy-ambiguous");
        } else if (std::abs(diag.e0 - cal.e_regular) < std::abs(diag.e0 - cal.e_singular)) {
            diag.label = PointDiagnosis::Label::Regular;
        } else {
            diag.label = PointDiagnosis::Label::Singular;
        }

        if (diag.label == PointDiagnosis::Label::Singular) {
            const double t_small = trace.records.back().t;
            const double m_phi = golden_min_phi(nf.u, origin, t_small, -1.0, 0.0);
            diag.m_hat = m_phi;

            // one-sided u_t probe below t0: the t<0 branch of v_m has
            // u_t = m, so the average over clean positive nodes estimates m
            const GridSpec& ng = nf.u.grid();
            const double r_probe =
                std::min({0.5, std::min(-ng.x_min, ng.x_max) / 2.0, std::sqrt(-ng.t_min) / 2.0});
            double sum = 0.0;
            int cnt = 0;
            const double band_t = 2.0 * ng.dt();
            const double ztol = default_zero_tol(nullptr, ng);
            for (int n = 1; n < ng.nt; ++n) {
                const double t = ng.t(n);
                if (t > -band_t || t < -r_probe * r_probe) continue;
                for (int i = 0; i < ng.nx; ++i) {
                    if (std::abs(ng.x(i)) > r_probe) continue;
                    if (nf.u(i, n) <= ztol) continue;
                    sum += nd.ut(i, n);
                    ++cnt;
                }
            }
            diag.m_ut_probe = cnt > 0 ? sum / cnt : 0.0;
            if (std::abs(diag.m_ut_probe - m_phi) > 0.1)
                diag.flags.push_back("m-estimates-disagree");

            // Phi^{v_m_hat} along the trace: non-increasing toward 0-
            double prev = std::numeric_limits<double>::infinity();
            diag.phi_monotone = true;
            for (const auto& rec : trace.records) {
                const double value = phi(nf.u, origin, *diag.m_hat, rec.t).value;
                if (value > prev + opts.phi_monotone_tol) diag.phi_monotone = false;
                prev = value;
            }
        }
    }

    // label stability across the ladder (regular points should match a
    // half-space solution once the defect is small)
    if (ladder && diag.label == PointDiagnosis::Label::Regular) {
        const auto& last = ladder->entries.back();
        if (last.defect < 0.01 && last.match.label == "v_m")
            diag.flags.push_back("ladder-label-mismatch");
    }

    // physical-coordinates diagnostics at P0
    const DerivedFields du = derived_fields(u);
    FreeBoundarySet local_gamma;
    const FreeBoundarySet* gamma = opts.gamma;
    if (!gamma) {
        local_gamma = extract(u, &coeffs);
        gamma = &local_gamma;
    }
    for (double r : opts.radii) {
        try {
            const UtJump j = ut_jump(u, du, p0.x, p0.t, r, gamma);
            diag.ut_jumps.emplace_back(r, j.jump);
        } catch (const AdmissibilityError&) {
            // radius does not fit this point's surroundings; skip it
        }
    }
    try {
        diag.liminf_ok = liminf_ut_check(u, du, p0, opts.radii, gamma).pass;
    } catch (const AdmissibilityError&) {
        diag.liminf_ok = false;
        diag.flags.push_back("liminf-window-unfit");
    }
    return diag;
}

SmoothFitReport smoothfit_report(const Field& u, const DerivedFields& d,
                                 const FreeBoundarySet& gamma, std::vector<double> radii,
                                 double theta_jump, double ut_tol) {
    const GridSpec& g = u.grid();
    SmoothFitReport rep;
    rep.theta_jump = theta_jump;
    rep.total_slices = g.nt;
    std::sort(radii.begin(), radii.end(), std::greater<>());

    for (const auto& p : gamma.points) {
        SmoothFitReport::PointJumps pj;
        pj.point = p;
        for (double r : radii) {
            try {
                const UtJump j = ut_jump(u, d, p.x, p.t, r, &gamma);
                pj.jumps.emplace_back(r, j.jump);
            } catch (const AdmissibilityError&) {
            }
        }
        if (pj.jumps.empty()) {
            ++rep.skipped_points;
            continue;
        }
        const double finest = pj.jumps.back().second;
        const int slice = static_cast<int>(std::lround((p.t - g.t_min) / g.dt()));
        auto [it, inserted] = rep.slice_max_jump.emplace(slice, finest);
        if (!inserted) it->second = std::max(it->second, finest);
        rep.global_max_jump = std::max(rep.global_max_jump, finest);
        rep.points.push_back(std::move(pj));
    }

    int bad = 0;
    for (const auto& [slice, jump] : rep.slice_max_jump)
        if (jump > theta_jump) ++bad;
    rep.bad_slice_fraction = static_cast<double>(bad) / g.nt;

    double min_ut = std::numeric_limits<double>::infinity();
    for (int n = 1; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i) min_ut = std::min(min_ut, d.ut(i, n));
    rep.min_ut = min_ut;
    rep.ut_nonnegative = min_ut >= -ut_tol;
    return rep;
}

void write_diagnosis_csv(const std::vector<PointDiagnosis>& rows, std::ostream& os) {
    std::size_t max_jumps = 0;
    for (const auto& r : rows) max_jumps = std::max(max_jumps, r.ut_jumps.size());

    os << "t,x,E0,label,m_hat";
    for (std::size_t k = 0; k < max_jumps; ++k) os << ",jump_r" << k + 1;
    os << ",flags\n";

    for (const auto& r : rows) {
        os << csv::format(r.point.t) << ',' << csv::format(r.point.x) << ','
           << csv::format(r.e0) << ',' << r.label_name() << ',';
        if (r.m_hat) os << csv::format(*r.m_hat);
        for (std::size_t k = 0; k < max_jumps; ++k) {
            os << ',';
            if (k < r.ut_jumps.size()) os << csv::format(r.ut_jumps[k].second);
        }
        os << ',';
        for (std::size_t k = 0; k < r.flags.size(); ++k) {
            if (k) os << ';';
            os << r.flags[k];
        }
        os << '\n';
    }
}

} // namespace parobs
