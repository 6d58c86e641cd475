#include "parobs/closed_forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "parobs/csv.hpp"

namespace parobs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using ProfileState = std::array<double, 2>;   // (V, V')

// V'' = 1 + V - (xi/2) V'
void profile_rhs(const ProfileState& y, ProfileState& dy, double xi) {
    dy[0] = y[1];
    dy[1] = 1.0 + y[0] - 0.5 * xi * y[1];
}

using ErrorStepper = boost::numeric::odeint::runge_kutta_dopri5<ProfileState>;

/// Integrate the profile ODE from (xi_from, y) to xi_to in place.
void integrate_profile(ProfileState& y, double xi_from, double xi_to, double tol) {
    namespace ode = boost::numeric::odeint;
    if (xi_to <= xi_from) return;
    auto stepper = ode::make_controlled<ErrorStepper>(tol, tol);
    double step0 = std::min(1e-3, (xi_to - xi_from) / 8.0);
    ode::integrate_adaptive(stepper, profile_rhs, y, xi_from, xi_to, step0);
}

/// Far-field quadratic coefficient A of V = A (xi^2 + 2) - 1 + (decaying),
/// read off once consecutive checkpoints agree. Returns kappa = 2 A.
double shooting_kappa(double xi0, double ode_tol) {
    ProfileState y{0.0, 0.0};
    double xi = xi0;
    double prev = kInf;
    double checkpoint = std::max(xi0 + 4.0, 12.0);
    for (int k = 0; k < 16; ++k) {
        integrate_profile(y, xi, checkpoint, ode_tol);
        xi = checkpoint;
        const double a = (y[0] + 1.0) / (xi * xi + 2.0);
        if (std::abs(a - prev) < 1e-13 * (1.0 + std::abs(a))) return 2.0 * a;
        prev = a;
        checkpoint += 4.0;
    }
    return 2.0 * prev;   // decaying mode is below roundoff long before this
}

} // namespace

ClosedForm ClosedForm::v_m(double m) {
    if (!(m >= -1.0 && m <= 0.0))
        throw std::invalid_argument("v_m requires m in [-1, 0], got " + std::to_string(m));
    return {Kind::VM, m};
}

ClosedForm ClosedForm::from_name(const std::string& name) {
    if (name == "v_plus") return v_plus();
    if (name == "v_minus") return v_minus();
    if (name == "v_zero" || name == "v_0") return v_zero();
    if (name == "v_minus_one" || name == "counterexample") return v_minus_one();
    if (name.rfind("v_m(", 0) == 0 && name.back() == ')') {
        const std::string arg = name.substr(4, name.size() - 5);
        try {
            return v_m(std::stod(arg));
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("bad v_m argument: '" + arg + "'");
        }
    }
    throw std::invalid_argument("unknown closed form '" + name + "'");
}

std::string ClosedForm::name() const {
    switch (kind) {
        case Kind::VPlus: return "v_plus";
        case Kind::VMinus: return "v_minus";
        case Kind::VM:
            if (m == 0.0) return "v_zero";
            if (m == -1.0) return "v_minus_one";
            {
                std::ostringstream os;
                os << "v_m(" << m << ")";
                return os.str();
            }
    }
    return "?";
}

double SelfSimilarProfile::eval(double x) const {
    if (xi.empty()) return 0.0;   // degenerate m = -1 profile
    if (x <= xi_m) return 0.0;
    if (x >= xi_max) return asymptote_coeff() * x * x + asymptote_const();
    const double dxi = xi[1] - xi[0];
    const auto k = static_cast<std::size_t>((x - xi.front()) / dxi);
    const std::size_t i = std::min(k, xi.size() - 2);
    const double s = (x - xi[i]) / dxi;
    // cubic Hermite with the tabulated derivative
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * V[i] + h10 * dxi * Vp[i] + h01 * V[i + 1] + h11 * dxi * Vp[i + 1];
}

double SelfSimilarProfile::eval_derivative(double x) const {
    if (xi.empty()) return 0.0;
    if (x <= xi_m) return 0.0;
    if (x >= xi_max) return 2.0 * asymptote_coeff() * x;
    const double dxi = xi[1] - xi[0];
    const auto k = static_cast<std::size_t>((x - xi.front()) / dxi);
    const std::size_t i = std::min(k, xi.size() - 2);
    const double s = (x - xi[i]) / dxi;
    const double g00 = 6.0 * s * (s - 1.0);
    const double g10 = (1.0 - s) * (1.0 - 3.0 * s);
    const double g01 = -g00;
    const double g11 = s * (3.0 * s - 2.0);
    return (g00 * V[i] + g01 * V[i + 1]) / dxi + g10 * Vp[i] + g11 * Vp[i + 1];
}

SelfSimilarProfile solve_profile(double m, double tol) {
    if (!(m >= -1.0 && m <= 0.0))
        throw std::invalid_argument("solve_profile requires m in [-1, 0]");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_profile requires tol > 0");

    SelfSimilarProfile p;
    p.m = m;

    if (m == -1.0) {
        // positive set empty for t > 0: the parabola coefficient vanishes
        p.xi_m = kInf;
        p.C_m = 0.0;
        p.xi_max = kInf;
        return p;
    }

    const double ode_tol = std::min(1e-11, tol * 1e-2);
    const double target = 1.0 + m;

    // bracket the shooting parameter: kappa(0) = 1 and kappa decreases
    double lo = 0.0, hi = 0.0;
    double kappa_lo = shooting_kappa(lo, ode_tol);
    double kappa_hi = kappa_lo;
    if (std::abs(kappa_lo - target) > tol) {
        bool bracketed = false;
        for (double trial = 0.5; trial <= 40.0; trial += 0.5) {
            kappa_hi = shooting_kappa(trial, ode_tol);
            hi = trial;
            if (kappa_hi <= target) {
                bracketed = true;
                break;
            }
            lo = trial;
            kappa_lo = kappa_hi;
        }
        if (!bracketed) {
            std::ostringstream os;
            os << "shooting: target coefficient " << target
               << " not bracketed on xi_0 in [0, 40]; kappa range [" << kappa_hi << ", "
               << shooting_kappa(0.0, ode_tol) << "]";
            throw ShootingError(os.str());
        }
        // bisect on xi_0
        double xi0 = lo, kappa = kappa_lo;
        for (int it = 0; it < 200 && std::abs(kappa - target) > tol; ++it) {
            xi0 = 0.5 * (lo + hi);
            kappa = shooting_kappa(xi0, ode_tol);
            if (kappa > target)
                lo = xi0;
            else
                hi = xi0;
            if (hi - lo < 1e-15 * (1.0 + hi)) break;
        }
        if (std::abs(kappa - target) > 10.0 * tol) {
            std::ostringstream os;
            os << "shooting: tolerance not reached for m = " << m << " (|kappa - target| = "
               << std::abs(kappa - target) << ")";
            throw ShootingError(os.str());
        }
        p.xi_m = xi0;
    } else {
        p.xi_m = 0.0;
    }

    p.C_m = p.xi_m > 0.0 ? 1.0 / (p.xi_m * p.xi_m) : kInf;

    // tabulate (V, V') on a uniform grid out to the asymptotic regime
    p.xi_max = std::max(40.0, p.xi_m + 20.0);
    const double dxi = 0.01;
    const auto count = static_cast<std::size_t>(std::ceil((p.xi_max - p.xi_m) / dxi)) + 1;
    p.xi.resize(count);
    p.V.resize(count);
    p.Vp.resize(count);
    ProfileState y{0.0, 0.0};
    double cur = p.xi_m;
    for (std::size_t k = 0; k < count; ++k) {
        const double next = p.xi_m + static_cast<double>(k) * dxi;
        integrate_profile(y, cur, next, ode_tol);
        cur = next;
        p.xi[k] = next;
        p.V[k] = y[0];
        p.Vp[k] = y[1];
    }
    p.xi_max = p.xi.back();

    // re-integration defect over sampled intervals: consistency of the
    // table with the ODE
    double defect = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, count / 64);
    for (std::size_t k = 0; k + 1 < count; k += stride) {
        ProfileState z{p.V[k], p.Vp[k]};
        integrate_profile(z, p.xi[k], p.xi[k + 1], ode_tol * 0.1);
        defect = std::max(defect,
                          std::abs(z[0] - p.V[k + 1]) / (1.0 + std::abs(p.V[k + 1])));
    }
    p.table_defect = defect;
    return p;
}

const SelfSimilarProfile& profile_for(double m, double tol) {
    static std::mutex mutex;
    static std::map<long long, std::shared_ptr<const SelfSimilarProfile>> cache;

    const auto key = static_cast<long long>(std::llround(m * 1e12));
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return *it->second;
    }
    auto fresh = std::make_shared<const SelfSimilarProfile>(solve_profile(m, tol));
    std::lock_guard<std::mutex> lock(mutex);
    auto [it, inserted] = cache.emplace(key, std::move(fresh));
    return *it->second;
}

double eval_closed_form(const ClosedForm& form, double x, double t) {
    switch (form.kind) {
        case ClosedForm::Kind::VPlus: {
            const double xp = std::max(0.0, x);
            return 0.5 * xp * xp;
        }
        case ClosedForm::Kind::VMinus: {
            const double xm = std::max(0.0, -x);
            return 0.5 * xm * xm;
        }
        case ClosedForm::Kind::VM: {
            const double m = form.m;
            if (m == 0.0) return 0.5 * x * x;
            if (m == -1.0) return std::max(0.0, -t);
            if (t <= 0.0) return m * t + 0.5 * (1.0 + m) * x * x;
            const SelfSimilarProfile& p = profile_for(m);
            const double xi = std::abs(x) / std::sqrt(t);
            if (xi <= p.xi_m) return 0.0;
            return t * p.eval(xi);
        }
    }
    throw std::logic_error("unreachable closed form kind");
}

Field sample_closed_form(const ClosedForm& form, const GridSpec& grid) {
    Field u(grid);
    for (int n = 0; n < grid.nt; ++n)
        for (int i = 0; i < grid.nx; ++i)
            u.at(i, n) = eval_closed_form(form, grid.x(i), grid.t(n));
    u.set_nonnegative(true);
    return u;
}

namespace {

/// Polyline of the parabola t = C x^2 used for distance queries, sampled
/// so consecutive points are at most `gap` apart (coarsened when the total
/// arc would exceed the point budget).
struct ParabolaPolyline {
    std::vector<double> px, pt;
    double gap;

    ParabolaPolyline(double C, double x_reach, double t_reach, double requested_gap) {
        const double p_max =
            std::max(x_reach, std::sqrt(std::max(t_reach, 0.0) / C)) + 4.0 * requested_gap;
        const double arc_estimate = p_max * (1.0 + C * p_max);
        gap = std::max(requested_gap, arc_estimate / 2e6);
        double p = 0.0;
        while (p <= p_max) {
            px.push_back(p);
            pt.push_back(C * p * p);
            const double slope = 2.0 * C * p;
            p += gap / std::sqrt(1.0 + slope * slope);
        }
    }

    double distance(double x, double t) const {
        const double ax = std::abs(x);
        const std::size_t n = px.size();
        const std::size_t j0 = static_cast<std::size_t>(
            std::lower_bound(px.begin(), px.end(), ax) - px.begin());
        double best = kInf;
        for (std::size_t j = j0; j < n; ++j) {
            const double dx = px[j] - ax;
            if (dx * dx > best) break;
            const double dt = t - pt[j];
            best = std::min(best, dx * dx + dt * dt);
        }
        for (std::size_t j = j0; j-- > 0;) {
            const double dx = ax - px[j];
            if (dx * dx > best) break;
            const double dt = t - pt[j];
            best = std::min(best, dx * dx + dt * dt);
        }
        return std::sqrt(best);
    }
};

} // namespace

double analytic_boundary_distance(const ClosedForm& form, double x, double t) {
    switch (form.kind) {
        case ClosedForm::Kind::VPlus:
        case ClosedForm::Kind::VMinus: return std::abs(x);
        case ClosedForm::Kind::VM: {
            if (form.m == 0.0) return std::abs(x);
            if (form.m == -1.0) return std::abs(t);
            const SelfSimilarProfile& p = profile_for(form.m);
            ParabolaPolyline line(p.C_m, std::abs(x) + 1.0, std::max(t, 0.0) + 1.0, 1e-3);
            return line.distance(x, t);
        }
    }
    throw std::logic_error("unreachable closed form kind");
}

double residual_on_grid(const ClosedForm& form, const GridSpec& grid) {
    const Field u = sample_closed_form(form, grid);
    const DerivedFields d = derived_fields(u);
    const double h = grid.dx();
    const double band = 2.0 * h;

    // distance oracle per form; the v_m parabola uses a cached polyline
    std::unique_ptr<ParabolaPolyline> line;
    if (form.kind == ClosedForm::Kind::VM && form.m != 0.0 && form.m != -1.0) {
        const SelfSimilarProfile& p = profile_for(form.m);
        line = std::make_unique<ParabolaPolyline>(
            p.C_m, std::max(std::abs(grid.x_min), std::abs(grid.x_max)) + 1.0,
            std::max(grid.t_max, 0.0) + 1.0, std::min(h, band) / 4.0);
    }
    auto clear_of_boundary = [&](double x, double t) {
        // widen the mask by the polyline sampling error so "admissible"
        // always implies a true distance > band
        if (line) return line->distance(x, t) > band + line->gap;
        return analytic_boundary_distance(form, x, t) > band;
    };

    double worst = 0.0;
    for (int n = 1; n < grid.nt; ++n) {
        for (int i = 1; i + 1 < grid.nx; ++i) {
            const double x = grid.x(i);
            const double t = grid.t(n);
            if (!clear_of_boundary(x, t)) continue;
            const double indicator = u(i, n) > 0.0 ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(d.uxx(i, n) - d.ut(i, n) - indicator));
        }
    }
    return worst;
}

void write_profile_csv(const SelfSimilarProfile& p, std::ostream& os) {
    os << "# m=" << csv::format(p.m) << ", C_m=" << csv::format(p.C_m)
       << ", xi_m=" << csv::format(p.xi_m) << "\n";
    os << "xi,V,Vp\n";
    for (std::size_t k = 0; k < p.xi.size(); ++k)
        csv::write_row(os, {p.xi[k], p.V[k], p.Vp[k]});
}

} // namespace parobs
