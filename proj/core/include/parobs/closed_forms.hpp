#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parobs/grid.hpp"

namespace parobs {

/// Global solutions of the constant-coefficient model equation
/// uxx - ut = 1_{u>0}: the half-space solutions v_plus / v_minus and the
/// one-parameter family v_m, m in [-1,0], with v_{-1}(x,t) = max(0,-t)
/// and v_0(x,t) = x^2/2.
struct ClosedForm {
    enum class Kind { VPlus, VMinus, VM };
    Kind kind = Kind::VPlus;
    double m = 0.0;   // only meaningful for VM

    static ClosedForm v_plus() { return {Kind::VPlus, 0.0}; }
    static ClosedForm v_minus() { return {Kind::VMinus, 0.0}; }
    static ClosedForm v_zero() { return {Kind::VM, 0.0}; }
    static ClosedForm v_minus_one() { return {Kind::VM, -1.0}; }
    /// The introduction's discontinuous-u_t example is v_{-1}.
    static ClosedForm counterexample() { return v_minus_one(); }
    static ClosedForm v_m(double m);

    /// Accepts "v_plus", "v_minus", "v_zero", "v_minus_one",
    /// "counterexample", and "v_m(<number>)".
    static ClosedForm from_name(const std::string& name);
    std::string name() const;
};

/// The t > 0 branch of v_m in the similarity variable xi = |x|/sqrt(t):
/// u = t * V(xi) with V'' + (xi/2) V' - V = 1 on {V > 0}, V(xi_m) = 0,
/// V'(xi_m) = 0, and V ~ (1+m) xi^2/2 + m at infinity. The positive set
/// for t > 0 is {xi > xi_m}, i.e. {t < C_m x^2} with C_m = 1/xi_m^2.
struct SelfSimilarProfile {
    double m = 0.0;
    double xi_m = 0.0;    // +inf for m = -1 (empty t > 0 positive set)
    double C_m = 0.0;     // 1/xi_m^2; 0 for m = -1, +inf for m = 0
    double xi_max = 0.0;

    std::vector<double> xi;   // uniform table on [xi_m, xi_max]
    std::vector<double> V;
    std::vector<double> Vp;

    double asymptote_coeff() const { return 0.5 * (1.0 + m); }
    double asymptote_const() const { return m; }

    /// V at xi: 0 below xi_m, cubic Hermite on the table, asymptotic
    /// quadratic beyond xi_max.
    double eval(double xi) const;
    double eval_derivative(double xi) const;

    /// Max defect of a per-interval re-integration of the table
    /// (consistency of the stored values with the ODE).
    double table_defect = 0.0;
};

/// Shooting construction of the profile: from a trial xi_0 integrate
/// (V,V') = (0,0) outward and bisect xi_0 until the far-field quadratic
/// coefficient matches 1+m within tol. m = -1 returns the degenerate
/// profile (no shooting); m = 0 shoots and lands on xi_m = 0, so the table
/// can be checked against the exact answer xi^2/2.
SelfSimilarProfile solve_profile(double m, double tol = 1e-10);

/// Process-wide profile cache; concurrent requests for the same m compute
/// once. m is keyed to 1e-12 resolution.
const SelfSimilarProfile& profile_for(double m, double tol = 1e-10);

double eval_closed_form(const ClosedForm& form, double x, double t);

/// Nodal samples of the closed form on a grid (non-negative by
/// construction).
Field sample_closed_form(const ClosedForm& form, const GridSpec& grid);

/// Euclidean distance from (x,t) to the analytic free boundary of the form.
double analytic_boundary_distance(const ClosedForm& form, double x, double t);

/// Max over interior nodes, at distance > 2h from the analytic free
/// boundary, of |uxx - ut - 1_{u>0}| computed from nodal samples with the
/// standard derived-field stencils (a = f = 1, b = c = 0).
double residual_on_grid(const ClosedForm& form, const GridSpec& grid);

/// Profile table dump: comment header `# m=..., C_m=..., xi_m=...` then
/// `xi,V,Vp` rows.
void write_profile_csv(const SelfSimilarProfile& profile, std::ostream& os);

} // namespace parobs
