#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parobs/coefficients.hpp"
#include "parobs/energetics.hpp"
#include "parobs/grid.hpp"
#include "parobs/lcp.hpp"

namespace parobs {

/// The parabolic rescaling u^eps(x,t) = u(x0 + eps x, t0 + eps^2 t)/eps^2
/// sampled onto the reference box. Throws AdmissibilityError (carrying the
/// largest usable eps) when the image leaves the source box.
Field rescale(const Field& u, Point p0, double eps, const GridSpec& ref_box);

/// Largest eps whose ref_box image stays inside u's box at P0.
double max_rescale_eps(const Field& u, Point p0, const GridSpec& ref_box);

/// Re-solve the obstacle problem on the eps-image of ref_box around P0 at
/// `factor` times the parent resolution, with initial/boundary data sampled
/// from u. Supplies the resolution a pure interpolation rescale lacks.
Field refine_local(const CoefficientSet& coeffs, const Field& u, Point p0, double eps,
                   int factor, const GridSpec& ref_box, const SolveConfig& cfg = {});

/// int_{t<0} int |Lu|^2 G dx dt over the reference box; zero iff the field
/// is (discretely) parabolically 2-homogeneous on t < 0.
double homogeneity_defect(const Field& u_ref, const DerivedFields& d);

/// Default wide reference box for blow-up analysis.
GridSpec default_reference_box();

struct ProfileMatch {
    std::string label;     // "v_plus", "v_minus" or "v_m"
    double m_hat = 0.0;    // meaningful only for "v_m"
    double distance = 0.0; // normalized L2(G) distance at the matching time
};

/// Nearest member of {v_plus, v_minus} U {v_m} in the t-normalized L2(G)
/// metric at t_match (101-point m grid, golden-section refined). The field
/// must be centered (its own origin is the blow-up point) and not
/// identically zero.
ProfileMatch match_profile(const Field& u0, double t_match = -1.0);

struct BlowupLadder {
    Point base;
    GridSpec ref_box = default_reference_box();
    struct Entry {
        double eps;
        double defect;
        ProfileMatch match;
    };
    std::vector<Entry> entries;     // eps decreasing
    std::vector<Field> fields;      // rescaled fields, same order
};

/// Full ladder: per eps, optionally refine locally (factor > 1 and coeffs
/// given), rescale to the reference box, and record the homogeneity defect
/// and best profile match.
BlowupLadder blowup_ladder(const CoefficientSet* coeffs, const Field& u, Point p0,
                           std::vector<double> epsilons, const GridSpec& ref_box,
                           int refine_factor = 1, const SolveConfig& cfg = {},
                           double t_match = -1.0);

/// Ladder dump: `eps,defect,label,m_hat,distance`.
void write_ladder_csv(const BlowupLadder& ladder, std::ostream& os);
void write_ladder_entries_csv(const std::vector<BlowupLadder::Entry>& entries,
                              std::ostream& os);

} // namespace parobs
