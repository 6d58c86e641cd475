#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parobs/blowup.hpp"
#include "parobs/coefficients.hpp"
#include "parobs/energetics.hpp"
#include "parobs/free_boundary.hpp"
#include "parobs/grid.hpp"

namespace parobs {

/// Energy values of the two blow-up classes, computed once per process by
/// the same quadrature pipeline the classifier uses (wide-box closed-form
/// fields). The dichotomy says singular/regular is a factor-2 ratio; the
/// absolute normalization is calibration data, not a hard-coded constant.
struct Calibration {
    double e_regular;    // E(-1; v_plus)
    double e_singular;   // E(-1; v_0)
};

const Calibration& calibration();

/// u normalized to the constant-coefficient model form at P0:
/// u~(x,t) = u(x0 + sqrt(a0) x, t0 + t) / f0, so u~_xx - u~_t = 1 on
/// {u~ > 0} up to the recorded coefficient-drift bound.
struct NormalizedField {
    Field u;
    double a0 = 1.0;
    double f0 = 1.0;
    double drift_bound = 0.0;
    Point source_point;
};

NormalizedField normalize_at(const Field& u, const CoefficientSet& coeffs, Point p0);

/// The coefficient set seen in normalized coordinates:
/// a/a0, b/sqrt(a0), c, f/f0 composed with the coordinate map.
CoefficientSet normalized_coefficients(const CoefficientSet& coeffs, Point p0);

struct ClassifyOptions {
    std::vector<double> epsilons{0.4, 0.2, 0.1};
    std::vector<double> radii{0.4, 0.2, 0.1};
    int refine_factor = 4;
    GridSpec ref_box = default_reference_box();
    int trace_points = 4;          // geometric E-trace ladder length
    double phi_monotone_tol = 1e-4;
    SolveConfig solver;
    const FreeBoundarySet* gamma = nullptr;   // reuse an extracted boundary
};

struct PointDiagnosis {
    FreeBoundaryPoint point;
    double e0 = 0.0;   // extrapolated E(0^-) in calibrated units
    enum class Label { Regular, Singular, Unresolved } label = Label::Unresolved;
    std::optional<double> m_hat;    // singular only: argmin Phi
    double m_ut_probe = 0.0;        // one-sided u_t estimate of m
    std::vector<std::pair<double, double>> ut_jumps;   // (radius, jump)
    std::vector<BlowupLadder::Entry> ladder;           // per-eps defect/match
    bool phi_monotone = true;
    bool liminf_ok = false;
    double drift_bound = 0.0;
    std::vector<std::string> flags;

    std::string label_name() const;
};

/// Full pipeline at one boundary point: normalize -> blow-up ladder ->
/// energy trace -> E(0^-) -> dichotomy label; singular points get the two
/// independent m estimates (Phi minimization, one-sided u_t) with a
/// mandatory cross-check. An E0 within 10% of the calibrated midpoint is
/// labelled Unresolved rather than silently guessed.
PointDiagnosis classify_point(const Field& u, const CoefficientSet& coeffs,
                              const FreeBoundaryPoint& p0, const ClassifyOptions& opts = {});

struct SmoothFitReport {
    struct PointJumps {
        FreeBoundaryPoint point;
        std::vector<std::pair<double, double>> jumps;   // (radius, jump)
    };
    std::vector<PointJumps> points;
    std::map<int, double> slice_max_jump;   // time index -> max jump at smallest radius
    double theta_jump = 0.1;
    double bad_slice_fraction = 0.0;        // #slices with max jump > theta over nt
    int total_slices = 0;
    double global_max_jump = 0.0;
    double min_ut = 0.0;
    bool ut_nonnegative = false;            // Theorem-2 hypothesis flag
    int skipped_points = 0;                 // windows that left the box
};

/// Time-derivative continuity measurement over the whole extracted
/// boundary: per-point jump ladders, per-slice maxima, the fraction of bad
/// slices, and the monotone-case flag.
SmoothFitReport smoothfit_report(const Field& u, const DerivedFields& d,
                                 const FreeBoundarySet& gamma, std::vector<double> radii,
                                 double theta_jump = 0.1, double ut_tol = 1e-6);

/// Diagnosis dump: `t,x,E0,label,m_hat,jump_r...,flags`.
void write_diagnosis_csv(const std::vector<PointDiagnosis>& rows, std::ostream& os);

} // namespace parobs
