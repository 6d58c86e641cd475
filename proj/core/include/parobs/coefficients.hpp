#pragma once

#include <string>
#include <vector>

#include "parobs/expr.hpp"
#include "parobs/grid.hpp"

namespace parobs {

/// The coefficient functions of the operator a*uxx + b*ux + c*u - ut and
/// the right-hand side f, with the non-degeneracy constant delta
/// (a >= delta and f >= delta are required on the working box).
struct CoefficientSet {
    Expr a;
    Expr b;
    Expr c;
    Expr f;
    double delta = 1.0;

    /// Constant-coefficient set a=f=1, b=c=0, delta=1 (the normalized
    /// whole-space model equation).
    static CoefficientSet unit();
};

struct ValidationReport {
    bool pass = false;

    double min_a = 0.0;
    double min_f = 0.0;
    /// Largest |divided difference| of each coefficient over grid edges
    /// (Lipschitz surrogate for the smoothness hypothesis).
    double max_diff_a = 0.0;
    double max_diff_b = 0.0;
    double max_diff_c = 0.0;
    double max_diff_f = 0.0;
    double max_c = 0.0;   // enters the time step restriction

    struct Failure {
        int i;
        int n;
        std::string what;
    };
    std::vector<Failure> failures;   // evaluation failures with their node

    std::string summary() const;
};

/// Check the coefficient hypotheses in testable form on the grid nodes:
/// min a >= delta, min f >= delta, and finite bounded differences.
ValidationReport validate(const CoefficientSet& coeffs, const GridSpec& grid);

} // namespace parobs
