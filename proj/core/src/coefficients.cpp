#include "parobs/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace parobs {

CoefficientSet CoefficientSet::unit() {
    return {Expr::constant(1.0), Expr::constant(0.0), Expr::constant(0.0), Expr::constant(1.0),
            1.0};
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << (pass ? "pass" : "FAIL") << ": min a = " << min_a << ", min f = " << min_f;
    os << ", max|Da| = " << max_diff_a << ", max|Db| = " << max_diff_b
       << ", max|Dc| = " << max_diff_c << ", max|Df| = " << max_diff_f;
    for (const auto& fl : failures)
        os << "; eval failure at node (" << fl.i << "," << fl.n << "): " << fl.what;
    return os.str();
}

namespace {

struct NodeValues {
    std::vector<double> v;   // nx*nt, slice-major
    bool ok = true;
};

NodeValues evaluate_on_grid(const Expr& e, const GridSpec& g, const char* name,
                            std::vector<ValidationReport::Failure>& failures) {
    NodeValues out;
    out.v.resize(g.node_count());
    for (int n = 0; n < g.nt; ++n) {
        for (int i = 0; i < g.nx; ++i) {
            double val;
            try {
                val = e(g.x(i), g.t(n));
            } catch (const EvalError& err) {
                failures.push_back({i, n, std::string(name) + ": " + err.what()});
                out.ok = false;
                val = std::numeric_limits<double>::quiet_NaN();
            }
            if (!std::isfinite(val) && out.ok) {
                failures.push_back({i, n, std::string(name) + ": non-finite value"});
                out.ok = false;
            }
            out.v[static_cast<std::size_t>(n) * g.nx + i] = val;
        }
    }
    return out;
}

double max_divided_difference(const std::vector<double>& v, const GridSpec& g) {
    double m = 0.0;
    const double h = g.dx();
    const double tau = g.dt();
    auto at = [&](int i, int n) { return v[static_cast<std::size_t>(n) * g.nx + i]; };
    for (int n = 0; n < g.nt; ++n)
        for (int i = 0; i + 1 < g.nx; ++i)
            m = std::max(m, std::abs(at(i + 1, n) - at(i, n)) / h);
    for (int n = 0; n + 1 < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i)
            m = std::max(m, std::abs(at(i, n + 1) - at(i, n)) / tau);
    return m;
}

} // namespace

ValidationReport validate(const CoefficientSet& coeffs, const GridSpec& grid) {
    ValidationReport r;
    auto va = evaluate_on_grid(coeffs.a, grid, "a", r.failures);
    auto vb = evaluate_on_grid(coeffs.b, grid, "b", r.failures);
    auto vc = evaluate_on_grid(coeffs.c, grid, "c", r.failures);
    auto vf = evaluate_on_grid(coeffs.f, grid, "f", r.failures);

    if (!va.ok || !vb.ok || !vc.ok || !vf.ok) {
        r.pass = false;
        return r;
    }

    r.min_a = *std::min_element(va.v.begin(), va.v.end());
    r.min_f = *std::min_element(vf.v.begin(), vf.v.end());
    r.max_c = *std::max_element(vc.v.begin(), vc.v.end());
    r.max_diff_a = max_divided_difference(va.v, grid);
    r.max_diff_b = max_divided_difference(vb.v, grid);
    r.max_diff_c = max_divided_difference(vc.v, grid);
    r.max_diff_f = max_divided_difference(vf.v, grid);

    r.pass = r.min_a >= coeffs.delta && r.min_f >= coeffs.delta;
    return r;
}

} // namespace parobs
