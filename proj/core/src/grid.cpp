#include "parobs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "parobs/csv.hpp"

namespace parobs {

GridSpec::GridSpec(double x_min_, double x_max_, double t_min_, double t_max_, int nx_, int nt_)
    : x_min(x_min_), x_max(x_max_), t_min(t_min_), t_max(t_max_), nx(nx_), nt(nt_) {
    if (!(x_min < x_max) || !(t_min < t_max))
        throw GridError("grid box is empty: require x_min < x_max and t_min < t_max");
    if (nx < 3)
        throw GridError("grid requires nx >= 3, got " + std::to_string(nx));
    if (nt < 2)
        throw GridError("grid requires nt >= 2, got " + std::to_string(nt));
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(t_min) ||
        !std::isfinite(t_max))
        throw GridError("grid bounds must be finite");
}

bool GridSpec::contains(double x, double t) const {
    const double sx = 1e-12 * (std::abs(x_min) + std::abs(x_max) + 1.0);
    const double st = 1e-12 * (std::abs(t_min) + std::abs(t_max) + 1.0);
    return x >= x_min - sx && x <= x_max + sx && t >= t_min - st && t <= t_max + st;
}

Field::Field(const GridSpec& grid) : grid_(grid), values_(grid.node_count(), 0.0) {}

Field::Field(const GridSpec& grid, std::vector<double> values, bool nonnegative)
    : grid_(grid), values_(std::move(values)), nonnegative_(nonnegative) {
    if (values_.size() != grid_.node_count())
        throw GridError("field value count does not match grid");
    require_finite();
}

std::span<const double> Field::slice(int n) const {
    return {values_.data() + index(0, n), static_cast<std::size_t>(grid_.nx)};
}

void Field::set_slice(int n, std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(grid_.nx))
        throw GridError("slice length mismatch");
    std::copy(values.begin(), values.end(), values_.data() + index(0, n));
}

double Field::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void Field::require_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) throw GridError("field contains a non-finite value");
}

DerivedFields derived_fields(const Field& u) {
    const GridSpec& g = u.grid();
    if (g.nx < 3) throw GridError("derived_fields requires nx >= 3");

    Field ut(g), ux(g), uxx(g);
    const double h = g.dx();
    const double tau = g.dt();

    for (int n = 0; n < g.nt; ++n) {
        for (int i = 0; i < g.nx; ++i) {
            // time derivative: backward difference, forward at the first slice
            if (n == 0)
                ut.at(i, n) = (u(i, 1) - u(i, 0)) / tau;
            else
                ut.at(i, n) = (u(i, n) - u(i, n - 1)) / tau;

            // space derivatives: central inside, one-sided second order at edges
            if (i == 0) {
                ux.at(i, n) = (-3.0 * u(0, n) + 4.0 * u(1, n) - u(2, n)) / (2.0 * h);
                uxx.at(i, n) = g.nx >= 4
                                   ? (2.0 * u(0, n) - 5.0 * u(1, n) + 4.0 * u(2, n) - u(3, n)) /
                                         (h * h)
                                   : (u(0, n) - 2.0 * u(1, n) + u(2, n)) / (h * h);
            } else if (i == g.nx - 1) {
                const int e = g.nx - 1;
                ux.at(i, n) = (3.0 * u(e, n) - 4.0 * u(e - 1, n) + u(e - 2, n)) / (2.0 * h);
                uxx.at(i, n) = g.nx >= 4 ? (2.0 * u(e, n) - 5.0 * u(e - 1, n) +
                                            4.0 * u(e - 2, n) - u(e - 3, n)) /
                                               (h * h)
                                         : (u(e - 2, n) - 2.0 * u(e - 1, n) + u(e, n)) / (h * h);
            } else {
                ux.at(i, n) = (u(i + 1, n) - u(i - 1, n)) / (2.0 * h);
                uxx.at(i, n) = (u(i + 1, n) - 2.0 * u(i, n) + u(i - 1, n)) / (h * h);
            }
        }
    }
    return {std::move(ut), std::move(ux), std::move(uxx)};
}

namespace {

// Cubic Lagrange weights for normalized offset s in [0,1] relative to the
// second of four equally spaced nodes. Exact on cubics.
inline void cubic_weights(double s, double w[4]) {
    w[0] = -s * (s - 1.0) * (s - 2.0) / 6.0;
    w[1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    w[2] = -(s + 1.0) * s * (s - 2.0) / 2.0;
    w[3] = (s + 1.0) * s * (s - 1.0) / 6.0;
}

struct Stencil {
    int base;       // first node of the stencil
    int count;      // 2 (linear) or 4 (cubic)
    double w[4];
};

// Pick the 1D interpolation stencil along an axis with `n` nodes for a
// query between node `cell` and `cell`+1 at local offset s.
Stencil axis_stencil(int cell, double s, int n) {
    Stencil st{};
    if (cell - 1 < 0 || cell + 2 > n - 1) {
        st.base = cell;
        st.count = 2;
        st.w[0] = 1.0 - s;
        st.w[1] = s;
    } else {
        st.base = cell - 1;
        st.count = 4;
        cubic_weights(s, st.w);
    }
    return st;
}

} // namespace

double sample(const Field& u, double x, double t) {
    const GridSpec& g = u.grid();
    if (!g.contains(x, t))
        throw GridError("sample point outside grid box");

    const double h = g.dx();
    const double tau = g.dt();

    double fx = (x - g.x_min) / h;
    double ft = (t - g.t_min) / tau;
    int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
    int it = std::clamp(static_cast<int>(std::floor(ft)), 0, g.nt - 2);
    double sx = fx - ix;
    double st = ft - it;

    const Stencil wx = axis_stencil(ix, sx, g.nx);
    const Stencil wt = axis_stencil(it, st, g.nt);

    double acc = 0.0;
    for (int a = 0; a < wt.count; ++a) {
        double row = 0.0;
        for (int b = 0; b < wx.count; ++b)
            row += wx.w[b] * u(wx.base + b, wt.base + a);
        acc += wt.w[a] * row;
    }
    return acc;
}

void write_field_csv(const Field& u, const DerivedFields& d, std::ostream& os) {
    os << "x,t,u,ut,ux,uxx\n";
    const GridSpec& g = u.grid();
    for (int n = 0; n < g.nt; ++n) {
        for (int i = 0; i < g.nx; ++i) {
            csv::write_row(os, {g.x(i), g.t(n), u(i, n), d.ut(i, n), d.ux(i, n), d.uxx(i, n)});
        }
    }
}

} // namespace parobs
