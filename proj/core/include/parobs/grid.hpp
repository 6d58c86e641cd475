#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "parobs/errors.hpp"

namespace parobs {

/// Uniform space-time grid on the box [x_min,x_max] x [t_min,t_max].
/// Node (i,n) sits at (x_min + i*dx, t_min + n*dt).
struct GridSpec {
    double x_min;
    double x_max;
    double t_min;
    double t_max;
    int nx;
    int nt;

    GridSpec(double x_min, double x_max, double t_min, double t_max, int nx, int nt);

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dt() const { return (t_max - t_min) / (nt - 1); }
    double x(int i) const { return x_min + i * dx(); }
    double t(int n) const { return t_min + n * dt(); }

    std::size_t node_count() const { return static_cast<std::size_t>(nx) * nt; }

    /// True when (x,t) lies in the closed box, up to a relative slack that
    /// absorbs roundoff from coordinate arithmetic.
    bool contains(double x, double t) const;

    bool operator==(const GridSpec&) const = default;
};

/// A grid function: one double per node, stored slice-major (time level n
/// owns a contiguous run of nx values).
class Field {
public:
    explicit Field(const GridSpec& grid);
    Field(const GridSpec& grid, std::vector<double> values, bool nonnegative = false);

    const GridSpec& grid() const { return grid_; }

    double operator()(int i, int n) const { return values_[index(i, n)]; }
    double& at(int i, int n) { return values_[index(i, n)]; }

    std::span<const double> slice(int n) const;
    void set_slice(int n, std::span<const double> values);

    std::span<const double> values() const { return values_; }

    /// Set when the field is a certified obstacle-problem solution
    /// (non-negative everywhere by construction).
    bool nonnegative() const { return nonnegative_; }
    void set_nonnegative(bool v) { nonnegative_ = v; }

    double min_value() const;
    double max_abs() const;

    /// Throws GridError if any value is NaN or infinite.
    void require_finite() const;

private:
    std::size_t index(int i, int n) const {
        return static_cast<std::size_t>(n) * grid_.nx + i;
    }

    GridSpec grid_;
    std::vector<double> values_;
    bool nonnegative_ = false;
};

/// Finite-difference derivative fields of a solution sample.
struct DerivedFields {
    Field ut;
    Field ux;
    Field uxx;
};

/// ut by backward difference at n >= 1 (forward at n = 0); ux, uxx by
/// central differences at interior nodes and one-sided second-order
/// stencils at the space edges.
DerivedFields derived_fields(const Field& u);

/// Interpolate u at (x,t): bicubic on the 4x4 node neighbourhood, degrading
/// to linear in a direction whose cubic stencil would leave the grid.
/// Exact at nodes; throws GridError for points outside the box.
double sample(const Field& u, double x, double t);

/// Field dump: header `x,t,u,ut,ux,uxx`, one row per node, slices in t
/// order with x varying fastest, 17 significant digits.
void write_field_csv(const Field& u, const DerivedFields& d, std::ostream& os);

} // namespace parobs
