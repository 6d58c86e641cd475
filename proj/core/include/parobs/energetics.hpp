#pragma once

#include <iosfwd>
#include <vector>

#include "parobs/grid.hpp"

namespace parobs {

struct Point {
    double x = 0.0;
    double t = 0.0;
};

/// Backward heat kernel G(x,t) = exp(-x^2 / (4(-t))) / (2 sqrt(pi (-t))),
/// defined for t < 0 (unit mass in x for every such t).
double heat_kernel(double x, double t);

/// Lu = -2 u + x u_x + 2 t u_t from the derived fields, at ambient (x,t).
/// Vanishes identically iff u is parabolically 2-homogeneous about the
/// origin.
double scaling_operator(const Field& u, const DerivedFields& d, double x, double t);

struct EnergyValue {
    double value = 0.0;
    double tail_bound = 0.0;   // Gaussian-tail estimate beyond the slab
    double radius = 0.0;       // half-width actually integrated
};

/// The Weiss-type energy at base point P0 and negative offset t:
/// E = int { (|u_x|^2 + 2u)/(-t) - u^2/t^2 } G dx over the recentered slab
/// |x - x0| <= R(t), R(t) = min(box reach, 8 sqrt(2(-t))) (eight standard
/// deviations of G). Composite Simpson aligned to grid cells, doubled
/// until stable.
EnergyValue energy(const Field& u, const DerivedFields& d, Point p0, double t);

/// int |Lu|^2 G dx over the same slab, recentered at P0.
EnergyValue l2_norm_lu(const Field& u, const DerivedFields& d, Point p0, double t);

/// The singular-point functional Phi^{v_m}(t;u) =
/// int (u - v_m)^2 G / t^2 dx, u recentered at P0, v_m in blow-up
/// coordinates.
EnergyValue phi(const Field& u, Point p0, double m, double t);

struct EnergyTrace {
    Point base;
    struct Record {
        double t;
        double energy;
        double energy_tail;
        double l_norm;
        std::vector<double> phi;   // one per requested m
    };
    std::vector<double> phi_ms;
    std::vector<Record> records;   // times strictly increasing toward 0-
    double e0 = 0.0;               // extrapolated E(0^-)
};

/// Evaluate E, the Lu norm, and optional Phi columns along a ladder of
/// negative offsets; E(0^-) by Aitken extrapolation of the last three
/// records. Throws AdmissibilityError if fewer than 3 offsets fit the box.
EnergyTrace energy_trace(const Field& u, const DerivedFields& d, Point p0,
                         std::vector<double> t_ladder, std::vector<double> phi_ms = {});

/// |dE/dt (centered, step dt) + (1/(2(-t)^3)) int |Lu|^2 G dx| at offset t.
double energy_derivative_residual(const Field& u, const DerivedFields& d, Point p0, double t,
                                  double dt);

/// Trace dump: `t,E,Lnorm[,phi_<m>...]`.
void write_trace_csv(const EnergyTrace& trace, std::ostream& os);

} // namespace parobs
