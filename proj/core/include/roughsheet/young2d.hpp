#pragma once

#include <functional>
#include <string_view>

#include "roughsheet/grid.hpp"

namespace roughsheet {

// Which Riemann-sum realization of the two-form integral to use. The three
// agree in the refinement limit; on a fixed grid they differ by O(h^{sum-1}).
enum class TripleVariant { d1x_d2z, d2z_d1x, bullet };

TripleVariant parse_triple_variant(std::string_view name);

// Corrected left-point Riemann sum of f against the box increments of g over
// the index box [s_lo,s_hi] x [t_lo,t_hi]: sum of f(s_i,t_j) dg over finest
// cells. Warns when the fitted per-direction regularities of f and g sum to
// <= 1 in either direction; the value is computed either way.
double young2d(const SheetSample& f, const SheetSample& g, int s_lo, int s_hi,
               int t_lo, int t_hi, bool* regularity_warning = nullptr);

// Box sum of f(s,t) d1g(s,s+,t) d2g(s+,t,t+), the mixed second-order Young
// integral of f against both partial increments of g. Warns when the fitted
// regularity of g is <= 1/2 in either direction.
double young2d_mixed(const SheetSample& f, const SheetSample& g, int s_lo,
                     int s_hi, int t_lo, int t_hi,
                     bool* regularity_warning = nullptr);

// The three Riemann-sum variants for the integral of y against d1x and d2z:
//   d1x_d2z:  y(s,t)   d1x(s,s+,t)   d2z(s+,t,t+)
//   d2z_d1x:  y(s,t)   d2z(s,t,t+)   d1x(s,s+,t+)
//   bullet:   y(s,t)   d1x(s,s+,t)   d2z(s,t,t+)
double young2d_triple(const SheetSample& y, const SheetSample& x,
                      const SheetSample& z, int s_lo, int s_hi, int t_lo,
                      int t_hi, TripleVariant variant);

// Residual of the change-of-variable formula for smooth sheets:
//   delta(phi(x)) - young2d(phi'(x), x) - young2d_mixed(phi''(x), x)
// over the box. Vanishes with refinement for smooth x and phi in C^4.
double young_change_of_variable_residual(
    const std::function<double(double)>& phi,
    const std::function<double(double)>& dphi,
    const std::function<double(double)>& ddphi, const SheetSample& x, int s_lo,
    int s_hi, int t_lo, int t_hi, bool* regularity_warning = nullptr);

// Log-log slope of mean |one-direction increment| at dyadic index separations,
// the sheet cousin of fitted_holder_exponent. Constant-in-direction sheets
// report 10.0. Used for regularity warnings only.
double fitted_sheet_exponent(const SheetSample& x, int dir);

}  // namespace roughsheet
