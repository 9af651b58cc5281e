#pragma once

#include <functional>
#include <vector>

#include "roughsheet/bi_field.hpp"
#include "roughsheet/enhancement.hpp"
#include "roughsheet/grid.hpp"

namespace roughsheet {

// Index rectangle on a shared grid.  The four entries are node indices with
// s_lo < s_hi and t_lo < t_hi; every box-taking operation validates them.
struct Box {
  int s_lo = 0;
  int s_hi = 0;
  int t_lo = 0;
  int t_hi = 0;
};

inline Box full_box(const Grid2D& g) { return Box{0, g.n1() - 1, 0, g.n2() - 1}; }

// A scalar function together with as many derivatives as the caller can
// supply: derivs[k] is the k-th derivative, derivs[0] the function itself.
// Operations state how many entries they need and reject shorter bundles.
struct SmoothFn {
  std::vector<std::function<double(double)>> derivs;

  int order() const { return static_cast<int>(derivs.size()) - 1; }
  double d(int k, double u) const { return derivs[static_cast<size_t>(k)](u); }
};

// Measured remainder sizes of a controlled decomposition.  sup1/sup2 are the
// plain sups of the two remainder fields over sampled tuples; fitted1/fitted2
// are log-log slope estimates of how the mean remainder scales with the gap.
// These are informational: construction never rejects on regularity.
struct PathRegularity {
  double sup1 = 0.0;
  double sup2 = 0.0;
  double fitted1 = 0.0;
  double fitted2 = 0.0;
};

// A sheet y controlled by x one direction at a time: yx1 and yx2 are the
// directional derivative sheets, and the remainder fields are defined by
//   rem1((s1,s2),(t))  = y(s2,t) - y(s1,t) - yx1(s1,t) * (x(s2,t) - x(s1,t))
//   rem2((s),(t1,t2))  = y(s,t2) - y(s,t1) - yx2(s,t1) * (x(s,t2) - x(s,t1))
// so the one-direction decompositions hold exactly by construction.
struct ControlledPath2D {
  SheetSample y;
  SheetSample yx1;
  SheetSample yx2;
  SheetSample x;
  BiInc rem1;  // arity (2,1)
  BiInc rem2;  // arity (1,2)
  PathRegularity regularity;
};

// Builds the remainder fields from the four sheets; they must share one grid.
ControlledPath2D make_controlled_path(const SheetSample& y, const SheetSample& yx1,
                                      const SheetSample& yx2, const SheetSample& x);

// Full two-parameter controlled data over an enhanced sheet X: the sheet y
// has a derivative y^x against the box increment and a derivative y^w against
// the area measure, each of them again a controlled path.  ysharp is the
// (2,2) residual left over after subtracting, on each box, the corner-frozen
// Abar terms and both edge integrals of y^x against dx and y^w against dw;
// it is defined by that identity, and its size is a measured property.
struct ControlledSheet {
  ControlledPath2D y;
  ControlledPath2D yx;
  ControlledPath2D yw;
  BiInc ysharp;  // arity (2,2)
};

// Assembles the sheet-level data.  The y path is built internally with y^x as
// its directional derivative in both directions, so the edge integrals and
// the residual always refer to the same first-level data.
ControlledSheet make_controlled_sheet(const SheetSample& y, const ControlledPath2D& yx,
                                      const ControlledPath2D& yw, const RoughSheet& X);

// The derivative-of-derivative sheets the two-parameter integral needs when
// expanding the edge integrals of y^x and y^w one more level.
struct SecondaryDerivatives {
  SheetSample yxx1;
  SheetSample yxx2;
  SheetSample ywx1;
  SheetSample ywx2;
};

// Reads the second-level sheets off the stored yx / yw paths.
SecondaryDerivatives secondary_derivatives(const ControlledSheet& y);

// Which area measure an integral runs against: the box increment of x, or
// the midpoint edge-product cells of the enhancement.
enum class Measure { dx, dw };

// The six edge-integral shapes: a bare integrand against one measure (x, w),
// or a controlled integrand whose own expansion brings a second measure in
// (first letter = inner measure, second letter = outer measure).
enum class BoundaryKind { x, w, xx, wx, xw, ww };

// Discrete edge integral along direction a (1 or 2) over the box: the frozen
// coordinate runs over the full transverse span while the integrand y is
// expanded to first order in direction a and corrected by the one-direction
// sewing sum of the remainder terms.  For smooth data this reproduces the
// plain Riemann-Stieltjes edge sum exactly.  When a Chen report is supplied
// it must have passed, otherwise the enhancement is rejected.
double boundary_integral(BoundaryKind kind, int a, const ControlledPath2D& y,
                         const RoughSheet& X, const Box& box,
                         const ChenReport* chen = nullptr);

// Edge integrals against the mixed one-direction kernels: the g form pairs y
// with the G/H fields of the enhancement, the i form with the I/J fields.
enum class EdgeForm { g_form, i_form };

double boundary_integral_GHIJ(EdgeForm form, int a, const ControlledPath2D& y,
                              const RoughSheet& X, const Box& box,
                              const ChenReport* chen = nullptr);

// Two-parameter rough integral of the controlled sheet against dx or dw over
// the box: corner-frozen C terms, both directions' edge integrals of y, y^x
// and y^w, and the cell-by-cell pairing of the (2,2) residual with the
// measure.  For smooth data this reproduces the Riemann-Stieltjes value.
double rough_integral(const ControlledSheet& y, const SecondaryDerivatives& second,
                      const RoughSheet& X, Measure measure, const Box& box,
                      const ChenReport* chen = nullptr);

// Canonical controlled lift of a composition phi(x): first level phi'(x) and
// phi''(x), second level phi''(x) and phi'''(x).  Needs derivs up to order 5.
struct PhiLift {
  ControlledSheet sheet;
  SecondaryDerivatives second;
};

PhiLift lift_phi(const SmoothFn& phi, const SheetSample& x, const RoughSheet& X);

// One-box compensation defect of the composition germ: the value nu1 measures
// how far the corner-frozen second-order germ of phi(x) is from the chord
// form on a single box, and bound is the explicit edge estimate
//   sup|phi''| (box x)^2 + sup|phi'''| |d1x * d2x * box x|
// with sups over the box's bottom edge.  Needs derivs up to order 3.
struct Nu1Report {
  double value = 0.0;
  double bound = 0.0;
};

Nu1Report nu1_diagnostic(const SmoothFn& phi, const SheetSample& x);
Nu1Report nu1_diagnostic(const SmoothFn& phi, const SheetSample& x, const Box& box);

// The (2,2) field collecting the second-direction sewing leftovers of the
// one-direction stability identity for phi composed with the first-direction
// linear interpolant of x.  Built from closed-form combinations of row data,
// so it evaluates on any tuple without re-enhancing the interpolant.
BiInc r1_diagnostic(const SmoothFn& phi, const SheetSample& x);

// Companion to r1_diagnostic: the direct residual of the stability identity
// (box increment of phi(y) minus the three expansion terms, with the sharp
// term paired against the full second-direction increment).  The two routes
// differ by a one-direction Taylor mass that vanishes with the mesh.
BiInc stab_identity_residual(const SmoothFn& phi, const SheetSample& x);

// Local-Lipschitz diagnostic between two enhanced sheets on one grid: the
// distance between the lifted sharp fields, the gaps between the two rough
// integrals for both measures, and the sampled field-by-field distance of
// the enhancements, plus the ratio of the former to the latter.
struct ContinuityReport {
  double sharp_distance = 0.0;
  double integral_dx_distance = 0.0;
  double integral_dw_distance = 0.0;
  double enhancement_distance = 0.0;
  double ratio = 0.0;
};

ContinuityReport continuity_modulus(const SmoothFn& phi, const RoughSheet& X,
                                    const RoughSheet& Xbar);

}  // namespace roughsheet
