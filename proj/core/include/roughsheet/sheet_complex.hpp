#pragma once

#include <array>

#include "roughsheet/bi_field.hpp"

namespace roughsheet {

// Two-exponent Holder data for a (2,2) field: the sup of
// |a((s1,s2)(t1,t2))| / (|s2-s1|^z1 |t2-t1|^z2) over all grid tuples with
// distinct pair entries, together with where it was attained.
struct Holder22Report {
  double z1 = 0.0;
  double z2 = 0.0;
  double norm = 0.0;
  std::array<int, 4> argmax{-1, -1, -1, -1};  // (s1,s2,t1,t2) indices
};

// Summable regularity functional of a sampled sheet: box increments weighted
// by both gaps, single-direction increments weighted by their own gap, plus
// the plain sup norm.
struct NNormReport {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double box_norm = 0.0;   // sup |box f| / (ds^rho1 dt^rho2)
  double dir1_norm = 0.0;  // sup |f(s2,t)-f(s1,t)| / ds^rho1
  double dir2_norm = 0.0;  // sup |f(s,t2)-f(s,t1)| / dt^rho2
  double sup_norm = 0.0;
  double total = 0.0;      // sum of the four
};

Holder22Report holder_norm_22(const BiInc& a, double z1, double z2);

// Four-exponent norm of a (3,3) field: per direction the triple (s,u,t)
// weights as |u-s|^gamma |t-u|^rho.  Exhaustive over all six indices, so keep
// the grids small.  Used as the computable stand-in for the infimum norm in
// the two-parameter sewing bound.
double holder_norm_33(const BiInc& h, double gamma1, double rho1, double gamma2, double rho2);

NNormReport nnorm(const SheetSample& f, double rho1, double rho2);

// Double sum of a over all finest-grid cells inside the box
// [s_lo,s_hi] x [t_lo,t_hi]; requires strictly ordered indices.  Telescopes
// exactly when a is a box increment.
double sewing_sum_2d(const BiInc& a, int s_lo, int s_hi, int t_lo, int t_hi);

// One-direction sewing remainder: a minus the cell sum of a along `dir` with
// the other direction's pair frozen.  Kills coboundaries of that direction.
// The optional flag warns when a's decay along `dir` looks too weak for the
// sewing bound to mean anything (fitted exponent <= 1).
BiInc lambda_dir_delta(const BiInc& a, int dir, bool* regularity_warning = nullptr);

// Both-direction remainder a - S1 a - S2 a + S1 S2 a; this is the discrete
// counterpart of applying the two-parameter sewing map to the full
// coboundary of a, and it vanishes when a is a box increment.
BiInc lambda2d_delta(const BiInc& a, bool* regularity_warning = nullptr);

// Full additive breakdown a = sewn + r1 + r2 + r where sewn is the iterated
// cell sum (the part that survives refinement), r1 kills direction-1
// coboundaries (delta_1 r1 = 0 within roundoff), r2 symmetrically, and r is
// lambda2d_delta(a).
struct Sewing2DParts {
  BiInc sewn;
  BiInc r1;
  BiInc r2;
  BiInc r;
};

Sewing2DParts sewing2d_decompose(const BiInc& a);

// Decomposition of a square-arity cocycle (delta a = 0) into a coboundary
// plus the two pinned-corner parts; the three fields sum back to a.  The
// contraction sigma pins the first index of each direction to grid point 0
// (a fixed convention of this library, not a parameter).
struct CocycleParts {
  BiInc coboundary;  // delta of a lower field built from the doubly pinned corner
  BiInc dir1_part;   // delta_1 (sigma (delta_2 a)), sign-adjusted to reconstruct
  BiInc dir2_part;   // delta_2 (sigma (delta_1 a)), sign-adjusted to reconstruct
};

CocycleParts cocycle_decompose(const BiInc& a);

}  // namespace roughsheet
