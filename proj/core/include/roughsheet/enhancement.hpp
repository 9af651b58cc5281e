#pragma once

#include <string>
#include <vector>

#include "roughsheet/bi_field.hpp"
#include "roughsheet/grid.hpp"

namespace roughsheet {

// Second-order enhancement of a sampled sheet: the full bundle of iterated
// integrals that the two-parameter sewing machinery consumes, realized as
// left-point Riemann sums on the grid.  Discrete differentials: d_{st}x over
// a cell is the cell's box increment, d_s x along an edge is the edge's
// increment, and the area measure "dw" (shorthand for d1x d2x) is the
// midpoint product
//   dw(i,j) = 1/4 (d1x(i,j) + d1x(i,j+1)) (d2x(i,j) + d2x(i+1,j))
// per cell.  Lower limits written "from the base corner" anchor at the
// field's own first index pair; nothing references a global origin except
// through the caller's choice of indices.
//
// With these conventions every relation that only needs telescoping holds
// exactly on the grid (up to rounding); genuine O(h) quadrature error is
// confined to the cross-route identities aw = 1/2 d(x^2) - iint x dx,
// aw = G - I and B^{xw} = H - J.
//
// Field naming: trailing 1/2 is the acting direction, superscripts become
// suffix letters (x for a d x measure, w for a dw measure), e.g. bxw1 is the
// direction-1 field with integrand d1x against the dw measure.  All fields
// evaluate lazily from the stored base sheet; RoughSheet is immutable after
// construction and safe for concurrent reads.
struct RoughSheet {
  double alpha = 1.0;  // direction-1 Holder exponent, in (1/3, 1]
  double beta = 1.0;   // direction-2 Holder exponent
  Grid2D grid;
  SheetSample x;  // base sheet every field was built from

  BiInc ax;  // box increment of x
  BiInc aw;  // iint dw from the base corner
  BiInc bxx1, bxx2, bxw1, bxw2;
  BiInc cxx, cwx, cxw, cww;

  // Split fields: two independent index pairs in the split direction plus a
  // chained pair (a triple for the f family) in the other direction.
  SplitField dxx1, dwx1, dxw1, dww1;
  SplitField dxx2, dwx2, dxw2, dww2;
  SplitField exxx1, exwx1, exxw1, exww1;
  SplitField exxx2, exwx2, exxw2, exww2;
  SplitField fxxx1, fxwx1, fxxw1, fxww1;
  SplitField fxxx2, fxwx2, fxxw2, fxww2;

  BiInc gxx1, gxx2, hxx1, hxx2, ixx1, ixx2, jxx1, jxx2;
  BiInc kxx1, kxx2, lxx1, lxx2, mxx1, mxx2, nxx1, nxx2, oxxx1, oxxx2;
  BiInc pxx1, pxx2;  // one-direction double integrals, arities (2,1) / (1,2)
  BiInc qxx1, qxx2;

  // Iteration helpers for norms and serialization.  Exponents are the
  // declared Holder class of each field in units of physical gaps; arity-1
  // directions carry exponent 0 (no gap to weigh).
  struct BiEntry {
    const char* name;
    const BiInc* field;
    double e1, e2;
  };
  struct SplitEntry {
    const char* name;
    const SplitField* field;
    double e_slot1, e_slot2, e_other;
  };
  std::vector<BiEntry> bi_entries() const;
  std::vector<SplitEntry> split_entries() const;
};

// One verified identity: both sides evaluated over ascending index tuples,
// worst absolute difference kept together with where it happened (argmax_s
// holds every direction-1 index of the worst tuple in display order,
// argmax_t the direction-2 ones).  corrected_form marks identities whose
// printed source had an inconsistent index or sign and were implemented in
// the corrected reading; exhaustive tells whether the tuple space was fully
// enumerated or randomly sampled.
struct RelationCheck {
  std::string id;
  double max_residual = 0.0;
  std::vector<int> argmax_s, argmax_t;
  bool corrected_form = false;
  bool exhaustive = true;
};

struct ChenReport {
  double tol = 0.0;
  bool pass = false;
  std::vector<RelationCheck> relations;

  const RelationCheck* worst() const;  // entry with the largest residual
};

// Builds the full enhancement bundle from a sampled sheet by left-point
// quadrature of every field's explicit sum.  Needs at least 9 points per
// direction and exponents in (1/3, 1]; grids below that fail with a
// "grid too coarse" configuration error.
RoughSheet enhance_smooth(const SheetSample& x, double alpha = 1.0, double beta = 1.0);

// Evaluates both sides of every algebraic relation the bundle is supposed to
// satisfy (94 identities across the four field families) and reports the
// residuals.  Small tuple spaces are enumerated exhaustively; large ones are
// sampled with a deterministic per-relation seed.  Never throws on relation
// failure: the report carries it.
ChenReport verify_chen(const RoughSheet& X, const SheetSample& x, double tol);

// Sum over all fields of the empirical Holder norm at the field's declared
// exponents: sup |value| / (gap_1^{e1} gap_2^{e2}) over ascending tuples,
// with the span from first to last index as the gap in each direction.
// Exhaustive below an enumeration cap, seeded sampling above it.
double roughsheet_norm(const RoughSheet& X);
double roughsheet_norm(const RoughSheet& X,
                       std::vector<std::pair<std::string, double>>* breakdown);

// .rsh container: "RSH1" magic, a JSON manifest (format version, exponents,
// grid, base-sheet hash, field list with shapes and cached flags, blob
// directory), then raw little-endian float64 blobs: always the base sheet,
// plus the dense table of every field that was materialized at save time.
// Loading rebuilds the lazy fields from the base sheet (bit-exact, the
// construction is deterministic) and re-installs the saved tables.  Version
// mismatch, bad magic, hash mismatch and truncation all fail as io errors.
void save_roughsheet(const RoughSheet& X, const std::string& path);
RoughSheet load_roughsheet(const std::string& path);

}  // namespace roughsheet
