#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include "roughsheet/grid.hpp"

namespace roughsheet {

class SplitField;

// Two-parameter increment fields over a Grid2D, indexed by k grid indices in
// direction 1 and l indices in direction 2.  All index tuples in this module
// are ascending in intent and increments read second-minus-first; evaluators
// stay well defined on arbitrary tuples.
//
// Evaluation enforces the defining property of the biincrement spaces: the
// value is an exact 0.0 whenever two contiguous indices of either direction
// coincide, no matter what the wrapped evaluator would produce.
class BiInc {
 public:
  using Eval = std::function<double(std::span<const int>, std::span<const int>)>;

  BiInc(Grid2D grid, int k, int l, Eval eval);
  static BiInc from_sheet(const SheetSample& x);  // the (1,1) field of samples

  double eval(std::span<const int> s, std::span<const int> t) const;
  double operator()(std::initializer_list<int> s, std::initializer_list<int> t) const;

  int k() const;
  int l() const;
  const Grid2D& grid() const;

  // Precomputes a dense value table.  Only available for k,l <= 2 with at
  // most 256 points per direction (table size caps at 256^4 entries only in
  // the worst case; typical grids stay far below).  Idempotent, thread-safe.
  void materialize() const;

  // Serialization access to the dense table: dense_cache() is nullptr until
  // materialize() or adopt_dense() has run.  adopt_dense() installs a table
  // computed elsewhere (row-major over the k direction-1 indices then the l
  // direction-2 ones, same layout materialize() builds); it is ignored when a
  // table already exists and rejects mismatched sizes.
  const std::vector<double>* dense_cache() const;
  void adopt_dense(std::vector<double> table) const;

  // Set on fields built by bi_product; split() relies on it.
  bool has_factors() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;

  friend class SplitField;
  friend BiInc bi_product(const BiInc& a, const BiInc& b);
  friend SplitField split(const BiInc& a, int dir);
};

// Tensor-relaxed pair of one-direction factors: two independent index tuples
// ("slots") in the split direction plus one chained tuple in the other
// direction.  Unlike a BiInc, the value may be nonzero when slot1's last
// index differs from slot2's first; merge() glues them back together.
class SplitField {
 public:
  using Eval = std::function<double(std::span<const int>, std::span<const int>,
                                    std::span<const int>)>;

  SplitField(Grid2D grid, int dir, int k1, int k2, int other_arity, Eval eval);

  double eval(std::span<const int> slot1, std::span<const int> slot2,
              std::span<const int> other) const;
  double operator()(std::initializer_list<int> slot1, std::initializer_list<int> slot2,
                    std::initializer_list<int> other) const;

  int dir() const;
  int k1() const;
  int k2() const;
  int other_arity() const;
  const Grid2D& grid() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Directional coboundary.  Arity in the acting direction grows by one, and
// the result must stay within arity 3.  Acting-arity formulas:
//   0 -> 1:  constant extension
//   1 -> 2:  g(s1) - g(s0)
//   2 -> 3:  g(s0,s2) - g(s0,s1) - g(s1,s2)
// The three-point map carries the orientation-symmetric sign (it is the
// negative of the plain alternating sum); single-direction product rules pick
// up one sign per three-point application, while all both-direction rules
// keep their textbook form.
BiInc delta_dir(const BiInc& a, int dir);

// delta_dir in both directions; on (1,1) fields this is the box increment.
BiInc delta_full(const BiInc& a);

// Degree-lowering contraction used by cocycle_decompose: pins the first index
// of the chosen direction to grid point 0 and negates,
//   (sigma_a g)(s1..s_{k-1}) = -g(0, s1..s_{k-1}).
// With delta_dir above this satisfies sigma_a delta_a - delta_a sigma_a = 1
// exactly on fields of arity 2 in the acting direction.
BiInc sigma_dir(const BiInc& a, int dir);

// Meeting-index product: the last direction-1 (resp. -2) index of a is shared
// with the first of b,
//   (ab)_{(s1..s_{n+k-1})(t1..t_{m+l-1})}
//     = a_{(s1..s_n)(t1..t_m)} b_{(s_n..s_{n+k-1})(t_m..t_{m+l-1})}.
// Output arities must stay within 3.  The result remembers its factors.
BiInc bi_product(const BiInc& a, const BiInc& b);

// Shared-direction product: f and g use the same indices of direction `dir`
// (arities must match there) and chain in the other direction at f's last
// index.  For dir = 1:
//   (f o1 g)_{(s1..s_m)(t1..t_{n+l-1})}
//     = f_{(s1..s_m)(t1..t_n)} g_{(s1..s_m)(t_n..t_{n+l-1})}.
BiInc circle_product(const BiInc& f, const BiInc& g, int dir);

// Bullet variant: g has arity 1 in direction `dir` and is evaluated at f's
// FIRST index of that direction; the other direction chains as in circle.
// For dir = 1 and f of direction-1 arity 2:
//   (f . g)_{(s1,s2)(t1..t_{n+l-1})}
//     = f_{(s1,s2)(t1..t_n)} g_{(s1)(t_n..t_{n+l-1})}.
BiInc bullet_product(const BiInc& f, const BiInc& g, int dir);

// Tensor relaxation of a product-built field: the meeting index of direction
// `dir` is duplicated into two independent slots.  Only fields carrying
// factor metadata (bi_product results) support this; anything else errors.
// merge(split(a)) == a bit-exactly.
SplitField split(const BiInc& a, int dir);
BiInc merge(const SplitField& c);

}  // namespace roughsheet
