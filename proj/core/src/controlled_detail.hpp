#pragma once

// Internal helpers shared by the controlled-path and rough-integral
// translation units: argument guards, the midpoint area cell and a per-box
// prefix table of it.

#include <string>
#include <vector>

#include "roughsheet/controlled.hpp"
#include "roughsheet/enhancement.hpp"
#include "roughsheet/errors.hpp"
#include "roughsheet/grid.hpp"

namespace roughsheet {
namespace detail {

inline void check_box(const Box& b, const Grid2D& g, const char* who) {
  if (!(0 <= b.s_lo && b.s_lo < b.s_hi && b.s_hi <= g.n1() - 1 && 0 <= b.t_lo &&
        b.t_lo < b.t_hi && b.t_hi <= g.n2() - 1))
    fail_config(std::string(who) + ": box indices must be ascending and inside the grid");
}

inline void gate_on_chen(const ChenReport* chen, const char* who) {
  if (chen && !chen->pass)
    fail_numeric(std::string(who) + ": Chen verification failure, enhancement rejected");
}

// Midpoint edge-product cell of the area measure; matches the cell the
// enhancement integrates for its dw fields.
inline double dw_cell(const SheetSample& x, int i, int j) {
  const double e1 = (x.at(i + 1, j) - x.at(i, j)) + (x.at(i + 1, j + 1) - x.at(i, j + 1));
  const double e2 = (x.at(i, j + 1) - x.at(i, j)) + (x.at(i + 1, j + 1) - x.at(i + 1, j));
  return 0.25 * e1 * e2;
}

// Prefix table of the midpoint cells over one box, so any base-anchored area
// mass inside it costs two lookups.  Indices are absolute grid indices.
class AreaPrefix {
 public:
  AreaPrefix(const SheetSample& x, const Box& b) : b_(b), nt_(b.t_hi - b.t_lo + 1) {
    const int ns = b.s_hi - b.s_lo + 1;
    P_.assign(static_cast<size_t>(ns) * nt_, 0.0);
    for (int q = b.s_lo + 1; q <= b.s_hi; ++q)
      for (int w = b.t_lo + 1; w <= b.t_hi; ++w)
        at(q, w) = at(q - 1, w) + at(q, w - 1) - at(q - 1, w - 1) + dw_cell(x, q - 1, w - 1);
  }

  // area mass over [b.s_lo, q) x [b.t_lo, w)
  double mass(int q, int w) const { return P_[idx(q, w)]; }
  // area mass over [m1, m2) x [b.t_lo, w)
  double rows(int m1, int m2, int w) const { return mass(m2, w) - mass(m1, w); }
  // area mass over [b.s_lo, q) x [v1, v2)
  double cols(int v1, int v2, int q) const { return mass(q, v2) - mass(q, v1); }

 private:
  double& at(int q, int w) { return P_[idx(q, w)]; }
  size_t idx(int q, int w) const {
    return static_cast<size_t>(q - b_.s_lo) * nt_ + (w - b_.t_lo);
  }
  Box b_;
  int nt_;
  std::vector<double> P_;
};

// Kernel shared with the enhancement's C fields: base-anchored increment of
// the inner measure against the cells of the outer one, summed over the box.
inline double c_field_value(const SheetSample& x, Measure inner, Measure outer,
                            const Box& b, const AreaPrefix& aw) {
  double acc = 0.0;
  for (int q = b.s_lo; q < b.s_hi; ++q) {
    for (int w = b.t_lo; w < b.t_hi; ++w) {
      const double in =
          inner == Measure::dx ? delta_box(x, b.s_lo, q, b.t_lo, w) : aw.mass(q, w);
      const double out =
          outer == Measure::dx ? delta_box(x, q, q + 1, w, w + 1) : dw_cell(x, q, w);
      acc += in * out;
    }
  }
  return acc;
}

}  // namespace detail
}  // namespace roughsheet
