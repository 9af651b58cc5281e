#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "controlled_detail.hpp"
#include "roughsheet/controlled.hpp"
#include "roughsheet/errors.hpp"
#include "roughsheet/sheet_complex.hpp"

namespace roughsheet {

namespace {

using detail::AreaPrefix;
using detail::c_field_value;
using detail::check_box;
using detail::dw_cell;
using detail::gate_on_chen;

int orient_pair(int& a, int& b) {
  if (a <= b) return 1;
  std::swap(a, b);
  return -1;
}

// The defining-identity residual of the sheet-level decomposition on one box:
// box increment of y minus the corner-frozen A terms and both directions'
// left-point edge sums of y^x against dx and y^w against dw.  Literal sums,
// oriented like the enhancement kernels.
BiInc make_ysharp(const SheetSample& y, const SheetSample& yxv, const SheetSample& ywv,
                  const SheetSample& x) {
  return BiInc(x.grid(), 2, 2,
               [y, yxv, ywv, x](std::span<const int> s, std::span<const int> t) {
                 int p1 = s[0], q = s[1], u1 = t[0], w = t[1];
                 const int sg = orient_pair(p1, q) * orient_pair(u1, w);

                 const double dy = y.at(q, w) - y.at(p1, w) - y.at(q, u1) + y.at(p1, u1);
                 double aw_full = 0.0;
                 std::vector<double> col(static_cast<size_t>(w - u1), 0.0);
                 double main = -yxv.at(p1, u1) * delta_box(x, p1, q, u1, w);
                 for (int m = p1; m < q; ++m) {
                   double row = 0.0;
                   for (int v = u1; v < w; ++v) {
                     const double c = dw_cell(x, m, v);
                     row += c;
                     col[static_cast<size_t>(v - u1)] += c;
                   }
                   aw_full += row;
                   main += yxv.at(m, u1) * delta_box(x, m, m + 1, u1, w) +
                           ywv.at(m, u1) * row;
                 }
                 main -= ywv.at(p1, u1) * aw_full;
                 for (int v = u1; v < w; ++v)
                   main += yxv.at(p1, v) * delta_box(x, p1, q, v, v + 1) +
                           ywv.at(p1, v) * col[static_cast<size_t>(v - u1)];
                 return sg * (dy - main);
               });
}

// Strictly ascending random index tuple, for the sampled field distance.
void draw_tuple(std::mt19937_64& rng, int n, int len, std::vector<int>& out) {
  out.clear();
  while (static_cast<int>(out.size()) < len) {
    const int v = static_cast<int>(rng() % static_cast<uint64_t>(n));
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
}

double span_weight(const std::vector<double>& pts, const std::vector<int>& idx, double e) {
  if (idx.size() < 2 || e == 0.0) return 1.0;
  return std::pow(pts[idx.back()] - pts[idx.front()], e);
}

// Sampled sup over tuples of the field-by-field gap between two enhancements,
// weighted by each field's declared Holder class.  Deterministic seed so the
// diagnostic is reproducible.
double enhancement_distance(const RoughSheet& X, const RoughSheet& Xb) {
  const auto& p1 = X.grid.g1().points();
  const auto& p2 = X.grid.g2().points();
  const int n = X.grid.n1(), m = X.grid.n2();
  std::mt19937_64 rng(0x5eedfull);
  double best = 0.0;
  std::vector<int> s, t;

  const auto ba = X.bi_entries();
  const auto bb = Xb.bi_entries();
  for (size_t f = 0; f < ba.size(); ++f) {
    for (int it = 0; it < 600; ++it) {
      draw_tuple(rng, n, ba[f].field->k(), s);
      draw_tuple(rng, m, ba[f].field->l(), t);
      const std::span<const int> ss(s.data(), s.size()), tt(t.data(), t.size());
      const double gap = std::abs(ba[f].field->eval(ss, tt) - bb[f].field->eval(ss, tt));
      best = std::max(best, gap / (span_weight(p1, s, ba[f].e1) * span_weight(p2, t, ba[f].e2)));
    }
  }
  const auto sa = X.split_entries();
  const auto sb = Xb.split_entries();
  std::vector<int> s2, u;
  for (size_t f = 0; f < sa.size(); ++f) {
    const SplitField* F = sa[f].field;
    const int ns = F->dir() == 1 ? n : m, no = F->dir() == 1 ? m : n;
    const auto& ps = F->dir() == 1 ? p1 : p2;
    const auto& po = F->dir() == 1 ? p2 : p1;
    for (int it = 0; it < 200; ++it) {
      draw_tuple(rng, ns, F->k1(), s);
      draw_tuple(rng, ns, F->k2(), s2);
      draw_tuple(rng, no, F->other_arity(), u);
      const std::span<const int> a1(s.data(), s.size()), a2(s2.data(), s2.size()),
          uu(u.data(), u.size());
      const double gap = std::abs(F->eval(a1, a2, uu) - sb[f].field->eval(a1, a2, uu));
      best = std::max(best, gap / (span_weight(ps, s, sa[f].e_slot1) *
                                   span_weight(ps, s2, sa[f].e_slot2) *
                                   span_weight(po, u, sa[f].e_other)));
    }
  }
  return best;
}

}  // namespace

ControlledSheet make_controlled_sheet(const SheetSample& y, const ControlledPath2D& yx,
                                      const ControlledPath2D& yw, const RoughSheet& X) {
  if (!y.grid().same_as(X.grid) || !yx.y.grid().same_as(X.grid) ||
      !yw.y.grid().same_as(X.grid))
    fail_config("make_controlled_sheet: grid mismatch between sheets");
  // y's directional derivative in both directions is y^x; the area derivative
  // enters only through the box decomposition
  ControlledPath2D ypath = make_controlled_path(y, yx.y, yx.y, X.x);
  BiInc sharp = make_ysharp(y, yx.y, yw.y, X.x);
  return ControlledSheet{std::move(ypath), yx, yw, std::move(sharp)};
}

SecondaryDerivatives secondary_derivatives(const ControlledSheet& y) {
  return SecondaryDerivatives{y.yx.yx1, y.yx.yx2, y.yw.yx1, y.yw.yx2};
}

double rough_integral(const ControlledSheet& y, const SecondaryDerivatives& second,
                      const RoughSheet& X, Measure measure, const Box& box,
                      const ChenReport* chen) {
  gate_on_chen(chen, "rough_integral");
  if (!y.y.x.grid().same_as(X.grid)) fail_config("rough_integral: grid mismatch");
  if (!second.yxx1.grid().same_as(X.grid) || !second.yxx2.grid().same_as(X.grid) ||
      !second.ywx1.grid().same_as(X.grid) || !second.ywx2.grid().same_as(X.grid))
    fail_config("rough_integral: derivative sheet grid mismatch");
  check_box(box, X.grid, "rough_integral");

  const SheetSample& x = y.y.x;
  const AreaPrefix aw(x, box);
  const bool w_meas = measure == Measure::dw;
  const int p1 = box.s_lo, u1 = box.t_lo;

  const double y0 = y.y.y.at(p1, u1);
  const double yx0 = y.yx.y.at(p1, u1);
  const double yw0 = y.yw.y.at(p1, u1);

  double v = -y0 * (w_meas ? aw.mass(box.s_hi, box.t_hi)
                           : delta_box(x, p1, box.s_hi, u1, box.t_hi));
  v -= yx0 * c_field_value(x, Measure::dx, measure, box, aw);
  v -= yw0 * c_field_value(x, Measure::dw, measure, box, aw);

  const ControlledPath2D pyx = make_controlled_path(y.yx.y, second.yxx1, second.yxx2, x);
  const ControlledPath2D pyw = make_controlled_path(y.yw.y, second.ywx1, second.ywx2, x);
  const BoundaryKind k1 = w_meas ? BoundaryKind::w : BoundaryKind::x;
  const BoundaryKind kx = w_meas ? BoundaryKind::xw : BoundaryKind::xx;
  const BoundaryKind kw = w_meas ? BoundaryKind::ww : BoundaryKind::wx;
  for (int a = 1; a <= 2; ++a) {
    v += boundary_integral(k1, a, y.y, X, box);
    v += boundary_integral(kx, a, pyx, X, box);
    v += boundary_integral(kw, a, pyw, X, box);
  }

  // cell sweep of the defining-identity residual against the measure; running
  // edge sums keep each cell O(1), same algebra as the ysharp field
  const SheetSample& ys = y.y.y;
  const SheetSample& yxs = y.yx.y;
  const SheetSample& yws = y.yw.y;
  const int nt = box.t_hi - box.t_lo;
  std::vector<double> a1x(static_cast<size_t>(nt) + 1, 0.0);
  std::vector<double> a1w(static_cast<size_t>(nt) + 1, 0.0);
  double germ = 0.0;
  for (int q = p1; q < box.s_hi; ++q) {
    if (q > p1) {
      for (int w2 = box.t_lo + 1; w2 <= box.t_hi; ++w2) {
        a1x[static_cast<size_t>(w2 - box.t_lo)] +=
            yxs.at(q - 1, u1) * delta_box(x, q - 1, q, u1, w2);
        a1w[static_cast<size_t>(w2 - box.t_lo)] += yws.at(q - 1, u1) * aw.rows(q - 1, q, w2);
      }
    }
    double a2x = 0.0, a2w = 0.0;
    for (int w2 = box.t_lo; w2 < box.t_hi; ++w2) {
      if (w2 > box.t_lo) {
        a2x += yxs.at(p1, w2 - 1) * delta_box(x, p1, q, w2 - 1, w2);
        a2w += yws.at(p1, w2 - 1) * aw.cols(w2 - 1, w2, q);
      }
      const double dy = ys.at(q, w2) - ys.at(p1, w2) - ys.at(q, u1) + ys.at(p1, u1);
      const double main = -yx0 * delta_box(x, p1, q, u1, w2) - yw0 * aw.mass(q, w2) +
                          a1x[static_cast<size_t>(w2 - box.t_lo)] +
                          a1w[static_cast<size_t>(w2 - box.t_lo)] + a2x + a2w;
      const double om =
          w_meas ? dw_cell(x, q, w2) : delta_box(x, q, q + 1, w2, w2 + 1);
      germ += (dy - main) * om;
    }
  }
  return v + germ;
}

PhiLift lift_phi(const SmoothFn& phi, const SheetSample& x, const RoughSheet& X) {
  if (phi.order() < 5) fail_config("lift_phi: need derivatives up to order 5");
  if (!x.grid().same_as(X.grid)) fail_config("lift_phi: grid mismatch");

  auto compose = [&](int k) {
    std::vector<double> v(x.values().size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = phi.d(k, x.values()[i]);
    return SheetSample(x.grid(), std::move(v));
  };
  const SheetSample y = compose(0);
  const ControlledPath2D yx = make_controlled_path(compose(1), compose(2), compose(2), x);
  const ControlledPath2D yw = make_controlled_path(compose(2), compose(3), compose(3), x);
  ControlledSheet sheet = make_controlled_sheet(y, yx, yw, X);
  SecondaryDerivatives second = secondary_derivatives(sheet);
  return PhiLift{std::move(sheet), std::move(second)};
}

ContinuityReport continuity_modulus(const SmoothFn& phi, const RoughSheet& X,
                                    const RoughSheet& Xbar) {
  if (!X.grid.same_as(Xbar.grid)) fail_config("continuity_modulus: grid mismatch");
  if (X.alpha != Xbar.alpha || X.beta != Xbar.beta)
    fail_config("continuity_modulus: exponent mismatch between enhancements");
  if (phi.order() < 8) fail_config("continuity_modulus: need derivatives up to order 8");

  const PhiLift lx = lift_phi(phi, X.x, X);
  const PhiLift lb = lift_phi(phi, Xbar.x, Xbar);

  ContinuityReport rep;
  lx.sheet.ysharp.materialize();
  lb.sheet.ysharp.materialize();
  const BiInc diff(X.grid, 2, 2,
                   [a = lx.sheet.ysharp, b = lb.sheet.ysharp](std::span<const int> s,
                                                              std::span<const int> t) {
                     return a.eval(s, t) - b.eval(s, t);
                   });
  rep.sharp_distance = holder_norm_22(diff, 2.0 * X.alpha, 2.0 * X.beta).norm;

  const Box full = full_box(X.grid);
  rep.integral_dx_distance =
      std::abs(rough_integral(lx.sheet, lx.second, X, Measure::dx, full) -
               rough_integral(lb.sheet, lb.second, Xbar, Measure::dx, full));
  rep.integral_dw_distance =
      std::abs(rough_integral(lx.sheet, lx.second, X, Measure::dw, full) -
               rough_integral(lb.sheet, lb.second, Xbar, Measure::dw, full));

  rep.enhancement_distance = enhancement_distance(X, Xbar);
  const double num =
      rep.sharp_distance + rep.integral_dx_distance + rep.integral_dw_distance;
  rep.ratio = rep.enhancement_distance > 0.0 ? num / rep.enhancement_distance : 0.0;
  return rep;
}

}  // namespace roughsheet
