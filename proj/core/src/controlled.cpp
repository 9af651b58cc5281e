#include "roughsheet/controlled.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "controlled_detail.hpp"
#include "roughsheet/errors.hpp"
#include "roughsheet/sewing1d.hpp"

namespace roughsheet {

namespace {

using detail::AreaPrefix;
using detail::c_field_value;
using detail::check_box;
using detail::dw_cell;
using detail::gate_on_chen;

// First-level edge value along direction a: corner-frozen A and B terms plus
// the one-direction sewing sum of the remainder germ.  The B strips inside
// the germ vanish by anchoring; they are evaluated anyway since each one is a
// single strip of the enhancement field.
double edge_first(const ControlledPath2D& P, const RoughSheet& X, int a, Measure meas,
                  const Box& b, const AreaPrefix& aw) {
  const SheetSample& x = P.x;
  const bool w = meas == Measure::dw;
  const double a_full =
      w ? aw.mass(b.s_hi, b.t_hi) : delta_box(x, b.s_lo, b.s_hi, b.t_lo, b.t_hi);
  double v = P.y.at(b.s_lo, b.t_lo) * a_full;
  if (a == 1) {
    const BiInc& B = w ? X.bxw1 : X.bxx1;
    v += P.yx1.at(b.s_lo, b.t_lo) * B({b.s_lo, b.s_hi}, {b.t_lo, b.t_hi});
    Inc3 germ(x.grid().g1(), [&, w](int i, int j, int k) {
      const double col = w ? aw.rows(j, i, b.t_hi) : delta_box(x, j, i, b.t_lo, b.t_hi);
      return P.rem1({k, j}, {b.t_lo}) * col +
             (P.yx1.at(j, b.t_lo) - P.yx1.at(k, b.t_lo)) * B({j, i}, {b.t_lo, b.t_hi});
    });
    v += lambda_sum_1d(germ, b.s_lo, b.s_hi);
  } else {
    const BiInc& B = w ? X.bxw2 : X.bxx2;
    v += P.yx2.at(b.s_lo, b.t_lo) * B({b.s_lo, b.s_hi}, {b.t_lo, b.t_hi});
    Inc3 germ(x.grid().g2(), [&, w](int i, int j, int k) {
      const double col = w ? aw.cols(j, i, b.s_hi) : delta_box(x, b.s_lo, b.s_hi, j, i);
      return P.rem2({b.s_lo}, {k, j}) * col +
             (P.yx2.at(b.s_lo, j) - P.yx2.at(b.s_lo, k)) * B({b.s_lo, b.s_hi}, {j, i});
    });
    v += lambda_sum_1d(germ, b.t_lo, b.t_hi);
  }
  return v;
}

// Second-level edge value along direction a: the integrand is itself expanded
// against the B field of the inner measure, so the germ carries the
// corner-frozen E weight plus a nested base-anchored sum of the remainder
// against the D family.  The delta-derivative strips of E are identically
// zero (their inner field anchors at a single width) and are omitted from
// the nested sum; the C strips vanish the same way but cost nothing to keep.
double edge_second(const ControlledPath2D& P, int a, Measure inner, Measure outer,
                   const Box& b, const AreaPrefix& aw) {
  const SheetSample& x = P.x;
  const bool iw = inner == Measure::dw;
  const bool ow = outer == Measure::dw;
  auto cell = [&](int q, int w) {
    return ow ? dw_cell(x, q, w) : delta_box(x, q, q + 1, w, w + 1);
  };
  double v = P.y.at(b.s_lo, b.t_lo) * c_field_value(x, inner, outer, b, aw);

  if (a == 1) {
    Inc3 germ(x.grid().g1(), [&, iw](int i, int j, int k) {
      // strip of the C field anchored at its own base (zero on single widths)
      double cstrip = 0.0;
      for (int q = j; q < i; ++q)
        for (int w = b.t_lo; w < b.t_hi; ++w) {
          const double in = iw ? aw.rows(j, q, w) : delta_box(x, j, q, b.t_lo, w);
          cstrip += in * cell(q, w);
        }
      double g = (P.y.at(j, b.t_lo) - P.y.at(k, b.t_lo)) * cstrip;
      // corner-frozen E weight: inner B field from the anchor, outer cells on
      // the strip
      double eterm = 0.0;
      for (int w = b.t_lo; w < b.t_hi; ++w) {
        double bf = 0.0;
        for (int q = k; q < j; ++q) {
          const double in = iw ? aw.rows(q, q + 1, w) : delta_box(x, q, q + 1, b.t_lo, w);
          bf += delta1(x, k, q, b.t_lo) * in;
        }
        double om = 0.0;
        for (int q = j; q < i; ++q) om += cell(q, w);
        eterm += bf * om;
      }
      g += P.yx1.at(k, b.t_lo) * eterm;
      // nested remainder sum against the D family
      for (int mp = k; mp < j; ++mp) {
        double dval = 0.0;
        for (int w = b.t_lo; w < b.t_hi; ++w) {
          const double in =
              iw ? aw.rows(mp, mp + 1, w) : delta_box(x, mp, mp + 1, b.t_lo, w);
          double om = 0.0;
          for (int q = j; q < i; ++q) om += cell(q, w);
          dval += in * om;
        }
        g += P.rem1({k, mp}, {b.t_lo}) * dval;
      }
      return g;
    });
    v += lambda_sum_1d(germ, b.s_lo, b.s_hi);
  } else {
    Inc3 germ(x.grid().g2(), [&, iw](int i, int j, int k) {
      double cstrip = 0.0;
      for (int q = b.s_lo; q < b.s_hi; ++q)
        for (int w = j; w < i; ++w) {
          const double in = iw ? aw.cols(j, w, q) : delta_box(x, b.s_lo, q, j, w);
          cstrip += in * cell(q, w);
        }
      double g = (P.y.at(b.s_lo, j) - P.y.at(b.s_lo, k)) * cstrip;
      double eterm = 0.0;
      for (int q = b.s_lo; q < b.s_hi; ++q) {
        double bf = 0.0;
        for (int w = k; w < j; ++w) {
          const double in = iw ? aw.cols(w, w + 1, q) : delta_box(x, b.s_lo, q, w, w + 1);
          bf += delta2(x, b.s_lo, k, w) * in;
        }
        double om = 0.0;
        for (int w = j; w < i; ++w) om += cell(q, w);
        eterm += bf * om;
      }
      g += P.yx2.at(b.s_lo, k) * eterm;
      for (int wp = k; wp < j; ++wp) {
        double dval = 0.0;
        for (int q = b.s_lo; q < b.s_hi; ++q) {
          const double in =
              iw ? aw.cols(wp, wp + 1, q) : delta_box(x, b.s_lo, q, wp, wp + 1);
          double om = 0.0;
          for (int w = j; w < i; ++w) om += cell(q, w);
          dval += in * om;
        }
        g += P.rem2({b.s_lo}, {k, wp}) * dval;
      }
      return g;
    });
    v += lambda_sum_1d(germ, b.t_lo, b.t_hi);
  }
  return v;
}

// Least-squares slope of log(err) against log(gap); mirrors the fit the other
// regularity probes use.
double fit_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
  const size_t n = lx.size();
  if (n < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace

ControlledPath2D make_controlled_path(const SheetSample& y, const SheetSample& yx1,
                                      const SheetSample& yx2, const SheetSample& x) {
  if (!y.grid().same_as(x.grid()) || !yx1.grid().same_as(x.grid()) ||
      !yx2.grid().same_as(x.grid()))
    fail_config("make_controlled_path: grid mismatch between sheets");

  BiInc rem1(x.grid(), 2, 1, [y, yx1, x](std::span<const int> s, std::span<const int> t) {
    return y.at(s[1], t[0]) - y.at(s[0], t[0]) -
           yx1.at(s[0], t[0]) * delta1(x, s[0], s[1], t[0]);
  });
  BiInc rem2(x.grid(), 1, 2, [y, yx2, x](std::span<const int> s, std::span<const int> t) {
    return y.at(s[0], t[1]) - y.at(s[0], t[0]) -
           yx2.at(s[0], t[0]) * delta2(x, s[0], t[0], t[1]);
  });

  // strided remainder statistics per dyadic gap; informational only
  PathRegularity reg;
  const int n1 = x.n1(), n2 = x.n2();
  std::vector<double> lx1, ly1, lx2, ly2;
  for (int g = 1; 2 * g < n1; g *= 2) {
    double m = 0.0, glen = 0.0;
    int cnt = 0;
    const int si = std::max(1, (n1 - g) / 16), sj = std::max(1, n2 / 16);
    for (int i = 0; i + g < n1; i += si)
      for (int j = 0; j < n2; j += sj) {
        const double r = std::abs(rem1({i, i + g}, {j}));
        reg.sup1 = std::max(reg.sup1, r);
        m += r;
        glen += x.grid().g1()[i + g] - x.grid().g1()[i];
        ++cnt;
      }
    if (cnt > 0 && m > 0.0) {
      lx1.push_back(std::log(glen / cnt));
      ly1.push_back(std::log(m / cnt));
    }
  }
  for (int g = 1; 2 * g < n2; g *= 2) {
    double m = 0.0, glen = 0.0;
    int cnt = 0;
    const int si = std::max(1, n1 / 16), sj = std::max(1, (n2 - g) / 16);
    for (int i = 0; i < n1; i += si)
      for (int j = 0; j + g < n2; j += sj) {
        const double r = std::abs(rem2({i}, {j, j + g}));
        reg.sup2 = std::max(reg.sup2, r);
        m += r;
        glen += x.grid().g2()[j + g] - x.grid().g2()[j];
        ++cnt;
      }
    if (cnt > 0 && m > 0.0) {
      lx2.push_back(std::log(glen / cnt));
      ly2.push_back(std::log(m / cnt));
    }
  }
  reg.fitted1 = fit_slope(lx1, ly1);
  reg.fitted2 = fit_slope(lx2, ly2);

  return ControlledPath2D{y, yx1, yx2, x, std::move(rem1), std::move(rem2), reg};
}

double boundary_integral(BoundaryKind kind, int a, const ControlledPath2D& y,
                         const RoughSheet& X, const Box& box, const ChenReport* chen) {
  gate_on_chen(chen, "boundary_integral");
  if (a != 1 && a != 2) fail_config("boundary_integral: direction must be 1 or 2");
  if (!y.x.grid().same_as(X.grid)) fail_config("boundary_integral: grid mismatch");
  check_box(box, X.grid, "boundary_integral");

  const AreaPrefix aw(y.x, box);
  switch (kind) {
    case BoundaryKind::x:
      return edge_first(y, X, a, Measure::dx, box, aw);
    case BoundaryKind::w:
      return edge_first(y, X, a, Measure::dw, box, aw);
    case BoundaryKind::xx:
      return edge_second(y, a, Measure::dx, Measure::dx, box, aw);
    case BoundaryKind::wx:
      return edge_second(y, a, Measure::dw, Measure::dx, box, aw);
    case BoundaryKind::xw:
      return edge_second(y, a, Measure::dx, Measure::dw, box, aw);
    case BoundaryKind::ww:
      return edge_second(y, a, Measure::dw, Measure::dw, box, aw);
  }
  fail_config("boundary_integral: unknown kind");
}

double boundary_integral_GHIJ(EdgeForm form, int a, const ControlledPath2D& y,
                              const RoughSheet& X, const Box& box, const ChenReport* chen) {
  gate_on_chen(chen, "boundary_integral_GHIJ");
  if (a != 1 && a != 2) fail_config("boundary_integral_GHIJ: direction must be 1 or 2");
  if (!y.x.grid().same_as(X.grid)) fail_config("boundary_integral_GHIJ: grid mismatch");
  check_box(box, X.grid, "boundary_integral_GHIJ");

  // g form pairs with the running-sum fields of the edge's own direction; the
  // i form uses the once-integrated field of the other direction, whose
  // per-row anchoring makes it additive along the edge.
  const BiInc& G = form == EdgeForm::g_form ? (a == 1 ? X.gxx1 : X.gxx2)
                                            : (a == 1 ? X.ixx2 : X.ixx1);
  const BiInc& H = form == EdgeForm::g_form ? (a == 1 ? X.hxx1 : X.hxx2)
                                            : (a == 1 ? X.jxx1 : X.jxx2);
  const int p1 = box.s_lo, u1 = box.t_lo;
  double v = y.y.at(p1, u1) * G({box.s_lo, box.s_hi}, {box.t_lo, box.t_hi});
  if (a == 1) {
    v += y.yx1.at(p1, u1) * H({box.s_lo, box.s_hi}, {box.t_lo, box.t_hi});
    Inc3 germ(y.x.grid().g1(), [&](int i, int j, int k) {
      return y.rem1({k, j}, {u1}) * G({j, i}, {box.t_lo, box.t_hi}) +
             (y.yx1.at(j, u1) - y.yx1.at(k, u1)) * H({j, i}, {box.t_lo, box.t_hi});
    });
    v += lambda_sum_1d(germ, box.s_lo, box.s_hi);
  } else {
    v += y.yx2.at(p1, u1) * H({box.s_lo, box.s_hi}, {box.t_lo, box.t_hi});
    Inc3 germ(y.x.grid().g2(), [&](int i, int j, int k) {
      return y.rem2({p1}, {k, j}) * G({box.s_lo, box.s_hi}, {j, i}) +
             (y.yx2.at(p1, j) - y.yx2.at(p1, k)) * H({box.s_lo, box.s_hi}, {j, i});
    });
    v += lambda_sum_1d(germ, box.t_lo, box.t_hi);
  }
  return v;
}

Nu1Report nu1_diagnostic(const SmoothFn& phi, const SheetSample& x) {
  return nu1_diagnostic(phi, x, full_box(x.grid()));
}

Nu1Report nu1_diagnostic(const SmoothFn& phi, const SheetSample& x, const Box& box) {
  if (phi.order() < 3) fail_config("nu1_diagnostic: need derivatives up to order 3");
  check_box(box, x.grid(), "nu1_diagnostic");
  const double x00 = x.at(box.s_lo, box.t_lo);
  const double x10 = x.at(box.s_hi, box.t_lo);
  const double x01 = x.at(box.s_lo, box.t_hi);
  const double x11 = x.at(box.s_hi, box.t_hi);
  const double D = x10 - x00;  // bottom-edge increment, the chord direction

  // chord averages of phi', phi'' and the first chord moment of phi'; exact
  // difference quotients away from a flat chord, second-order expansions on it
  double i1, i2, i3;
  if (std::abs(D) > 1e-9 * (1.0 + std::abs(x00) + std::abs(x10))) {
    i1 = (phi.d(0, x10) - phi.d(0, x00)) / D;
    i2 = (phi.d(1, x10) - phi.d(1, x00)) / D;
    i3 = (phi.d(1, x10) - i1) / D;
  } else {
    i1 = phi.d(1, x00) + 0.5 * D * phi.d(2, x00);
    i2 = phi.d(2, x00) + 0.5 * D * phi.d(3, x00);
    i3 = 0.5 * phi.d(2, x00) + D * phi.d(3, x00) / 3.0;
  }

  const double box_x = x11 - x01 - x10 + x00;
  const double box_x2 = x11 * x11 - x01 * x01 - x10 * x10 + x00 * x00;
  const double d2_left = x01 - x00;
  const double d2_right = x11 - x10;
  const double d1_top = x11 - x01;

  Nu1Report rep;
  rep.value = -phi.d(1, x00) * box_x - phi.d(2, x00) * (0.5 * box_x2 - x00 * box_x) +
              i1 * box_x + i2 * d2_left * d1_top + i3 * box_x * d1_top -
              (phi.d(1, x10) - phi.d(1, x00) - phi.d(2, x00) * D) * d2_right;

  double sup2 = 0.0, sup3 = 0.0;
  for (int i = box.s_lo; i <= box.s_hi; ++i) {
    const double u = x.at(i, box.t_lo);
    sup2 = std::max(sup2, std::abs(phi.d(2, u)));
    sup3 = std::max(sup3, std::abs(phi.d(3, u)));
  }
  rep.bound = sup2 * box_x * box_x + sup3 * std::abs(D * d2_left * box_x);
  return rep;
}

namespace {

// Row data of the direction-1 linear interpolant: everything below evaluates
// from the first and last rows of x plus the interpolation weight.
struct RowInterp {
  const SheetSample& x;
  int last;
  double T1;

  explicit RowInterp(const SheetSample& xs)
      : x(xs), last(xs.n1() - 1), T1(xs.grid().g1().T()) {}

  double weight(int i) const { return x.grid().g1()[i] / T1; }
  double e(int j) const { return x.at(last, j) - x.at(0, j); }
  double y(int i, int j) const { return x.at(0, j) + weight(i) * e(j); }
  double y_at(double S, int j) const { return x.at(0, j) + S * e(j); }
};

}  // namespace

BiInc r1_diagnostic(const SmoothFn& phi, const SheetSample& x) {
  if (phi.order() < 3) fail_config("r1_diagnostic: need derivatives up to order 3");
  if (x.n1() < 2 || x.n2() < 2) fail_config("r1_diagnostic: grid too coarse");
  return BiInc(x.grid(), 2, 2, [phi, x](std::span<const int> s, std::span<const int> t) {
    const RowInterp r(x);
    const int s1 = s[0], s2 = s[1], t1 = t[0], t2 = t[1];
    const double S1 = r.weight(s1), S2 = r.weight(s2);

    // closed-form one-direction objects of the interpolant over [t1, t2),
    // assembled from the two stored rows
    auto combos = [&](int a, int b, double& pfull, double& kfull) {
      double p0 = 0.0, b01 = 0.0, q01 = 0.0, k01 = 0.0;
      for (int j = a; j < b; ++j) {
        const double d2r0 = x.at(0, j) - x.at(0, a);
        const double d2e0 = x.at(0, j + 1) - x.at(0, j);
        const double de = r.e(j + 1) - r.e(j);
        const double ebar = r.e(j) - r.e(a);
        p0 += d2r0 * d2e0;
        b01 += d2r0 * de;
        q01 += ebar * (x.at(r.last, j + 1) - x.at(r.last, j));
        k01 += ebar * de;
      }
      pfull = p0 + S2 * (b01 + q01 + (S2 - 1.0) * k01);
      kfull = (S2 - S1) * (q01 + (S2 - 1.0) * k01);
    };
    double pfull, kfull;
    combos(t1, t2, pfull, kfull);

    auto d1y = [&](int j) { return (S2 - S1) * r.e(j); };
    auto rem1p = [&](int v) {
      return phi.d(1, r.y_at(S2, v)) - phi.d(1, r.y_at(S1, v)) -
             phi.d(2, r.y_at(S1, v)) * d1y(v);
    };
    auto rem1pp = [&](int v) {
      return phi.d(2, r.y_at(S2, v)) - phi.d(2, r.y_at(S1, v)) -
             phi.d(3, r.y_at(S1, v)) * d1y(v);
    };

    const double p3 = phi.d(3, r.y_at(S1, t1));
    double v = rem1pp(t1) * pfull + p3 * d1y(t1) * kfull;
    // second-direction sewing germ of the sharp term; the companion germs
    // that pair with single-cell evaluations of the P and K objects vanish
    // identically under the left-point realization and are not summed
    for (int w = t1; w < t2; ++w) {
      const double g = rem1p(w) - rem1p(t1) - rem1pp(t1) * (r.y_at(S2, w) - r.y_at(S2, t1)) -
                       p3 * d1y(t1) * (d1y(w) - d1y(t1));
      v += g * (r.y_at(S2, w + 1) - r.y_at(S2, w));
    }
    return v;
  });
}

BiInc stab_identity_residual(const SmoothFn& phi, const SheetSample& x) {
  if (phi.order() < 3) fail_config("stab_identity_residual: need derivatives up to order 3");
  if (x.n1() < 2 || x.n2() < 2) fail_config("stab_identity_residual: grid too coarse");
  return BiInc(x.grid(), 2, 2, [phi, x](std::span<const int> s, std::span<const int> t) {
    const RowInterp r(x);
    const int s1 = s[0], s2 = s[1], t1 = t[0], t2 = t[1];
    const double S1 = r.weight(s1), S2 = r.weight(s2);
    auto d1y = [&](int j) { return (S2 - S1) * r.e(j); };

    const double box_phi = phi.d(0, r.y_at(S2, t2)) - phi.d(0, r.y_at(S1, t2)) -
                           phi.d(0, r.y_at(S2, t1)) + phi.d(0, r.y_at(S1, t1));
    double t1sum = 0.0, t2sum = 0.0;
    for (int j = t1; j < t2; ++j) {
      t1sum += phi.d(1, r.y_at(S1, j)) * (d1y(j + 1) - d1y(j));
      t2sum += phi.d(2, r.y_at(S1, j)) * d1y(j) * (r.y_at(S2, j + 1) - r.y_at(S2, j));
    }
    const double rem1p_t1 = phi.d(1, r.y_at(S2, t1)) - phi.d(1, r.y_at(S1, t1)) -
                            phi.d(2, r.y_at(S1, t1)) * d1y(t1);
    const double sharp = rem1p_t1 * (r.y_at(S2, t2) - r.y_at(S2, t1));
    return box_phi - t1sum - t2sum - sharp;
  });
}

}  // namespace roughsheet
