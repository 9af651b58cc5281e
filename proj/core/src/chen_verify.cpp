#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "roughsheet/enhancement.hpp"
#include "roughsheet/errors.hpp"
#include "roughsheet/young2d.hpp"

// Consistency checks between the stored enhancement fields.  Every relation
// compares two independently computed routes: the left side goes through the
// complex operators (directional coboundaries, chained products, merges of
// split fields), the right side through other stored fields or direct sums
// over the base sheet.  Residuals are taken over strictly ascending index
// tuples; small tuple spaces are enumerated, large ones sampled with a seed
// derived from the relation id, so a report is reproducible run to run.

namespace roughsheet {

namespace {

using S = std::span<const int>;
using Tups = std::vector<std::vector<int>>;

constexpr double kExhaustiveCap = 40000.0;
constexpr int kSampleCount = 3000;

uint64_t fnv64_str(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

S sp(const std::vector<int>& v) { return S(v.data(), v.size()); }

struct Rel {
  std::string id;
  bool corrected = false;
  std::vector<std::pair<int, int>> chains;  // (direction, tuple length)
  std::function<double(const Tups&)> resid;
};

double comb(int n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

std::vector<std::vector<int>> ascending_tuples(int dim, int len) {
  std::vector<std::vector<int>> out;
  if (len == 1) {
    for (int i = 0; i < dim; ++i) out.push_back({i});
  } else if (len == 2) {
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) out.push_back({i, j});
  } else {
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j)
        for (int k = j + 1; k < dim; ++k) out.push_back({i, j, k});
  }
  return out;
}

void draw_tuple(std::mt19937_64& rng, int dim, int len, std::vector<int>& out) {
  out.clear();
  while (static_cast<int>(out.size()) < len) {
    const int v = static_cast<int>(rng() % static_cast<uint64_t>(dim));
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
}

RelationCheck run_relation(const Rel& r, const Grid2D& g) {
  const int dims[3] = {0, g.n1(), g.n2()};
  RelationCheck out;
  out.id = r.id;
  out.corrected_form = r.corrected;

  bool have_argmax = false;
  Tups tups(r.chains.size());
  auto consider = [&](const Tups& tp) {
    const double v = r.resid(tp);
    if (v > out.max_residual || !have_argmax) {
      out.max_residual = std::max(v, out.max_residual);
      have_argmax = true;
      out.argmax_s.clear();
      out.argmax_t.clear();
      for (size_t c = 0; c < r.chains.size(); ++c) {
        auto& dst = (r.chains[c].first == 1) ? out.argmax_s : out.argmax_t;
        dst.insert(dst.end(), tp[c].begin(), tp[c].end());
      }
    }
  };

  double total = 1.0;
  for (auto [dir, len] : r.chains) total *= comb(dims[dir], len);
  if (total <= kExhaustiveCap) {
    out.exhaustive = true;
    std::vector<std::vector<std::vector<int>>> lists;
    lists.reserve(r.chains.size());
    for (auto [dir, len] : r.chains) lists.push_back(ascending_tuples(dims[dir], len));
    std::vector<size_t> pos(lists.size(), 0);
    while (true) {
      for (size_t c = 0; c < lists.size(); ++c) tups[c] = lists[c][pos[c]];
      consider(tups);
      size_t c = 0;
      while (c < lists.size() && ++pos[c] == lists[c].size()) pos[c++] = 0;
      if (c == lists.size()) break;
    }
  } else {
    out.exhaustive = false;
    std::mt19937_64 rng(fnv64_str(r.id));
    for (int it = 0; it < kSampleCount; ++it) {
      for (size_t c = 0; c < r.chains.size(); ++c)
        draw_tuple(rng, dims[r.chains[c].first], r.chains[c].second, tups[c]);
      consider(tups);
    }
  }
  return out;
}

BiInc neg(const BiInc& f) {
  return BiInc(f.grid(), f.k(), f.l(), [f](S s, S u) { return -f.eval(s, u); });
}

// Assembles the relation table for one enhanced sheet.
struct Builder {
  const RoughSheet& X;
  const SheetSample& x;
  BiInc dx, d1x, d2x;
  std::vector<Rel> rels;

  Builder(const RoughSheet& X_, const SheetSample& x_)
      : X(X_),
        x(x_),
        dx(delta_full(BiInc::from_sheet(x_))),
        d1x(delta_dir(BiInc::from_sheet(x_), 1)),
        d2x(delta_dir(BiInc::from_sheet(x_), 2)) {}

  void bi_eq(std::string id, const BiInc& lhs, const BiInc& rhs, bool corrected = false) {
    Rel r;
    r.id = std::move(id);
    r.corrected = corrected;
    r.chains = {{1, lhs.k()}, {2, lhs.l()}};
    r.resid = [lhs, rhs](const Tups& tp) {
      return std::abs(lhs.eval(sp(tp[0]), sp(tp[1])) - rhs.eval(sp(tp[0]), sp(tp[1])));
    };
    rels.push_back(std::move(r));
  }

  void bi_zero(std::string id, const BiInc& lhs) {
    Rel r;
    r.id = std::move(id);
    r.chains = {{1, lhs.k()}, {2, lhs.l()}};
    r.resid = [lhs](const Tups& tp) { return std::abs(lhs.eval(sp(tp[0]), sp(tp[1]))); };
    rels.push_back(std::move(r));
  }

  // lhs == f + g, all three sharing one (2,2) tuple
  void bi_sum(std::string id, const BiInc& lhs, const BiInc& f, const BiInc& g,
              bool corrected = false) {
    Rel r;
    r.id = std::move(id);
    r.corrected = corrected;
    r.chains = {{1, 2}, {2, 2}};
    r.resid = [lhs, f, g](const Tups& tp) {
      return std::abs(lhs.eval(sp(tp[0]), sp(tp[1])) - f.eval(sp(tp[0]), sp(tp[1])) -
                      g.eval(sp(tp[0]), sp(tp[1])));
    };
    rels.push_back(std::move(r));
  }

  // Coboundary of a split field in its second slot vanishes: the slot enters
  // each term linearly through an increment of the measure column.
  void slot2_zero(std::string id, const SplitField& f) {
    const int d = f.dir(), od = 3 - f.dir();
    Rel r;
    r.id = std::move(id);
    r.chains = {{d, 2}, {d, 3}, {od, f.other_arity()}};
    r.resid = [f](const Tups& tp) {
      const auto& a = tp[0];
      const auto& b = tp[1];
      const auto& u = tp[2];
      const int b13[2] = {b[0], b[2]}, b12[2] = {b[0], b[1]}, b23[2] = {b[1], b[2]};
      return std::abs(f.eval(sp(a), S(b13, 2), sp(u)) - f.eval(sp(a), S(b12, 2), sp(u)) -
                      f.eval(sp(a), S(b23, 2), sp(u)));
    };
    rels.push_back(std::move(r));
  }

  // Coboundary of a split field in the non-split direction lands on a product
  // of the two one-box fields that make up its slots.
  void split_other_cob(std::string id, const SplitField& f, const BiInc& A1, const BiInc& A2) {
    const int d = f.dir(), od = 3 - f.dir();
    Rel r;
    r.id = std::move(id);
    r.chains = {{d, 2}, {d, 2}, {od, 3}};
    const bool dir1 = d == 1;
    r.resid = [f, A1, A2, dir1](const Tups& tp) {
      const auto& a = tp[0];
      const auto& b = tp[1];
      const auto& u = tp[2];
      const int u13[2] = {u[0], u[2]}, u12[2] = {u[0], u[1]}, u23[2] = {u[1], u[2]};
      const double lhs = f.eval(sp(a), sp(b), S(u13, 2)) - f.eval(sp(a), sp(b), S(u12, 2)) -
                         f.eval(sp(a), sp(b), S(u23, 2));
      const double rhs = dir1 ? A1.eval(sp(a), S(u12, 2)) * A2.eval(sp(b), S(u23, 2))
                              : A1.eval(S(u12, 2), sp(a)) * A2.eval(S(u23, 2), sp(b));
      return std::abs(lhs - rhs);
    };
    rels.push_back(std::move(r));
  }

  // Coboundary of a chained split field in its first slot peels off one base
  // increment times the matching two-slot field.
  void chained_slot1_cob(std::string id, const SplitField& e, const SplitField& dd) {
    const int d = e.dir(), od = 3 - e.dir();
    Rel r;
    r.id = std::move(id);
    r.chains = {{d, 3}, {d, 2}, {od, 2}};
    const bool dir1 = d == 1;
    const SheetSample xs = x;
    r.resid = [e, dd, dir1, xs](const Tups& tp) {
      const auto& a = tp[0];
      const auto& b = tp[1];
      const auto& u = tp[2];
      const int a13[2] = {a[0], a[2]}, a12[2] = {a[0], a[1]}, a23[2] = {a[1], a[2]};
      const double lhs = e.eval(S(a13, 2), sp(b), sp(u)) - e.eval(S(a12, 2), sp(b), sp(u)) -
                         e.eval(S(a23, 2), sp(b), sp(u));
      const double inc = dir1 ? delta1(xs, a[0], a[1], u[0]) : delta2(xs, u[0], a[0], a[1]);
      return std::abs(lhs - inc * dd.eval(S(a23, 2), sp(b), sp(u)));
    };
    rels.push_back(std::move(r));
  }

  // Coboundary of a chained split field in the non-split direction: the
  // three-point remainder field plus the chained-head times a one-box field.
  void chained_other_cob(std::string id, const SplitField& e, const SplitField& fthree,
                         const BiInc& bhead, const BiInc& aout, bool corrected = false) {
    const int d = e.dir(), od = 3 - e.dir();
    Rel r;
    r.id = std::move(id);
    r.corrected = corrected;
    r.chains = {{d, 2}, {d, 2}, {od, 3}};
    const bool dir1 = d == 1;
    r.resid = [e, fthree, bhead, aout, dir1](const Tups& tp) {
      const auto& a = tp[0];
      const auto& b = tp[1];
      const auto& u = tp[2];
      const int u13[2] = {u[0], u[2]}, u12[2] = {u[0], u[1]}, u23[2] = {u[1], u[2]};
      const double lhs = e.eval(sp(a), sp(b), S(u13, 2)) - e.eval(sp(a), sp(b), S(u12, 2)) -
                         e.eval(sp(a), sp(b), S(u23, 2));
      const double tail = dir1 ? bhead.eval(sp(a), S(u12, 2)) * aout.eval(sp(b), S(u23, 2))
                               : bhead.eval(S(u12, 2), sp(a)) * aout.eval(S(u23, 2), sp(b));
      return std::abs(lhs - fthree.eval(sp(a), sp(b), sp(u)) - tail);
    };
    rels.push_back(std::move(r));
  }

  void custom(std::string id, std::vector<std::pair<int, int>> chains,
              std::function<double(const Tups&)> fn, bool corrected = false) {
    rels.push_back(Rel{std::move(id), corrected, std::move(chains), std::move(fn)});
  }
};

std::vector<Rel> build_relations(const RoughSheet& X, const SheetSample& x) {
  Builder b(X, x);
  const SheetSample& xs = x;

  // base increment field against a direct box difference
  {
    const BiInc direct(X.grid, 2, 2, [xs](S s, S u) {
      return delta_box(xs, s[0], s[1], u[0], u[1]);
    });
    b.bi_eq("A^x = delta x", X.ax, direct);
  }

  // running-integrand fields, both measures
  b.bi_eq("d1 B1^xx = (d1 x) A^x", delta_dir(X.bxx1, 1), bi_product(b.d1x, X.ax));
  b.bi_eq("d2 B1^xx = -mu2 D2^xx", delta_dir(X.bxx1, 2), neg(merge(X.dxx2)));
  b.bi_eq("d2 B2^xx = (d2 x) A^x", delta_dir(X.bxx2, 2), bi_product(b.d2x, X.ax));
  b.bi_eq("d1 B2^xx = -mu1 D1^xx", delta_dir(X.bxx2, 1), neg(merge(X.dxx1)));

  b.bi_eq("d1 C^xx = mu1 D1^xx", delta_dir(X.cxx, 1), merge(X.dxx1));
  b.bi_eq("d2 C^xx = mu2 D2^xx", delta_dir(X.cxx, 2), merge(X.dxx2));

  b.slot2_zero("(1 (x)1 d1) D1^xx = 0", X.dxx1);
  b.slot2_zero("(1 (x)2 d2) D2^xx = 0", X.dxx2);
  b.split_other_cob("d2 D1^xx = A^x (x) A^x", X.dxx1, X.ax, X.ax);
  b.split_other_cob("d1 D2^xx = A^x (x) A^x", X.dxx2, X.ax, X.ax);

  b.slot2_zero("(1 (x)1 d1) E1^xxx = 0", X.exxx1);
  b.slot2_zero("(1 (x)2 d2) E2^xxx = 0", X.exxx2);
  b.chained_slot1_cob("(d1 (x)1 1) E1^xxx = (d1 x) D1^xx", X.exxx1, X.dxx1);
  b.chained_slot1_cob("(d2 (x)2 1) E2^xxx = (d2 x) D2^xx", X.exxx2, X.dxx2);
  b.chained_other_cob("d2 E1^xxx = F1^xxx + B1^xx (x) A^x", X.exxx1, X.fxxx1, X.bxx1, X.ax);
  b.chained_other_cob("d1 E2^xxx = F2^xxx + B2^xx (x) A^x", X.exxx2, X.fxxx2, X.bxx2, X.ax);

  // midpoint-measure counterparts
  b.bi_zero("d1 A^w = 0", delta_dir(X.aw, 1));
  b.bi_zero("d2 A^w = 0", delta_dir(X.aw, 2));

  b.bi_eq("d1 B1^xw = (d1 x) A^w", delta_dir(X.bxw1, 1), bi_product(b.d1x, X.aw));
  b.bi_eq("d2 B1^xw = -mu2 D2^xw", delta_dir(X.bxw1, 2), neg(merge(X.dxw2)), true);
  b.bi_eq("d2 B2^xw = (d2 x) A^w", delta_dir(X.bxw2, 2), bi_product(b.d2x, X.aw));
  b.bi_eq("d1 B2^xw = -mu1 D1^xw", delta_dir(X.bxw2, 1), neg(merge(X.dxw1)), true);

  b.bi_eq("d1 C^wx = mu1 D1^wx", delta_dir(X.cwx, 1), merge(X.dwx1));
  b.bi_eq("d2 C^wx = mu2 D2^wx", delta_dir(X.cwx, 2), merge(X.dwx2));
  b.slot2_zero("(1 (x)1 d1) D1^wx = 0", X.dwx1);
  b.slot2_zero("(1 (x)2 d2) D2^wx = 0", X.dwx2);
  b.split_other_cob("d2 D1^wx = A^w (x) A^x", X.dwx1, X.aw, X.ax);
  b.split_other_cob("d1 D2^wx = A^w (x) A^x", X.dwx2, X.aw, X.ax);
  b.slot2_zero("(1 (x)1 d1) E1^xwx = 0", X.exwx1);
  b.slot2_zero("(1 (x)2 d2) E2^xwx = 0", X.exwx2);
  b.chained_slot1_cob("(d1 (x)1 1) E1^xwx = (d1 x) D1^wx", X.exwx1, X.dwx1);
  b.chained_slot1_cob("(d2 (x)2 1) E2^xwx = (d2 x) D2^wx", X.exwx2, X.dwx2);
  b.chained_other_cob("d2 E1^xwx = F1^xwx + B1^xw (x) A^x", X.exwx1, X.fxwx1, X.bxw1, X.ax,
                      true);
  b.chained_other_cob("d1 E2^xwx = F2^xwx + B2^xw (x) A^x", X.exwx2, X.fxwx2, X.bxw2, X.ax,
                      true);

  b.bi_eq("d1 C^xw = mu1 D1^xw", delta_dir(X.cxw, 1), merge(X.dxw1));
  b.bi_eq("d2 C^xw = mu2 D2^xw", delta_dir(X.cxw, 2), merge(X.dxw2));
  b.slot2_zero("(1 (x)1 d1) D1^xw = 0", X.dxw1);
  b.slot2_zero("(1 (x)2 d2) D2^xw = 0", X.dxw2);
  b.split_other_cob("d2 D1^xw = A^x (x) A^w", X.dxw1, X.ax, X.aw);
  b.split_other_cob("d1 D2^xw = A^x (x) A^w", X.dxw2, X.ax, X.aw);
  b.slot2_zero("(1 (x)1 d1) E1^xxw = 0", X.exxw1);
  b.slot2_zero("(1 (x)2 d2) E2^xxw = 0", X.exxw2);
  b.chained_slot1_cob("(d1 (x)1 1) E1^xxw = (d1 x) D1^xw", X.exxw1, X.dxw1);
  b.chained_slot1_cob("(d2 (x)2 1) E2^xxw = (d2 x) D2^xw", X.exxw2, X.dxw2);
  b.chained_other_cob("d2 E1^xxw = F1^xxw + B1^xx (x) A^w", X.exxw1, X.fxxw1, X.bxx1, X.aw);
  b.chained_other_cob("d1 E2^xxw = F2^xxw + B2^xx (x) A^w", X.exxw2, X.fxxw2, X.bxx2, X.aw);

  b.bi_eq("d1 C^ww = mu1 D1^ww", delta_dir(X.cww, 1), merge(X.dww1));
  b.bi_eq("d2 C^ww = mu2 D2^ww", delta_dir(X.cww, 2), merge(X.dww2));
  b.slot2_zero("(1 (x)1 d1) D1^ww = 0", X.dww1);
  b.slot2_zero("(1 (x)2 d2) D2^ww = 0", X.dww2);
  b.split_other_cob("d2 D1^ww = A^w (x) A^w", X.dww1, X.aw, X.aw);
  b.split_other_cob("d1 D2^ww = A^w (x) A^w", X.dww2, X.aw, X.aw);
  b.slot2_zero("(1 (x)1 d1) E1^xww = 0", X.exww1);
  b.slot2_zero("(1 (x)2 d2) E2^xww = 0", X.exww2);
  b.chained_slot1_cob("(d1 (x)1 1) E1^xww = (d1 x) D1^ww", X.exww1, X.dww1);
  b.chained_slot1_cob("(d2 (x)2 1) E2^xww = (d2 x) D2^ww", X.exww2, X.dww2);
  b.chained_other_cob("d2 E1^xww = F1^xww + B1^xw (x) A^w", X.exww1, X.fxww1, X.bxw1, X.aw);
  b.chained_other_cob("d1 E2^xww = F2^xww + B2^xw (x) A^w", X.exww2, X.fxww2, X.bxw2, X.aw);

  // one-direction running sums and their cross identities
  b.bi_zero("d1 G1^xx = 0", delta_dir(X.gxx1, 1));
  b.bi_zero("d2 G2^xx = 0", delta_dir(X.gxx2, 2));
  b.bi_zero("d1 I2^xx = 0", delta_dir(X.ixx2, 1));
  b.bi_zero("d2 I1^xx = 0", delta_dir(X.ixx1, 2));
  b.bi_eq("d1 H1^xx = (d1 x) G1^xx", delta_dir(X.hxx1, 1), bi_product(b.d1x, X.gxx1));
  b.bi_eq("d2 H2^xx = (d2 x) G2^xx", delta_dir(X.hxx2, 2), bi_product(b.d2x, X.gxx2));
  b.bi_eq("d1 J1^xx = (d1 x) I2^xx", delta_dir(X.jxx1, 1), bi_product(b.d1x, X.ixx2));
  b.bi_eq("d2 J2^xx = (d2 x) I1^xx", delta_dir(X.jxx2, 2), bi_product(b.d2x, X.ixx1));
  b.bi_sum("I1^xx = B1^xx + C^xx", X.ixx1, X.bxx1, X.cxx);
  b.bi_sum("I2^xx = B2^xx + C^xx", X.ixx2, X.bxx2, X.cxx);

  // three routes to the midpoint-measure box field; the first two are
  // quadrature identities whose residual shrinks with the mesh
  {
    std::vector<double> sqv(xs.values());
    for (double& v : sqv) v *= v;
    const SheetSample sq(X.grid, std::move(sqv));
    b.custom("A^w = (1/2) d(x^2) - int x dx", {{1, 2}, {2, 2}},
             [aw = X.aw, xs, sq](const Tups& tp) {
               const auto& s = tp[0];
               const auto& t = tp[1];
               const double rhs = 0.5 * delta_box(sq, s[0], s[1], t[0], t[1]) -
                                  young2d(xs, xs, s[0], s[1], t[0], t[1], nullptr);
               return std::abs(aw.eval(sp(s), sp(t)) - rhs);
             });
  }
  // The same-index pairing G_a - I_a can only match A^w on boxes anchored at
  // the origin: d_a kills G_a and A^w but not I_a, so as an identity over all
  // boxes the I index must be the opposite one.  Numerics agree (the
  // same-index residual stalls near 0.1 while this form decays at first
  // order), so both are checked in the opposite-index reading and flagged.
  b.bi_sum("G1^xx = A^w + I2^xx", X.gxx1, X.aw, X.ixx2, true);
  b.bi_sum("G2^xx = A^w + I1^xx", X.gxx2, X.aw, X.ixx1, true);
  b.bi_sum("H1^xx = B1^xw + J1^xx", X.hxx1, X.bxw1, X.jxx1);
  b.bi_sum("H2^xx = B2^xw + J2^xx", X.hxx2, X.bxw2, X.jxx2);

  // adjacent-box pairings
  b.bi_eq("d1 K1^xx = dx o2 dx", delta_dir(X.kxx1, 1), circle_product(b.dx, b.dx, 2), true);
  b.bi_eq("d2 K2^xx = dx o1 dx", delta_dir(X.kxx2, 2), circle_product(b.dx, b.dx, 1), true);
  b.bi_zero("d1 L1^xx = 0", delta_dir(X.lxx1, 1));
  b.bi_zero("d2 L2^xx = 0", delta_dir(X.lxx2, 2));
  b.bi_eq("d1 M1^xx = (d1 x) L1^xx", delta_dir(X.mxx1, 1), bi_product(b.d1x, X.lxx1));
  b.bi_eq("d2 M2^xx = (d2 x) L2^xx", delta_dir(X.mxx2, 2), bi_product(b.d2x, X.lxx2));
  b.bi_eq("d1 N1^xx = dx o2 G1^xx", delta_dir(X.nxx1, 1), circle_product(b.dx, X.gxx1, 2),
          true);
  b.bi_eq("d2 N2^xx = dx o1 G2^xx", delta_dir(X.nxx2, 2), circle_product(b.dx, X.gxx2, 1),
          true);
  b.bi_eq("d1 O1^xxx = dx o2 L1^xx", delta_dir(X.oxxx1, 1), circle_product(b.dx, X.lxx1, 2),
          true);
  b.bi_eq("d2 O2^xxx = dx o1 L2^xx", delta_dir(X.oxxx2, 2), circle_product(b.dx, X.lxx2, 1),
          true);

  // single-direction squares
  b.bi_eq("d1 P1 = (d1 x)(d1 x)", delta_dir(X.pxx1, 1), bi_product(b.d1x, b.d1x));
  b.bi_eq("d2 P2 = (d2 x)(d2 x)", delta_dir(X.pxx2, 2), bi_product(b.d2x, b.d2x));
  b.bi_sum("d2 P1 = B1^xx + Q1", delta_dir(X.pxx1, 2), X.bxx1, X.qxx1);
  b.bi_sum("d1 P2 = B2^xx + Q2", delta_dir(X.pxx2, 1), X.bxx2, X.qxx2);
  b.bi_eq("d1 Q1 = dx (d1 x)", delta_dir(X.qxx1, 1), bi_product(b.dx, b.d1x), true);
  b.bi_eq("d2 Q2 = dx (d2 x)", delta_dir(X.qxx2, 2), bi_product(b.dx, b.d2x));

  // product of the two edge increments, and the paired summation-by-parts
  // bracket that rewrites an increment-weighted square
  {
    Rel r;
    r.id = "(d2 x)(d1 x) = G1^xx - Q1";
    r.chains = {{1, 2}, {2, 2}};
    const BiInc lhs = bi_product(b.d2x, b.d1x);
    r.resid = [lhs, g1 = X.gxx1, q1 = X.qxx1](const Tups& tp) {
      return std::abs(lhs.eval(sp(tp[0]), sp(tp[1])) - g1.eval(sp(tp[0]), sp(tp[1])) +
                      q1.eval(sp(tp[0]), sp(tp[1])));
    };
    b.rels.push_back(std::move(r));
  }
  {
    Rel r;
    r.id = "(d1 x)(d2 x) = G2^xx - Q2";
    r.chains = {{1, 2}, {2, 2}};
    const BiInc lhs = bi_product(b.d1x, b.d2x);
    r.resid = [lhs, g2 = X.gxx2, q2 = X.qxx2](const Tups& tp) {
      return std::abs(lhs.eval(sp(tp[0]), sp(tp[1])) - g2.eval(sp(tp[0]), sp(tp[1])) +
                      q2.eval(sp(tp[0]), sp(tp[1])));
    };
    b.rels.push_back(std::move(r));
  }

  b.custom(
      "(d1x)P2 = (d1x)Q2 + H2^xx - int2[(d2x)(dx)(d2x) + (d2x)Q2 + (dx)P2 - (dx)Q2]",
      {{1, 2}, {2, 2}},
      [lhsf = bi_product(b.d1x, X.pxx2), xs, p2 = X.pxx2, q2 = X.qxx2,
       h2 = X.hxx2](const Tups& tp) {
        const auto& s = tp[0];
        const auto& t = tp[1];
        const double lhs = lhsf.eval(sp(s), sp(t));
        double rhs = delta1(xs, s[0], s[1], t[0]) * q2.eval(sp(s), sp(t)) +
                     h2.eval(sp(s), sp(t));
        for (int j = t[0]; j < t[1]; ++j) {
          const int jj[2] = {j, j + 1};
          const double dxb = delta_box(xs, s[0], s[1], t[0], j);
          rhs -= delta2(xs, s[0], t[0], j) * dxb * delta2(xs, s[1], j, j + 1) +
                 delta2(xs, s[0], t[0], j) * q2.eval(sp(s), S(jj, 2)) +
                 dxb * p2.eval(S(&s[1], 1), S(jj, 2)) - dxb * q2.eval(sp(s), S(jj, 2));
        }
        return std::abs(lhs - rhs);
      });
  b.custom(
      "(d2x)P1 = (d2x)Q1 + H1^xx - int1[(d1x)(dx)(d1x) + (d1x)Q1 + (dx)P1 - (dx)Q1]",
      {{1, 2}, {2, 2}},
      [lhsf = bi_product(b.d2x, X.pxx1), xs, p1 = X.pxx1, q1 = X.qxx1,
       h1 = X.hxx1](const Tups& tp) {
        const auto& s = tp[0];
        const auto& t = tp[1];
        const double lhs = lhsf.eval(sp(s), sp(t));
        double rhs = delta2(xs, s[0], t[0], t[1]) * q1.eval(sp(s), sp(t)) +
                     h1.eval(sp(s), sp(t));
        for (int i = s[0]; i < s[1]; ++i) {
          const int ii[2] = {i, i + 1};
          const double dxb = delta_box(xs, s[0], i, t[0], t[1]);
          rhs -= delta1(xs, s[0], i, t[0]) * dxb * delta1(xs, i, i + 1, t[1]) +
                 delta1(xs, s[0], i, t[0]) * q1.eval(S(ii, 2), sp(t)) +
                 dxb * p1.eval(S(ii, 2), S(&t[1], 1)) - dxb * q1.eval(S(ii, 2), sp(t));
        }
        return std::abs(lhs - rhs);
      });

  return std::move(b.rels);
}

}  // namespace

ChenReport verify_chen(const RoughSheet& X, const SheetSample& x, double tol) {
  if (!X.grid.same_as(x.grid()))
    fail_config("verify_chen: sheet does not live on the enhancement grid");
  if (!(tol >= 0.0)) fail_config("verify_chen: tolerance must be nonnegative");

  ChenReport rep;
  rep.tol = tol;
  rep.pass = true;
  const std::vector<Rel> rels = build_relations(X, x);
  rep.relations.reserve(rels.size());
  for (const Rel& r : rels) {
    rep.relations.push_back(run_relation(r, X.grid));
    if (rep.relations.back().max_residual > tol) rep.pass = false;
  }
  return rep;
}

}  // namespace roughsheet
