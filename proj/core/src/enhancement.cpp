#include "roughsheet/enhancement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <utility>

#include <nlohmann/json.hpp>

#include "roughsheet/errors.hpp"

namespace roughsheet {

namespace {

constexpr int kRshFormatVersion = 1;

// Orientation helper: iterate [lo,hi) and multiply by the returned sign, so
// every cell-sum kernel extends to descending tuples the same way the box
// increment does (one sign flip per reversed direction).
inline int orient(int a, int b, int& lo, int& hi) {
  if (a <= b) {
    lo = a;
    hi = b;
    return 1;
  }
  lo = b;
  hi = a;
  return -1;
}

// Shared evaluation state for all field closures of one RoughSheet.  Holds
// the base sheet and the cumulative table of the dw cell measure; every
// kernel below is a plain function of grid indices.  Methods are const and
// the struct never changes after construction, so concurrent evaluation of
// any number of fields is safe.
struct Tables {
  SheetSample x;
  int n, m;
  std::vector<double> W;  // corner-cumulative dw sums, (n x m), W[0][*] = W[*][0] = 0

  explicit Tables(const SheetSample& xs)
      : x(xs), n(xs.n1()), m(xs.n2()), W(static_cast<size_t>(xs.n1()) * xs.n2(), 0.0) {
    for (int i = 1; i < n; ++i) {
      for (int j = 1; j < m; ++j) {
        const double e1a = x.at(i, j - 1) - x.at(i - 1, j - 1);
        const double e1b = x.at(i, j) - x.at(i - 1, j);
        const double e2a = x.at(i - 1, j) - x.at(i - 1, j - 1);
        const double e2b = x.at(i, j) - x.at(i, j - 1);
        const double dw = 0.25 * (e1a + e1b) * (e2a + e2b);
        W[idx(i, j)] = dw + W[idx(i - 1, j)] + W[idx(i, j - 1)] - W[idx(i - 1, j - 1)];
      }
    }
  }

  size_t idx(int i, int j) const { return static_cast<size_t>(i) * m + j; }

  double d1(int i1, int i2, int j) const { return delta1(x, i1, i2, j); }
  double d2(int i, int j1, int j2) const { return delta2(x, i, j1, j2); }
  double box(int i1, int i2, int j1, int j2) const { return delta_box(x, i1, i2, j1, j2); }
  // dw integrated over a box; corner differencing makes the directional
  // coboundaries of this field cancel term by term, hence exactly 0.0.
  double awb(int i1, int i2, int j1, int j2) const {
    return W[idx(i2, j2)] - W[idx(i1, j2)] - W[idx(i2, j1)] + W[idx(i1, j1)];
  }

  // -- running-integrand kernels, direction 1 sums over s cells --
  double bxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += d1(s1, i, u1) * box(i, i + 1, u1, u2);
    return sg * acc;
  }
  double bxw1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += d1(s1, i, u1) * awb(i, i + 1, u1, u2);
    return sg * acc;
  }
  double bxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += d2(s1, u1, j) * box(s1, s2, j, j + 1);
    return sg * acc;
  }
  double bxw2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += d2(s1, u1, j) * awb(s1, s2, j, j + 1);
    return sg * acc;
  }

  // -- base-corner double sums --
  template <typename Inner, typename Measure>
  double corner_sum(int s1, int s2, int u1, int u2, Inner inner, Measure meas) const {
    int ilo, ihi, jlo, jhi;
    const int sg = orient(s1, s2, ilo, ihi) * orient(u1, u2, jlo, jhi);
    double acc = 0.0;
    for (int i = ilo; i < ihi; ++i) {
      for (int j = jlo; j < jhi; ++j) acc += inner(i, j) * meas(i, j);
    }
    return sg * acc;
  }
  double cxxk(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return box(s1, i, u1, j); },
        [&](int i, int j) { return box(i, i + 1, j, j + 1); });
  }
  double cwxk(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return awb(s1, i, u1, j); },
        [&](int i, int j) { return box(i, i + 1, j, j + 1); });
  }
  double cxwk(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return box(s1, i, u1, j); },
        [&](int i, int j) { return awb(i, i + 1, j, j + 1); });
  }
  double cwwk(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return awb(s1, i, u1, j); },
        [&](int i, int j) { return awb(i, i + 1, j, j + 1); });
  }
  double ixx1k(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return d1(s1, i, j); },
        [&](int i, int j) { return box(i, i + 1, j, j + 1); });
  }
  double ixx2k(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return d2(i, u1, j); },
        [&](int i, int j) { return box(i, i + 1, j, j + 1); });
  }
  double jxx1k(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return d1(s1, i, u1) * d2(i, u1, j); },
        [&](int i, int j) { return box(i, i + 1, j, j + 1); });
  }
  double jxx2k(int s1, int s2, int u1, int u2) const {
    return corner_sum(
        s1, s2, u1, u2, [&](int i, int j) { return d2(s1, u1, j) * d1(s1, i, j); },
        [&](int i, int j) { return box(i, i + 1, j, j + 1); });
  }

  // -- split kernels: two free index pairs in the split direction, the inner
  //    sum over the second slot's column collapsed through box additivity --
  double dsplit1k(int a1, int a2, int b1, int b2, int u1, int u2, bool iw, bool ow) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) {
      const double in = iw ? awb(a1, a2, u1, j) : box(a1, a2, u1, j);
      acc += in * (ow ? awb(b1, b2, j, j + 1) : box(b1, b2, j, j + 1));
    }
    return sg * acc;
  }
  double dsplit2k(int c1, int c2, int d1_, int d2_, int u1, int u2, bool iw, bool ow) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double in = iw ? awb(u1, i, c1, c2) : box(u1, i, c1, c2);
      acc += in * (ow ? awb(i, i + 1, d1_, d2_) : box(i, i + 1, d1_, d2_));
    }
    return sg * acc;
  }
  double esplit1k(int a1, int a2, int b1, int b2, int u1, int u2, bool iw, bool ow) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) {
      const double in = iw ? bxw1k(a1, a2, u1, j) : bxx1k(a1, a2, u1, j);
      acc += in * (ow ? awb(b1, b2, j, j + 1) : box(b1, b2, j, j + 1));
    }
    return sg * acc;
  }
  double esplit2k(int c1, int c2, int d1_, int d2_, int u1, int u2, bool iw, bool ow) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double in = iw ? bxw2k(u1, i, c1, c2) : bxx2k(u1, i, c1, c2);
      acc += in * (ow ? awb(i, i + 1, d1_, d2_) : box(i, i + 1, d1_, d2_));
    }
    return sg * acc;
  }
  double fsplit1k(int a1, int a2, int b1, int b2, int u1, int u2, int u3, bool iw, bool ow) const {
    int lo, hi;
    const int sg = orient(u2, u3, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) {
      int plo, phi;
      const int psg = orient(a1, a2, plo, phi);
      double in = 0.0;
      for (int p = plo; p < phi; ++p) {
        in += box(a1, p, u1, u2) * (iw ? awb(p, p + 1, u2, j) : box(p, p + 1, u2, j));
      }
      acc += psg * in * (ow ? awb(b1, b2, j, j + 1) : box(b1, b2, j, j + 1));
    }
    return -sg * acc;
  }
  double fsplit2k(int c1, int c2, int d1_, int d2_, int u1, int u2, int u3, bool iw, bool ow) const {
    int lo, hi;
    const int sg = orient(u2, u3, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) {
      int qlo, qhi;
      const int qsg = orient(c1, c2, qlo, qhi);
      double in = 0.0;
      for (int q = qlo; q < qhi; ++q) {
        in += box(u1, u2, c1, q) * (iw ? awb(u2, i, q, q + 1) : box(u2, i, q, q + 1));
      }
      acc += qsg * in * (ow ? awb(i, i + 1, d1_, d2_) : box(i, i + 1, d1_, d2_));
    }
    return -sg * acc;
  }

  // -- one-direction running sums --
  double gxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += d2(i, u1, u2) * d1(i, i + 1, u2);
    return sg * acc;
  }
  double gxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += d1(s1, s2, j) * d2(s2, j, j + 1);
    return sg * acc;
  }
  double hxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += d1(s1, i, u1) * d2(i, u1, u2) * d1(i, i + 1, u2);
    return sg * acc;
  }
  double hxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += d2(s1, u1, j) * d1(s1, s2, j) * d2(s2, j, j + 1);
    return sg * acc;
  }
  double kxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += box(s1, i, u1, u2) * box(i, i + 1, u1, u2);
    return sg * acc;
  }
  double kxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += box(s1, s2, u1, j) * box(s1, s2, j, j + 1);
    return sg * acc;
  }
  double lxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += d2(i, u1, u2) * box(i, i + 1, u1, u2);
    return sg * acc;
  }
  double lxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += d1(s1, s2, j) * box(s1, s2, j, j + 1);
    return sg * acc;
  }
  double mxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += d1(s1, i, u1) * d2(i, u1, u2) * box(i, i + 1, u1, u2);
    return sg * acc;
  }
  double mxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += d2(s1, u1, j) * d1(s1, s2, j) * box(s1, s2, j, j + 1);
    return sg * acc;
  }
  double nxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += box(s1, i, u1, u2) * d2(i, u1, u2) * d1(i, i + 1, u2);
    return sg * acc;
  }
  double nxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += box(s1, s2, u1, j) * d1(s1, s2, j) * d2(s2, j, j + 1);
    return sg * acc;
  }
  double oxxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i)
      acc += box(s1, i, u1, u2) * d2(i, u1, u2) * box(i, i + 1, u1, u2);
    return sg * acc;
  }
  double oxxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j)
      acc += box(s1, s2, u1, j) * d1(s1, s2, j) * box(s1, s2, j, j + 1);
    return sg * acc;
  }
  double pxx1k(int s1, int s2, int u1) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += d1(s1, i, u1) * d1(i, i + 1, u1);
    return sg * acc;
  }
  double pxx2k(int s1, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += d2(s1, u1, j) * d2(s1, j, j + 1);
    return sg * acc;
  }
  double qxx1k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(s1, s2, lo, hi);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += box(s1, i, u1, u2) * d1(i, i + 1, u2);
    return sg * acc;
  }
  double qxx2k(int s1, int s2, int u1, int u2) const {
    int lo, hi;
    const int sg = orient(u1, u2, lo, hi);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += box(s1, s2, u1, j) * d2(s2, j, j + 1);
    return sg * acc;
  }
};

using TPtr = std::shared_ptr<const Tables>;
using S = std::span<const int>;

BiInc bi22(const Grid2D& g, TPtr t, double (Tables::*kern)(int, int, int, int) const) {
  return BiInc(g, 2, 2, [t, kern](S s, S u) { return ((*t).*kern)(s[0], s[1], u[0], u[1]); });
}

SplitField dsplit(const Grid2D& g, TPtr t, int dir, bool iw, bool ow) {
  if (dir == 1) {
    return SplitField(g, 1, 2, 2, 2, [t, iw, ow](S a, S b, S u) {
      return t->dsplit1k(a[0], a[1], b[0], b[1], u[0], u[1], iw, ow);
    });
  }
  return SplitField(g, 2, 2, 2, 2, [t, iw, ow](S a, S b, S u) {
    return t->dsplit2k(a[0], a[1], b[0], b[1], u[0], u[1], iw, ow);
  });
}
SplitField esplit(const Grid2D& g, TPtr t, int dir, bool iw, bool ow) {
  if (dir == 1) {
    return SplitField(g, 1, 2, 2, 2, [t, iw, ow](S a, S b, S u) {
      return t->esplit1k(a[0], a[1], b[0], b[1], u[0], u[1], iw, ow);
    });
  }
  return SplitField(g, 2, 2, 2, 2, [t, iw, ow](S a, S b, S u) {
    return t->esplit2k(a[0], a[1], b[0], b[1], u[0], u[1], iw, ow);
  });
}
SplitField fsplit(const Grid2D& g, TPtr t, int dir, bool iw, bool ow) {
  if (dir == 1) {
    return SplitField(g, 1, 2, 2, 3, [t, iw, ow](S a, S b, S u) {
      return t->fsplit1k(a[0], a[1], b[0], b[1], u[0], u[1], u[2], iw, ow);
    });
  }
  return SplitField(g, 2, 2, 2, 3, [t, iw, ow](S a, S b, S u) {
    return t->fsplit2k(a[0], a[1], b[0], b[1], u[0], u[1], u[2], iw, ow);
  });
}

uint64_t fnv64(const void* data, size_t nbytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < nbytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace

RoughSheet enhance_smooth(const SheetSample& x, double alpha, double beta) {
  if (!(alpha > 1.0 / 3.0 && alpha <= 1.0 && beta > 1.0 / 3.0 && beta <= 1.0)) {
    fail_config("enhance_smooth: Holder exponents must lie in (1/3, 1]");
  }
  if (x.n1() < 9 || x.n2() < 9) {
    fail_config("enhance_smooth: grid too coarse, need at least 9 points per direction");
  }
  const Grid2D g = x.grid();
  TPtr t = std::make_shared<const Tables>(x);

  return RoughSheet{
      .alpha = alpha,
      .beta = beta,
      .grid = g,
      .x = x,
      .ax = delta_full(BiInc::from_sheet(x)),
      .aw = BiInc(g, 2, 2, [t](S s, S u) { return t->awb(s[0], s[1], u[0], u[1]); }),
      .bxx1 = bi22(g, t, &Tables::bxx1k),
      .bxx2 = bi22(g, t, &Tables::bxx2k),
      .bxw1 = bi22(g, t, &Tables::bxw1k),
      .bxw2 = bi22(g, t, &Tables::bxw2k),
      .cxx = bi22(g, t, &Tables::cxxk),
      .cwx = bi22(g, t, &Tables::cwxk),
      .cxw = bi22(g, t, &Tables::cxwk),
      .cww = bi22(g, t, &Tables::cwwk),
      .dxx1 = dsplit(g, t, 1, false, false),
      .dwx1 = dsplit(g, t, 1, true, false),
      .dxw1 = dsplit(g, t, 1, false, true),
      .dww1 = dsplit(g, t, 1, true, true),
      .dxx2 = dsplit(g, t, 2, false, false),
      .dwx2 = dsplit(g, t, 2, true, false),
      .dxw2 = dsplit(g, t, 2, false, true),
      .dww2 = dsplit(g, t, 2, true, true),
      .exxx1 = esplit(g, t, 1, false, false),
      .exwx1 = esplit(g, t, 1, true, false),
      .exxw1 = esplit(g, t, 1, false, true),
      .exww1 = esplit(g, t, 1, true, true),
      .exxx2 = esplit(g, t, 2, false, false),
      .exwx2 = esplit(g, t, 2, true, false),
      .exxw2 = esplit(g, t, 2, false, true),
      .exww2 = esplit(g, t, 2, true, true),
      .fxxx1 = fsplit(g, t, 1, false, false),
      .fxwx1 = fsplit(g, t, 1, true, false),
      .fxxw1 = fsplit(g, t, 1, false, true),
      .fxww1 = fsplit(g, t, 1, true, true),
      .fxxx2 = fsplit(g, t, 2, false, false),
      .fxwx2 = fsplit(g, t, 2, true, false),
      .fxxw2 = fsplit(g, t, 2, false, true),
      .fxww2 = fsplit(g, t, 2, true, true),
      .gxx1 = bi22(g, t, &Tables::gxx1k),
      .gxx2 = bi22(g, t, &Tables::gxx2k),
      .hxx1 = bi22(g, t, &Tables::hxx1k),
      .hxx2 = bi22(g, t, &Tables::hxx2k),
      .ixx1 = bi22(g, t, &Tables::ixx1k),
      .ixx2 = bi22(g, t, &Tables::ixx2k),
      .jxx1 = bi22(g, t, &Tables::jxx1k),
      .jxx2 = bi22(g, t, &Tables::jxx2k),
      .kxx1 = bi22(g, t, &Tables::kxx1k),
      .kxx2 = bi22(g, t, &Tables::kxx2k),
      .lxx1 = bi22(g, t, &Tables::lxx1k),
      .lxx2 = bi22(g, t, &Tables::lxx2k),
      .mxx1 = bi22(g, t, &Tables::mxx1k),
      .mxx2 = bi22(g, t, &Tables::mxx2k),
      .nxx1 = bi22(g, t, &Tables::nxx1k),
      .nxx2 = bi22(g, t, &Tables::nxx2k),
      .oxxx1 = bi22(g, t, &Tables::oxxx1k),
      .oxxx2 = bi22(g, t, &Tables::oxxx2k),
      .pxx1 = BiInc(g, 2, 1, [t](S s, S u) { return t->pxx1k(s[0], s[1], u[0]); }),
      .pxx2 = BiInc(g, 1, 2, [t](S s, S u) { return t->pxx2k(s[0], u[0], u[1]); }),
      .qxx1 = bi22(g, t, &Tables::qxx1k),
      .qxx2 = bi22(g, t, &Tables::qxx2k),
  };
}

std::vector<RoughSheet::BiEntry> RoughSheet::bi_entries() const {
  const double a = alpha, b = beta;
  return {
      {"ax", &ax, a, b},        {"aw", &aw, a, b},
      {"bxx1", &bxx1, 2 * a, b}, {"bxx2", &bxx2, a, 2 * b},
      {"bxw1", &bxw1, 2 * a, b}, {"bxw2", &bxw2, a, 2 * b},
      {"cxx", &cxx, 2 * a, 2 * b}, {"cwx", &cwx, 2 * a, 2 * b},
      {"cxw", &cxw, 2 * a, 2 * b}, {"cww", &cww, 2 * a, 2 * b},
      {"gxx1", &gxx1, a, b},     {"gxx2", &gxx2, a, b},
      {"hxx1", &hxx1, 2 * a, b}, {"hxx2", &hxx2, a, 2 * b},
      {"ixx1", &ixx1, 2 * a, b}, {"ixx2", &ixx2, a, 2 * b},
      {"jxx1", &jxx1, 2 * a, 2 * b}, {"jxx2", &jxx2, 2 * a, 2 * b},
      {"kxx1", &kxx1, 2 * a, 2 * b}, {"kxx2", &kxx2, 2 * a, 2 * b},
      {"lxx1", &lxx1, a, 2 * b}, {"lxx2", &lxx2, 2 * a, b},
      {"mxx1", &mxx1, 2 * a, 2 * b}, {"mxx2", &mxx2, 2 * a, 2 * b},
      {"nxx1", &nxx1, 2 * a, 2 * b}, {"nxx2", &nxx2, 2 * a, 2 * b},
      {"oxxx1", &oxxx1, 2 * a, 3 * b}, {"oxxx2", &oxxx2, 3 * a, 2 * b},
      {"pxx1", &pxx1, 2 * a, 0.0}, {"pxx2", &pxx2, 0.0, 2 * b},
      {"qxx1", &qxx1, 2 * a, b}, {"qxx2", &qxx2, a, 2 * b},
  };
}

std::vector<RoughSheet::SplitEntry> RoughSheet::split_entries() const {
  const double a = alpha, b = beta;
  std::vector<SplitEntry> out;
  const SplitField* d1s[] = {&dxx1, &dwx1, &dxw1, &dww1};
  const SplitField* d2s[] = {&dxx2, &dwx2, &dxw2, &dww2};
  const SplitField* e1s[] = {&exxx1, &exwx1, &exxw1, &exww1};
  const SplitField* e2s[] = {&exxx2, &exwx2, &exxw2, &exww2};
  const SplitField* f1s[] = {&fxxx1, &fxwx1, &fxxw1, &fxww1};
  const SplitField* f2s[] = {&fxxx2, &fxwx2, &fxxw2, &fxww2};
  const char* dn1[] = {"dxx1", "dwx1", "dxw1", "dww1"};
  const char* dn2[] = {"dxx2", "dwx2", "dxw2", "dww2"};
  const char* en1[] = {"exxx1", "exwx1", "exxw1", "exww1"};
  const char* en2[] = {"exxx2", "exwx2", "exxw2", "exww2"};
  const char* fn1[] = {"fxxx1", "fxwx1", "fxxw1", "fxww1"};
  const char* fn2[] = {"fxxx2", "fxwx2", "fxxw2", "fxww2"};
  for (int v = 0; v < 4; ++v) {
    out.push_back({dn1[v], d1s[v], a, a, 2 * b});
    out.push_back({dn2[v], d2s[v], b, b, 2 * a});
    out.push_back({en1[v], e1s[v], 2 * a, a, 2 * b});
    out.push_back({en2[v], e2s[v], 2 * b, b, 2 * a});
    out.push_back({fn1[v], f1s[v], 2 * a, a, 3 * b});
    out.push_back({fn2[v], f2s[v], 2 * b, b, 3 * a});
  }
  return out;
}

const RelationCheck* ChenReport::worst() const {
  const RelationCheck* w = nullptr;
  for (const auto& r : relations) {
    if (!w || r.max_residual > w->max_residual) w = &r;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Holder norm scan

namespace {

// Tuple spaces above this size are sampled instead of enumerated.
constexpr size_t kScanCap = size_t{1} << 17;
constexpr int kScanSamples = 20000;

double comb(int n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

// Draws a strictly ascending index tuple of the given length.
void draw_tuple(std::mt19937_64& rng, int n, int len, std::vector<int>& out) {
  out.clear();
  while (static_cast<int>(out.size()) < len) {
    int v = static_cast<int>(rng() % static_cast<uint64_t>(n));
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
}

double span_weight(const std::vector<double>& pts, const std::vector<int>& idx, double e) {
  if (idx.size() < 2 || e == 0.0) return 1.0;
  return std::pow(pts[idx.back()] - pts[idx.front()], e);
}

double scan_bi(const BiInc& f, double e1, double e2) {
  const auto& p1 = f.grid().g1().points();
  const auto& p2 = f.grid().g2().points();
  const int n = static_cast<int>(p1.size()), m = static_cast<int>(p2.size());
  const int k = f.k(), l = f.l();
  double best = 0.0;
  auto consider = [&](const std::vector<int>& s, const std::vector<int>& u) {
    const double v = f.eval(S(s.data(), s.size()), S(u.data(), u.size()));
    const double r = std::abs(v) / (span_weight(p1, s, e1) * span_weight(p2, u, e2));
    if (r > best) best = r;
  };
  if (comb(n, k) * comb(m, l) <= static_cast<double>(kScanCap)) {
    std::vector<int> s(static_cast<size_t>(k)), u(static_cast<size_t>(l));
    // arities here are 1 or 2 only
    for (int i1 = 0; i1 < n; ++i1) {
      for (int i2 = (k == 2 ? i1 + 1 : n - 1); i2 < n; ++i2) {
        s[0] = i1;
        if (k == 2) s[1] = i2;
        for (int j1 = 0; j1 < m; ++j1) {
          for (int j2 = (l == 2 ? j1 + 1 : m - 1); j2 < m; ++j2) {
            u[0] = j1;
            if (l == 2) u[1] = j2;
            consider(s, u);
            if (l == 1) break;
          }
        }
        if (k == 1) break;
      }
    }
    return best;
  }
  std::mt19937_64 rng(fnv64("scan_bi", 7) ^ (static_cast<uint64_t>(n) << 32) ^
                      static_cast<uint64_t>(m));
  std::vector<int> s, u;
  for (int it = 0; it < kScanSamples; ++it) {
    draw_tuple(rng, n, k, s);
    draw_tuple(rng, m, l, u);
    consider(s, u);
  }
  return best;
}

double scan_split(const SplitField& f, double es1, double es2, double eo) {
  const auto& p1 = f.grid().g1().points();
  const auto& p2 = f.grid().g2().points();
  const int n = static_cast<int>(p1.size()), m = static_cast<int>(p2.size());
  const bool dir1 = f.dir() == 1;
  const auto& ps = dir1 ? p1 : p2;  // split-direction points
  const auto& po = dir1 ? p2 : p1;
  const int ns = dir1 ? n : m, no = dir1 ? m : n;
  const int oa = f.other_arity();
  double best = 0.0;
  auto consider = [&](const std::vector<int>& a, const std::vector<int>& b,
                      const std::vector<int>& u) {
    const double v = f.eval(S(a.data(), a.size()), S(b.data(), b.size()), S(u.data(), u.size()));
    const double w = span_weight(ps, a, es1) * span_weight(ps, b, es2) * span_weight(po, u, eo);
    const double r = std::abs(v) / w;
    if (r > best) best = r;
  };
  std::mt19937_64 rng(fnv64("scan_split", 10) ^ (static_cast<uint64_t>(ns) << 32) ^
                      static_cast<uint64_t>(f.other_arity()));
  std::vector<int> a, b, u;
  const double total = comb(ns, 2) * comb(ns, 2) * comb(no, oa);
  if (total <= static_cast<double>(kScanCap)) {
    for (int a1 = 0; a1 < ns; ++a1)
      for (int a2 = a1 + 1; a2 < ns; ++a2)
        for (int b1 = 0; b1 < ns; ++b1)
          for (int b2 = b1 + 1; b2 < ns; ++b2) {
            a = {a1, a2};
            b = {b1, b2};
            if (oa == 2) {
              for (int u1 = 0; u1 < no; ++u1)
                for (int u2 = u1 + 1; u2 < no; ++u2) {
                  u = {u1, u2};
                  consider(a, b, u);
                }
            } else {
              for (int u1 = 0; u1 < no; ++u1)
                for (int u2 = u1 + 1; u2 < no; ++u2)
                  for (int u3 = u2 + 1; u3 < no; ++u3) {
                    u = {u1, u2, u3};
                    consider(a, b, u);
                  }
            }
          }
    return best;
  }
  for (int it = 0; it < kScanSamples; ++it) {
    draw_tuple(rng, ns, 2, a);
    draw_tuple(rng, ns, 2, b);
    draw_tuple(rng, no, oa, u);
    consider(a, b, u);
  }
  return best;
}

}  // namespace

double roughsheet_norm(const RoughSheet& X,
                       std::vector<std::pair<std::string, double>>* breakdown) {
  double total = 0.0;
  for (const auto& e : X.bi_entries()) {
    const double v = scan_bi(*e.field, e.e1, e.e2);
    if (breakdown) breakdown->emplace_back(e.name, v);
    total += v;
  }
  for (const auto& e : X.split_entries()) {
    const double v = scan_split(*e.field, e.e_slot1, e.e_slot2, e.e_other);
    if (breakdown) breakdown->emplace_back(e.name, v);
    total += v;
  }
  return total;
}

double roughsheet_norm(const RoughSheet& X) { return roughsheet_norm(X, nullptr); }

// ---------------------------------------------------------------------------
// .rsh container

void save_roughsheet(const RoughSheet& X, const std::string& path) {
  const std::vector<double>& xs = X.x.values();

  nlohmann::json manifest;
  manifest["format"] = kRshFormatVersion;
  manifest["alpha"] = X.alpha;
  manifest["beta"] = X.beta;
  manifest["g1"] = X.grid.g1().points();
  manifest["g2"] = X.grid.g2().points();
  manifest["T1"] = X.grid.g1().T();
  manifest["T2"] = X.grid.g2().T();
  manifest["x_hash"] = hash_hex(fnv64(xs.data(), xs.size() * sizeof(double)));

  nlohmann::json fields = nlohmann::json::array();
  nlohmann::json blobs = nlohmann::json::array();
  blobs.push_back({{"name", "x"}, {"count", xs.size()}});
  std::vector<const std::vector<double>*> payloads = {&xs};
  for (const auto& e : X.bi_entries()) {
    const std::vector<double>* cache = e.field->dense_cache();
    fields.push_back({{"name", e.name},
                      {"kind", "bi"},
                      {"k", e.field->k()},
                      {"l", e.field->l()},
                      {"cached", cache != nullptr}});
    if (cache) {
      blobs.push_back({{"name", e.name}, {"count", cache->size()}});
      payloads.push_back(cache);
    }
  }
  for (const auto& e : X.split_entries()) {
    fields.push_back({{"name", e.name},
                      {"kind", "split"},
                      {"dir", e.field->dir()},
                      {"k1", e.field->k1()},
                      {"k2", e.field->k2()},
                      {"other", e.field->other_arity()},
                      {"cached", false}});
  }
  manifest["fields"] = std::move(fields);
  manifest["blobs"] = std::move(blobs);
  const std::string h = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot open for writing: " + path);
  out.write("RSH1", 4);
  const uint32_t len = static_cast<uint32_t>(h.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto* p : payloads) {
    out.write(reinterpret_cast<const char*>(p->data()),
              static_cast<std::streamsize>(p->size() * sizeof(double)));
  }
  if (!out) fail_io("write failed: " + path);
}

RoughSheet load_roughsheet(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RSH1", 4) != 0) fail_io("not a .rsh file: " + path);
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || len == 0 || len > (1u << 26)) fail_io("corrupt .rsh header: " + path);
  std::string h(len, '\0');
  in.read(h.data(), len);
  if (!in) fail_io("corrupt .rsh header: " + path);

  nlohmann::json manifest = nlohmann::json::parse(h, nullptr, false);
  if (manifest.is_discarded()) fail_io("corrupt .rsh header JSON: " + path);
  if (manifest.value("format", -1) != kRshFormatVersion)
    fail_io("unsupported .rsh version: " + path);

  Grid1D g1(manifest.at("g1").get<std::vector<double>>());
  Grid1D g2(manifest.at("g2").get<std::vector<double>>());
  Grid2D grid(g1, g2);
  const double alpha = manifest.at("alpha").get<double>();
  const double beta = manifest.at("beta").get<double>();
  if (!(alpha > 1.0 / 3.0 && alpha <= 1.0 && beta > 1.0 / 3.0 && beta <= 1.0))
    fail_io("corrupt .rsh manifest: exponents out of range: " + path);
  if (grid.n1() < 9 || grid.n2() < 9) fail_io("corrupt .rsh manifest: grid too small: " + path);

  std::map<std::string, std::vector<double>> raw;
  for (const auto& b : manifest.at("blobs")) {
    const std::string name = b.at("name").get<std::string>();
    const size_t count = b.at("count").get<size_t>();
    if (count == 0 || count > (size_t{1} << 28)) fail_io("corrupt .rsh blob directory: " + path);
    std::vector<double> v(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
      fail_io("truncated .rsh payload: " + path);
    raw[name] = std::move(v);
  }

  auto xit = raw.find("x");
  if (xit == raw.end()) fail_io("corrupt .rsh payload: base sheet blob missing: " + path);
  if (xit->second.size() != static_cast<size_t>(grid.n1()) * grid.n2())
    fail_io("corrupt .rsh payload: base sheet blob size mismatch: " + path);
  const std::string want = manifest.value("x_hash", "");
  if (want != hash_hex(fnv64(xit->second.data(), xit->second.size() * sizeof(double))))
    fail_io("corrupt .rsh payload: base-sheet hash mismatch: " + path);

  SheetSample x(grid, std::move(xit->second));
  RoughSheet X = enhance_smooth(x, alpha, beta);

  std::map<std::string, const BiInc*> by_name;
  for (const auto& e : X.bi_entries()) by_name[e.name] = e.field;
  for (auto& [name, vals] : raw) {
    if (name == "x") continue;
    auto it = by_name.find(name);
    if (it == by_name.end()) fail_io("corrupt .rsh payload: unknown field blob " + name);
    size_t expect = 1;
    for (int i = 0; i < it->second->k(); ++i) expect *= static_cast<size_t>(grid.n1());
    for (int i = 0; i < it->second->l(); ++i) expect *= static_cast<size_t>(grid.n2());
    if (vals.size() != expect) fail_io("corrupt .rsh payload: blob size mismatch for " + name);
    it->second->adopt_dense(std::move(vals));
  }
  return X;
}

}  // namespace roughsheet
