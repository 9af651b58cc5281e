#include "roughsheet/young2d.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "roughsheet/errors.hpp"

namespace roughsheet {

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void check_box(const Grid2D& g, int s_lo, int s_hi, int t_lo, int t_hi,
               const char* who) {
  const int n = g.n1();
  const int m = g.n2();
  if (s_lo < 0 || s_hi >= n || t_lo < 0 || t_hi >= m) {
    fail_config(std::string(who) + ": box index out of range");
  }
  if (!(s_lo < s_hi) || !(t_lo < t_hi)) {
    fail_config(std::string(who) + ": box indices must be ordered");
  }
}

void check_same_grid(const SheetSample& a, const SheetSample& b,
                     const char* who) {
  if (!a.grid().same_as(b.grid())) {
    fail_config(std::string(who) + ": sheets live on different grids");
  }
}

}  // namespace

TripleVariant parse_triple_variant(std::string_view name) {
  if (name == "d1x_d2z") return TripleVariant::d1x_d2z;
  if (name == "d2z_d1x") return TripleVariant::d2z_d1x;
  if (name == "bullet") return TripleVariant::bullet;
  fail_config("parse_triple_variant: unknown variant '" + std::string(name) + "'");
}

double fitted_sheet_exponent(const SheetSample& x, int dir) {
  if (dir != 1 && dir != 2) fail_config("fitted_sheet_exponent: direction must be 1 or 2");
  const Grid1D& along = (dir == 1) ? x.grid().g1() : x.grid().g2();
  const int n = along.size();
  const int m = (dir == 1) ? x.grid().n2() : x.grid().n1();
  std::vector<double> lx, ly;
  for (int d = 1; d < n; d *= 2) {
    double inc = 0.0, gap = 0.0;
    int cnt = 0;
    for (int i = 0; i + d < n; ++i) {
      for (int j = 0; j < m; ++j) {
        inc += (dir == 1) ? std::abs(x.at(i + d, j) - x.at(i, j))
                          : std::abs(x.at(j, i + d) - x.at(j, i));
        ++cnt;
      }
      gap += (along[i + d] - along[i]) * m;
    }
    if (cnt == 0 || inc == 0.0) continue;
    lx.push_back(std::log(gap / cnt));
    ly.push_back(std::log(inc / cnt));
  }
  if (lx.size() < 2) return 10.0;  // constant along this direction
  return ls_slope(lx, ly);
}

double young2d(const SheetSample& f, const SheetSample& g, int s_lo, int s_hi,
               int t_lo, int t_hi, bool* regularity_warning) {
  check_same_grid(f, g, "young2d");
  check_box(f.grid(), s_lo, s_hi, t_lo, t_hi, "young2d");
  if (regularity_warning) {
    *regularity_warning =
        fitted_sheet_exponent(f, 1) + fitted_sheet_exponent(g, 1) <= 1.0 ||
        fitted_sheet_exponent(f, 2) + fitted_sheet_exponent(g, 2) <= 1.0;
  }
  double acc = 0.0;
  for (int i = s_lo; i < s_hi; ++i)
    for (int j = t_lo; j < t_hi; ++j)
      acc += f.at(i, j) * delta_box(g, i, i + 1, j, j + 1);
  return acc;
}

double young2d_triple(const SheetSample& y, const SheetSample& x,
                      const SheetSample& z, int s_lo, int s_hi, int t_lo,
                      int t_hi, TripleVariant variant) {
  check_same_grid(y, x, "young2d_triple");
  check_same_grid(y, z, "young2d_triple");
  check_box(y.grid(), s_lo, s_hi, t_lo, t_hi, "young2d_triple");
  double acc = 0.0;
  switch (variant) {
    case TripleVariant::d1x_d2z:
      for (int i = s_lo; i < s_hi; ++i)
        for (int j = t_lo; j < t_hi; ++j)
          acc += y.at(i, j) * delta1(x, i, i + 1, j) * delta2(z, i + 1, j, j + 1);
      break;
    case TripleVariant::d2z_d1x:
      for (int i = s_lo; i < s_hi; ++i)
        for (int j = t_lo; j < t_hi; ++j)
          acc += y.at(i, j) * delta2(z, i, j, j + 1) * delta1(x, i, i + 1, j + 1);
      break;
    case TripleVariant::bullet:
      for (int i = s_lo; i < s_hi; ++i)
        for (int j = t_lo; j < t_hi; ++j)
          acc += y.at(i, j) * delta1(x, i, i + 1, j) * delta2(z, i, j, j + 1);
      break;
    default:
      fail_config("young2d_triple: unknown variant");
  }
  return acc;
}

double young2d_mixed(const SheetSample& f, const SheetSample& g, int s_lo,
                     int s_hi, int t_lo, int t_hi, bool* regularity_warning) {
  if (regularity_warning) {
    *regularity_warning = fitted_sheet_exponent(g, 1) <= 0.5 ||
                          fitted_sheet_exponent(g, 2) <= 0.5;
  }
  return young2d_triple(f, g, g, s_lo, s_hi, t_lo, t_hi, TripleVariant::d1x_d2z);
}

double young_change_of_variable_residual(
    const std::function<double(double)>& phi,
    const std::function<double(double)>& dphi,
    const std::function<double(double)>& ddphi, const SheetSample& x, int s_lo,
    int s_hi, int t_lo, int t_hi, bool* regularity_warning) {
  if (!phi || !dphi || !ddphi) {
    fail_config("young_change_of_variable_residual: missing derivative");
  }
  check_box(x.grid(), s_lo, s_hi, t_lo, t_hi, "young_change_of_variable_residual");
  if (regularity_warning) {
    *regularity_warning = fitted_sheet_exponent(x, 1) <= 0.5 ||
                          fitted_sheet_exponent(x, 2) <= 0.5;
  }
  const int n = x.grid().n1();
  const int m = x.grid().n2();
  std::vector<double> fx(static_cast<size_t>(n) * m);
  std::vector<double> dfx(fx.size()), ddfx(fx.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double v = x.at(i, j);
      const size_t off = static_cast<size_t>(i) * m + j;
      fx[off] = phi(v);
      dfx[off] = dphi(v);
      ddfx[off] = ddphi(v);
    }
  }
  SheetSample phix(x.grid(), std::move(fx));
  SheetSample dphix(x.grid(), std::move(dfx));
  SheetSample ddphix(x.grid(), std::move(ddfx));
  const double lhs = delta_box(phix, s_lo, s_hi, t_lo, t_hi);
  const double first = young2d(dphix, x, s_lo, s_hi, t_lo, t_hi);
  const double second = young2d_mixed(ddphix, x, s_lo, s_hi, t_lo, t_hi);
  return lhs - first - second;
}

}  // namespace roughsheet
