#include "roughsheet/sewing1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "roughsheet/errors.hpp"

namespace roughsheet {

namespace {

void check_sample_shape(const Grid1D& grid, const std::vector<double>& f, const char* what) {
  if (static_cast<int>(f.size()) != grid.size())
    fail_config(std::string(what) + ": sample count does not match grid size");
  for (double v : f)
    if (!std::isfinite(v)) fail_config(std::string(what) + ": non-finite sample");
}

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) return 0.0;
  return sxy / sxx;
}

}  // namespace

Inc2::Inc2(Grid1D grid, std::vector<double> dense) : grid_(std::move(grid)) {
  n_ = grid_.size();
  if (dense.size() != static_cast<size_t>(n_) * static_cast<size_t>(n_))
    fail_config("Inc2: dense storage must be n*n");
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      double v = dense[static_cast<size_t>(i) * n_ + j];
      if (!std::isfinite(v)) fail_config("Inc2: non-finite entry");
      if (i == j && v != 0.0) fail_config("Inc2: diagonal entries must vanish");
    }
  }
  v_ = std::make_shared<const std::vector<double>>(std::move(dense));
}

Inc2 Inc2::from_fn(const Grid1D& grid, const std::function<double(double, double)>& a) {
  const int n = grid.size();
  std::vector<double> v(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      v[static_cast<size_t>(i) * n + j] = (i == j) ? 0.0 : a(grid[i], grid[j]);
  return Inc2(grid, std::move(v));
}

Inc3::Inc3(Grid1D grid, std::function<double(int, int, int)> eval)
    : grid_(std::move(grid)), eval_(std::move(eval)) {}

Inc2 delta1d(const Grid1D& grid, const std::vector<double>& f) {
  check_sample_shape(grid, f, "delta1d");
  const int n = grid.size();
  std::vector<double> v(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v[static_cast<size_t>(i) * n + j] = f[i] - f[j];
  return Inc2(grid, std::move(v));
}

Inc3 delta1d(const Inc2& a) {
  // (delta a)(i,j,k) = a(i,k) - a(i,j) - a(j,k).  Both degenerate cases
  // (i == j, j == k) cancel to an exact floating-point zero because the
  // diagonal of a vanishes.
  return Inc3(a.grid(), [a](int i, int j, int k) { return a.at(i, k) - a.at(i, j) - a.at(j, k); });
}

Inc3 c3_chain(const Inc2& a, const Inc2& b) {
  return Inc3(a.grid(), [a, b](int i, int j, int k) { return a.at(i, j) * b.at(j, k); });
}

HolderReport holder_norm_1d(const Inc2& g, double mu) {
  if (!(mu > 0)) fail_config("holder_norm_1d: exponent must be positive");
  const auto& p = g.grid().points();
  const int n = g.size();
  HolderReport rep;
  rep.exponent1 = mu;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double q = std::abs(g.at(i, j)) / std::pow(std::abs(p[i] - p[j]), mu);
      if (q > rep.norm) {
        rep.norm = q;
        rep.argmax = {i, j, -1};
      }
    }
  }
  return rep;
}

HolderReport holder_norm_c3(const Inc3& h, double gamma, double rho) {
  if (!(gamma > 0) || !(rho > 0)) fail_config("holder_norm_c3: exponents must be positive");
  const auto& p = h.grid().points();
  const int n = h.grid().size();
  HolderReport rep;
  rep.exponent1 = gamma;
  rep.exponent2 = rho;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double outer = std::pow(std::abs(p[i] - p[j]), rho);
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        double q = std::abs(h.at(i, j, k)) / (std::pow(std::abs(p[j] - p[k]), gamma) * outer);
        if (q > rep.norm) {
          rep.norm = q;
          rep.argmax = {i, j, k};
        }
      }
    }
  }
  return rep;
}

double sewing_sum_1d(const Inc2& a, int s_idx, int t_idx) {
  if (s_idx < 0 || t_idx >= a.size()) fail_config("sewing_sum_1d: index out of range");
  if (!(s_idx < t_idx)) fail_config("sewing_sum_1d: need s_idx < t_idx");
  double acc = 0.0;
  for (int m = s_idx; m < t_idx; ++m) acc += a.at(m + 1, m);
  return acc;
}

double lambda_sum_1d(const Inc3& h, int lo_idx, int hi_idx) {
  if (lo_idx < 0 || hi_idx >= h.grid().size()) fail_config("lambda_sum_1d: index out of range");
  if (lo_idx > hi_idx) fail_config("lambda_sum_1d: need lo_idx <= hi_idx");
  double acc = 0.0;
  for (int m = lo_idx; m < hi_idx; ++m) acc += h.at(m + 1, m, lo_idx);
  return acc;
}

// Crude regularity probe for the coboundary of a 2-increment: mean |delta a|
// over triples at matched dyadic separations, slope-fitted in log-log.
static double fitted_c3_exponent_sum(const Inc2& a) {
  const auto& p = a.grid().points();
  const int n = a.size();
  std::vector<double> lx, ly;
  for (int d = 1; 2 * d < n; d *= 2) {
    double acc = 0.0, gap = 0.0;
    int cnt = 0;
    for (int k = 0; k + 2 * d < n; ++k) {
      int j = k + d, i = k + 2 * d;
      acc += std::abs(a.at(i, k) - a.at(i, j) - a.at(j, k));
      gap += (p[j] - p[k]) * (p[i] - p[j]);
      ++cnt;
    }
    if (cnt == 0 || acc == 0.0) continue;
    lx.push_back(std::log(gap / cnt));  // ~ 2*mu-scale per unit exponent sum
    ly.push_back(std::log(acc / cnt));
  }
  if (lx.size() < 2) return 2.0;  // too few scales (or an exact coboundary): no complaint
  // gap is a product of two spacings, so the slope measures (gamma+rho)/2.
  return 2.0 * ls_slope(lx, ly);
}

Inc2 lambda_delta_1d(const Inc2& a, bool* regularity_warning) {
  if (regularity_warning) *regularity_warning = fitted_c3_exponent_sum(a) <= 1.0;
  const int n = a.size();
  // Prefix sums of the consecutive-pair values make every interval query O(1).
  std::vector<double> prefix(static_cast<size_t>(n), 0.0);
  for (int m = 0; m + 1 < n; ++m) prefix[m + 1] = prefix[m] + a.at(m + 1, m);
  std::vector<double> v(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double sew = (i >= j) ? prefix[i] - prefix[j] : -(prefix[j] - prefix[i]);
      v[static_cast<size_t>(i) * n + j] = a.at(i, j) - sew;
    }
  }
  return Inc2(a.grid(), std::move(v));
}

double young_integral_1d(const Grid1D& grid, const std::vector<double>& f,
                         const std::vector<double>& g, int s_idx, int t_idx,
                         bool* regularity_warning) {
  check_sample_shape(grid, f, "young_integral_1d (integrand)");
  check_sample_shape(grid, g, "young_integral_1d (integrator)");
  if (s_idx < 0 || t_idx >= grid.size()) fail_config("young_integral_1d: index out of range");
  if (!(s_idx < t_idx)) fail_config("young_integral_1d: need s_idx < t_idx");
  if (regularity_warning) {
    *regularity_warning =
        fitted_holder_exponent(grid, f) + fitted_holder_exponent(grid, g) <= 1.0;
  }
  double acc = 0.0;
  for (int m = s_idx; m < t_idx; ++m) acc += f[m] * (g[m + 1] - g[m]);
  return acc;
}

double rough_integral_step2_1d(const std::function<double(double)>& phi,
                               const std::function<double(double)>& dphi,
                               const Grid1D& grid, const std::vector<double>& x,
                               const Inc2& area, int s_idx, int t_idx) {
  check_sample_shape(grid, x, "rough_integral_step2_1d");
  if (area.size() != grid.size())
    fail_config("rough_integral_step2_1d: area grid does not match path grid");
  if (s_idx < 0 || t_idx >= grid.size()) fail_config("rough_integral_step2_1d: index out of range");
  if (!(s_idx < t_idx)) fail_config("rough_integral_step2_1d: need s_idx < t_idx");

  // The area must cobound to (dx)(dx); otherwise the step-2 formula has no
  // meaning.  Exhaustive scan on small grids, sampled triples + all adjacent
  // triples otherwise.
  const int n = grid.size();
  double max_res = 0.0, scale = 0.0;
  auto probe = [&](int i, int j, int k) {
    double rhs = (x[i] - x[j]) * (x[j] - x[k]);
    double res = std::abs(area.at(i, k) - area.at(i, j) - area.at(j, k) - rhs);
    max_res = std::max(max_res, res);
    scale = std::max(scale, std::abs(rhs));
  };
  if (n <= 65) {
    for (int i = 2; i < n; ++i)
      for (int j = 1; j < i; ++j)
        for (int k = 0; k < j; ++k) probe(i, j, k);
  } else {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int trial = 0; trial < 256; ++trial) {
      int u = pick(rng), v = pick(rng), w = pick(rng);
      int i = std::max({u, v, w}), k = std::min({u, v, w});
      int j = u + v + w - i - k;
      if (i == j || j == k) continue;
      probe(i, j, k);
    }
    for (int m = 0; m + 2 < n; ++m) probe(m + 2, m + 1, m);
  }
  if (max_res > 1e-8 * std::max(scale, 1e-12)) {
    fail_numeric("rough_integral_step2_1d: area violates the product relation, max residual " +
                 std::to_string(max_res));
  }

  double acc = 0.0;
  for (int m = s_idx; m < t_idx; ++m)
    acc += phi(x[m]) * (x[m + 1] - x[m]) + dphi(x[m]) * area.at(m + 1, m);
  return acc;
}

double fitted_holder_exponent(const Grid1D& grid, const std::vector<double>& f) {
  check_sample_shape(grid, f, "fitted_holder_exponent");
  const auto& p = grid.points();
  const int n = grid.size();
  std::vector<double> lx, ly;
  for (int d = 1; d < n; d *= 2) {
    double inc = 0.0, gap = 0.0;
    int cnt = 0;
    for (int i = 0; i + d < n; ++i) {
      inc += std::abs(f[i + d] - f[i]);
      gap += p[i + d] - p[i];
      ++cnt;
    }
    if (cnt == 0 || inc == 0.0) continue;
    lx.push_back(std::log(gap / cnt));
    ly.push_back(std::log(inc / cnt));
  }
  if (lx.size() < 2) return 10.0;  // constant path: effectively infinitely regular
  return ls_slope(lx, ly);
}

}  // namespace roughsheet
