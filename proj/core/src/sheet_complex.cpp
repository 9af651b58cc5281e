#include "roughsheet/sheet_complex.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "roughsheet/errors.hpp"

namespace roughsheet {

namespace {

void require_22(const BiInc& a, const char* what) {
  if (a.k() != 2 || a.l() != 2) {
    fail_config(std::string(what) + ": field must have arity (2,2), got (" +
                std::to_string(a.k()) + "," + std::to_string(a.l()) + ")");
  }
}

double eval4(const BiInc& a, int s1, int s2, int t1, int t2) {
  const std::array<int, 2> s{s1, s2};
  const std::array<int, 2> t{t1, t2};
  return a.eval(std::span<const int>(s), std::span<const int>(t));
}

// Sum over consecutive direction-1 cells with the direction-2 pair frozen,
// ascending k in [lo,hi).
double cell_sum_dir1(const BiInc& a, int lo, int hi, int j1, int j2) {
  double acc = 0.0;
  for (int k = lo; k < hi; ++k) acc += eval4(a, k, k + 1, j1, j2);
  return acc;
}

double cell_sum_dir2(const BiInc& a, int i1, int i2, int lo, int hi) {
  double acc = 0.0;
  for (int l = lo; l < hi; ++l) acc += eval4(a, i1, i2, l, l + 1);
  return acc;
}

// Row-major double cell sum; this single routine is the one realization of
// the iterated sewing sum, so both iteration orders agree bit for bit.
double box_sum(const BiInc& a, int i1, int i2, int j1, int j2) {
  double acc = 0.0;
  for (int k = i1; k < i2; ++k) {
    for (int l = j1; l < j2; ++l) acc += eval4(a, k, k + 1, l, l + 1);
  }
  return acc;
}

// The signed variants orient the acting pair: descending pairs flip the sign,
// mirroring how a box increment behaves under swapping one pair.
double signed_cell_sum_dir1(const BiInc& a, int i1, int i2, int j1, int j2) {
  if (i1 == i2) return 0.0;
  return (i1 < i2) ? cell_sum_dir1(a, i1, i2, j1, j2) : -cell_sum_dir1(a, i2, i1, j1, j2);
}

double signed_cell_sum_dir2(const BiInc& a, int i1, int i2, int j1, int j2) {
  if (j1 == j2) return 0.0;
  return (j1 < j2) ? cell_sum_dir2(a, i1, i2, j1, j2) : -cell_sum_dir2(a, i1, i2, j2, j1);
}

double signed_box_sum(const BiInc& a, int i1, int i2, int j1, int j2) {
  if (i1 == i2 || j1 == j2) return 0.0;
  const double sgn = ((i1 < i2) == (j1 < j2)) ? 1.0 : -1.0;
  return sgn * box_sum(a, std::min(i1, i2), std::max(i1, i2), std::min(j1, j2), std::max(j1, j2));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 2D cousin of the 1D probe: mean |three-point coboundary along dir| at
// dyadic separations, other direction frozen to its full span.  Twice the
// log-log slope estimates the exponent sum; <= 1 means sewing has no bite.
double fitted_dir_exponent(const BiInc& a, int dir) {
  const Grid1D& acting = (dir == 1) ? a.grid().g1() : a.grid().g2();
  const Grid1D& other = (dir == 1) ? a.grid().g2() : a.grid().g1();
  const auto& p = acting.points();
  const int n = acting.size();
  const int o_hi = other.size() - 1;
  auto at = [&](int x1, int x2) {
    return (dir == 1) ? eval4(a, x1, x2, 0, o_hi) : eval4(a, 0, o_hi, x1, x2);
  };
  std::vector<double> lx, ly;
  for (int d = 1; 2 * d < n; d *= 2) {
    double acc = 0.0, gap = 0.0;
    int cnt = 0;
    for (int k = 0; k + 2 * d < n; ++k) {
      acc += std::abs(at(k, k + 2 * d) - at(k, k + d) - at(k + d, k + 2 * d));
      gap += (p[k + d] - p[k]) * (p[k + 2 * d] - p[k + d]);
      ++cnt;
    }
    if (cnt == 0 || acc == 0.0) continue;
    lx.push_back(std::log(gap / cnt));
    ly.push_back(std::log(acc / cnt));
  }
  if (lx.size() < 2) return 2.0;  // coboundary-exact or too coarse: no complaint
  return 2.0 * ls_slope(lx, ly);
}

std::vector<double> pow_table(const std::vector<double>& p, double z) {
  const std::size_t n = p.size();
  std::vector<double> tab(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) tab[i * n + j] = std::pow(std::abs(p[j] - p[i]), z);
    }
  }
  return tab;
}

}  // namespace

Holder22Report holder_norm_22(const BiInc& a, double z1, double z2) {
  require_22(a, "holder_norm_22");
  if (!(z1 > 0.0) || !(z2 > 0.0)) fail_config("holder_norm_22: exponents must be positive");
  const auto& p1 = a.grid().g1().points();
  const auto& p2 = a.grid().g2().points();
  const int n = static_cast<int>(p1.size());
  const int m = static_cast<int>(p2.size());
  const std::vector<double> d1 = pow_table(p1, z1);
  const std::vector<double> d2 = pow_table(p2, z2);

  Holder22Report rep;
  rep.z1 = z1;
  rep.z2 = z2;
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      if (i1 == i2) continue;
      const double ds = d1[static_cast<std::size_t>(i1) * n + i2];
      for (int j1 = 0; j1 < m; ++j1) {
        for (int j2 = 0; j2 < m; ++j2) {
          if (j1 == j2) continue;
          const double ratio =
              std::abs(eval4(a, i1, i2, j1, j2)) / (ds * d2[static_cast<std::size_t>(j1) * m + j2]);
          if (ratio > rep.norm) {
            rep.norm = ratio;
            rep.argmax = {i1, i2, j1, j2};
          }
        }
      }
    }
  }
  return rep;
}

double holder_norm_33(const BiInc& h, double gamma1, double rho1, double gamma2, double rho2) {
  if (h.k() != 3 || h.l() != 3) fail_config("holder_norm_33: field must have arity (3,3)");
  if (!(gamma1 > 0.0) || !(rho1 > 0.0) || !(gamma2 > 0.0) || !(rho2 > 0.0)) {
    fail_config("holder_norm_33: exponents must be positive");
  }
  const auto& p1 = h.grid().g1().points();
  const auto& p2 = h.grid().g2().points();
  const int n = static_cast<int>(p1.size());
  const int m = static_cast<int>(p2.size());
  const std::vector<double> g1t = pow_table(p1, gamma1);
  const std::vector<double> r1t = pow_table(p1, rho1);
  const std::vector<double> g2t = pow_table(p2, gamma2);
  const std::vector<double> r2t = pow_table(p2, rho2);

  double best = 0.0;
  std::array<int, 3> s{}, t{};
  for (s[0] = 0; s[0] < n; ++s[0]) {
    for (s[1] = 0; s[1] < n; ++s[1]) {
      if (s[1] == s[0]) continue;
      const double w1a = g1t[static_cast<std::size_t>(s[0]) * n + s[1]];
      for (s[2] = 0; s[2] < n; ++s[2]) {
        if (s[2] == s[1]) continue;
        const double w1 = w1a * r1t[static_cast<std::size_t>(s[1]) * n + s[2]];
        for (t[0] = 0; t[0] < m; ++t[0]) {
          for (t[1] = 0; t[1] < m; ++t[1]) {
            if (t[1] == t[0]) continue;
            const double w2a = w1 * g2t[static_cast<std::size_t>(t[0]) * m + t[1]];
            for (t[2] = 0; t[2] < m; ++t[2]) {
              if (t[2] == t[1]) continue;
              const double denom = w2a * r2t[static_cast<std::size_t>(t[1]) * m + t[2]];
              const double ratio =
                  std::abs(h.eval(std::span<const int>(s), std::span<const int>(t))) / denom;
              if (ratio > best) best = ratio;
            }
          }
        }
      }
    }
  }
  return best;
}

NNormReport nnorm(const SheetSample& f, double rho1, double rho2) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0)) fail_config("nnorm: exponents must be positive");
  const auto& p1 = f.grid().g1().points();
  const auto& p2 = f.grid().g2().points();
  const int n = static_cast<int>(p1.size());
  const int m = static_cast<int>(p2.size());
  const std::vector<double> d1 = pow_table(p1, rho1);
  const std::vector<double> d2 = pow_table(p2, rho2);

  NNormReport rep;
  rep.rho1 = rho1;
  rep.rho2 = rho2;
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = i1 + 1; i2 < n; ++i2) {
      const double ds = d1[static_cast<std::size_t>(i1) * n + i2];
      for (int j1 = 0; j1 < m; ++j1) {
        for (int j2 = j1 + 1; j2 < m; ++j2) {
          const double box = f.at(i2, j2) - f.at(i1, j2) - f.at(i2, j1) + f.at(i1, j1);
          const double ratio =
              std::abs(box) / (ds * d2[static_cast<std::size_t>(j1) * m + j2]);
          if (ratio > rep.box_norm) rep.box_norm = ratio;
        }
      }
    }
  }
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = i1 + 1; i2 < n; ++i2) {
      const double ds = d1[static_cast<std::size_t>(i1) * n + i2];
      for (int j = 0; j < m; ++j) {
        const double ratio = std::abs(f.at(i2, j) - f.at(i1, j)) / ds;
        if (ratio > rep.dir1_norm) rep.dir1_norm = ratio;
      }
    }
  }
  for (int j1 = 0; j1 < m; ++j1) {
    for (int j2 = j1 + 1; j2 < m; ++j2) {
      const double dt = d2[static_cast<std::size_t>(j1) * m + j2];
      for (int i = 0; i < n; ++i) {
        const double ratio = std::abs(f.at(i, j2) - f.at(i, j1)) / dt;
        if (ratio > rep.dir2_norm) rep.dir2_norm = ratio;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) rep.sup_norm = std::max(rep.sup_norm, std::abs(f.at(i, j)));
  }
  rep.total = rep.box_norm + rep.dir1_norm + rep.dir2_norm + rep.sup_norm;
  return rep;
}

double sewing_sum_2d(const BiInc& a, int s_lo, int s_hi, int t_lo, int t_hi) {
  require_22(a, "sewing_sum_2d");
  const int n = a.grid().g1().size();
  const int m = a.grid().g2().size();
  if (s_lo < 0 || s_hi >= n || t_lo < 0 || t_hi >= m) {
    fail_config("sewing_sum_2d: box index out of range");
  }
  if (!(s_lo < s_hi) || !(t_lo < t_hi)) fail_config("sewing_sum_2d: box indices must be ordered");
  return box_sum(a, s_lo, s_hi, t_lo, t_hi);
}

BiInc lambda_dir_delta(const BiInc& a, int dir, bool* regularity_warning) {
  require_22(a, "lambda_dir_delta");
  if (dir != 1 && dir != 2) fail_config("lambda_dir_delta: direction must be 1 or 2");
  if (regularity_warning) *regularity_warning = fitted_dir_exponent(a, dir) <= 1.0;

  auto apply = [a, dir](std::span<const int> s, std::span<const int> t) {
    const double sewn = (dir == 1) ? signed_cell_sum_dir1(a, s[0], s[1], t[0], t[1])
                                   : signed_cell_sum_dir2(a, s[0], s[1], t[0], t[1]);
    return a.eval(s, t) - sewn;
  };
  return BiInc(a.grid(), 2, 2, std::move(apply));
}

BiInc lambda2d_delta(const BiInc& a, bool* regularity_warning) {
  require_22(a, "lambda2d_delta");
  if (regularity_warning) {
    *regularity_warning =
        std::min(fitted_dir_exponent(a, 1), fitted_dir_exponent(a, 2)) <= 1.0;
  }
  auto apply = [a](std::span<const int> s, std::span<const int> t) {
    return a.eval(s, t) - signed_cell_sum_dir1(a, s[0], s[1], t[0], t[1]) -
           signed_cell_sum_dir2(a, s[0], s[1], t[0], t[1]) +
           signed_box_sum(a, s[0], s[1], t[0], t[1]);
  };
  return BiInc(a.grid(), 2, 2, std::move(apply));
}

Sewing2DParts sewing2d_decompose(const BiInc& a) {
  require_22(a, "sewing2d_decompose");
  BiInc sewn(a.grid(), 2, 2, [a](std::span<const int> s, std::span<const int> t) {
    return signed_box_sum(a, s[0], s[1], t[0], t[1]);
  });
  BiInc r1(a.grid(), 2, 2, [a](std::span<const int> s, std::span<const int> t) {
    return signed_cell_sum_dir1(a, s[0], s[1], t[0], t[1]) -
           signed_box_sum(a, s[0], s[1], t[0], t[1]);
  });
  BiInc r2(a.grid(), 2, 2, [a](std::span<const int> s, std::span<const int> t) {
    return signed_cell_sum_dir2(a, s[0], s[1], t[0], t[1]) -
           signed_box_sum(a, s[0], s[1], t[0], t[1]);
  });
  return Sewing2DParts{sewn, r1, r2, lambda2d_delta(a)};
}

namespace {

BiInc scaled(const BiInc& x, double c) {
  return BiInc(x.grid(), x.k(), x.l(),
               [x, c](std::span<const int> s, std::span<const int> t) { return c * x.eval(s, t); });
}

// Max |field| over either every index tuple (small grids) or a fixed-seed
// random sample of them.
double sampled_sup(const BiInc& f) {
  const int n = f.grid().g1().size();
  const int m = f.grid().g2().size();
  double total = 1.0;
  for (int i = 0; i < f.k(); ++i) total *= n;
  for (int i = 0; i < f.l(); ++i) total *= m;

  std::array<int, 3> s{}, t{};
  std::span<const int> sv(s.data(), static_cast<std::size_t>(f.k()));
  std::span<const int> tv(t.data(), static_cast<std::size_t>(f.l()));
  double best = 0.0;
  if (total <= 2.0e6) {
    const auto left = static_cast<std::size_t>(total + 0.5);
    for (std::size_t off = 0; off < left; ++off) {
      std::size_t rest = off;
      for (int d = f.k() + f.l() - 1; d >= 0; --d) {
        const int base = (d < f.k()) ? n : m;
        const int v = static_cast<int>(rest % static_cast<std::size_t>(base));
        rest /= static_cast<std::size_t>(base);
        if (d < f.k()) {
          s[static_cast<std::size_t>(d)] = v;
        } else {
          t[static_cast<std::size_t>(d - f.k())] = v;
        }
      }
      best = std::max(best, std::abs(f.eval(sv, tv)));
    }
    return best;
  }
  std::mt19937_64 rng(0x5eedu);
  std::uniform_int_distribution<int> pick1(0, n - 1), pick2(0, m - 1);
  for (int rep = 0; rep < 4000; ++rep) {
    for (int i = 0; i < f.k(); ++i) s[static_cast<std::size_t>(i)] = pick1(rng);
    for (int i = 0; i < f.l(); ++i) t[static_cast<std::size_t>(i)] = pick2(rng);
    // the corner-pinned tuples are the ones the decomposition leans on
    if (rep % 4 == 0) {
      s[0] = 0;
      t[0] = 0;
    }
    best = std::max(best, std::abs(f.eval(sv, tv)));
  }
  return best;
}

}  // namespace

CocycleParts cocycle_decompose(const BiInc& a) {
  if (a.k() != a.l() || a.k() < 1 || a.k() > 2) {
    fail_config("cocycle_decompose: field must have arity (1,1) or (2,2)");
  }
  const double cocycle_defect = sampled_sup(delta_full(a));
  if (!(cocycle_defect < 1e-10)) {
    fail_numeric("cocycle_decompose: input is not a cocycle (max |delta a| = " +
                 std::to_string(cocycle_defect) + ")");
  }

  BiInc coboundary = delta_full(sigma_dir(sigma_dir(a, 1), 2));
  BiInc p2 = delta_dir(sigma_dir(sigma_dir(delta_dir(a, 2), 2), 1), 1);
  BiInc p3 = delta_dir(sigma_dir(sigma_dir(delta_dir(a, 1), 1), 2), 2);
  // The pair-arity case needs the direction parts negated: the three-point
  // coboundary's orientation-symmetric sign enters those composites once more
  // than in the point-arity case.
  if (a.k() == 2) {
    p2 = scaled(p2, -1.0);
    p3 = scaled(p3, -1.0);
  }

  BiInc residual(a.grid(), a.k(), a.l(),
                 [a, coboundary, p2, p3](std::span<const int> s, std::span<const int> t) {
                   return a.eval(s, t) -
                          (coboundary.eval(s, t) + p2.eval(s, t) + p3.eval(s, t));
                 });
  const double recon = sampled_sup(residual);
  const double scale = std::max(1.0, sampled_sup(a));
  if (!(recon <= 1e-9 * scale)) {
    fail_numeric("cocycle_decompose: reconstruction residual " + std::to_string(recon));
  }
  return CocycleParts{coboundary, p2, p3};
}

}  // namespace roughsheet
