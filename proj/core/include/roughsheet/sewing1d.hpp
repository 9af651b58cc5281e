#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "roughsheet/grid.hpp"

namespace roughsheet {

// One-parameter increments over a Grid1D.
//
// Index convention follows the two-point evaluation a(i, j) = a_{(p_i, p_j)}
// with the FIRST index the later point, so a coboundary reads
// (delta f)(i, j) = f_i - f_j and interval sums run over (i+1, i) pairs.
// All formulas below are written to be valid for arbitrary index tuples, not
// just descending ones.

class Inc2 {
public:
  Inc2(Grid1D grid, std::vector<double> dense);  // row-major n*n
  static Inc2 from_fn(const Grid1D& grid, const std::function<double(double, double)>& a);

  double at(int i, int j) const { return (*v_)[static_cast<size_t>(i) * n_ + j]; }
  int size() const { return n_; }
  const Grid1D& grid() const { return grid_; }
  const std::vector<double>& dense() const { return *v_; }

private:
  Grid1D grid_;
  std::shared_ptr<const std::vector<double>> v_;
  int n_;
};

// Three-point increments, evaluator-backed (dense storage would be n^3).
class Inc3 {
public:
  Inc3(Grid1D grid, std::function<double(int, int, int)> eval);
  double at(int i, int j, int k) const { return eval_(i, j, k); }
  const Grid1D& grid() const { return grid_; }

private:
  Grid1D grid_;
  std::function<double(int, int, int)> eval_;
};

struct HolderReport {
  double exponent1 = 0.0;  // mu, or gamma for 3-increments
  double exponent2 = 0.0;  // rho for 3-increments, unused otherwise
  double norm = 0.0;
  std::array<int, 3> argmax{-1, -1, -1};
};

// Coboundaries. delta(f)(i,j) = f_i - f_j; delta(a)(i,j,k) = a(i,k) - a(i,j) - a(j,k).
Inc2 delta1d(const Grid1D& grid, const std::vector<double>& f);
Inc3 delta1d(const Inc2& a);

// Chained product (ab)(i,j,k) = a(i,j) * b(j,k).
Inc3 c3_chain(const Inc2& a, const Inc2& b);

// sup |a(i,j)| / |p_i - p_j|^mu over distinct pairs.
HolderReport holder_norm_1d(const Inc2& a, double mu);

// sup |h(i,j,k)| / (|p_j - p_k|^gamma * |p_i - p_j|^rho) over triples with
// j distinct from both neighbors: gamma weights the gap between the two
// earlier points, rho the later gap.
HolderReport holder_norm_c3(const Inc3& h, double gamma, double rho);

// Sum of a over consecutive finest-grid intervals between two indices.
double sewing_sum_1d(const Inc2& a, int s_idx, int t_idx);

// Interval sum of a three-point germ anchored at the interval base:
// sum over m in [lo, hi) of h(m+1, m, lo).  This is the reconstruction sum
// for sewing corrections whose germ keeps one foot on the left endpoint.
double lambda_sum_1d(const Inc3& h, int lo_idx, int hi_idx);

// a minus its interval-wise sewing sum: the discrete Lambda(delta a).
// Warns (returns flag in report form via the bool) if the fitted regularity
// of delta a looks <= 1; the value is computed either way.
Inc2 lambda_delta_1d(const Inc2& a, bool* regularity_warning = nullptr);

// Corrected left-point Riemann sum of f dg between two grid indices.
double young_integral_1d(const Grid1D& grid, const std::vector<double>& f,
                         const std::vector<double>& g, int s_idx, int t_idx,
                         bool* regularity_warning = nullptr);

// Step-2 rough integral: sewing sum of phi(x_s) dx + phi'(x_s) area.
// Rejects the area field if the Chen relation delta(area) = (dx)(dx) fails
// beyond 1e-8 relative on sampled triples.
double rough_integral_step2_1d(const std::function<double(double)>& phi,
                               const std::function<double(double)>& dphi,
                               const Grid1D& grid, const std::vector<double>& x,
                               const Inc2& area, int s_idx, int t_idx);

// Least-squares fit of log(mean |increment|) against log(spacing) over dyadic
// separations; used for regularity warnings only.
double fitted_holder_exponent(const Grid1D& grid, const std::vector<double>& f);

}  // namespace roughsheet
