#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "roughsheet/errors.hpp"

namespace roughsheet {

// Strictly increasing points 0 = p_0 < ... < p_{n-1} = T. Copies are cheap
// (the point vector is shared), which lets field evaluators capture grids by
// value without thinking about lifetimes.
class Grid1D {
public:
  explicit Grid1D(std::vector<double> points);
  static Grid1D dyadic(int n_levels, double T);

  int size() const { return static_cast<int>(pts_->size()); }
  double operator[](int i) const { return (*pts_)[i]; }
  const std::vector<double>& points() const { return *pts_; }
  double T() const { return pts_->back(); }
  double max_spacing() const;

private:
  std::shared_ptr<const std::vector<double>> pts_;
};

class Grid2D {
public:
  Grid2D(Grid1D g1, Grid1D g2) : g1_(std::move(g1)), g2_(std::move(g2)) {}

  const Grid1D& g1() const { return g1_; }
  const Grid1D& g2() const { return g2_; }
  int n1() const { return g1_.size(); }
  int n2() const { return g2_.size(); }
  double s(int i) const { return g1_[i]; }
  double t(int j) const { return g2_[j]; }
  bool same_as(const Grid2D& other) const;

private:
  Grid1D g1_, g2_;
};

// 2^n_levels + 1 equispaced points per direction; 1 <= n_levels <= 16.
Grid2D make_dyadic_grid(int n_levels, double T1, double T2);

// Values of a sheet at the grid nodes, row-major over (i, j) = (dir-1, dir-2).
class SheetSample {
public:
  SheetSample(Grid2D grid, std::vector<double> values);

  double at(int i, int j) const { return (*vals_)[static_cast<size_t>(i) * n2_ + j]; }
  const Grid2D& grid() const { return grid_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  const std::vector<double>& values() const { return *vals_; }

  void save_shs(const std::string& path) const;
  static SheetSample load_shs(const std::string& path);

private:
  Grid2D grid_;
  std::shared_ptr<const std::vector<double>> vals_;
  int n1_, n2_;
};

SheetSample sample_sheet(const std::function<double(double, double)>& f, const Grid2D& grid);

// Increments of a sampled sheet over ascending index ranges.
inline double delta1(const SheetSample& x, int i1, int i2, int j) {
  return x.at(i2, j) - x.at(i1, j);
}
inline double delta2(const SheetSample& x, int i, int j1, int j2) {
  return x.at(i, j2) - x.at(i, j1);
}
inline double delta_box(const SheetSample& x, int i1, int i2, int j1, int j2) {
  return x.at(i2, j2) - x.at(i1, j2) - x.at(i2, j1) + x.at(i1, j1);
}

}  // namespace roughsheet
