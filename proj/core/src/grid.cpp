#include "roughsheet/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "roughsheet/version.hpp"

#include <nlohmann/json.hpp>

namespace roughsheet {

Grid1D::Grid1D(std::vector<double> points) {
  if (points.size() < 2) fail_config("Grid1D needs at least 2 points");
  if (points.front() != 0.0) fail_config("Grid1D must start at 0");
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1])) fail_config("Grid1D points must be strictly increasing");
  }
  if (!std::isfinite(points.back()) || points.back() <= 0.0)
    fail_config("Grid1D endpoint must be a positive finite T");
  pts_ = std::make_shared<const std::vector<double>>(std::move(points));
}

Grid1D Grid1D::dyadic(int n_levels, double T) {
  if (n_levels < 1 || n_levels > 16) fail_config("dyadic grid levels must be in [1, 16]");
  if (!(T > 0.0) || !std::isfinite(T)) fail_config("dyadic grid T must be positive");
  int n = (1 << n_levels) + 1;
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = T * static_cast<double>(i) / (n - 1);
  pts.front() = 0.0;
  pts.back() = T;
  return Grid1D(std::move(pts));
}

double Grid1D::max_spacing() const {
  double h = 0.0;
  for (size_t i = 0; i + 1 < pts_->size(); ++i) h = std::max(h, (*pts_)[i + 1] - (*pts_)[i]);
  return h;
}

bool Grid2D::same_as(const Grid2D& other) const {
  return g1_.points() == other.g1_.points() && g2_.points() == other.g2_.points();
}

Grid2D make_dyadic_grid(int n_levels, double T1, double T2) {
  return Grid2D(Grid1D::dyadic(n_levels, T1), Grid1D::dyadic(n_levels, T2));
}

SheetSample::SheetSample(Grid2D grid, std::vector<double> values)
    : grid_(std::move(grid)), n1_(grid_.n1()), n2_(grid_.n2()) {
  if (values.size() != static_cast<size_t>(n1_) * n2_)
    fail_config("SheetSample shape mismatch with grid");
  for (double v : values) {
    if (!std::isfinite(v)) fail_numeric("SheetSample holds a non-finite value");
  }
  vals_ = std::make_shared<const std::vector<double>>(std::move(values));
}

SheetSample sample_sheet(const std::function<double(double, double)>& f, const Grid2D& grid) {
  std::vector<double> vals(static_cast<size_t>(grid.n1()) * grid.n2());
  for (int i = 0; i < grid.n1(); ++i) {
    for (int j = 0; j < grid.n2(); ++j) {
      double v = f(grid.s(i), grid.t(j));
      if (!std::isfinite(v)) fail_numeric("sample_sheet: non-finite value at a grid node");
      vals[static_cast<size_t>(i) * grid.n2() + j] = v;
    }
  }
  return SheetSample(grid, std::move(vals));
}

// .shs layout: magic "SHS1", uint32 LE header length, JSON header, then the
// row-major float64 LE payload. Header keeps the grid as JSON numbers, which
// round-trips doubles exactly (shortest-round-trip serialization).
void SheetSample::save_shs(const std::string& path) const {
  nlohmann::json hdr;
  hdr["format"] = kShsFormatVersion;
  hdr["g1"] = grid_.g1().points();
  hdr["g2"] = grid_.g2().points();
  hdr["T1"] = grid_.g1().T();
  hdr["T2"] = grid_.g2().T();
  std::string h = hdr.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot open for writing: " + path);
  out.write("SHS1", 4);
  uint32_t len = static_cast<uint32_t>(h.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(vals_->data()),
            static_cast<std::streamsize>(vals_->size() * sizeof(double)));
  if (!out) fail_io("write failed: " + path);
}

SheetSample SheetSample::load_shs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SHS1", 4) != 0) fail_io("not a .shs file: " + path);
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || len == 0 || len > (1u << 26)) fail_io("corrupt .shs header: " + path);
  std::string h(len, '\0');
  in.read(h.data(), len);
  if (!in) fail_io("corrupt .shs header: " + path);

  nlohmann::json hdr = nlohmann::json::parse(h, nullptr, false);
  if (hdr.is_discarded()) fail_io("corrupt .shs header JSON: " + path);
  if (hdr.value("format", -1) != kShsFormatVersion) fail_io("unsupported .shs version: " + path);
  Grid1D g1(hdr.at("g1").get<std::vector<double>>());
  Grid1D g2(hdr.at("g2").get<std::vector<double>>());
  Grid2D grid(g1, g2);

  std::vector<double> vals(static_cast<size_t>(grid.n1()) * grid.n2());
  in.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(vals.size() * sizeof(double)))
    fail_io("truncated .shs payload: " + path);
  return SheetSample(grid, std::move(vals));
}

}  // namespace roughsheet
