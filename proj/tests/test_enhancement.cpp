#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "roughsheet/bi_field.hpp"
#include "roughsheet/enhancement.hpp"
#include "roughsheet/errors.hpp"
#include "roughsheet/grid.hpp"

using namespace roughsheet;

namespace {

SheetSample sheet(const Grid2D& g, const std::function<double(double, double)>& f) {
  return sample_sheet(f, g);
}

SheetSample lattice_sheet(const Grid2D& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<long long> ticks(-(1LL << 26), 1LL << 26);
  std::vector<double> vals(static_cast<size_t>(g.n1()) * g.n2());
  for (auto& v : vals) v = std::ldexp(static_cast<double>(ticks(rng)), -26);
  return SheetSample(g, std::move(vals));
}

double fit_order(const std::vector<double>& hs, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(hs.size());
  for (size_t i = 0; i < hs.size(); ++i) {
    const double lx = std::log(hs[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double ev(const BiInc& f, std::vector<int> s, std::vector<int> t) {
  return f.eval(std::span<const int>(s), std::span<const int>(t));
}

double ev(const SplitField& f, std::vector<int> a, std::vector<int> b,
          std::vector<int> o) {
  return f.eval(std::span<const int>(a), std::span<const int>(b),
                std::span<const int>(o));
}

const RelationCheck& rel(const ChenReport& rep, const std::string& id) {
  for (const auto& r : rep.relations)
    if (r.id == id) return r;
  REQUIRE_MESSAGE(false, "relation id not found: ", id);
  return rep.relations.front();
}

// The five identities that hold only up to the quadrature order of the
// underlying Riemann sums; everything else is telescoping-exact on the grid.
const std::set<std::string> kQuadratureIds = {
    "A^w = (1/2) d(x^2) - int x dx", "G1^xx = A^w + I2^xx",
    "G2^xx = A^w + I1^xx",           "H1^xx = B1^xw + J1^xx",
    "H2^xx = B2^xw + J2^xx",
};

double worst_exact_class(const ChenReport& rep) {
  double w = 0.0;
  for (const auto& r : rep.relations)
    if (!kQuadratureIds.count(r.id) && r.max_residual > w) w = r.max_residual;
  return w;
}

const auto prod_st = [](double s, double t) { return s * t; };
const auto cos_st = [](double s, double t) { return std::cos(s + 2.0 * t) + s * t; };

}  // namespace

TEST_CASE("enhancement of st has dyadic closed forms") {
  Grid2D g = make_dyadic_grid(4, 1.0, 1.0);
  RoughSheet X = enhance_smooth(sheet(g, prod_st));
  const double h = 1.0 / 16.0;

  // every term of these sums is a dyadic rational, so the comparisons are
  // bitwise: midpoint quadrature is exact for the bilinear area density
  CHECK(ev(X.ax, {0, 16}, {0, 16}) == 1.0);
  CHECK(ev(X.aw, {0, 16}, {0, 16}) == 0.25);
  CHECK(ev(X.aw, {8, 16}, {8, 16}) == 9.0 / 64.0);
  // left-point sums pick up the (1-h)/2 endpoint deficit per direction
  CHECK(ev(X.cxx, {0, 16}, {0, 16}) == (1.0 - h) / 2.0 * ((1.0 - h) / 2.0));
  CHECK(ev(X.bxx1, {0, 16}, {8, 16}) == (1.0 - h) / 8.0);
  CHECK(ev(X.gxx1, {0, 16}, {0, 16}) == (1.0 - h) / 2.0);
  CHECK(ev(X.ixx1, {0, 16}, {0, 16}) == (1.0 - h) / 2.0 * ((1.0 - h) / 2.0));

  SUBCASE("rejects grids below nine points per direction") {
    Grid2D tiny = make_dyadic_grid(2, 1.0, 1.0);
    CHECK_THROWS_WITH_AS(enhance_smooth(sheet(tiny, prod_st)),
                         doctest::Contains("grid too coarse"), Error);
    try {
      enhance_smooth(sheet(tiny, prod_st));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::config);
    }
  }

  SUBCASE("rejects exponents outside (1/3, 1]") {
    SheetSample x = sheet(g, prod_st);
    CHECK_THROWS_AS(enhance_smooth(x, 0.2, 1.0), Error);
    CHECK_THROWS_AS(enhance_smooth(x, 1.0, 1.2), Error);
    CHECK_THROWS_AS(enhance_smooth(x, 1.0 / 3.0, 1.0), Error);
  }
}

TEST_CASE("field values of a generic smooth sheet are pinned") {
  // cross-checked against an independent straight-loop evaluation of each
  // field's defining sum; any convention drift in the kernels shows up here
  Grid2D g = make_dyadic_grid(4, 1.0, 1.0);
  RoughSheet X = enhance_smooth(sheet(g, cos_st));

  const std::vector<int> s = {2, 13}, t = {3, 11};
  const auto pin = [&](double got, double want) {
    CHECK(std::abs(got - want) <= 1e-12);
  };

  pin(ev(X.aw, s, t), 0.22133316681725743);
  pin(ev(X.bxx1, s, t), -0.041855990980019721);
  pin(ev(X.bxx2, s, t), -0.094173976612970348);
  pin(ev(X.bxw1, s, t), -0.032096041091430209);
  pin(ev(X.bxw2, s, t), -0.058418555963368993);
  pin(ev(X.cxx, s, t), 0.002936299923492423);
  pin(ev(X.cwx, s, t), 0.017940580745686718);
  pin(ev(X.cxw, s, t), -0.00078815326896040905);
  pin(ev(X.cww, s, t), 0.0083660150915206271);

  const std::vector<int> u1 = {2, 6}, u2 = {9, 14};   // direction-1 slots
  const std::vector<int> v1 = {3, 6}, v2 = {8, 13};   // direction-2 slots
  const std::vector<int> os = {2, 14}, ot = {3, 11};  // chained pairs
  pin(ev(X.dxx1, u1, u2, ot), -0.0012121191693659395);
  pin(ev(X.dwx1, u1, u2, ot), 0.0071933957181393067);
  pin(ev(X.dxw1, u1, u2, ot), -0.00095376101547430339);
  pin(ev(X.dww1, u1, u2, ot), 0.0024422362993512924);
  pin(ev(X.dxx2, v1, v2, os), -0.0039493296233339735);
  pin(ev(X.dwx2, v1, v2, os), 0.015980032968512362);
  pin(ev(X.dxw2, v1, v2, os), -0.0011088947407943304);
  pin(ev(X.dww2, v1, v2, os), 0.0028320597812254125);

  pin(ev(X.exxx1, u1, u2, ot), 5.1819004332310364e-06);
  pin(ev(X.exwx1, u1, u2, ot), -0.0002548332076713101);
  pin(ev(X.exxw1, u1, u2, ot), 1.9627170514474157e-05);
  pin(ev(X.exww1, u1, u2, ot), -8.7578872003494092e-05);
  pin(ev(X.exxx2, v1, v2, os), 2.522992696280382e-05);
  pin(ev(X.exwx2, v1, v2, os), -0.0010982249320035972);
  pin(ev(X.exxw2, v1, v2, os), 2.9399884922787307e-05);
  pin(ev(X.exww2, v1, v2, os), -0.0001970254691163862);

  const std::vector<int> t3 = {3, 7, 11}, s3 = {2, 7, 14};
  pin(ev(X.fxxx1, u1, u2, t3), 1.3101523241210432e-05);
  pin(ev(X.fxwx1, u1, u2, t3), 1.8668935392308005e-05);
  pin(ev(X.fxxw1, u1, u2, t3), 2.4831447083158213e-06);
  pin(ev(X.fxww1, u1, u2, t3), 3.8375577865995853e-06);
  pin(ev(X.fxxx2, v1, v2, s3), 2.4587625518386939e-05);
  pin(ev(X.fxwx2, v1, v2, s3), 6.1645212038163486e-05);
  pin(ev(X.fxxw2, v1, v2, s3), 2.8178734536255782e-06);
  pin(ev(X.fxww2, v1, v2, s3), 7.8791695830808596e-06);

  pin(ev(X.gxx1, s, t), 0.12381301893898157);
  pin(ev(X.gxx2, s, t), 0.18819107323294373);
  pin(ev(X.hxx1, s, t), -0.014351113443633209);
  pin(ev(X.hxx2, s, t), -0.045734344950970014);
  pin(ev(X.ixx1, s, t), -0.038919691056527296);
  pin(ev(X.ixx2, s, t), -0.091237676689477909);
  pin(ev(X.jxx1, s, t), 0.01659639256313155);
  pin(ev(X.jxx2, s, t), 0.015527186228754574);
  pin(ev(X.kxx1, s, t), 0.017152249862013649);
  pin(ev(X.kxx2, s, t), 0.015091789042797675);
  pin(ev(X.lxx1, s, t), -0.13042652187656598);
  pin(ev(X.lxx2, s, t), -0.059198021737613113);
  pin(ev(X.mxx1, s, t), 0.026605325657849625);
  pin(ev(X.mxx2, s, t), 0.026854044897671667);
  pin(ev(X.nxx1, s, t), 0.0048715803193588323);
  pin(ev(X.nxx2, s, t), 0.0044263893975313951);
  pin(ev(X.oxxx1, s, t), -0.010741822296653469);
  pin(ev(X.oxxx2, s, t), -0.0040199833147735731);
  pin(ev(X.pxx1, {2, 13}, {3}), 0.063451443298596685);
  pin(ev(X.pxx2, {2}, {3, 11}), 0.24091776032396264);
  pin(ev(X.qxx1, s, t), -0.0075119453646301081);
  pin(ev(X.qxx2, s, t), -0.016422852028836681);
}

TEST_CASE("relation report on a generic smooth sheet") {
  Grid2D g = make_dyadic_grid(4, 1.0, 1.0);
  SheetSample x = sheet(g, cos_st);
  RoughSheet X = enhance_smooth(x);
  ChenReport rep = verify_chen(X, x, 0.05);

  CHECK(rep.relations.size() == 94);
  CHECK(rep.pass);
  CHECK(rep.tol == 0.05);
  CHECK(worst_exact_class(rep) <= 1e-12);
  REQUIRE(rep.worst() != nullptr);
  CHECK(kQuadratureIds.count(rep.worst()->id) == 1);

  SUBCASE("corrected-form flags are exactly the repaired identities") {
    const std::set<std::string> expect = {
        "d2 B1^xw = -mu2 D2^xw",
        "d1 B2^xw = -mu1 D1^xw",
        "d2 E1^xwx = F1^xwx + B1^xw (x) A^x",
        "d1 E2^xwx = F2^xwx + B2^xw (x) A^x",
        "G1^xx = A^w + I2^xx",
        "G2^xx = A^w + I1^xx",
        "d1 K1^xx = dx o2 dx",
        "d2 K2^xx = dx o1 dx",
        "d1 N1^xx = dx o2 G1^xx",
        "d2 N2^xx = dx o1 G2^xx",
        "d1 O1^xxx = dx o2 L1^xx",
        "d2 O2^xxx = dx o1 L2^xx",
        "d1 Q1 = dx (d1 x)",
    };
    std::set<std::string> got;
    for (const auto& r : rep.relations)
      if (r.corrected_form) got.insert(r.id);
    CHECK(got == expect);
  }

  SUBCASE("argmax tuples are recorded and in range") {
    // split relations carry two independent chains in one direction, so the
    // concatenated argmax need not be ascending, but every index is valid
    for (const auto& r : rep.relations) {
      CHECK(r.argmax_s.size() + r.argmax_t.size() >= 2);
      for (int i : r.argmax_s) CHECK((0 <= i && i < 17));
      for (int i : r.argmax_t) CHECK((0 <= i && i < 17));
    }
  }

  SUBCASE("grid mismatch and bad tolerance are config errors") {
    Grid2D g5 = make_dyadic_grid(5, 1.0, 1.0);
    CHECK_THROWS_AS(verify_chen(X, sheet(g5, cos_st), 0.05), Error);
    CHECK_THROWS_AS(verify_chen(X, x, -1.0), Error);
  }
}

TEST_CASE("relation report catches violations and accepts zero exactly") {
  Grid2D g = make_dyadic_grid(4, 1.0, 1.0);

  SUBCASE("zeroing the area field breaks exactly its identities") {
    SheetSample x = sheet(g, cos_st);
    RoughSheet X = enhance_smooth(x);
    X.aw = BiInc(g, 2, 2, [](std::span<const int>, std::span<const int>) {
      return 0.0;
    });
    ChenReport rep = verify_chen(X, x, 0.05);
    CHECK(!rep.pass);
    // residual of the area identity is now the size of G - I itself
    CHECK(rel(rep, "G1^xx = A^w + I2^xx").max_residual > 0.1);
    CHECK(rel(rep, "G2^xx = A^w + I1^xx").max_residual > 0.1);
    CHECK(rel(rep, "A^w = (1/2) d(x^2) - int x dx").max_residual > 0.1);
    // identities not mentioning the area field are untouched
    CHECK(rel(rep, "I1^xx = B1^xx + C^xx").max_residual <= 1e-12);
  }

  SUBCASE("zero sheet passes every relation with zero residual") {
    SheetSample x0(g, std::vector<double>(17 * 17, 0.0));
    RoughSheet X = enhance_smooth(x0);
    ChenReport rep = verify_chen(X, x0, 0.0);
    CHECK(rep.pass);
    for (const auto& r : rep.relations) CHECK(r.max_residual == 0.0);
  }

  SUBCASE("lattice-valued random sheet satisfies the exact-class identities") {
    std::mt19937_64 rng(7);
    Grid2D g3 = make_dyadic_grid(3, 1.0, 1.0);
    SheetSample x = lattice_sheet(g3, rng);
    RoughSheet X = enhance_smooth(x);
    ChenReport rep = verify_chen(X, x, 1e9);
    CHECK(worst_exact_class(rep) <= 1e-12);
  }
}

TEST_CASE("quadrature-class residuals decay at first order for st") {
  std::vector<double> hs, errs;
  for (int level = 4; level <= 7; ++level) {
    Grid2D g = make_dyadic_grid(level, 1.0, 1.0);
    SheetSample x = sheet(g, prod_st);
    RoughSheet X = enhance_smooth(x);
    ChenReport rep = verify_chen(X, x, 1.0);
    CHECK(rep.pass);
    CHECK(worst_exact_class(rep) <= 1e-12);
    double quad = 0.0;
    for (const auto& id : kQuadratureIds)
      quad = std::max(quad, rel(rep, id).max_residual);
    hs.push_back(std::ldexp(1.0, -level));
    errs.push_back(quad);
  }
  CHECK(fit_order(hs, errs) >= 0.9);
  CHECK(errs.back() < 0.005);
}

TEST_CASE("norm is an exponent-weighted supremum over all fields") {
  Grid2D g = make_dyadic_grid(4, 1.0, 1.0);

  SUBCASE("zero sheet has zero norm") {
    SheetSample x0(g, std::vector<double>(17 * 17, 0.0));
    CHECK(roughsheet_norm(enhance_smooth(x0)) == 0.0);
  }

  SUBCASE("box increments of st saturate the (1,1) ratio at one") {
    RoughSheet X = enhance_smooth(sheet(g, prod_st));
    std::vector<std::pair<std::string, double>> parts;
    const double total = roughsheet_norm(X, &parts);
    CHECK(total > 0.0);
    double ax_part = -1.0;
    double sum = 0.0;
    for (const auto& [name, v] : parts) {
      if (name == "ax") ax_part = v;
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(ax_part == 1.0);
    CHECK(total == doctest::Approx(sum).epsilon(1e-15));
    CHECK(parts.size() == X.bi_entries().size() + X.split_entries().size());
  }

  SUBCASE("scaling the sheet scales each component by its homogeneity") {
    SheetSample x1 = sheet(g, prod_st);
    SheetSample x3 = sheet(g, [](double s, double t) { return 3.0 * s * t; });
    std::vector<std::pair<std::string, double>> p1, p3;
    const double n1 = roughsheet_norm(enhance_smooth(x1), &p1);
    const double n3 = roughsheet_norm(enhance_smooth(x3), &p3);
    CHECK(n3 >= n1);  // monotone under scaling up
    const auto find = [](const auto& parts, const std::string& want) {
      for (const auto& [name, v] : parts)
        if (name == want) return v;
      return -1.0;
    };
    // one, two and three powers of the sheet in the defining sums
    CHECK(find(p3, "ax") == doctest::Approx(3.0 * find(p1, "ax")).epsilon(1e-12));
    CHECK(find(p3, "aw") == doctest::Approx(9.0 * find(p1, "aw")).epsilon(1e-12));
    CHECK(find(p3, "cxx") == doctest::Approx(9.0 * find(p1, "cxx")).epsilon(1e-12));
    CHECK(find(p3, "exxx1") ==
          doctest::Approx(27.0 * find(p1, "exxx1")).epsilon(1e-12));
    CHECK(find(p3, "oxxx1") ==
          doctest::Approx(27.0 * find(p1, "oxxx1")).epsilon(1e-12));
  }
}

TEST_CASE("rsh container round-trips fields, caches and metadata") {
  namespace fs = std::filesystem;
  Grid2D g = make_dyadic_grid(4, 1.0, 1.0);
  SheetSample x = sheet(g, cos_st);
  RoughSheet X = enhance_smooth(x, 0.75, 0.9);
  X.cxx.materialize();
  X.oxxx1.materialize();
  REQUIRE(X.cxx.dense_cache() != nullptr);

  const fs::path dir = fs::temp_directory_path() / "roughsheet_test";
  fs::create_directories(dir);
  const std::string path = (dir / "sample.rsh").string();
  save_roughsheet(X, path);

  SUBCASE("round trip is bit-exact") {
    RoughSheet Y = load_roughsheet(path);
    CHECK(Y.alpha == 0.75);
    CHECK(Y.beta == 0.9);
    CHECK(Y.grid.same_as(g));
    CHECK(Y.x.values() == x.values());

    // lazily rebuilt fields reproduce the original values bitwise
    auto ye = Y.bi_entries();
    auto xe = X.bi_entries();
    REQUIRE(ye.size() == xe.size());
    const auto tup = [](int arity, bool second) {
      if (arity == 1) return second ? std::vector<int>{7} : std::vector<int>{3};
      return second ? std::vector<int>{1, 16} : std::vector<int>{2, 13};
    };
    for (size_t i = 0; i < ye.size(); ++i) {
      const int k = xe[i].field->k(), l = xe[i].field->l();
      CHECK(ev(*ye[i].field, tup(k, false), tup(l, false)) ==
            ev(*xe[i].field, tup(k, false), tup(l, false)));
      CHECK(ev(*ye[i].field, tup(k, true), tup(l, true)) ==
            ev(*xe[i].field, tup(k, true), tup(l, true)));
    }
    auto ys = Y.split_entries();
    auto xs = X.split_entries();
    REQUIRE(ys.size() == xs.size());
    for (size_t i = 0; i < ys.size(); ++i) {
      const bool dir1 = ys[i].field->dir() == 1;
      const std::vector<int> a = dir1 ? std::vector<int>{2, 6} : std::vector<int>{3, 6};
      const std::vector<int> b = dir1 ? std::vector<int>{9, 14} : std::vector<int>{8, 13};
      std::vector<int> o = dir1 ? std::vector<int>{3, 11} : std::vector<int>{2, 14};
      if (ys[i].field->other_arity() == 3) o = dir1 ? std::vector<int>{3, 7, 11}
                                                    : std::vector<int>{2, 7, 14};
      CHECK(ev(*ys[i].field, a, b, o) == ev(*xs[i].field, a, b, o));
    }

    // saved dense caches come back installed; others stay lazy
    REQUIRE(Y.cxx.dense_cache() != nullptr);
    CHECK(*Y.cxx.dense_cache() == *X.cxx.dense_cache());
    REQUIRE(Y.oxxx1.dense_cache() != nullptr);
    CHECK(*Y.oxxx1.dense_cache() == *X.oxxx1.dense_cache());
    CHECK(Y.kxx1.dense_cache() == nullptr);
  }

  SUBCASE("truncated payload is an io error") {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() > 200);
    const std::string cut = (dir / "cut.rsh").string();
    std::ofstream(cut, std::ios::binary).write(bytes.data(),
                                               static_cast<long>(bytes.size() - 64));
    CHECK_THROWS_AS(load_roughsheet(cut), Error);
    try {
      load_roughsheet(cut);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::io);
    }
  }

  SUBCASE("format version bump is rejected") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    const auto pos = bytes.find("\"format\":1");
    REQUIRE(pos != std::string::npos);
    bytes[pos + 10 - 1] = '2';
    const std::string bumped = (dir / "bumped.rsh").string();
    std::ofstream(bumped, std::ios::binary).write(bytes.data(),
                                                  static_cast<long>(bytes.size()));
    CHECK_THROWS_AS(load_roughsheet(bumped), Error);
  }

  SUBCASE("bad magic is rejected") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    bytes[0] = 'X';
    const std::string bad = (dir / "bad.rsh").string();
    std::ofstream(bad, std::ios::binary).write(bytes.data(),
                                               static_cast<long>(bytes.size()));
    CHECK_THROWS_AS(load_roughsheet(bad), Error);
  }
}
