#include "roughsheet/bi_field.hpp"

#include <array>
#include <mutex>
#include <utility>

#include "roughsheet/errors.hpp"

namespace roughsheet {

namespace {

// Largest dense table materialize() agrees to build.
constexpr std::size_t kDenseCap = std::size_t{1} << 22;

bool has_contiguous_repeat(std::span<const int> idx) {
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i] == idx[i - 1]) return true;
  }
  return false;
}

void check_indices(std::span<const int> idx, int expected, int limit, const char* what) {
  if (static_cast<int>(idx.size()) != expected) {
    fail_config(std::string(what) + ": expected " + std::to_string(expected) +
                " indices, got " + std::to_string(idx.size()));
  }
  for (int v : idx) {
    if (v < 0 || v >= limit) {
      fail_config(std::string(what) + ": index " + std::to_string(v) + " out of range");
    }
  }
}

}  // namespace

struct BiInc::Impl {
  Grid2D grid;
  int k = 0;
  int l = 0;
  Eval eval;
  std::vector<BiInc> factors;  // nonempty only for bi_product results

  mutable std::once_flag cache_once;
  mutable std::vector<double> cache;
  mutable bool cached = false;

  Impl(Grid2D g, int kk, int ll, Eval e) : grid(std::move(g)), k(kk), l(ll), eval(std::move(e)) {}
};

BiInc::BiInc(Grid2D grid, int k, int l, Eval eval) {
  if (k < 0 || k > 3 || l < 0 || l > 3) {
    fail_config("BiInc: arities must lie in [0,3], got (" + std::to_string(k) + "," +
                std::to_string(l) + ")");
  }
  if (!eval) fail_config("BiInc: evaluator must not be empty");
  impl_ = std::make_shared<Impl>(std::move(grid), k, l, std::move(eval));
}

BiInc BiInc::from_sheet(const SheetSample& x) {
  Grid2D grid = x.grid();
  return BiInc(grid, 1, 1, [x](std::span<const int> s, std::span<const int> t) {
    return x.at(s[0], t[0]);
  });
}

int BiInc::k() const { return impl_->k; }
int BiInc::l() const { return impl_->l; }
const Grid2D& BiInc::grid() const { return impl_->grid; }
bool BiInc::has_factors() const { return !impl_->factors.empty(); }

double BiInc::eval(std::span<const int> s, std::span<const int> t) const {
  const Impl& im = *impl_;
  const int n = static_cast<int>(im.grid.g1().size());
  const int m = static_cast<int>(im.grid.g2().size());
  check_indices(s, im.k, n, "BiInc direction 1");
  check_indices(t, im.l, m, "BiInc direction 2");
  if (has_contiguous_repeat(s) || has_contiguous_repeat(t)) return 0.0;
  if (im.cached) {
    std::size_t off = 0;
    for (int v : s) off = off * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
    for (int v : t) off = off * static_cast<std::size_t>(m) + static_cast<std::size_t>(v);
    return im.cache[off];
  }
  return im.eval(s, t);
}

double BiInc::operator()(std::initializer_list<int> s, std::initializer_list<int> t) const {
  return eval(std::span<const int>(s.begin(), s.size()),
              std::span<const int>(t.begin(), t.size()));
}

void BiInc::materialize() const {
  const Impl& im = *impl_;
  if (im.k > 2 || im.l > 2) fail_config("materialize: only supported for arities <= 2");
  const std::size_t n = im.grid.g1().size();
  const std::size_t m = im.grid.g2().size();
  if (n > 256 || m > 256) fail_config("materialize: grid too large (more than 256 points)");
  std::size_t total = 1;
  for (int i = 0; i < im.k; ++i) total *= n;
  for (int i = 0; i < im.l; ++i) total *= m;
  if (total > kDenseCap) fail_config("materialize: dense table would exceed the size cap");

  std::call_once(im.cache_once, [&] {
    std::vector<double> table(total);
    std::array<int, 4> idx{};  // k leading entries index direction 1, then l for direction 2
    const int dims = im.k + im.l;
    for (std::size_t off = 0; off < total; ++off) {
      std::size_t rest = off;
      for (int d = dims - 1; d >= 0; --d) {
        const std::size_t base = (d < im.k) ? n : m;
        idx[static_cast<std::size_t>(d)] = static_cast<int>(rest % base);
        rest /= base;
      }
      std::span<const int> s(idx.data(), static_cast<std::size_t>(im.k));
      std::span<const int> t(idx.data() + im.k, static_cast<std::size_t>(im.l));
      table[off] = (has_contiguous_repeat(s) || has_contiguous_repeat(t)) ? 0.0 : im.eval(s, t);
    }
    im.cache = std::move(table);
    im.cached = true;
  });
}

const std::vector<double>* BiInc::dense_cache() const {
  const Impl& im = *impl_;
  return im.cached ? &im.cache : nullptr;
}

void BiInc::adopt_dense(std::vector<double> table) const {
  const Impl& im = *impl_;
  if (im.k > 2 || im.l > 2) fail_config("adopt_dense: only supported for arities <= 2");
  const std::size_t n = im.grid.g1().size();
  const std::size_t m = im.grid.g2().size();
  std::size_t total = 1;
  for (int i = 0; i < im.k; ++i) total *= n;
  for (int i = 0; i < im.l; ++i) total *= m;
  if (table.size() != total) {
    fail_config("adopt_dense: table has " + std::to_string(table.size()) + " entries, expected " +
                std::to_string(total));
  }
  std::call_once(im.cache_once, [&] {
    im.cache = std::move(table);
    im.cached = true;
  });
}

struct SplitField::Impl {
  Grid2D grid;
  int dir;
  int k1;
  int k2;
  int other;
  Eval eval;

  Impl(Grid2D g, int d, int a1, int a2, int o, Eval e)
      : grid(std::move(g)), dir(d), k1(a1), k2(a2), other(o), eval(std::move(e)) {}
};

SplitField::SplitField(Grid2D grid, int dir, int k1, int k2, int other_arity, Eval eval) {
  if (dir != 1 && dir != 2) fail_config("SplitField: direction must be 1 or 2");
  if (k1 < 1 || k2 < 1 || other_arity < 0) fail_config("SplitField: bad slot arities");
  if (!eval) fail_config("SplitField: evaluator must not be empty");
  impl_ = std::make_shared<Impl>(std::move(grid), dir, k1, k2, other_arity, std::move(eval));
}

int SplitField::dir() const { return impl_->dir; }
int SplitField::k1() const { return impl_->k1; }
int SplitField::k2() const { return impl_->k2; }
int SplitField::other_arity() const { return impl_->other; }
const Grid2D& SplitField::grid() const { return impl_->grid; }

double SplitField::eval(std::span<const int> slot1, std::span<const int> slot2,
                        std::span<const int> other) const {
  const Impl& im = *impl_;
  const int split_n = static_cast<int>((im.dir == 1 ? im.grid.g1() : im.grid.g2()).size());
  const int other_n = static_cast<int>((im.dir == 1 ? im.grid.g2() : im.grid.g1()).size());
  check_indices(slot1, im.k1, split_n, "SplitField slot 1");
  check_indices(slot2, im.k2, split_n, "SplitField slot 2");
  check_indices(other, im.other, other_n, "SplitField chained direction");
  // Repeats inside one tensor factor kill the value; slot1 ending where slot2
  // starts is the whole point of the relaxation and stays legal.
  if (has_contiguous_repeat(slot1) || has_contiguous_repeat(slot2) ||
      has_contiguous_repeat(other)) {
    return 0.0;
  }
  return im.eval(slot1, slot2, other);
}

double SplitField::operator()(std::initializer_list<int> slot1, std::initializer_list<int> slot2,
                              std::initializer_list<int> other) const {
  return eval(std::span<const int>(slot1.begin(), slot1.size()),
              std::span<const int>(slot2.begin(), slot2.size()),
              std::span<const int>(other.begin(), other.size()));
}

BiInc delta_dir(const BiInc& a, int dir) {
  if (dir != 1 && dir != 2) fail_config("delta_dir: direction must be 1 or 2");
  const int acting = (dir == 1) ? a.k() : a.l();
  if (acting + 1 > 3) fail_config("delta_dir: resulting arity would exceed 3");
  const int out_k = (dir == 1) ? a.k() + 1 : a.k();
  const int out_l = (dir == 2) ? a.l() + 1 : a.l();

  auto apply = [a, dir, acting](std::span<const int> s, std::span<const int> t) {
    std::span<const int> act = (dir == 1) ? s : t;
    std::span<const int> other = (dir == 1) ? t : s;
    std::array<int, 3> buf{};
    auto call = [&](std::span<const int> sub) {
      return (dir == 1) ? a.eval(sub, other) : a.eval(other, sub);
    };
    switch (acting) {
      case 0:
        return call({});
      case 1:
        buf[0] = act[1];
        double hi, lo;
        hi = call(std::span<const int>(buf.data(), 1));
        buf[0] = act[0];
        lo = call(std::span<const int>(buf.data(), 1));
        return hi - lo;
      default: {  // 2 -> 3, orientation-symmetric sign
        buf = {act[0], act[2], 0};
        const double outer = call(std::span<const int>(buf.data(), 2));
        buf = {act[0], act[1], 0};
        const double left = call(std::span<const int>(buf.data(), 2));
        buf = {act[1], act[2], 0};
        const double right = call(std::span<const int>(buf.data(), 2));
        return outer - left - right;
      }
    }
  };
  return BiInc(a.grid(), out_k, out_l, std::move(apply));
}

BiInc delta_full(const BiInc& a) { return delta_dir(delta_dir(a, 1), 2); }

BiInc sigma_dir(const BiInc& a, int dir) {
  if (dir != 1 && dir != 2) fail_config("sigma_dir: direction must be 1 or 2");
  const int acting = (dir == 1) ? a.k() : a.l();
  if (acting < 1) fail_config("sigma_dir: nothing to contract, arity is 0");
  const int out_k = (dir == 1) ? a.k() - 1 : a.k();
  const int out_l = (dir == 2) ? a.l() - 1 : a.l();

  auto apply = [a, dir, acting](std::span<const int> s, std::span<const int> t) {
    std::span<const int> act = (dir == 1) ? s : t;
    std::span<const int> other = (dir == 1) ? t : s;
    std::array<int, 3> buf{};
    buf[0] = 0;
    for (int i = 0; i < acting - 1; ++i) buf[static_cast<std::size_t>(i) + 1] = act[i];
    std::span<const int> sub(buf.data(), static_cast<std::size_t>(acting));
    return (dir == 1) ? -a.eval(sub, other) : -a.eval(other, sub);
  };
  return BiInc(a.grid(), out_k, out_l, std::move(apply));
}

BiInc bi_product(const BiInc& a, const BiInc& b) {
  if (!a.grid().same_as(b.grid())) fail_config("bi_product: factors live on different grids");
  if (a.k() < 1 || a.l() < 1 || b.k() < 1 || b.l() < 1) {
    fail_config("bi_product: factors need arity >= 1 in both directions");
  }
  const int out_k = a.k() + b.k() - 1;
  const int out_l = a.l() + b.l() - 1;
  if (out_k > 3 || out_l > 3) fail_config("bi_product: resulting arity would exceed 3");

  const int ak = a.k();
  const int al = a.l();
  auto apply = [a, b, ak, al](std::span<const int> s, std::span<const int> t) {
    const double left = a.eval(s.subspan(0, static_cast<std::size_t>(ak)),
                               t.subspan(0, static_cast<std::size_t>(al)));
    if (left == 0.0) return 0.0;  // keeps the vanishing property bit-exact
    const double right = b.eval(s.subspan(static_cast<std::size_t>(ak - 1)),
                                t.subspan(static_cast<std::size_t>(al - 1)));
    return left * right;
  };
  BiInc out(a.grid(), out_k, out_l, std::move(apply));
  out.impl_->factors = {a, b};
  return out;
}

BiInc circle_product(const BiInc& f, const BiInc& g, int dir) {
  if (dir != 1 && dir != 2) fail_config("circle_product: direction must be 1 or 2");
  if (!f.grid().same_as(g.grid())) fail_config("circle_product: factors live on different grids");
  const int shared_f = (dir == 1) ? f.k() : f.l();
  const int shared_g = (dir == 1) ? g.k() : g.l();
  if (shared_f != shared_g) fail_config("circle_product: shared-direction arity mismatch");
  const int fn = (dir == 1) ? f.l() : f.k();
  const int gl = (dir == 1) ? g.l() : g.k();
  if (fn < 1 || gl < 1) fail_config("circle_product: chaining needs arity >= 1");
  const int chained = fn + gl - 1;
  if (chained > 3) fail_config("circle_product: resulting arity would exceed 3");
  const int out_k = (dir == 1) ? shared_f : chained;
  const int out_l = (dir == 1) ? chained : shared_f;

  auto apply = [f, g, dir, fn](std::span<const int> s, std::span<const int> t) {
    std::span<const int> shared = (dir == 1) ? s : t;
    std::span<const int> chain = (dir == 1) ? t : s;
    auto head = chain.subspan(0, static_cast<std::size_t>(fn));
    auto tail = chain.subspan(static_cast<std::size_t>(fn - 1));
    const double lhs = (dir == 1) ? f.eval(shared, head) : f.eval(head, shared);
    if (lhs == 0.0) return 0.0;
    const double rhs = (dir == 1) ? g.eval(shared, tail) : g.eval(tail, shared);
    return lhs * rhs;
  };
  return BiInc(f.grid(), out_k, out_l, std::move(apply));
}

BiInc bullet_product(const BiInc& f, const BiInc& g, int dir) {
  if (dir != 1 && dir != 2) fail_config("bullet_product: direction must be 1 or 2");
  if (!f.grid().same_as(g.grid())) fail_config("bullet_product: factors live on different grids");
  const int g_dir = (dir == 1) ? g.k() : g.l();
  if (g_dir != 1) fail_config("bullet_product: second factor needs arity 1 in the bullet direction");
  const int f_dir = (dir == 1) ? f.k() : f.l();
  if (f_dir < 1) fail_config("bullet_product: first factor needs arity >= 1 in the bullet direction");
  const int fn = (dir == 1) ? f.l() : f.k();
  const int gl = (dir == 1) ? g.l() : g.k();
  if (fn < 1 || gl < 1) fail_config("bullet_product: chaining needs arity >= 1");
  const int chained = fn + gl - 1;
  if (chained > 3) fail_config("bullet_product: resulting arity would exceed 3");
  const int out_k = (dir == 1) ? f_dir : chained;
  const int out_l = (dir == 1) ? chained : f_dir;

  auto apply = [f, g, dir, fn](std::span<const int> s, std::span<const int> t) {
    std::span<const int> bullet = (dir == 1) ? s : t;
    std::span<const int> chain = (dir == 1) ? t : s;
    auto head = chain.subspan(0, static_cast<std::size_t>(fn));
    auto tail = chain.subspan(static_cast<std::size_t>(fn - 1));
    std::span<const int> first = bullet.subspan(0, 1);
    const double lhs = (dir == 1) ? f.eval(bullet, head) : f.eval(head, bullet);
    if (lhs == 0.0) return 0.0;
    const double rhs = (dir == 1) ? g.eval(first, tail) : g.eval(tail, first);
    return lhs * rhs;
  };
  return BiInc(f.grid(), out_k, out_l, std::move(apply));
}

SplitField split(const BiInc& a, int dir) {
  if (dir != 1 && dir != 2) fail_config("split: direction must be 1 or 2");
  if (!a.has_factors()) fail_config("split: field carries no factor structure");
  const BiInc u = a.impl_->factors[0];
  const BiInc v = a.impl_->factors[1];
  const int k1 = (dir == 1) ? u.k() : u.l();
  const int k2 = (dir == 1) ? v.k() : v.l();
  const int u_other = (dir == 1) ? u.l() : u.k();
  const int v_other = (dir == 1) ? v.l() : v.k();
  const int other = u_other + v_other - 1;  // still meeting-chained there

  auto apply = [u, v, dir, u_other](std::span<const int> slot1, std::span<const int> slot2,
                                    std::span<const int> chain) {
    auto head = chain.subspan(0, static_cast<std::size_t>(u_other));
    auto tail = chain.subspan(static_cast<std::size_t>(u_other - 1));
    const double lhs = (dir == 1) ? u.eval(slot1, head) : u.eval(head, slot1);
    if (lhs == 0.0) return 0.0;
    const double rhs = (dir == 1) ? v.eval(slot2, tail) : v.eval(tail, slot2);
    return lhs * rhs;
  };
  return SplitField(a.grid(), dir, k1, k2, other, std::move(apply));
}

BiInc merge(const SplitField& c) {
  const int glued = c.k1() + c.k2() - 1;
  if (glued > 3) fail_config("merge: resulting arity would exceed 3");
  const int out_k = (c.dir() == 1) ? glued : c.other_arity();
  const int out_l = (c.dir() == 1) ? c.other_arity() : glued;
  const int k1 = c.k1();
  const int dir = c.dir();

  auto apply = [c, k1, dir](std::span<const int> s, std::span<const int> t) {
    std::span<const int> act = (dir == 1) ? s : t;
    std::span<const int> other = (dir == 1) ? t : s;
    auto slot1 = act.subspan(0, static_cast<std::size_t>(k1));
    auto slot2 = act.subspan(static_cast<std::size_t>(k1 - 1));
    return c.eval(slot1, slot2, other);
  };
  return BiInc(c.grid(), out_k, out_l, std::move(apply));
}

}  // namespace roughsheet
