#include "cocyclab/base.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cocyclab/error.hpp"

namespace cocyclab {

namespace {

using u128 = unsigned __int128;
constexpr u128 kModulus = u128(1) << 64;

// round(value * 2^64) mod 2^64 for a closed-form irrational in (0, 1).
Fixed fixed_from_mpfr(mpfr_t value) {
  mpfr_mul_2ui(value, value, 64, MPFR_RNDN);
  mpz_t z;
  mpz_init(z);
  mpfr_get_z(z, value, MPFR_RNDN);
  const Fixed out = static_cast<Fixed>(mpz_getlimbn(z, 0));
  mpz_clear(z);
  return out;
}

Fixed golden_fixed() {
  mpfr_t v;
  mpfr_init2(v, 256);
  mpfr_sqrt_ui(v, 5, MPFR_RNDN);
  mpfr_sub_ui(v, v, 1, MPFR_RNDN);
  mpfr_div_2ui(v, v, 1, MPFR_RNDN);
  const Fixed out = fixed_from_mpfr(v);
  mpfr_clear(v);
  return out;
}

Fixed silver_fixed() {
  mpfr_t v;
  mpfr_init2(v, 256);
  mpfr_sqrt_ui(v, 2, MPFR_RNDN);
  mpfr_sub_ui(v, v, 1, MPFR_RNDN);
  const Fixed out = fixed_from_mpfr(v);
  mpfr_clear(v);
  return out;
}

void check_grid(int grid) {
  if (grid < 2) throw Error(ErrorCode::InvalidArgument, "grid resolution must be at least 2");
}

}  // namespace

Fixed to_fixed(double x) {
  const long double frac = static_cast<long double>(x) - std::floor(static_cast<long double>(x));
  const long double scaled = std::round(std::ldexp(frac, 64));
  if (scaled >= std::ldexp(1.0L, 64)) return 0;
  return static_cast<Fixed>(scaled);
}

double from_fixed(Fixed u) { return std::ldexp(static_cast<double>(u), -64); }

double signed_gap(Fixed u, Fixed v) {
  return std::ldexp(static_cast<double>(static_cast<std::int64_t>(u - v)), -64);
}

double circle_distance(Fixed u, Fixed v) { return std::abs(signed_gap(u, v)); }

const char* to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::CircleRotation: return "circle";
    case BaseKind::TorusTranslation: return "torus";
    case BaseKind::SturmianShift: return "sturmian";
  }
  return "unknown";
}

Arc Arc::from_reals(double lo, double hi) {
  if (hi - lo >= 1.0) return whole();
  return between(to_fixed(lo), to_fixed(hi));
}

double Arc::length() const { return full ? 1.0 : from_fixed(len); }

bool arcs_intersect(const Arc& p, const Arc& q) {
  if (p.empty() || q.empty()) return false;
  if (p.full || q.full) return true;
  return q.lo - p.lo < p.len || p.lo - q.lo < q.len;
}

double arc_separation(const Arc& p, const Arc& q) {
  if (arcs_intersect(p, q)) return 0.0;
  // Gaps from the end of one arc to the start of the other, both ways.
  const Fixed g1 = q.lo - p.hi();
  const Fixed g2 = p.lo - q.hi();
  return from_fixed(std::min(g1, g2));
}

Cell Cell::whole(int dim) {
  Cell c;
  c.dim = dim;
  Box b;
  for (int i = 0; i < dim; ++i) b.sides[i] = Arc::whole();
  c.boxes.push_back(b);
  return c;
}

Cell Cell::arc(const Arc& a, bool clopen) {
  Cell c;
  c.dim = 1;
  c.clopen = clopen;
  if (!a.empty()) {
    Box b;
    b.sides[0] = a;
    c.boxes.push_back(b);
  }
  return c;
}

bool Cell::empty() const {
  for (const auto& b : boxes) {
    bool nonempty = true;
    for (int i = 0; i < dim; ++i) nonempty = nonempty && !b.sides[i].empty();
    if (nonempty) return false;
  }
  return true;
}

bool Cell::is_whole() const {
  for (const auto& b : boxes) {
    bool all = true;
    for (int i = 0; i < dim; ++i) all = all && b.sides[i].full;
    if (all) return true;
  }
  return false;
}

bool Cell::contains(const BasePoint& x) const {
  for (const auto& b : boxes) {
    bool inside = true;
    for (int i = 0; i < dim && inside; ++i) inside = b.sides[i].contains(x.u[i]);
    if (inside) return true;
  }
  return false;
}

double Cell::measure() const {
  double total = 0.0;
  for (const auto& b : boxes) {
    double vol = 1.0;
    for (int i = 0; i < dim; ++i) vol *= b.sides[i].length();
    total += vol;
  }
  return total;
}

double Cell::diameter() const {
  if (boxes.empty()) return 0.0;
  if (boxes.size() == 1) {
    double d = 0.0;
    for (int i = 0; i < dim; ++i) d = std::max(d, std::min(0.5, boxes[0].sides[i].length()));
    return d;
  }
  // Hull per coordinate: the shortest arc containing every side.
  double d = 0.0;
  for (int i = 0; i < dim; ++i) {
    std::vector<Arc> sides;
    for (const auto& b : boxes) sides.push_back(b.sides[i]);
    std::sort(sides.begin(), sides.end(), [](const Arc& p, const Arc& q) { return p.lo < q.lo; });
    double widest_gap = 0.0;
    bool full = false;
    for (std::size_t k = 0; k < sides.size(); ++k) {
      if (sides[k].full) full = true;
      const Arc& next = sides[(k + 1) % sides.size()];
      const double gap = signed_gap(next.lo, sides[k].hi());
      if (!arcs_intersect(sides[k], next)) widest_gap = std::max(widest_gap, gap < 0 ? gap + 1.0 : gap);
    }
    d = std::max(d, full ? 0.5 : std::min(0.5, 1.0 - widest_gap));
  }
  return d;
}

std::vector<Fixed> Cell::boundary_points() const {
  std::vector<Fixed> out;
  if (clopen || dim != 1) return out;
  for (const auto& b : boxes) {
    if (b.sides[0].full || b.sides[0].empty()) continue;
    out.push_back(b.sides[0].lo);
    out.push_back(b.sides[0].hi());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Arc> Cell::arcs() const {
  if (dim != 1) throw Error(ErrorCode::Unsupported, "arcs() needs a one-dimensional cell");
  std::vector<Arc> out;
  for (const auto& b : boxes) {
    if (!b.sides[0].empty()) out.push_back(b.sides[0]);
  }
  return out;
}

BaseSystem BaseSystem::circle(double alpha, int grid) {
  check_grid(grid);
  BaseSystem s;
  s.kind_ = BaseKind::CircleRotation;
  s.grid_ = grid;
  s.shift_[0] = to_fixed(alpha);
  return s;
}

BaseSystem BaseSystem::golden(int grid) {
  BaseSystem s = circle(0.0, grid);
  s.shift_[0] = golden_fixed();
  s.tag_ = "golden";
  return s;
}

BaseSystem BaseSystem::silver(int grid) {
  BaseSystem s = circle(0.0, grid);
  s.shift_[0] = silver_fixed();
  s.tag_ = "silver";
  return s;
}

BaseSystem BaseSystem::torus(const std::vector<double>& translation, int grid) {
  check_grid(grid);
  if (translation.empty() || translation.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorCode::InvalidArgument, "torus dimension must be 1, 2 or 3");
  }
  BaseSystem s;
  s.kind_ = BaseKind::TorusTranslation;
  s.dim_ = static_cast<int>(translation.size());
  s.grid_ = grid;
  for (int i = 0; i < s.dim_; ++i) s.shift_[i] = to_fixed(translation[i]);
  return s;
}

BaseSystem BaseSystem::sturmian(double slope, int depth, int grid) {
  check_grid(grid);
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "window depth must be positive");
  BaseSystem s;
  s.kind_ = BaseKind::SturmianShift;
  s.grid_ = grid;
  s.depth_ = depth;
  s.shift_[0] = to_fixed(slope);
  return s;
}

BasePoint BaseSystem::point(double x) const {
  BasePoint p;
  p.u[0] = to_fixed(x);
  return p;
}

BasePoint BaseSystem::point(const std::array<double, kMaxDim>& x) const {
  BasePoint p;
  for (int i = 0; i < dim_; ++i) p.u[i] = to_fixed(x[i]);
  return p;
}

BasePoint BaseSystem::step(const BasePoint& x, std::int64_t n) const {
  BasePoint y = x;
  const Fixed k = static_cast<Fixed>(n);
  for (int i = 0; i < dim_; ++i) y.u[i] += k * shift_[i];
  return y;
}

double BaseSystem::distance(const BasePoint& x, const BasePoint& y) const {
  double d = 0.0;
  for (int i = 0; i < dim_; ++i) d = std::max(d, circle_distance(x.u[i], y.u[i]));
  return d;
}

std::size_t BaseSystem::grid_size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim_; ++i) n *= static_cast<std::size_t>(grid_);
  return n;
}

BasePoint BaseSystem::grid_point(std::size_t k) const {
  BasePoint p;
  for (int i = 0; i < dim_; ++i) {
    const std::size_t ki = k % static_cast<std::size_t>(grid_);
    k /= static_cast<std::size_t>(grid_);
    p.u[i] = static_cast<Fixed>((u128(ki) << 64) / static_cast<unsigned>(grid_));
  }
  return p;
}

Cell BaseSystem::cylinder(const BasePoint& x, int depth) const {
  // Letters at times 0..depth-1 are constant between consecutive points -j*slope, 0 <= j <= depth.
  Fixed below = 0, above = 0;
  bool first = true;
  Fixed best_below = 0, best_above = 0;
  for (int j = 0; j <= depth; ++j) {
    const Fixed cut = static_cast<Fixed>(-static_cast<std::int64_t>(j)) * shift_[0];
    const Fixed down = x.u[0] - cut;
    const Fixed up = cut - x.u[0];
    if (first || down < best_below) {
      best_below = down;
      below = cut;
    }
    if (up != 0 && (first || best_above == 0 || up < best_above)) {
      best_above = up;
      above = cut;
    }
    first = false;
  }
  if (best_above == 0) return Cell::arc(Arc::whole(), true);
  return Cell::arc(Arc::between(below, above), true);
}

std::optional<std::string> BaseSystem::near_rational_warning() const {
  BasePoint x;
  for (std::int64_t j = 1; j < 100000; ++j) {
    x = step(x, 1);
    if (distance(x, BasePoint{}) < 1e-12) {
      std::ostringstream os;
      os << "orbit of 0 returns within 1e-12 after " << j << " steps; rotation is numerically rational";
      return os.str();
    }
  }
  return std::nullopt;
}

std::optional<std::int64_t> first_small_multiple(Fixed shift, Fixed w, std::int64_t horizon) {
  if (w == 0 || horizon < 1) return std::nullopt;
  if (shift < w) return 1;
  // Mediant descent: jp * shift = x (mod 2^64) with x > 0 the smallest
  // positive residue so far, jn * shift = -y with y > 0 likewise. The
  // records of x are visited in increasing order of jp.
  std::int64_t jp = 1, jn = 1;
  Fixed x = shift, y = Fixed(0) - shift;
  if (shift == 0) return 1;
  while (true) {
    if (x < w) return jp <= horizon ? std::optional<std::int64_t>(jp) : std::nullopt;
    if (jp > horizon) return std::nullopt;
    if (y == 0) return std::nullopt;  // periodic, no smaller residue will appear
    if (x > y) {
      const Fixed k_hit = (x - w) / y + 1;
      const Fixed k = std::min(k_hit, x / y);
      if (static_cast<u128>(k) * static_cast<u128>(jn) > static_cast<u128>(horizon)) return std::nullopt;
      jp += static_cast<std::int64_t>(k) * jn;
      x -= k * y;
      if (x == 0) return jp <= horizon ? std::optional<std::int64_t>(jp) : std::nullopt;
    } else {
      Fixed k = y / x;
      if (y % x == 0) k -= 1;  // keep y positive; the zero residue belongs to p
      if (k == 0) {
        // y == x: the next record of x is jp + jn with residue 0.
        jp += jn;
        x = 0;
        return jp <= horizon ? std::optional<std::int64_t>(jp) : std::nullopt;
      }
      // Every later candidate adds at least the new jn.
      if (static_cast<u128>(k) * static_cast<u128>(jp) + static_cast<u128>(jn) > static_cast<u128>(horizon)) {
        return std::nullopt;
      }
      jn += static_cast<std::int64_t>(k) * jp;
      y -= k * x;
    }
  }
}

namespace {

// Uncovered part of R/Z as disjoint half-open intervals [start, end) of
// [0, 2^64), keyed by start.
class Uncovered {
 public:
  explicit Uncovered(const std::vector<Arc>& covered) {
    intervals_[0] = kModulus;
    for (const auto& a : covered) remove(a);
  }

  bool empty() const { return intervals_.empty(); }

  void remove(const Arc& a) {
    if (a.full) {
      intervals_.clear();
      return;
    }
    if (a.len == 0) return;
    const u128 lo = a.lo;
    const u128 hi = lo + a.len;
    if (hi <= kModulus) {
      remove_linear(lo, hi);
    } else {
      remove_linear(lo, kModulus);
      remove_linear(0, hi - kModulus);
    }
  }

 private:
  void remove_linear(u128 lo, u128 hi) {
    auto it = intervals_.upper_bound(static_cast<Fixed>(std::min(lo, kModulus - 1)));
    if (it != intervals_.begin()) --it;
    while (it != intervals_.end() && it->first < hi) {
      const u128 start = it->first;
      const u128 end = it->second;
      if (end <= lo) {
        ++it;
        continue;
      }
      it = intervals_.erase(it);
      if (start < lo) intervals_[static_cast<Fixed>(start)] = lo;
      if (end > hi) intervals_[static_cast<Fixed>(hi)] = end;
    }
  }

  std::map<Fixed, u128> intervals_;
};

std::int64_t covering_time_circle(const BaseSystem& sys, const Cell& w, std::int64_t horizon) {
  const std::vector<Arc> arcs = w.arcs();
  Uncovered rest(arcs);
  for (std::int64_t j = 0; j <= horizon; ++j) {
    if (j > 0) {
      const Fixed by = static_cast<Fixed>(j) * sys.shift();
      for (const auto& a : arcs) rest.remove(a.shifted(by));
    }
    if (rest.empty()) return j;
  }
  throw Error(ErrorCode::HorizonExceeded, "no cover by forward images within the horizon");
}

std::int64_t covering_time_grid(const BaseSystem& sys, const Cell& w, std::int64_t horizon) {
  // Shrink each box by one grid spacing so that covering a grid point
  // covers its whole grid neighbourhood.
  const Fixed margin = to_fixed(sys.grid_spacing());
  Cell inner = w;
  for (auto& b : inner.boxes) {
    for (int i = 0; i < sys.dim(); ++i) {
      Arc& a = b.sides[i];
      if (a.full) continue;
      a = a.len > 2 * margin ? Arc{a.lo + margin, a.len - 2 * margin, false} : Arc{};
    }
  }
  if (inner.empty()) throw Error(ErrorCode::EmptyCell, "cell is thinner than two grid spacings");
  std::int64_t worst = 0;
  for (std::size_t k = 0; k < sys.grid_size(); ++k) {
    BasePoint p = sys.grid_point(k);
    std::int64_t j = 0;
    while (!inner.contains(p)) {
      if (++j > horizon) throw Error(ErrorCode::HorizonExceeded, "no cover by forward images within the horizon");
      p = sys.step(p, -1);
    }
    worst = std::max(worst, j);
  }
  return worst;
}

}  // namespace

std::int64_t covering_time(const BaseSystem& sys, const Cell& w, std::int64_t horizon) {
  if (w.empty()) throw Error(ErrorCode::EmptyCell, "covering_time of an empty cell");
  if (w.is_whole()) return 0;
  if (sys.dim() == 1) return covering_time_circle(sys, w, horizon);
  return covering_time_grid(sys, w, horizon);
}

namespace {

// Moves `edge` toward `toward` in steps of `tol` until it is farther than
// tol from every sorted orbit point.
Fixed avoid_orbit(Fixed edge, bool forward, const std::vector<Fixed>& orbit, Fixed tol) {
  for (int tries = 0; tries < 1000; ++tries) {
    auto it = std::lower_bound(orbit.begin(), orbit.end(), edge);
    Fixed nearest = ~Fixed(0);
    if (it != orbit.end()) nearest = std::min(nearest, *it - edge);
    if (it != orbit.begin()) nearest = std::min(nearest, edge - *std::prev(it));
    if (!orbit.empty()) {
      nearest = std::min(nearest, orbit.front() - edge);
      nearest = std::min(nearest, edge - orbit.back());
    }
    if (nearest > tol) return edge;
    edge = forward ? edge + tol : edge - tol;
  }
  return edge;
}

}  // namespace

Cell small_boundary_cell(const BaseSystem& sys, const BasePoint& x0, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (sys.kind() == BaseKind::SturmianShift) {
    int depth = std::max(sys.depth(), static_cast<int>(std::ceil(std::log2(1.0 / eps))));
    Cell c = sys.cylinder(x0, depth);
    while (c.diameter() > 4.0 * eps) c = sys.cylinder(x0, ++depth);
    return c;
  }
  const double r = 2.0 * eps * (1.0 - 1e-9);
  Cell c;
  c.dim = sys.dim();
  Box box;
  constexpr int kOrbit = 100000;
  for (int i = 0; i < sys.dim(); ++i) {
    if (r >= 0.5) {
      box.sides[i] = Arc::whole();
      continue;
    }
    std::vector<Fixed> orbit(kOrbit);
    Fixed u = x0.u[i];
    for (int j = 0; j < kOrbit; ++j, u += sys.shift(i)) orbit[j] = u;
    std::sort(orbit.begin(), orbit.end());
    const Fixed radius = to_fixed(r);
    const Fixed tol = to_fixed(std::min(1e-7, r / 8.0));
    const Fixed lo = avoid_orbit(x0.u[i] - radius, true, orbit, tol);
    const Fixed hi = avoid_orbit(x0.u[i] + radius, false, orbit, tol);
    box.sides[i] = Arc::between(lo, hi);
  }
  c.boxes.push_back(box);
  return c;
}

namespace {

// Part of arc p inside arc q, as up to two arcs.
std::vector<Arc> intersect(const Arc& p, const Arc& q) {
  if (p.empty() || q.empty()) return {};
  if (q.full) return {p};
  if (p.full) return {q};
  std::vector<Arc> out;
  // Offsets relative to p.lo: q covers [s, s + len) mod 2^64.
  const u128 plen = p.len;
  const u128 s = q.lo - p.lo;
  const u128 e = s + q.len;
  auto clip = [&](u128 a, u128 b) {
    b = std::min(b, plen);
    if (a < b) out.push_back({static_cast<Fixed>(p.lo + static_cast<Fixed>(a)), static_cast<Fixed>(b - a), false});
  };
  clip(s, e);
  if (e > kModulus) clip(0, e - kModulus);
  return out;
}

std::vector<Arc> subtract(const Arc& p, const Arc& q) {
  if (p.empty()) return {};
  if (q.full) return {};
  if (q.empty()) return {p};
  std::vector<Arc> out;
  if (p.full) {
    out.push_back(Arc::between(q.hi(), q.lo));
    return out;
  }
  const u128 plen = p.len;
  const u128 s = q.lo - p.lo;
  const u128 e = s + q.len;
  // Complement of [s, e) (mod 2^64) inside [0, plen).
  auto keep = [&](u128 a, u128 b) {
    b = std::min(b, plen);
    if (a < b) out.push_back({static_cast<Fixed>(p.lo + static_cast<Fixed>(a)), static_cast<Fixed>(b - a), false});
  };
  if (e <= kModulus) {
    keep(0, s);
    keep(e, plen);
  } else {
    keep(e - kModulus, s);
  }
  return out;
}

std::vector<ReturnClass> first_return_arc(const BaseSystem& sys, const Arc& u, std::int64_t horizon) {
  const Fixed w = u.len;
  const auto jp = first_small_multiple(sys.shift(), w, horizon);
  const auto jm = first_small_multiple(Fixed(0) - sys.shift(), w, horizon);
  if (!jp || !jm) throw Error(ErrorCode::HorizonExceeded, "a first return exceeds the horizon");
  const Fixed dp = static_cast<Fixed>(*jp) * sys.shift();
  const Fixed em = Fixed(0) - static_cast<Fixed>(*jm) * sys.shift();
  std::vector<ReturnClass> out;
  auto piece = [&](Fixed a, Fixed b, std::int64_t t) {
    if (a < b) out.push_back({Cell::arc({u.lo + a, b - a, false}), t});
  };
  piece(0, w - dp, *jp);
  if (w - dp < em) {
    if (*jp + *jm > horizon) throw Error(ErrorCode::HorizonExceeded, "a first return exceeds the horizon");
    piece(w - dp, em, *jp + *jm);
  }
  piece(em, w, *jm);
  std::sort(out.begin(), out.end(), [](const ReturnClass& p, const ReturnClass& q) { return p.time < q.time; });
  return out;
}

// Pushes every piece forward one step at a time and peels off what lands in U.
std::vector<ReturnClass> first_return_union(const BaseSystem& sys, const std::vector<Arc>& arcs,
                                            std::int64_t horizon) {
  std::vector<Arc> pending = arcs;
  std::map<std::int64_t, std::vector<Arc>> classes;
  for (std::int64_t j = 1; !pending.empty(); ++j) {
    if (j > horizon) throw Error(ErrorCode::HorizonExceeded, "a first return exceeds the horizon");
    const Fixed by = static_cast<Fixed>(j) * sys.shift();
    std::vector<Arc> next;
    for (const Arc& p : pending) {
      std::vector<Arc> rest{p.shifted(by)};
      for (const Arc& q : arcs) {
        std::vector<Arc> still;
        for (const Arc& r : rest) {
          for (const Arc& hit : intersect(r, q)) classes[j].push_back(hit.shifted(Fixed(0) - by));
          for (const Arc& miss : subtract(r, q)) still.push_back(miss);
        }
        rest = std::move(still);
      }
      for (const Arc& r : rest) next.push_back(r.shifted(Fixed(0) - by));
    }
    pending = std::move(next);
  }
  std::vector<ReturnClass> out;
  for (auto& [t, pieces] : classes) {
    ReturnClass rc;
    rc.time = t;
    rc.cell.dim = 1;
    for (const Arc& a : pieces) {
      Box b;
      b.sides[0] = a;
      rc.cell.boxes.push_back(b);
    }
    out.push_back(std::move(rc));
  }
  return out;
}

}  // namespace

std::vector<ReturnClass> first_return(const BaseSystem& sys, const Cell& u, std::int64_t horizon) {
  if (sys.dim() != 1) throw Error(ErrorCode::Unsupported, "first_return is implemented on the circle only");
  if (u.empty()) throw Error(ErrorCode::EmptyCell, "first_return of an empty cell");
  if (u.is_whole()) return {{Cell::whole(1), 1}};
  const std::vector<Arc> arcs = u.arcs();
  std::vector<ReturnClass> out =
      arcs.size() == 1 ? first_return_arc(sys, arcs[0], horizon) : first_return_union(sys, arcs, horizon);
  for (auto& rc : out) rc.cell.clopen = u.clopen;
  return out;
}

}  // namespace cocyclab
