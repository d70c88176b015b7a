#include "cocyclab/towers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cocyclab/error.hpp"
#include "cocyclab/parallel.hpp"
#include "json.hpp"

namespace cocyclab {

namespace {

using u128 = unsigned __int128;

void require_circle(const BaseSystem& sys, const char* what) {
  if (sys.kind() != BaseKind::CircleRotation) {
    throw Error(ErrorCode::Unsupported, std::string(what) + " is implemented for circle rotations only");
  }
}

// True when |j alpha| >= w for 1 <= j <= n, i.e. the arcs U, f(U), ...,
// f^n(U) of length w are pairwise disjoint.
bool short_orbit_disjoint(Fixed shift, Fixed w, std::int64_t n) {
  return !first_small_multiple(shift, w, n) && !first_small_multiple(Fixed(0) - shift, w, n);
}

std::vector<Arc> merged_arcs(std::vector<Arc> arcs) {
  std::sort(arcs.begin(), arcs.end(), [](const Arc& p, const Arc& q) { return p.lo < q.lo; });
  std::vector<Arc> out;
  for (const Arc& a : arcs) {
    if (!out.empty()) {
      Arc& last = out.back();
      const u128 end = u128(last.lo) + last.len;
      if (u128(a.lo) <= end) {
        const u128 e = std::max(end, u128(a.lo) + a.len);
        if (e - last.lo >= (u128(1) << 64)) return {Arc::whole()};
        last.len = static_cast<Fixed>(e - last.lo);
        continue;
      }
    }
    out.push_back(a);
  }
  // Join an arc running past 2^64 with the arcs it reaches at the start.
  while (out.size() > 1) {
    Arc& last = out.back();
    const u128 end = u128(last.lo) + last.len;
    if (end <= (u128(1) << 64) || u128(out.front().lo) + (u128(1) << 64) > end) break;
    const u128 e = std::max(end, u128(out.front().lo) + out.front().len + (u128(1) << 64));
    if (e - last.lo >= (u128(1) << 64)) return {Arc::whole()};
    last.len = static_cast<Fixed>(e - last.lo);
    out.erase(out.begin());
  }
  return out;
}

Cell cell_of(const std::vector<Arc>& arcs) {
  Cell c;
  c.dim = 1;
  for (const Arc& a : arcs) {
    Box b;
    b.sides[0] = a;
    c.boxes.push_back(b);
  }
  return c;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::int64_t frobenius_threshold(std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
  return n == 1 ? 1 : n * n - n;
}

std::pair<std::int64_t, std::int64_t> decompose_height(std::int64_t n, std::int64_t big_n) {
  if (big_n < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
  if (n < 0) throw Error(ErrorCode::NotRepresentable, "negative height");
  // l' = n mod N (mod N); take the largest such l' with l' (N + 1) <= n.
  const std::int64_t r = n % big_n;
  const std::int64_t room = n / (big_n + 1);
  if (r > room) throw Error(ErrorCode::NotRepresentable, std::to_string(n) + " is not l N + l' (N + 1)");
  const std::int64_t lp = r + (room - r) / big_n * big_n;
  return {(n - lp * (big_n + 1)) / big_n, lp};
}

std::ptrdiff_t Castle::tower_of(Fixed x) const {
  if (towers.empty()) return -1;
  auto it = std::upper_bound(towers.begin(), towers.end(), x,
                             [](Fixed v, const Tower& t) { return v < t.base.lo; });
  const std::size_t k = it == towers.begin() ? towers.size() - 1 : static_cast<std::size_t>(it - towers.begin()) - 1;
  return towers[k].base.contains(x) ? static_cast<std::ptrdiff_t>(k) : -1;
}

namespace {

// True when arc a lies in the union of the (sorted, disjoint) tower bases.
bool inside_bases(const Castle& c, const Arc& a) {
  std::ptrdiff_t k = c.tower_of(a.lo);
  if (k < 0) return false;
  Fixed pos = a.lo;
  u128 left = a.len;
  for (std::size_t steps = 0; steps <= c.towers.size(); ++steps) {
    const Arc& t = c.towers[static_cast<std::size_t>(k)].base;
    const u128 room = t.len - (pos - t.lo);
    if (room >= left) return true;
    left -= room;
    pos = t.hi();
    k = (k + 1) % static_cast<std::ptrdiff_t>(c.towers.size());
    if (c.towers[static_cast<std::size_t>(k)].base.lo != pos) return false;
  }
  return false;
}

// True when arc a meets some tower base.
bool meets_bases(const Castle& c, const Arc& a) {
  if (c.tower_of(a.lo) >= 0) return true;
  auto it = std::upper_bound(c.towers.begin(), c.towers.end(), a.lo,
                             [](Fixed v, const Tower& t) { return v < t.base.lo; });
  const Tower& next = it == c.towers.end() ? c.towers.front() : *it;
  return next.base.lo - a.lo < a.len;
}

}  // namespace

CastleCheck check_castle(const BaseSystem& sys, const Castle& castle, unsigned threads) {
  require_circle(sys, "check_castle");
  CastleCheck out;
  const auto& ts = castle.towers;
  if (ts.empty()) return out;
  out.heights = std::all_of(ts.begin(), ts.end(), [&](const Tower& t) {
    return t.height == castle.n || t.height == castle.n + 1;
  });

  bool bases_disjoint = std::is_sorted(ts.begin(), ts.end(), [](const Tower& p, const Tower& q) {
    return p.base.lo < q.base.lo;
  });
  for (std::size_t k = 0; k < ts.size() && bases_disjoint; ++k) {
    const Arc& a = ts[k].base;
    if (a.full || a.empty()) bases_disjoint = false;
    if (ts.size() > 1 && ts[(k + 1) % ts.size()].base.lo - a.lo < a.len) bases_disjoint = false;
  }
  // Below its top no floor meets B; with disjoint bases and an invertible
  // map this makes all floors pairwise disjoint.
  std::vector<char> clear(ts.size(), 1), back(ts.size(), 1);
  parallel_for(ts.size(), threads, [&](std::size_t k) {
    const Tower& t = ts[k];
    for (std::int64_t j = 1; j < t.height; ++j) {
      if (meets_bases(castle, t.base.shifted(static_cast<Fixed>(j) * sys.shift()))) {
        clear[k] = 0;
        break;
      }
    }
    back[k] = inside_bases(castle, t.base.shifted(static_cast<Fixed>(t.height) * sys.shift())) ? 1 : 0;
  });
  out.disjoint = bases_disjoint && std::all_of(clear.begin(), clear.end(), [](char v) { return v != 0; });
  out.returns = std::all_of(back.begin(), back.end(), [](char v) { return v != 0; });

  u128 total = 0;
  for (const Tower& t : ts) total += u128(t.base.len) * static_cast<u128>(t.height);
  out.covers = total == (u128(1) << 64);

  const std::vector<Fixed> edges = castle.b.boundary_points();
  out.boundary = !castle.b.clopen && !edges.empty() && sys.shift() != 0;
  return out;
}

Castle build_castle(const BaseSystem& sys, std::int64_t n, unsigned threads) {
  require_circle(sys, "build_castle");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
  Castle c;
  c.n = n;
  c.n1 = frobenius_threshold(n);

  constexpr int kHalvings = 40;
  double eps = 1.0 / static_cast<double>(c.n1 + 1);
  bool found = false;
  for (int k = 0; k < kHalvings && !found; ++k, eps /= 2.0) {
    c.u = small_boundary_cell(sys, BasePoint{}, eps);
    found = !c.u.is_whole() && short_orbit_disjoint(sys.shift(), c.u.arcs().front().len, c.n1);
  }
  if (!found) throw Error(ErrorCode::DisjointnessFailed, "no cell U with U, ..., f^n1(U) disjoint");

  // Return times are exact (three gap theorem); the horizon only caps the
  // tower sizes, at 4 / w for bounded-type angles and higher otherwise.
  const Arc u = c.u.arcs().front();
  const double horizon = std::max(std::ceil(4.0 / u.length()) + static_cast<double>(c.n1),
                                  static_cast<double>(kDefaultHorizon));
  if (horizon > 1e12) throw Error(ErrorCode::HorizonExceeded, "return horizon too large");
  const std::vector<ReturnClass> classes = first_return(sys, c.u, static_cast<std::int64_t>(horizon));

  for (const ReturnClass& rc : classes) {
    c.max_return = std::max(c.max_return, rc.time);
    const auto [l, lp] = decompose_height(rc.time, n);
    for (const Arc& a : rc.cell.arcs()) {
      std::int64_t offset = 0;
      for (std::int64_t k = 0; k < lp + l; ++k) {
        const std::int64_t h = k < lp ? n + 1 : n;
        c.towers.push_back({a.shifted(static_cast<Fixed>(offset) * sys.shift()), h});
        offset += h;
      }
    }
  }
  std::sort(c.towers.begin(), c.towers.end(), [](const Tower& p, const Tower& q) { return p.base.lo < q.base.lo; });
  std::vector<Arc> bases;
  for (const Tower& t : c.towers) bases.push_back(t.base);
  c.b = cell_of(bases);

  const CastleCheck chk = check_castle(sys, c, threads);
  if (!chk.ok()) {
    std::string what = "castle invariant failed:";
    if (!chk.heights) what += " heights";
    if (!chk.disjoint) what += " disjoint";
    if (!chk.covers) what += " covers";
    if (!chk.returns) what += " returns";
    if (!chk.boundary) what += " boundary";
    throw Error(ErrorCode::DisjointnessFailed, what);
  }
  return c;
}

std::string castle_to_csv(const Castle& castle) {
  std::ostringstream os;
  os << "lo,hi,height,lo_fixed,len_fixed\n";
  for (const Tower& t : castle.towers) {
    os << full(from_fixed(t.base.lo)) << ',' << full(from_fixed(t.base.hi())) << ',' << t.height << ','
       << t.base.lo << ',' << t.base.len << '\n';
  }
  return os.str();
}

std::int64_t max_visits(const BaseSystem& sys, const Cell& v, std::int64_t n) {
  require_circle(sys, "max_visits");
  if (v.empty() || n <= 0) return 0;
  if (v.is_whole()) return n;
  const std::vector<Arc> arcs = v.arcs();
  // x + j alpha in [a, a + len) iff x in [a - j alpha, a - j alpha + len).
  std::vector<Fixed> starts, ends;
  const std::size_t total = arcs.size() * static_cast<std::size_t>(n);
  starts.reserve(total);
  ends.reserve(total);
  std::int64_t count = 0;
  Fixed back = 0;
  for (std::int64_t j = 0; j < n; ++j, back -= sys.shift()) {
    for (const Arc& a : arcs) {
      const Fixed lo = a.lo + back, hi = lo + a.len;
      starts.push_back(lo);
      if (hi == 0) continue;
      ends.push_back(hi);
      if (hi < lo) ++count;  // covers position 0
    }
  }
  std::sort(starts.begin(), starts.end());
  std::sort(ends.begin(), ends.end());
  std::int64_t best = count;
  std::size_t k = 0;
  for (const Fixed s : starts) {
    while (k < ends.size() && ends[k] <= s) {
      --count;
      ++k;
    }
    best = std::max(best, ++count);
  }
  return best;
}

namespace {

// Sup over n0 <= n <= 8 n0 of max_visits(n) / n, bounded blockwise: for n in
// [a, b] the count is at most max_visits(b) and n >= a.
double sup_frequency(const BaseSystem& sys, const Cell& v, std::int64_t n0) {
  double worst = 0.0;
  std::int64_t a = n0;
  while (a < 8 * n0) {
    const std::int64_t b = std::min(8 * n0, a + std::max<std::int64_t>(1, a / 8));
    worst = std::max(worst, static_cast<double>(max_visits(sys, v, b)) / static_cast<double>(a));
    a = b;
  }
  return worst;
}

}  // namespace

FreqBound visit_freq_bound(const BaseSystem& sys, const std::vector<Fixed>& points, double eps,
                           const FreqOptions& opt) {
  require_circle(sys, "visit_freq_bound");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  FreqBound out;
  out.eps = eps;
  out.points = points;
  std::sort(out.points.begin(), out.points.end());
  out.points.erase(std::unique(out.points.begin(), out.points.end()), out.points.end());
  out.v.dim = 1;
  if (out.points.empty()) {
    out.n0 = 1;
    return out;
  }
  const double count = static_cast<double>(out.points.size());
  double rho = eps / (4.0 * count);
  for (int h = 0; h <= opt.max_halvings; ++h, rho /= 2.0) {
    const Fixed r = to_fixed(rho);
    if (r == 0) break;
    std::vector<Arc> arcs;
    for (const Fixed p : out.points) arcs.push_back({p - r, 2 * r, false});
    const Cell v = cell_of(merged_arcs(arcs));
    const double pieces = static_cast<double>(v.boxes.size());
    for (double n0 = std::ceil(2.0 * count / eps); 8.0 * n0 * pieces <= static_cast<double>(opt.max_visits);
         n0 *= 2.0) {
      const double f = sup_frequency(sys, v, static_cast<std::int64_t>(n0));
      if (f < eps) {
        out.v = v;
        out.rho = rho;
        out.n0 = static_cast<std::int64_t>(n0);
        out.sup_frequency = f;
        return out;
      }
    }
  }
  throw Error(ErrorCode::ShrinkExhausted, "no radius and n0 certify visit frequency below " + full(eps));
}

std::string freq_to_json(const FreqBound& f) {
  nlohmann::json j;
  j["rho"] = f.rho;
  j["n0"] = f.n0;
  j["eps"] = f.eps;
  j["sup_frequency"] = f.sup_frequency;
  j["points"] = f.points.size();
  j["arcs"] = f.v.boxes.size();
  return j.dump(2) + "\n";
}

}  // namespace cocyclab
