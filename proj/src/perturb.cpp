#include "cocyclab/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include "cocyclab/error.hpp"
#include "cocyclab/parallel.hpp"

namespace cocyclab {

double steering_cap(const Mat2& a, double eps) {
  const double ratio = eps / (2.0 * operator_norm(a));
  return 2.0 * std::asin(std::min(1.0, ratio)) * (1.0 - 1e-9);
}

namespace {

std::vector<Mat2> orbit_values(const Cocycle& co, const BasePoint& x, int m) {
  std::vector<Mat2> a(static_cast<std::size_t>(m));
  BasePoint y = x;
  for (int j = 0; j < m; ++j, y = co.base().step(y, 1)) a[j] = co.at(y);
  return a;
}

// t[j] is the line that A_{m-1} ... A_j maps onto w; t[m] = w.
std::vector<Vec2> pullbacks(const std::vector<Mat2>& a, Vec2 w) {
  std::vector<Vec2> t(a.size() + 1);
  t[a.size()] = w.normalized();
  for (std::size_t j = a.size(); j-- > 0;) t[j] = (a[j].inverse_unimodular() * t[j + 1]).normalized();
  return t;
}

// Greedy rule shared by every steering routine: rotate toward the pulled
// back target by at most the cap; the first step that can reach it does so
// exactly and every later step is unperturbed.
bool greedy_reaches(const std::vector<Mat2>& a, const std::vector<double>& caps, const std::vector<Vec2>& t, Vec2 d) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    const Vec2 img = a[j] * d;
    const double phi = line_turn(img, t[j + 1]);
    if (std::abs(phi) <= caps[j]) return true;
    d = (rotation(std::copysign(caps[j], phi)) * img).normalized();
  }
  return false;
}

}  // namespace

std::optional<SteeringBlock> steer_fixed(const std::vector<Mat2>& a, const BasePoint& x, Vec2 v, Vec2 w,
                                         double eps) {
  const std::vector<Vec2> t = pullbacks(a, w);
  SteeringBlock b;
  b.x = x;
  b.m = static_cast<int>(a.size());
  b.eps = eps;
  Vec2 d = v.normalized();
  bool reached = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double phi = 0.0;
    if (!reached) {
      phi = line_turn(a[j] * d, t[j + 1]);
      const double cap = steering_cap(a[j], eps);
      if (std::abs(phi) <= cap) {
        reached = true;
      } else {
        phi = std::copysign(cap, phi);
      }
    }
    const Mat2 mj = phi == 0.0 ? a[j] : rotation(phi) * a[j];
    b.matrices.push_back(mj);
    b.angles.push_back(phi);
    d = (mj * d).normalized();
  }
  if (!reached) return std::nullopt;
  Mat2 p = Mat2::identity();
  for (const Mat2& mj : b.matrices) p = mj * p;
  b.error = line_distance(p * v, w);
  if (b.error > 1e-6) return std::nullopt;
  return b;
}

SteeringBlock steer_direction(const Cocycle& co, const BasePoint& x, Vec2 v, Vec2 w, double eps, int m_max) {
  if (v.norm() == 0.0 || w.norm() == 0.0) throw Error(ErrorCode::InvalidArgument, "directions must be nonzero");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const double gap = line_distance(v, w);
  if (gap <= 1e-6) {
    SteeringBlock b;
    b.x = x;
    b.eps = eps;
    b.error = gap;
    return b;
  }
  const std::vector<Mat2> a = orbit_values(co, x, m_max);
  for (int m = 1; m <= m_max; ++m) {
    const std::vector<Mat2> head(a.begin(), a.begin() + m);
    if (auto b = steer_fixed(head, x, v, w, eps)) return *b;
  }
  std::ostringstream os;
  os << "no steering block of length <= " << m_max << " within budget " << eps;
  throw Error(ErrorCode::BudgetExhausted, os.str());
}

double BalanceProfile::delta(int j) const { return std::exp(log_delta.at(static_cast<std::size_t>(j))); }

BalanceProfile balance_profile(const Cocycle& co, const BasePoint& x, int n, double c) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "balance profile needs N >= 1");
  if (!(c > 1.0)) throw Error(ErrorCode::InvalidArgument, "balance constant must exceed 1");
  BalanceProfile p;
  p.x = x;
  p.n = n;
  p.c = c;
  const std::vector<Mat2> a = orbit_values(co, x, n);
  const std::size_t size = static_cast<std::size_t>(n) + 1;
  p.log_head.assign(size, 0.0);
  p.log_tail.assign(size, 0.0);
  ScaledProduct head, tail;
  for (int j = 1; j <= n; ++j) {
    head.left_multiply(a[j - 1]);
    p.log_head[j] = std::max(0.0, head.log_norm());
  }
  for (int j = n - 1; j >= 0; --j) {
    tail.right_multiply(a[j]);
    p.log_tail[j] = std::max(0.0, tail.log_norm());
  }
  p.log_delta.resize(size);
  for (std::size_t j = 0; j < size; ++j) p.log_delta[j] = p.log_head[j] - p.log_tail[j];
  const double log_c = std::log(c);
  for (std::size_t j = 0; j + 1 < size; ++j) {
    if (std::abs(p.log_delta[j + 1] - p.log_delta[j]) >= 2.0 * log_c) {
      throw Error(ErrorCode::NoBalancedIndex, "consecutive ratio Delta_{j+1}/Delta_j leaves (C^-2, C^2)");
    }
  }
  for (std::size_t j = 0; j < size; ++j) {
    if (std::abs(p.log_delta[j]) < log_c) {
      p.j0 = static_cast<int>(j);
      return p;
    }
  }
  throw Error(ErrorCode::NoBalancedIndex, "no index with C^-1 < Delta_j < C");
}

const char* to_string(Branch b) { return b == Branch::Steered ? "steered" : "early-exit"; }

std::vector<Vec2> sweep_directions(int pairs) {
  std::vector<Vec2> out;
  for (int k = 0; k < pairs; ++k) out.push_back(unit((k + 0.5) * kPi / pairs));
  return out;
}

bool steering_feasible(const Cocycle& co, const BasePoint& x, double eps, int m, int pairs) {
  const std::vector<Mat2> a = orbit_values(co, x, m);
  std::vector<double> caps(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) caps[j] = steering_cap(a[j], eps);
  const std::vector<Vec2> dirs = sweep_directions(pairs);
  for (const Vec2& w : dirs) {
    const std::vector<Vec2> t = pullbacks(a, w);
    for (const Vec2& v : dirs) {
      if (line_distance(v, w) <= 1e-6) continue;
      if (!greedy_reaches(a, caps, t, v)) return false;
    }
  }
  return true;
}

double return_gap(const BaseSystem& sys, int m) {
  double gap = 1.0;
  BasePoint y;
  for (int j = 1; j < m; ++j) {
    y = sys.step(y, 1);
    gap = std::min(gap, sys.distance(y, BasePoint{}));
  }
  return gap;
}

namespace {

// Windows centred at 64 fixed points, widened with m until one is feasible
// at every grid point. Used for bases of dimension > 1.
SteeringWindow box_window(const Cocycle& co, double eps, unsigned threads) {
  const BaseSystem& sys = co.base();
  constexpr int kCenters = 64;
  const int m_limit = 10 * static_cast<int>(std::ceil(1.0 / eps));

  auto center_point = [&](int k) {
    std::array<double, kMaxDim> c{};
    for (int i = 0; i < sys.dim(); ++i) c[i] = (k + 0.5) / kCenters;
    return sys.point(c);
  };

  // Shortest feasible length at each candidate centre.
  std::vector<int> m_center(kCenters, 0);
  parallel_for(kCenters, threads, [&](std::size_t k) {
    const BasePoint x = center_point(static_cast<int>(k));
    for (int m = 1; m <= m_limit; ++m) {
      if (steering_feasible(co, x, eps, m)) {
        m_center[k] = m;
        return;
      }
    }
  });
  std::vector<int> order;
  for (int k = 0; k < kCenters; ++k) {
    if (m_center[k] > 0) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(), [&](int p, int q) { return m_center[p] < m_center[q]; });

  for (int k : order) {
    const BasePoint x = center_point(k);
    for (int m = m_center[k]; m <= m_limit; ++m) {
      const double h = std::min(0.5, 0.9 * return_gap(sys, m));
      Cell w;
      w.dim = sys.dim();
      Box box;
      for (int i = 0; i < sys.dim(); ++i) {
        box.sides[i] = Arc::between(x.u[i] - to_fixed(h / 2), x.u[i] + to_fixed(h / 2));
      }
      w.boxes.push_back(box);
      std::vector<std::size_t> inside;
      for (std::size_t g = 0; g < sys.grid_size(); ++g) {
        if (w.contains(sys.grid_point(g))) inside.push_back(g);
      }
      if (inside.empty()) break;
      std::vector<char> ok(inside.size(), 0);
      parallel_for(inside.size(), threads, [&](std::size_t i) {
        ok[i] = steering_feasible(co, sys.grid_point(inside[i]), eps, m) ? 1 : 0;
      });
      if (std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) {
        SteeringWindow out;
        out.w = w;
        out.m = m;
        out.center = (k + 0.5) / kCenters;
        out.width = h;
        out.grid_points = inside.size();
        return out;
      }
    }
  }
  throw Error(ErrorCode::SearchFailed, "no steering window among 64 candidates");
}

// Circle bases: minimal feasible m on a coarse grid, every run of coarse
// cells as a candidate window, candidates ranked by covering time (which
// fixes N) and then m, and the best 64 checked at every grid point.
SteeringWindow arc_window(const Cocycle& co, double eps, unsigned threads) {
  const BaseSystem& sys = co.base();
  constexpr int kCoarse = 512;
  constexpr int kMaxRun = kCoarse / 8;
  constexpr std::size_t kCandidates = 64;
  const int m_limit = 10 * static_cast<int>(std::ceil(1.0 / eps));

  std::vector<int> m_at(kCoarse, 0);
  parallel_for(kCoarse, threads, [&](std::size_t i) {
    const BasePoint x = sys.point((static_cast<double>(i) + 0.5) / kCoarse);
    for (int m = 1; m <= m_limit; ++m) {
      if (steering_feasible(co, x, eps, m)) {
        m_at[i] = m;
        return;
      }
    }
  });

  struct Candidate {
    int first = 0, len = 0, m = 0;
    std::int64_t m1 = 0;
    Cell w;
  };
  std::vector<Candidate> found;
  for (int i = 0; i < kCoarse; ++i) {
    int mx = 0;
    for (int len = 1; len <= kMaxRun; ++len) {
      const int v = m_at[(i + len - 1) % kCoarse];
      if (v == 0) break;
      mx = std::max(mx, v);
      if (static_cast<double>(len) / kCoarse > 0.9 * return_gap(sys, mx)) break;
      const int next = m_at[(i + len) % kCoarse];
      if (len < kMaxRun && next != 0 && next <= mx) continue;  // a longer run has the same m
      Candidate c;
      c.first = i;
      c.len = len;
      c.m = mx;
      c.w = Cell::arc(Arc::between(to_fixed(static_cast<double>(i) / kCoarse),
                                   to_fixed(static_cast<double>(i + len) / kCoarse)),
                      false);
      found.push_back(std::move(c));
    }
  }
  parallel_for(found.size(), threads, [&](std::size_t k) { found[k].m1 = covering_time(sys, found[k].w); });
  std::stable_sort(found.begin(), found.end(), [](const Candidate& p, const Candidate& q) {
    return p.m1 != q.m1 ? p.m1 < q.m1 : p.m < q.m;
  });

  for (std::size_t k = 0; k < found.size() && k < kCandidates; ++k) {
    const Candidate& c = found[k];
    std::vector<std::size_t> inside;
    for (std::size_t g = 0; g < sys.grid_size(); ++g) {
      if (c.w.contains(sys.grid_point(g))) inside.push_back(g);
    }
    if (inside.empty()) continue;
    std::vector<char> ok(inside.size(), 0);
    parallel_for(inside.size(), threads, [&](std::size_t i) {
      ok[i] = steering_feasible(co, sys.grid_point(inside[i]), eps, c.m) ? 1 : 0;
    });
    if (std::all_of(ok.begin(), ok.end(), [](char v) { return v != 0; })) {
      SteeringWindow out;
      out.w = c.w;
      out.m = c.m;
      out.width = static_cast<double>(c.len) / kCoarse;
      out.center = std::fmod((c.first + 0.5 * c.len) / kCoarse, 1.0);
      out.grid_points = inside.size();
      return out;
    }
  }
  throw Error(ErrorCode::SearchFailed, "no steering window among 64 candidates");
}

}  // namespace

SteeringWindow choose_steering_window(const Cocycle& co, double eps, unsigned threads) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  return co.base().dim() == 1 ? arc_window(co, eps, threads) : box_window(co, eps, threads);
}

int choose_n(const Cocycle& co, double eps, double c, int m1) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (!(c > std::log(co.sup_norm() + eps))) {
    throw Error(ErrorCode::InvalidArgument, "c must exceed log(sup_norm + eps)");
  }
  const double log_c = std::log(eps + co.sup_norm() + 1e-9);
  const double need = std::max((4.0 * m1 + 1.0) * log_c + 0.5 * std::log(2.0), c);
  int n = std::max(1, static_cast<int>(std::floor(need / eps)));
  while (!(eps * n > need)) ++n;
  return n;
}

namespace {

// Rounding errors in any product node are amplified by at most the norms of
// the partial products around it, which the double profile of l estimates.
mpfr_prec_t working_precision(const std::vector<Mat2>& l, double eps, int extra_bits) {
  const std::size_t n = l.size();
  std::vector<double> head(n + 1, 0.0), tail(n + 1, 0.0);
  ScaledProduct h, t;
  for (std::size_t j = 0; j < n; ++j) {
    h.left_multiply(l[j]);
    head[j + 1] = h.log_norm();
  }
  for (std::size_t j = n; j-- > 0;) {
    t.right_multiply(l[j]);
    tail[j] = t.log_norm();
  }
  double worst = 0.0;
  for (std::size_t j = 0; j <= n; ++j) worst = std::max(worst, head[j] + tail[j]);
  const double bits = (worst - eps * static_cast<double>(n)) / std::log(2.0) +
                      4.0 * std::log2(static_cast<double>(n) + 2.0) + 2.0 * extra_bits;
  return static_cast<mpfr_prec_t>(std::ceil(std::max(bits, 64.0 + extra_bits)));
}

// Precision from the product of the factor norms; always enough, slower.
mpfr_prec_t safe_precision(const std::vector<Mat2>& a, const std::vector<Mat2>& l, double eps, int extra_bits) {
  double bits = 2.0 * std::log2(static_cast<double>(a.size()) + 2.0) + extra_bits;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double norm = std::sqrt(a[j].frobenius_sq()) + eps;
    if (j < l.size()) norm = std::max(norm, std::sqrt(l[j].frobenius_sq()));
    bits += std::log2(std::max(1.0, norm));
  }
  bits -= eps * static_cast<double>(a.size()) / std::log(2.0);
  return static_cast<mpfr_prec_t>(std::ceil(std::max(bits, 64.0 + extra_bits)));
}

// True when the rounding bound, not the product itself, decides a failed check.
bool error_dominated(const WideProduct& p, double limit) { return p.log_error > limit - std::log(4.0); }

constexpr std::size_t kChunk = 32;

// l[end - 1] ... l[begin]: exact chunks of kChunk factors joined by a
// product tree; the optional wide factor at wide_index is its own leaf.
WideProduct range_product(const std::vector<Mat2>& l, std::size_t begin, std::size_t end, mpfr_prec_t bits,
                          int wide_index = -1, const WideMat2* wide = nullptr) {
  std::vector<std::pair<std::size_t, std::size_t>> leaves;
  for (std::size_t j = begin; j < end;) {
    if (wide && static_cast<int>(j) == wide_index) {
      leaves.emplace_back(j, j + 1);
      ++j;
      continue;
    }
    std::size_t k = std::min(end, j + kChunk);
    if (wide && wide_index > static_cast<int>(j) && wide_index < static_cast<int>(k)) k = wide_index;
    leaves.emplace_back(j, k);
    j = k;
  }
  return tree_product(
      leaves.size(),
      [&](std::size_t i) {
        const auto [lo, hi] = leaves[i];
        if (wide && static_cast<int>(lo) == wide_index) return *wide;
        return exact_product(l.data() + lo, hi - lo);
      },
      bits);
}

double max_distance(const std::vector<Mat2>& a, const SegmentPlan& plan) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = static_cast<int>(j) == plan.wide_index && plan.wide ? plan.wide->distance_to(a[j])
                                                                         : spectral_norm(plan.l[j] - a[j]);
    worst = std::max(worst, d);
  }
  return worst;
}

// Column of m with the larger norm, or of its adjugate when `inverse`.
WideVec2 dominant_column(const WideMat2& m, bool inverse) {
  const WideMat2 s = inverse ? m.adjugate() : m;
  WideVec2 c0(s.a(), s.c()), c1(s.b(), s.d());
  BigFloat n0(s.precision()), n1(s.precision());
  mpfr_hypot(n0.get(), c0.x.get(), c0.y.get(), MPFR_RNDN);
  mpfr_hypot(n1.get(), c1.x.get(), c1.y.get(), MPFR_RNDN);
  WideVec2 out = mpfr_cmp(n0.get(), n1.get()) >= 0 ? std::move(c0) : std::move(c1);
  out.normalize();
  return out;
}

}  // namespace

mpfr_prec_t plan_precision(const Cocycle& co, const SegmentPlan& plan, int extra_bits) {
  (void)co;
  return working_precision(plan.l, plan.eps, extra_bits);
}

WideProduct plan_product(const SegmentPlan& plan, mpfr_prec_t bits) {
  return range_product(plan.l, 0, plan.l.size(), bits, plan.wide_index, plan.wide ? &*plan.wide : nullptr);
}

namespace {

// Steered branch at the given precision: fills the block of plan and
// returns Z Y X with its error bound.
WideProduct steer_segment(const Cocycle& co, SegmentPlan& plan, const std::vector<Mat2>& a, int m,
                          mpfr_prec_t bits) {
  const double eps = plan.eps;
  plan.l = a;
  plan.wide_index = -1;
  plan.wide.reset();
  plan.block = SteeringBlock{};
  const std::size_t j1 = static_cast<std::size_t>(plan.j1);
  const WideProduct xm = range_product(a, 0, j1, bits);
  const WideProduct zm = range_product(a, j1 + m, a.size(), bits);

  // A dominant column of X is within |X|^-2 of the line X u_X, and one of
  // adj(Z) within |Z|^-2 of s_Z; at a balanced cut both are far below
  // the e^{eps N} / (|X| |Z|) the product can absorb.
  WideVec2 d = dominant_column(xm.value, false);
  const WideVec2 target = dominant_column(zm.value, true);
  std::vector<WideVec2> t;
  t.reserve(static_cast<std::size_t>(m) + 1);
  t.push_back(target);
  for (int k = m - 1; k >= 0; --k) t.push_back(WideMat2(bits, a[j1 + k]).adjugate() * t.back());
  std::reverse(t.begin(), t.end());

  plan.block.x = co.base().step(plan.x, plan.j1);
  plan.block.m = m;
  plan.block.eps = eps;
  for (int k = 0; k < m; ++k) {
    const std::size_t j = j1 + k;
    if (plan.wide_index < 0) {
      const WideMat2 aj(bits, a[j]);
      const WideVec2 img = aj * d;
      const double phi = line_turn(img.to_vec2(), t[k + 1].to_vec2());
      const double cap = steering_cap(a[j], eps);
      if (std::abs(phi) <= cap) {
        WideMat2 mj = wide_line_rotation(img, t[k + 1]) * aj;
        d = mj * d;
        plan.l[j] = mj.to_mat2();
        plan.wide_index = static_cast<int>(j);
        plan.wide = std::move(mj);
        plan.block.angles.push_back(phi);
      } else {
        const double angle = std::copysign(cap, phi);
        plan.l[j] = rotation(angle) * a[j];
        d = WideMat2(bits, plan.l[j]) * d;
        plan.block.angles.push_back(angle);
      }
    } else {
      d = WideMat2(bits, a[j]) * d;
      plan.block.angles.push_back(0.0);
    }
    plan.block.matrices.push_back(plan.l[j]);
  }
  if (plan.wide_index < 0) {
    std::ostringstream os;
    os << "steering block of length " << m << " cannot reach s_Z from f^" << plan.j1 << "(x)";
    throw Error(ErrorCode::SteeringFailed, os.str());
  }
  d.normalize();
  plan.block.error = line_distance(d.to_vec2(), target.to_vec2());

  const WideProduct ym = range_product(plan.l, j1, j1 + m, bits, plan.wide_index, &*plan.wide);
  return compose(zm, compose(ym, xm, bits), bits);
}

}  // namespace

SegmentPlan plan_segment(const Cocycle& co, const BasePoint& x, double eps, int n, const Cell& w, int m1, int m,
                         const SegmentOptions& opt) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (m < 1 || m1 < 0) throw Error(ErrorCode::InvalidArgument, "need m >= 1 and m1 >= 0");
  const double c = opt.c > 0.0 ? opt.c : eps + co.sup_norm() + 1e-9;
  const BalanceProfile profile = balance_profile(co, x, n, c);
  const std::vector<Mat2> a = orbit_values(co, x, n);

  SegmentPlan plan;
  plan.x = x;
  plan.n = n;
  plan.eps = eps;
  plan.j0 = profile.j0;
  plan.l = a;

  BasePoint y = co.base().step(x, profile.j0);
  for (int j = profile.j0; j <= profile.j0 + m1 && j < n; ++j, y = co.base().step(y, 1)) {
    if (w.contains(y)) {
      plan.j1 = j;
      break;
    }
  }
  const bool already_small = profile.log_head[n] < 0.5 * eps * n;
  if (!already_small && plan.j1 < 0) {
    throw Error(ErrorCode::CoveringFailed, "no visit to W within m1 steps of j0");
  }
  const bool early = already_small || plan.j1 + m > n;
  plan.branch = early ? Branch::EarlyExit : Branch::Steered;
  std::optional<WideProduct> product;
  for (const mpfr_prec_t bits : {working_precision(a, eps, opt.extra_bits), safe_precision(a, {}, eps, opt.extra_bits)}) {
    product = early ? range_product(a, 0, a.size(), bits) : steer_segment(co, plan, a, m, bits);
    if (product->log_norm_bound() < eps * n || !error_dominated(*product, eps * n)) break;
  }

  plan.log_norm = product->log_norm_bound();
  plan.max_distance = max_distance(a, plan);
  plan.product = product->value.to_mat2();
  if (!(plan.max_distance < eps) || !(plan.log_norm < eps * n)) {
    std::ostringstream os;
    os << "segment at x = " << x.coord() << " failed certification: max distance " << plan.max_distance
       << ", log norm " << plan.log_norm << " vs eps N = " << eps * n;
    throw Error(ErrorCode::CertificationFailed, os.str());
  }
  return plan;
}

SegmentReport verify_segment(const Cocycle& co, const SegmentPlan& plan) {
  SegmentReport r;
  if (plan.n < 1 || static_cast<int>(plan.l.size()) != plan.n) return r;
  const std::vector<Mat2> a = orbit_values(co, plan.x, plan.n);
  r.max_distance = max_distance(a, plan);
  const double limit = plan.eps * plan.n;
  for (const mpfr_prec_t bits : {working_precision(plan.l, plan.eps, 256), safe_precision(a, plan.l, plan.eps, 256)}) {
    const WideProduct p = plan_product(plan, bits);
    r.log_norm = p.log_norm_bound();
    if (r.log_norm < limit || !error_dominated(p, limit)) break;
  }
  r.pass = r.max_distance < plan.eps && r.log_norm < plan.eps * plan.n;
  return r;
}

namespace {

std::string hex(double v) {
  std::ostringstream os;
  os << std::hexfloat << v;
  return os.str();
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw Error(ErrorCode::InvalidArgument, "bad number '" + token + "'");
  return v;
}

}  // namespace

std::string plan_to_text(const SegmentPlan& plan) {
  std::ostringstream os;
  os << "segment-plan 1\n";
  os << "x " << plan.x.u[0] << ' ' << plan.x.u[1] << ' ' << plan.x.u[2] << '\n';
  os << "n " << plan.n << '\n';
  os << "eps " << hex(plan.eps) << '\n';
  os << "branch " << to_string(plan.branch) << ' ' << plan.j0 << ' ' << plan.j1 << ' ' << plan.block.m << '\n';
  os << "log_norm " << hex(plan.log_norm) << '\n';
  os << "max_distance " << hex(plan.max_distance) << '\n';
  os << "block_error " << hex(plan.block.error) << '\n';
  os << "angles";
  for (double a : plan.block.angles) os << ' ' << hex(a);
  os << '\n';
  const Mat2& p = plan.product;
  os << "product " << hex(p.a) << ' ' << hex(p.b) << ' ' << hex(p.c) << ' ' << hex(p.d) << '\n';
  for (const Mat2& m : plan.l) os << "L " << hex(m.a) << ' ' << hex(m.b) << ' ' << hex(m.c) << ' ' << hex(m.d) << '\n';
  if (plan.wide) {
    const WideMat2& w = *plan.wide;
    os << "wide " << plan.wide_index << ' ' << w.precision() << ' ' << w.a().to_hex() << ' ' << w.b().to_hex() << ' '
       << w.c().to_hex() << ' ' << w.d().to_hex() << '\n';
  }
  return os.str();
}

SegmentPlan plan_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  SegmentPlan plan;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << "plan line " << line_no << ": " << why;
    throw Error(ErrorCode::InvalidArgument, os.str());
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.empty()) continue;
    auto next = [&]() {
      std::string tok;
      if (!(ls >> tok)) fail("missing field after '" + key + "'");
      return tok;
    };
    if (key == "segment-plan") {
      if (next() != "1") fail("unsupported version");
    } else if (key == "x") {
      for (int i = 0; i < kMaxDim; ++i) plan.x.u[i] = std::stoull(next());
    } else if (key == "n") {
      plan.n = std::stoi(next());
    } else if (key == "eps") {
      plan.eps = parse_double(next());
    } else if (key == "branch") {
      const std::string b = next();
      if (b != "steered" && b != "early-exit") fail("unknown branch '" + b + "'");
      plan.branch = b == "steered" ? Branch::Steered : Branch::EarlyExit;
      plan.j0 = std::stoi(next());
      plan.j1 = std::stoi(next());
      plan.block.m = std::stoi(next());
    } else if (key == "log_norm") {
      plan.log_norm = parse_double(next());
    } else if (key == "max_distance") {
      plan.max_distance = parse_double(next());
    } else if (key == "block_error") {
      plan.block.error = parse_double(next());
    } else if (key == "angles") {
      std::string tok;
      while (ls >> tok) plan.block.angles.push_back(parse_double(tok));
    } else if (key == "product" || key == "L") {
      Mat2 m;
      m.a = parse_double(next());
      m.b = parse_double(next());
      m.c = parse_double(next());
      m.d = parse_double(next());
      if (key == "product") {
        plan.product = m;
      } else {
        plan.l.push_back(m);
      }
    } else if (key == "wide") {
      plan.wide_index = std::stoi(next());
      const mpfr_prec_t bits = std::stol(next());
      BigFloat a = BigFloat::from_hex(next(), bits);
      BigFloat b = BigFloat::from_hex(next(), bits);
      BigFloat c = BigFloat::from_hex(next(), bits);
      BigFloat d = BigFloat::from_hex(next(), bits);
      plan.wide.emplace(std::move(a), std::move(b), std::move(c), std::move(d));
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (static_cast<int>(plan.l.size()) != plan.n) fail("matrix count does not match n");
  plan.block.eps = plan.eps;
  if (plan.branch == Branch::Steered) {
    plan.block.x = plan.x;
    for (int k = 0; k < plan.block.m && plan.j1 + k < plan.n; ++k) plan.block.matrices.push_back(plan.l[plan.j1 + k]);
  }
  return plan;
}

}  // namespace cocyclab
