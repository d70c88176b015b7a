#include "cocyclab/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "cocyclab/cocycle.hpp"
#include "cocyclab/perturb.hpp"
#include "cocyclab/scenarios.hpp"
#include "cocyclab/towers.hpp"

namespace cocyclab {

namespace {

bool frobenius_by_dp() {
  for (std::int64_t n = 1; n <= 30; ++n) {
    const std::int64_t limit = n * n + 2 * n + 2;
    std::vector<char> ok(static_cast<std::size_t>(limit + 1), 0);
    ok[0] = 1;
    for (std::int64_t v = 1; v <= limit; ++v) {
      ok[static_cast<std::size_t>(v)] = (v >= n && ok[static_cast<std::size_t>(v - n)]) ||
                                        (v >= n + 1 && ok[static_cast<std::size_t>(v - n - 1)]);
    }
    std::int64_t last_bad = 0;
    for (std::int64_t v = 1; v <= limit; ++v) {
      if (!ok[static_cast<std::size_t>(v)]) last_bad = v;
    }
    if (frobenius_threshold(n) != last_bad + 1) return false;
  }
  return true;
}

bool decompositions() {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t big = 1 + static_cast<std::int64_t>(rng() % 20);
    const std::int64_t n = frobenius_threshold(big) + static_cast<std::int64_t>(rng() % 1000);
    const auto [l, lp] = decompose_height(n, big);
    if (l < 0 || lp < 0 || l * big + lp * (big + 1) != n) return false;
  }
  return true;
}

// Floors listed explicitly, sorted and checked to tile the circle; return
// times measured by iterating orbits from sampled base points.
bool castle_by_enumeration(const BaseSystem& sys, std::int64_t n) {
  const Castle c = build_castle(sys, n);
  std::vector<Arc> floors;
  for (const Tower& t : c.towers) {
    for (std::int64_t j = 0; j < t.height; ++j) floors.push_back(t.base.shifted(static_cast<Fixed>(j) * sys.shift()));
  }
  std::sort(floors.begin(), floors.end(), [](const Arc& p, const Arc& q) { return p.lo < q.lo; });
  for (std::size_t k = 0; k < floors.size(); ++k) {
    const Arc& next = floors[(k + 1) % floors.size()];
    if (next.lo != floors[k].hi()) return false;
  }
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Tower& t = c.towers[rng() % c.towers.size()];
    const Fixed x = t.base.lo + static_cast<Fixed>(rng() % t.base.len);
    std::int64_t k = 1;
    for (Fixed y = x + sys.shift(); c.tower_of(y) < 0; y += sys.shift()) ++k;
    if (k != t.height) return false;
  }
  return true;
}

bool axes_by_brute_force() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    Mat2 m{u(rng), u(rng), u(rng), u(rng)};
    if (m.det() < 0) m = Mat2{m.b, m.a, m.d, m.c};
    if (m.det() < 1e-3) continue;
    const double s = 1.0 / std::sqrt(m.det());
    m = Mat2{m.a * s, m.b * s, m.c * s, m.d * s};
    if (operator_norm(m) < 1.05) continue;
    const SingularAxes ax = singular_axes(m);
    double best = -1.0, best_angle = 0.0;
    for (int k = 0; k < 4000; ++k) {
      const double a = kPi * k / 4000.0;
      const double len = (m * unit(a)).norm();
      if (len > best) {
        best = len;
        best_angle = a;
      }
    }
    if (line_distance(ax.u, unit(best_angle)) > 2.0 * kPi / 4000.0) return false;
  }
  return true;
}

bool frequency_by_orbits() {
  const BaseSystem sys = BaseSystem::golden();
  const FreqBound f = visit_freq_bound(sys, {Fixed(0)}, 0.1);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    BasePoint x;
    x.u[0] = rng();
    std::int64_t count = 0;
    for (std::int64_t n = 1; n <= 8 * f.n0; ++n, x = sys.step(x, 1)) {
      count += f.v.contains(x) ? 1 : 0;
      if (n >= f.n0 && static_cast<double>(count) / static_cast<double>(n) > f.sup_frequency) return false;
    }
  }
  return f.sup_frequency < 0.1;
}

}  // namespace

std::vector<SelfCheck> run_selftest(unsigned threads) {
  std::vector<SelfCheck> out;
  auto check = [&](const std::string& name, const std::function<bool()>& fn) {
    SelfCheck c;
    c.name = name;
    try {
      c.pass = fn();
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    out.push_back(c);
  };
  check("frobenius threshold agrees with dynamic programming", frobenius_by_dp);
  check("height decompositions are exact", decompositions);
  check("golden castle N=3 tiles the circle", [] { return castle_by_enumeration(BaseSystem::golden(), 3); });
  check("golden castle N=10 tiles the circle", [] { return castle_by_enumeration(BaseSystem::golden(), 10); });
  check("silver castle N=10 tiles the circle", [] { return castle_by_enumeration(BaseSystem::silver(), 10); });
  check("singular axes agree with brute force", axes_by_brute_force);
  check("rotation cocycle has subexponential growth", [&] {
    const Cocycle co(BaseSystem::golden(), rotation_valued(0.3, 1));
    return uniform_growth_test(co, 0.1, 1000, threads).pass;
  });
  check("constant diag(2, 1/2) has exponent log 2", [] {
    const Cocycle co(BaseSystem::golden(), constant(diag(2.0)));
    return std::abs(lyapunov_estimate(co, BasePoint{}, 100000) - std::log(2.0)) < 1e-9;
  });
  check("identity steering uses the closed-form number of steps", [] {
    const Cocycle co(BaseSystem::golden(), constant(Mat2::identity()));
    const SteeringBlock b = steer_direction(co, BasePoint{}, {1, 0}, {0, 1}, 0.2, 50);
    return b.m == static_cast<int>(std::ceil((kPi / 2.0) / (2.0 * std::asin(0.1))));
  });
  check("visit frequency bound holds along orbits", frequency_by_orbits);
  check("Hopf restricted cocycle has E^u of winding 1", [&] {
    return certify_restricted_uh(2.0 * kPi * (std::sqrt(5.0) - 1.0) / 2.0, 1024, threads).winding == 1;
  });
  return out;
}

}  // namespace cocyclab
