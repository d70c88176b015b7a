#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cocyclab/base.hpp"
#include "cocyclab/error.hpp"
#include "doctest.h"

using namespace cocyclab;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

// First m with every gap between the points lo + j*alpha (j <= m) at most
// w: then the arcs [p, p + w) cover the circle.
std::int64_t covering_oracle(Fixed alpha, Fixed w) {
  std::set<Fixed> pts{0};
  for (std::int64_t m = 0;; ++m) {
    if (m > 0) pts.insert(static_cast<Fixed>(m) * alpha);
    Fixed widest = 0;
    Fixed prev = *pts.rbegin();
    for (Fixed p : pts) {
      widest = std::max<Fixed>(widest, p - prev);
      prev = p;
    }
    if (pts.size() == 1) widest = ~Fixed(0);
    if (widest <= w) return m;
  }
}

std::int64_t return_time_oracle(const BaseSystem& sys, const Cell& u, BasePoint x) {
  for (std::int64_t j = 1;; ++j) {
    x = sys.step(x, 1);
    if (u.contains(x)) return j;
  }
}

}  // namespace

TEST_CASE("step arithmetic") {
  const BaseSystem sys = BaseSystem::circle(0.3);
  CHECK(sys.step(sys.point(0.9), 1).coord() == doctest::Approx(0.2).epsilon(1e-15));
  const BasePoint x = sys.point(0.123);
  CHECK(sys.step(x, 0) == x);
  CHECK(sys.step(sys.step(x, 5), -5) == x);
  CHECK(sys.step(sys.step(x, 1234567), 89) == sys.step(x, 1234567 + 89));
  const BaseSystem t = BaseSystem::torus({kGolden, std::sqrt(2.0) - 1.0});
  const BasePoint y = t.point({0.1, 0.7, 0.0});
  CHECK(t.step(t.step(y, -17), 17) == y);
}

TEST_CASE("quadratic angles are exact to the last bit") {
  const BaseSystem g = BaseSystem::golden();
  CHECK(std::abs(g.angle() - kGolden) < 1e-16);
  const BaseSystem s = BaseSystem::silver();
  CHECK(std::abs(s.angle() - (std::sqrt(2.0) - 1.0)) < 2e-16);
  CHECK_FALSE(g.near_rational_warning().has_value());
  CHECK(BaseSystem::circle(0.25).near_rational_warning().has_value());
}

TEST_CASE("grid points") {
  const BaseSystem sys = BaseSystem::golden(4096);
  CHECK(sys.grid_size() == 4096);
  CHECK(sys.grid_point(1).coord() == 1.0 / 4096);
  const BaseSystem t = BaseSystem::torus({0.1, 0.2}, 16);
  CHECK(t.grid_size() == 256);
  CHECK(t.grid_point(17).coord(0) == 1.0 / 16);
  CHECK(t.grid_point(17).coord(1) == 1.0 / 16);
}

TEST_CASE("first small multiple against enumeration") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const Fixed a = rng();
    const Fixed w = rng() >> (8 + trial % 8);
    std::int64_t brute = -1;
    for (std::int64_t j = 1; j <= 200000; ++j) {
      if (static_cast<Fixed>(j) * a < w) {
        brute = j;
        break;
      }
    }
    const auto fast = first_small_multiple(a, w, 200000);
    if (brute < 0) {
      CHECK_FALSE(fast.has_value());
    } else {
      REQUIRE(fast.has_value());
      CHECK(*fast == brute);
    }
  }
}

TEST_CASE("covering time") {
  const BaseSystem sys = BaseSystem::golden();
  CHECK(covering_time(sys, Cell::whole(1)) == 0);
  CHECK_THROWS_AS(covering_time(sys, Cell::arc(Arc{})), Error);
  const Arc w = Arc::from_reals(0.0, 0.3);
  CHECK(covering_time(sys, Cell::arc(w)) == covering_oracle(sys.shift(), w.len));

  // Denominators of the golden convergents are Fibonacci numbers.
  std::vector<std::int64_t> q{1, 1};
  while (q.back() < 100000) q.push_back(q[q.size() - 1] + q[q.size() - 2]);
  for (double h : {0.1, 0.03, 0.007, 0.001}) {
    const Cell cell = Cell::arc(Arc::from_reals(0.2, 0.2 + h));
    const std::int64_t m1 = covering_time(sys, cell);
    CHECK(m1 == covering_oracle(sys.shift(), to_fixed(h)));
    // With q_k + q_{k-1} points every gap is at most |q_{k-1} alpha| < 1/q_k < h.
    const auto qk = std::find_if(q.begin() + 1, q.end(), [&](std::int64_t d) { return 1.0 / d < h; });
    CHECK(m1 <= *qk + *(qk - 1) - 1);
  }

  // Enlarging W never increases m1.
  std::int64_t last = covering_time(sys, Cell::arc(Arc::from_reals(0.5, 0.51)));
  for (double h : {0.02, 0.05, 0.1, 0.2}) {
    const std::int64_t m1 = covering_time(sys, Cell::arc(Arc::from_reals(0.5, 0.5 + h)));
    CHECK(m1 <= last);
    last = m1;
  }
}

TEST_CASE("covering time on a torus uses the grid margin") {
  const BaseSystem t = BaseSystem::torus({kGolden, std::sqrt(2.0) - 1.0}, 32);
  Cell box;
  box.dim = 2;
  Box b;
  b.sides[0] = Arc::from_reals(0.0, 0.25);
  b.sides[1] = Arc::from_reals(0.0, 0.25);
  box.boxes.push_back(b);
  const std::int64_t m1 = covering_time(t, box);
  CHECK(m1 >= 15);
  for (std::size_t k = 0; k < t.grid_size(); ++k) {
    BasePoint p = t.grid_point(k);
    bool hit = false;
    for (std::int64_t j = 0; j <= m1 && !hit; ++j, p = t.step(p, -1)) hit = box.contains(p);
    CHECK(hit);
  }
}

TEST_CASE("small boundary cells") {
  const BaseSystem sys = BaseSystem::golden();
  const BasePoint x0 = sys.point(0.5);
  const Cell c = small_boundary_cell(sys, x0, 0.1);
  CHECK(c.contains(x0));
  CHECK(c.diameter() <= 0.4);
  const Arc a = c.arcs()[0];
  CHECK(a.lo - to_fixed(0.3) < to_fixed(0.4));
  CHECK(to_fixed(0.7) - a.hi() < to_fixed(0.4));
  // Endpoints avoid the first 1e5 orbit points.
  double nearest = 1.0;
  BasePoint y = x0;
  for (int j = 0; j < 100000; ++j, y = sys.step(y, 1)) {
    for (Fixed e : c.boundary_points()) nearest = std::min(nearest, circle_distance(e, y.u[0]));
  }
  CHECK(nearest > 1e-7);

  const BaseSystem shift = BaseSystem::sturmian(kGolden, 4);
  const Cell cyl = small_boundary_cell(shift, shift.point(0.37), 0.05);
  CHECK(cyl.clopen);
  CHECK(cyl.boundary_points().empty());
  CHECK(cyl.contains(shift.point(0.37)));
  CHECK(cyl.diameter() <= 0.2);
}

TEST_CASE("cylinders are coding classes") {
  const BaseSystem shift = BaseSystem::sturmian(kGolden, 6);
  const Fixed cut = Fixed(0) - shift.shift();
  auto letters = [&](BasePoint x) {
    std::vector<int> out;
    for (int j = 0; j < 6; ++j, x = shift.step(x, 1)) out.push_back(x.u[0] >= cut ? 1 : 0);
    return out;
  };
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    BasePoint x;
    x.u[0] = rng();
    const Cell cyl = shift.cylinder(x, 6);
    for (int k = 0; k < 50; ++k) {
      BasePoint y;
      y.u[0] = rng();
      CHECK(cyl.contains(y) == (letters(y) == letters(x)));
    }
  }
}

TEST_CASE("first return") {
  const BaseSystem sys = BaseSystem::golden();
  const auto whole = first_return(sys, Cell::whole(1));
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].time == 1);

  const Cell u = Cell::arc(Arc::between(0, sys.shift()));
  const auto classes = first_return(sys, u);
  std::set<std::int64_t> times;
  for (const auto& rc : classes) times.insert(rc.time);
  CHECK(times == std::set<std::int64_t>{1, 2});

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const Fixed lo = rng();
    const Fixed len = rng() >> (4 + trial % 10);
    const Cell arc = Cell::arc({lo, len, false});
    const auto parts = first_return(sys, arc);
    CHECK(parts.size() <= 3);
    double total = 0.0;
    for (const auto& rc : parts) total += rc.cell.measure();
    CHECK(std::abs(total - arc.measure()) < 1e-9);
    for (int k = 0; k < 200; ++k) {
      BasePoint x;
      x.u[0] = lo + static_cast<Fixed>((static_cast<unsigned __int128>(rng()) * len) >> 64);
      const std::int64_t t = return_time_oracle(sys, arc, x);
      int owners = 0;
      for (const auto& rc : parts) {
        if (rc.cell.contains(x)) {
          ++owners;
          CHECK(rc.time == t);
        }
      }
      CHECK(owners == 1);
    }
    // Towers over each class are pairwise disjoint.
    std::vector<Arc> floors;
    for (const auto& rc : parts) {
      for (std::int64_t j = 0; j < rc.time && j < 400; ++j) {
        floors.push_back(rc.cell.arcs()[0].shifted(static_cast<Fixed>(j) * sys.shift()));
      }
    }
    for (std::size_t i = 0; i < floors.size(); ++i) {
      for (std::size_t j = i + 1; j < floors.size(); ++j) CHECK_FALSE(arcs_intersect(floors[i], floors[j]));
    }
  }

  // A union of two arcs goes through the general path.
  Cell two;
  two.dim = 1;
  Box b1, b2;
  b1.sides[0] = Arc::from_reals(0.1, 0.15);
  b2.sides[0] = Arc::from_reals(0.6, 0.62);
  two.boxes = {b1, b2};
  const auto mixed = first_return(sys, two);
  for (int k = 0; k < 500; ++k) {
    BasePoint x;
    x.u[0] = rng();
    if (!two.contains(x)) continue;
    const std::int64_t t = return_time_oracle(sys, two, x);
    int owners = 0;
    for (const auto& rc : mixed) {
      if (rc.cell.contains(x)) {
        ++owners;
        CHECK(rc.time == t);
      }
    }
    CHECK(owners == 1);
  }
  CHECK_THROWS_AS(first_return(sys, Cell::arc(Arc::between(0, 1000)), 1000), Error);
}
