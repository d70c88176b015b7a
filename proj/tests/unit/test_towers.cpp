#include <random>

#include "cocyclab/error.hpp"
#include "cocyclab/towers.hpp"
#include "doctest.h"

using namespace cocyclab;

TEST_CASE("frobenius threshold on small cases") {
  CHECK(frobenius_threshold(1) == 1);
  CHECK(frobenius_threshold(2) == 2);
  CHECK(frobenius_threshold(3) == 6);
  CHECK(frobenius_threshold(10) == 90);
}

TEST_CASE("height decomposition") {
  const auto [l, lp] = decompose_height(100, 10);
  CHECK(l * 10 + lp * 11 == 100);
  CHECK(lp == 0);
  const auto [m, mp] = decompose_height(21, 10);
  CHECK(m == 1);
  CHECK(mp == 1);
  CHECK_THROWS_AS(decompose_height(89, 10), Error);
}

TEST_CASE("castles pass their exact checks") {
  for (const BaseSystem& sys : {BaseSystem::golden(), BaseSystem::silver(), BaseSystem::circle(0.1234567)}) {
    for (std::int64_t n : {1, 2, 7, 40}) {
      const Castle c = build_castle(sys, n);
      CHECK(c.n == n);
      CHECK(check_castle(sys, c).ok());
      for (const Tower& t : c.towers) CHECK((t.height == n || t.height == n + 1));
    }
  }
}

TEST_CASE("castle check detects a wrong height") {
  const BaseSystem sys = BaseSystem::golden();
  Castle c = build_castle(sys, 5);
  c.towers.front().height += 1;
  const CastleCheck k = check_castle(sys, c);
  CHECK_FALSE(k.ok());
  CHECK_FALSE(k.covers);
}

TEST_CASE("tower lookup agrees with first returns") {
  const BaseSystem sys = BaseSystem::silver();
  const Castle c = build_castle(sys, 6);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const Tower& t = c.towers[rng() % c.towers.size()];
    const Fixed x = t.base.lo + static_cast<Fixed>(rng() % t.base.len);
    CHECK(c.tower_of(x) >= 0);
    std::int64_t k = 1;
    while (c.tower_of(x + static_cast<Fixed>(k) * sys.shift()) < 0) ++k;
    CHECK(k == t.height);
  }
}

TEST_CASE("max visits against orbit counting") {
  const BaseSystem sys = BaseSystem::golden();
  const FreqBound f = visit_freq_bound(sys, {Fixed(0), Fixed(1) << 62}, 0.2);
  const std::int64_t n = 50;
  const std::int64_t sup = max_visits(sys, f.v, n);
  std::mt19937_64 rng(4);
  std::int64_t seen = 0;
  for (int i = 0; i < 20000; ++i) {
    BasePoint x;
    x.u[0] = rng();
    std::int64_t count = 0;
    for (std::int64_t j = 0; j < n; ++j, x = sys.step(x, 1)) count += f.v.contains(x) ? 1 : 0;
    CHECK(count <= sup);
    seen = std::max(seen, count);
  }
  CHECK(seen >= sup - 1);
  CHECK(f.sup_frequency < f.eps);
}

TEST_CASE("towers need a circle base") {
  CHECK_THROWS_AS(build_castle(BaseSystem::torus({0.3, 0.7}), 4), Error);
}
