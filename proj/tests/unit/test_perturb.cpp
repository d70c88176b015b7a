#include <cmath>
#include <random>

#include "cocyclab/error.hpp"
#include "cocyclab/perturb.hpp"
#include "doctest.h"

using namespace cocyclab;

namespace {

Cocycle schrodinger_cocycle(double lambda) { return Cocycle(BaseSystem::golden(), schrodinger(0.0, lambda)); }

// Smallest integer N with eps N > need, evaluated from the definition.
int smallest_exceeding(double eps, double need) {
  int n = 1;
  while (!(eps * n > need)) ++n;
  return n;
}

}  // namespace

TEST_CASE("steering a constant identity cocycle") {
  const Cocycle co(BaseSystem::golden(), constant(Mat2::identity()));
  const double eps = 0.2;
  const double per_step = 2.0 * std::asin(eps / 2.0);
  const int expected = static_cast<int>(std::ceil((kPi / 2.0) / per_step));
  const SteeringBlock b = steer_direction(co, BasePoint{}, {1, 0}, {0, 1}, eps, 50);
  CHECK(b.m == expected);
  CHECK(b.error < 1e-6);
  Mat2 p = Mat2::identity();
  for (const Mat2& m : b.matrices) {
    CHECK(spectral_norm(m - Mat2::identity()) < eps);
    p = m * p;
  }
  CHECK(line_distance(p * Vec2{1, 0}, {0, 1}) < 1e-9);

  const SteeringBlock none = steer_direction(co, BasePoint{}, {1, 0}, {-1, 0}, eps, 50);
  CHECK(none.m == 0);
  CHECK(none.matrices.empty());
  CHECK_THROWS_AS(steer_direction(co, BasePoint{}, {1, 0}, {0, 1}, eps, expected - 1), Error);
}

TEST_CASE("steering blocks on a Schrodinger cocycle") {
  const Cocycle co = schrodinger_cocycle(3.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  for (int i = 0; i < 50; ++i) {
    BasePoint x;
    x.u[0] = rng();
    const Vec2 v = unit(angle(rng)), w = unit(angle(rng));
    const SteeringBlock b = steer_direction(co, x, v, w, 0.1, 200);
    Mat2 p = Mat2::identity();
    BasePoint y = x;
    for (int j = 0; j < b.m; ++j, y = co.base().step(y, 1)) {
      CHECK(spectral_norm(b.matrices[j] - co.at(y)) < 0.1);
      p = b.matrices[j] * p;
    }
    CHECK(line_distance(p * v, w) < 1e-6);
  }
}

TEST_CASE("balance profile") {
  const Cocycle d(BaseSystem::golden(), constant(diag(2.0)));
  const BalanceProfile p = balance_profile(d, BasePoint{}, 10, 2.1);
  for (int j = 0; j <= 10; ++j) CHECK(p.delta(j) == doctest::Approx(std::pow(4.0, j - 5)).epsilon(1e-12));
  CHECK(p.j0 == 5);

  const Cocycle r(BaseSystem::golden(), rotation_valued(0.4, 1));
  CHECK(balance_profile(r, r.base().point(0.2), 40, 1.5).j0 == 0);

  // Delta_0 Delta_N = 1 for any cocycle.
  const Cocycle s = schrodinger_cocycle(3.0);
  const BalanceProfile q = balance_profile(s, s.base().point(0.37), 200, 7.0);
  CHECK(std::abs(q.log_delta.front() + q.log_delta.back()) < 1e-9);
  CHECK(std::abs(q.log_delta[q.j0]) < std::log(7.0));

  CHECK_THROWS_AS(balance_profile(d, BasePoint{}, 10, 1.9), Error);
}

TEST_CASE("choose_n") {
  const Cocycle s = schrodinger_cocycle(3.0);
  const double eps = 0.1, c = eps + s.sup_norm() + 1e-9;
  for (int m1 : {1, 10, 100}) {
    const double need = std::max((4.0 * m1 + 1.0) * std::log(c) + 0.5 * std::log(2.0), c);
    CHECK(choose_n(s, eps, c, m1) == smallest_exceeding(eps, need));
  }
  CHECK(choose_n(s, 0.05, c, 10) > choose_n(s, 0.1, c, 10));
  CHECK(choose_n(s, 0.1, c, 20) > choose_n(s, 0.1, c, 10));
}

TEST_CASE("steering window and segment plans") {
  const Cocycle co = schrodinger_cocycle(3.0);
  const double eps = 0.1;
  const SteeringWindow win = choose_steering_window(co, eps, 4);
  REQUIRE(win.m > 0);
  REQUIRE(win.grid_points > 0);
  CHECK(win.width <= 0.9 * return_gap(co.base(), win.m) + 1e-12);
  for (std::size_t k = 0; k < co.base().grid_size(); ++k) {
    const BasePoint g = co.base().grid_point(k);
    if (win.w.contains(g)) CHECK(steering_feasible(co, g, eps, win.m));
  }

  const std::int64_t m1 = covering_time(co.base(), win.w);
  const double c = eps + co.sup_norm() + 1e-9;
  const int n = choose_n(co, eps, c, static_cast<int>(m1));
  std::mt19937_64 rng(9);
  int steered = 0;
  for (int i = 0; i < 4; ++i) {
    BasePoint x;
    x.u[0] = rng();
    const SegmentPlan plan = plan_segment(co, x, eps, n, win.w, static_cast<int>(m1), win.m);
    CHECK(plan.l.size() == static_cast<std::size_t>(n));
    CHECK(plan.max_distance < eps);
    CHECK(plan.log_norm < eps * n);
    if (plan.branch == Branch::Steered) {
      ++steered;
      CHECK(plan.j1 >= plan.j0);
      CHECK(plan.j1 <= plan.j0 + m1);
      BasePoint y = x;
      for (int j = 0; j < n; ++j, y = co.base().step(y, 1)) {
        if (j < plan.j1 || j >= plan.j1 + win.m) CHECK(plan.l[j] == co.at(y));
      }
    }
    const SegmentReport r = verify_segment(co, plan);
    CHECK(r.pass);

    const SegmentPlan back = plan_from_text(plan_to_text(plan));
    CHECK(back.l.size() == plan.l.size());
    CHECK(back.branch == plan.branch);
    CHECK(back.wide_index == plan.wide_index);
    CHECK(verify_segment(co, back).pass);

    if (i == 0) {
      SegmentPlan bad = back;
      bad.l[n / 2] = Mat2{3.0, 0.0, 0.0, 1.0 / 3.0} * bad.l[n / 2];
      CHECK_FALSE(verify_segment(co, bad).pass);
    }
  }
  CHECK(steered > 0);

  CHECK_THROWS_AS(plan_from_text("segment-plan 1\nn 2\nL 1 0 0 1\n"), Error);
}

TEST_CASE("rotation segments exit early") {
  const Cocycle co(BaseSystem::golden(), rotation_valued(0.3, 1));
  const SegmentPlan plan = plan_segment(co, co.base().point(0.1), 0.1, 500, Cell::whole(1), 5, 3);
  CHECK(plan.branch == Branch::EarlyExit);
  CHECK(plan.max_distance == 0.0);
  CHECK(verify_segment(co, plan).pass);
}
