#include <cmath>
#include <random>

#include "cocyclab/cocycle.hpp"
#include "cocyclab/error.hpp"
#include "doctest.h"

using namespace cocyclab;

namespace {

double max_entry_diff(const Mat2& p, const Mat2& q) {
  return std::max({std::abs(p.a - q.a), std::abs(p.b - q.b), std::abs(p.c - q.c), std::abs(p.d - q.d)});
}

Cocycle diag_cocycle(int grid = 256) { return Cocycle(BaseSystem::golden(grid), constant(diag(2.0))); }
Cocycle rotation_cocycle(int grid = 256) { return Cocycle(BaseSystem::golden(grid), rotation_valued(0.3, 1)); }
Cocycle schrodinger_cocycle(double lambda, int grid = 256) {
  return Cocycle(BaseSystem::golden(grid), schrodinger(0.0, lambda));
}

}  // namespace

TEST_CASE("iterate") {
  const Cocycle co = diag_cocycle();
  const BasePoint x = co.base().point(0.1);
  CHECK(max_entry_diff(iterate(co, x, 3), diag(8.0)) < 1e-15);
  CHECK(iterate(co, x, 0) == Mat2::identity());
  CHECK_THROWS_AS(iterate(co, x, 2000), Error);

  const Cocycle s = schrodinger_cocycle(3.0);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(0, 50);
  for (int i = 0; i < 100; ++i) {
    BasePoint y;
    y.u[0] = rng();
    const int m = len(rng), n = len(rng);
    const Mat2 whole = iterate(s, y, m + n);
    const Mat2 split = iterate(s, s.base().step(y, m), n) * iterate(s, y, m);
    CHECK(max_entry_diff(whole, split) / std::max(1.0, std::sqrt(whole.frobenius_sq())) < 1e-8);
  }
}

TEST_CASE("sup norm") {
  CHECK(schrodinger_cocycle(3.0).sup_norm() == doctest::Approx(operator_norm(Mat2{6, -1, 1, 0})));
  CHECK(rotation_cocycle().sup_norm() == doctest::Approx(1.0));
  CHECK(diag_cocycle().sup_norm() == 2.0);
}

TEST_CASE("log norm of product") {
  const Cocycle d = diag_cocycle();
  CHECK(log_norm_of_product(d, d.base().point(0.3), 1000) == doctest::Approx(1000 * std::log(2.0)).epsilon(1e-14));
  const Cocycle r = rotation_cocycle();
  CHECK(std::abs(log_norm_of_product(r, r.base().point(0.3), 5000)) < 1e-9);

  const Cocycle s = schrodinger_cocycle(3.0);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(1, 200);
  for (int i = 0; i < 200; ++i) {
    BasePoint y;
    y.u[0] = rng();
    const int n = len(rng);
    const double direct = std::log(operator_norm(iterate(s, y, n)));
    const double scaled = log_norm_of_product(s, y, n);
    CHECK(std::abs(scaled - direct) <= 1e-8 * std::max(1.0, std::abs(direct)));
    CHECK(scaled >= 0.0);
    CHECK(scaled <= n * std::log(s.sup_norm()) + 1e-9);
    // Subadditivity.
    const int m = len(rng);
    const double left = log_norm_of_product(s, y, m + n);
    const double right = log_norm_of_product(s, s.base().step(y, m), n) + log_norm_of_product(s, y, m);
    CHECK(left <= right + 1e-8);
  }
}

TEST_CASE("lyapunov estimates") {
  const Cocycle d = diag_cocycle();
  for (int n : {1, 7, 100}) CHECK(lyapunov_estimate(d, d.base().point(0.2), n) == doctest::Approx(std::log(2.0)));
  const Cocycle r = Cocycle(BaseSystem::golden(), rotation_valued(0.3));
  CHECK(lyapunov_estimate(r, r.base().point(0.2), 10000) < 1e-12);

  const Cocycle s = schrodinger_cocycle(5.0);
  std::vector<double> at_n, at_2n;
  for (int k = 0; k < 10; ++k) {
    const BasePoint x = s.base().point(0.0917 * k + 0.013);
    at_n.push_back(lyapunov_estimate(s, x, 1000000));
    at_2n.push_back(lyapunov_estimate(s, x, 2000000));
  }
  const auto [lo, hi] = std::minmax_element(at_n.begin(), at_n.end());
  CHECK(*lo > 0.0);
  CHECK(*hi - *lo < 2e-3);
  for (int k = 0; k < 10; ++k) CHECK(std::abs(at_n[k] - at_2n[k]) < 1e-3);
}

TEST_CASE("uniform growth test") {
  const Cocycle r = rotation_cocycle();
  const GrowthTest pass = uniform_growth_test(r, 0.01, 100);
  CHECK(pass.pass);
  CHECK(pass.report.max < 1e-12);
  const GrowthTest fail = uniform_growth_test(diag_cocycle(), 0.1, 50);
  CHECK_FALSE(fail.pass);
  CHECK(fail.report.min == doctest::Approx(std::log(2.0)));
  CHECK(fail.report.min <= fail.report.mean);
  CHECK(fail.report.mean <= fail.report.max);
  // A passing test at n bounds the exponent at 10 n.
  CHECK(lyapunov_estimate(r, r.base().point(0.0), 1000) < 0.01 + pass.margin);
}

TEST_CASE("uh certification") {
  const UhResult d = uh_certify(diag_cocycle(64));
  REQUIRE(d.verdict == UhVerdict::Certificate);
  CHECK(d.n == 1);
  CHECK(d.expansion == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(d.centers[5]) < 1e-12);

  const UhResult r = uh_certify(Cocycle(BaseSystem::golden(64), rotation_valued(0.3)));
  CHECK(r.verdict == UhVerdict::Witness);

  const UhResult s = uh_certify(schrodinger_cocycle(3.0, 512));
  CHECK(s.verdict != UhVerdict::Certificate);
}

TEST_CASE("empirical exponent") {
  const Cocycle d = diag_cocycle();
  CHECK(empirical_exponent(d, {d.base().point(0.4), 60}, 7) == doctest::Approx(std::log(2.0)));
  const Cocycle s = schrodinger_cocycle(3.0);
  const BasePoint x = s.base().point(0.77);
  // s = n: a single block per starting point, averaged over the s starting points.
  double single = 0.0;
  for (int i = 0; i < 40; ++i) single += log_norm_of_product(s, s.base().step(x, i), 40) / 40.0;
  CHECK(empirical_exponent(s, {x, 40}, 40) == doctest::Approx(single / 40.0));

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(1, 12);
  for (int i = 0; i < 100; ++i) {
    BasePoint y;
    y.u[0] = rng();
    const int s_len = pick(rng);
    const int n = s_len * pick(rng) + pick(rng) % s_len;
    const std::int64_t m = n / s_len;
    double rhs = 0.0;
    for (int k = 0; k < s_len; ++k) rhs += log_norm_of_product(s, s.base().step(y, k), s_len * m);
    rhs /= static_cast<double>(s_len * s_len * m);
    CHECK(empirical_exponent(s, {y, n}, s_len) >= rhs - 1e-9);
  }
}

TEST_CASE("witness search") {
  const auto d = subexponential_witness_search(diag_cocycle(), 0.1, {10, 100, 1000});
  REQUIRE(d.has_value());
  CHECK(d->n == 10);
  CHECK_FALSE(subexponential_witness_search(rotation_cocycle(), 0.1, {10, 100, 1000}).has_value());
  const Cocycle s = schrodinger_cocycle(5.0);
  const double l = lyapunov_estimate(s, s.base().point(0.1), 100000);
  CHECK(subexponential_witness_search(s, 0.5 * l, {100, 1000}).has_value());
}

TEST_CASE("table generator interpolates geodesically") {
  std::vector<Mat2> values;
  for (int k = 0; k < 64; ++k) values.push_back(rotation(2 * kPi * k / 64.0) * diag(1.5));
  const Cocycle t(BaseSystem::golden(64), table(values));
  for (int k = 0; k < 64; ++k) CHECK(max_entry_diff(t.at(t.base().grid_point(k)), values[k]) < 1e-12);
  const BasePoint mid = t.base().point(2.5 / 64.0);
  CHECK(operator_norm(t.at(mid)) == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(std::abs(t.at(mid).det() - 1.0) < 1e-12);
}
