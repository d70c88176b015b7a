#include <cmath>
#include <random>

#include "cocyclab/error.hpp"
#include "cocyclab/sl2.hpp"
#include "doctest.h"

using namespace cocyclab;

namespace {

Mat2 random_sl2(std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> g(0.0, spread);
  while (true) {
    Mat2 m{g(rng), g(rng), g(rng), g(rng)};
    const double det = m.det();
    if (std::abs(det) < 1e-3) continue;
    if (det < 0) m = Mat2{m.b, m.a, m.d, m.c};
    return (1.0 / std::sqrt(std::abs(m.det()))) * m;
  }
}

double max_entry_diff(const Mat2& p, const Mat2& q) {
  return std::max({std::abs(p.a - q.a), std::abs(p.b - q.b), std::abs(p.c - q.c), std::abs(p.d - q.d)});
}

// Largest eigenvalue of A^T A from the characteristic polynomial.
double norm_oracle(const Mat2& m) {
  const double p = m.a * m.a + m.c * m.c;
  const double q = m.a * m.b + m.c * m.d;
  const double r = m.b * m.b + m.d * m.d;
  const double tr = p + r;
  const double disc = std::sqrt((p - r) * (p - r) + 4 * q * q);
  return std::sqrt(0.5 * (tr + disc));
}

// exp by scaling and squaring of a truncated Taylor series.
Mat2 exp_oracle(const TangentVec& v) {
  Mat2 x = std::ldexp(1.0, -10) * v.matrix();
  Mat2 term = Mat2::identity();
  Mat2 sum = Mat2::identity();
  for (int k = 1; k < 20; ++k) {
    term = (1.0 / k) * (term * x);
    sum = sum + term;
  }
  for (int i = 0; i < 10; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("compose small cases") {
  const Mat2 b{2.0, 1.0, 1.0, 1.0};
  CHECK(compose(Mat2::identity(), b) == b);
  CHECK(max_entry_diff(compose(diag(2.0), diag(2.0)), diag(4.0)) == 0.0);
  CHECK(max_entry_diff(compose(rotation(kPi / 3), rotation(kPi / 6)), Mat2{0, -1, 1, 0}) < 1e-15);
}

TEST_CASE("determinant drift policy") {
  CHECK_THROWS_AS(renormalized(Mat2{2.0, 0.0, 0.0, 1.0}), Error);
  const Mat2 slightly{1.0 + 1e-10, 0.0, 0.0, 1.0};
  CHECK(std::abs(renormalized(slightly).det() - 1.0) < 1e-15);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> t(0.0, 2 * kPi);
  Mat2 p = Mat2::identity();
  for (int i = 0; i < 1000000; ++i) p = compose(rotation(t(rng)) * diag(1.00005), p);
  CHECK(std::abs(p.det() - 1.0) <= 1e-6);
}

TEST_CASE("operator norm") {
  CHECK(operator_norm(diag(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(operator_norm(rotation(0.7)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(operator_norm(Mat2{1, 1, 0, 1}) == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-15));
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Mat2 m = random_sl2(rng, 3.0);
    CHECK(std::abs(operator_norm(m) / norm_oracle(m) - 1.0) < 1e-10);
    CHECK(std::abs(spectral_norm(m) / norm_oracle(m) - 1.0) < 1e-10);
  }
}

TEST_CASE("singular axes") {
  const SingularAxes d = singular_axes(diag(2.0));
  CHECK(d.u.x == doctest::Approx(1.0));
  CHECK(d.u.y == doctest::Approx(0.0));
  CHECK(d.s.x == doctest::Approx(0.0));
  CHECK(d.s.y == doctest::Approx(1.0));
  CHECK(d.norm == doctest::Approx(2.0));
  CHECK_THROWS_AS(singular_axes(rotation(kPi / 4)), Error);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Mat2 m = random_sl2(rng, 2.0);
    if (operator_norm(m) < 1.01) continue;
    const SingularAxes ax = singular_axes(m);
    CHECK(std::abs(dot(ax.u, ax.s)) <= 1e-9);
    CHECK(std::abs((m * ax.u).norm() / ax.norm - 1.0) <= 1e-9);
    CHECK(std::abs((m * ax.s).norm() * ax.norm - 1.0) <= 1e-8);
    CHECK(ax.u.x >= 0.0);
    const SingularAxes inv = singular_axes(m.inverse_unimodular());
    CHECK(line_distance(m * ax.u, inv.s) <= 1e-9);
  }
}

TEST_CASE("log and exp") {
  CHECK(log_map(Mat2::identity()) == TangentVec{});
  const Mat2 e = exp_map({0.8, 0.0, 0.0});
  CHECK(e.a == doctest::Approx(std::exp(0.8)).epsilon(1e-14));
  CHECK(e.d == doctest::Approx(std::exp(-0.8)).epsilon(1e-14));
  CHECK_THROWS_AS(log_map(rotation(kPi)), Error);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.35, 0.35);
  double worst = 0.0, worst_exp = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Mat2 m = Mat2::identity() + Mat2{u(rng), u(rng), u(rng), u(rng)};
    if (m.det() <= 0.1 || spectral_norm(m - Mat2::identity()) >= 0.5) continue;
    m = (1.0 / std::sqrt(m.det())) * m;
    const TangentVec v = log_map(m);
    worst = std::max(worst, max_entry_diff(exp_map(v), m));
    worst_exp = std::max(worst_exp, max_entry_diff(exp_map(v), exp_oracle(v)));
  }
  CHECK(worst < 1e-9);
  CHECK(worst_exp < 1e-9);
}

TEST_CASE("rotation group law") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = t(rng), b = t(rng);
    CHECK(max_entry_diff(rotation(a) * rotation(b), rotation(a + b)) < 1e-12);
  }
  CHECK(max_entry_diff(rotation(kPi), Mat2{-1, 0, 0, -1}) < 1e-15);
}
