#include <cmath>
#include <random>
#include <vector>

#include "cocyclab/wide.hpp"
#include "doctest.h"

using namespace cocyclab;

namespace {

std::vector<Mat2> random_sl2(std::size_t count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Mat2> out;
  while (out.size() < count) {
    const double a = u(rng), b = u(rng), c = u(rng);
    if (std::abs(a) < 0.1) continue;
    out.push_back(Mat2{a, b, c, (1.0 + b * c) / a});
  }
  return out;
}

// Frobenius distance of two wide matrices, evaluated at 4096 bits.
double log_frobenius_gap(const WideMat2& p, const WideMat2& q) {
  BigFloat sum(4096, 0.0), t(4096);
  const BigFloat* lhs[] = {&p.a(), &p.b(), &p.c(), &p.d()};
  const BigFloat* rhs[] = {&q.a(), &q.b(), &q.c(), &q.d()};
  for (int i = 0; i < 4; ++i) {
    mpfr_sub(t.get(), lhs[i]->get(), rhs[i]->get(), MPFR_RNDN);
    mpfr_sqr(t.get(), t.get(), MPFR_RNDN);
    mpfr_add(sum.get(), sum.get(), t.get(), MPFR_RNDN);
  }
  mpfr_sqrt(sum.get(), sum.get(), MPFR_RNDN);
  mpfr_log(sum.get(), sum.get(), MPFR_RNDN);
  return sum.to_double();
}

}  // namespace

TEST_CASE("tree product stays within its error bound of the exact product") {
  const std::vector<Mat2> m = random_sl2(300, 5);
  const WideMat2 exact = exact_product(m.data(), m.size());
  for (mpfr_prec_t bits : {64, 128, 256}) {
    const WideProduct p = tree_product(m.size(), [&](std::size_t i) { return WideMat2(bits, m[i]); }, bits);
    CHECK(log_frobenius_gap(exact, p.value) <= p.log_error);
    CHECK(p.log_norm_bound() >= exact.log_norm() - 1e-12);
  }
}

TEST_CASE("exact product matches a sequential product at high precision") {
  const std::vector<Mat2> m = random_sl2(100, 9);
  WideMat2 seq(8192);
  for (const Mat2& f : m) seq.left_multiply(f);
  CHECK(log_frobenius_gap(exact_product(m.data(), m.size()), seq) < -200.0);
}

TEST_CASE("line rotation maps one line onto the other") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  for (int i = 0; i < 100; ++i) {
    const WideVec2 from(256, unit(ang(rng))), to(256, unit(ang(rng)));
    const WideMat2 r = wide_line_rotation(from, to);
    const Mat2 rd = r.to_mat2();
    CHECK(rd.det() == doctest::Approx(1.0).epsilon(1e-14));
    WideVec2 image = r * from;
    image.normalize();
    CHECK(line_distance(image.to_vec2(), to.to_vec2()) < 1e-14);
  }
}

TEST_CASE("hex round trip is exact") {
  const BigFloat x(200, 1.0 / 3.0);
  const BigFloat y = BigFloat::from_hex(x.to_hex(), 200);
  CHECK(mpfr_equal_p(x.get(), y.get()));
}
