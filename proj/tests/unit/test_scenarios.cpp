#include <cmath>

#include "cocyclab/error.hpp"
#include "cocyclab/scenarios.hpp"
#include "doctest.h"

using namespace cocyclab;

namespace {

DirectionField field_of(int turns, int size) {
  DirectionField f;
  for (int k = 0; k < size; ++k) f.angles.push_back(std::fmod(turns * kPi * k / size + 2.0 * kPi, kPi));
  return f;
}

}  // namespace

TEST_CASE("winding number of model fields") {
  CHECK(winding_number(field_of(0, 64)) == 0);
  CHECK(winding_number(field_of(2, 64)) == 1);
  CHECK(winding_number(field_of(-2, 64)) == -1);
  CHECK_THROWS_AS(winding_number(field_of(40, 64)), Error);
}

TEST_CASE("Hopf generator conjugates diag(2, 1/2)") {
  const Mat2 m = hopf_generator(0.7, 0.3);
  CHECK(m.det() == doctest::Approx(1.0));
  CHECK(operator_norm(m) == doctest::Approx(2.0));
  const Vec2 v = m * unit(0.7);
  CHECK(line_distance(v, unit(1.0)) < 1e-12);
}

TEST_CASE("Hopf orbit stays on the invariant circle") {
  const HopfSystem s{0.9};
  std::array<double, 4> p = HopfSystem::on_circle(0.2);
  for (int i = 0; i < 10; ++i) p = s.step(p);
  const std::array<double, 4> q = HopfSystem::on_circle(0.2 + 10 * 0.9);
  for (int i = 0; i < 4; ++i) CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
}

TEST_CASE("restricted cocycle is uniformly hyperbolic with E^u of winding 1") {
  const HopfCertificate h = certify_restricted_uh(2.0 * kPi * (std::sqrt(5.0) - 1.0) / 2.0, 2048);
  CHECK(h.winding == 1);
  CHECK(h.max_invariance < 1e-6);
  CHECK(h.max_orthogonality < 1e-6);
}
