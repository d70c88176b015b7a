#include <cmath>
#include <memory>

#include "cocyclab/error.hpp"
#include "cocyclab/surgery.hpp"
#include "doctest.h"

using namespace cocyclab;

namespace {

// R_{2 pi x} diag(mu): nonuniformly hyperbolic with positive exponent.
struct Herman final : Generator {
  double mu;
  explicit Herman(double m) : mu(m) {}
  Mat2 operator()(const BasePoint& x) const override { return rotation(2.0 * kPi * x.coord()) * diag(mu); }
  std::string describe() const override { return "herman"; }
};

}  // namespace

TEST_CASE("continuity modulus of a rotation-valued cocycle") {
  const Cocycle co(BaseSystem::golden(), rotation_valued(0.0, 1));
  const double d = continuity_modulus(co, 0.1, 10);
  CHECK(d > 0.0);
  // |R_{2 pi x} - R_{2 pi y}| = 2 sin(pi |x - y|) must stay below eps.
  CHECK(2.0 * std::sin(kPi * d) < 0.1);
}

TEST_CASE("surgery refuses uniformly hyperbolic input") {
  const Cocycle co(BaseSystem::golden(), constant(diag(2.0)));
  try {
    build_config(co, 0.1);
    FAIL("expected NotApplicable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotApplicable);
  }
}

TEST_CASE("surgery refuses input with zero exponent") {
  const Cocycle co(BaseSystem::golden(), rotation_valued(0.2, 1));
  CHECK_THROWS_AS(build_config(co, 0.5), Error);
}

TEST_CASE("surgery on a Herman cocycle certifies subexponential growth") {
  const Cocycle co(BaseSystem::golden(), std::make_shared<Herman>(1.3));
  const double eps = 2.0;
  const SurgeryConfig cfg = build_config(co, eps);
  CHECK(check_config(co, cfg).empty());
  CHECK(cfg.exponent > 1e-3);

  const PerturbedCocycle pc = assemble_perturbation(co, cfg);
  CHECK(pc.sup_distance < pc.distance_bound);
  CHECK(pc.interior_exact);

  const auto& gen = *pc.generator;
  for (const Tower& t : cfg.castle.towers) {
    const auto p = gen.locate(t.base.lo + t.base.len / 2);
    CHECK(p.floor == 0);
    CHECK(gen.bump(p.base) >= 0.0);
    CHECK(gen.bump(p.base) <= 1.0);
  }

  const std::int64_t n =
      std::max<std::int64_t>(cfg.freq.n0 + 1, static_cast<std::int64_t>(std::ceil(10.0 * (cfg.n + 1) / eps)));
  const GrowthCertificate g = verify_growth(pc, n);
  CHECK(g.dominated);
  CHECK(g.max_direct + g.margin < g.bound);
  CHECK(g.max_structural < g.bound);
  CHECK(g.pass);
}
