#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cocyclab/base.hpp"
#include "cocyclab/sl2.hpp"

namespace cocyclab {

class Generator {
 public:
  virtual ~Generator() = default;
  virtual Mat2 operator()(const BasePoint& x) const = 0;
  virtual std::string describe() const = 0;
  // An analytic upper bound for sup_x |A(x)| when one is known.
  virtual std::optional<double> sup_norm_bound() const { return std::nullopt; }
};

using GeneratorPtr = std::shared_ptr<const Generator>;

// [[E - 2 lambda cos(2 pi x), -1], [1, 0]] on the first coordinate.
GeneratorPtr schrodinger(double energy, double coupling);
// R_{phase + 2 pi k x}.
GeneratorPtr rotation_valued(double phase, int frequency = 0);
GeneratorPtr constant(const Mat2& m);
// R_{theta + alpha} diag(2, 1/2) R_{-theta} with theta = 2 pi x.
GeneratorPtr hopf(double alpha);
// Values at the grid points k / G, geodesically interpolated in the
// tangent chart: A_k exp(t log(A_k^{-1} A_{k+1})).
GeneratorPtr table(std::vector<Mat2> values);

class Cocycle {
 public:
  Cocycle(BaseSystem base, GeneratorPtr generator);

  const BaseSystem& base() const { return base_; }
  const Generator& generator() const { return *generator_; }
  const GeneratorPtr& generator_ptr() const { return generator_; }
  Mat2 at(const BasePoint& x) const { return (*generator_)(x); }
  // max(analytic bound, max over the grid), at least 1.
  double sup_norm() const { return sup_norm_; }

 private:
  BaseSystem base_;
  GeneratorPtr generator_;
  double sup_norm_ = 1.0;
};

// Product kept as exp(log_scale) * m, rescaled every 32 factors.
struct ScaledProduct {
  Mat2 m = Mat2::identity();
  double log_scale = 0.0;
  int pending = 0;

  void left_multiply(const Mat2& a);   // P <- a P
  void right_multiply(const Mat2& a);  // P <- P a
  void rescale();
  double log_norm() const;
};

// A(f^{n-1}x) ... A(x). Throws Overflow past 1e300.
Mat2 iterate(const Cocycle& co, const BasePoint& x, std::int64_t n);
double log_norm_of_product(const Cocycle& co, const BasePoint& x, std::int64_t n);
double lyapunov_estimate(const Cocycle& co, const BasePoint& x, std::int64_t n);

struct GrowthReport {
  std::int64_t n = 0;
  std::size_t grid_size = 0;
  double min = 0.0, max = 0.0, mean = 0.0;
  BasePoint argmax;
  std::vector<double> values;  // (1/n) log |A_n| per grid point
};

// Per grid point values of (1/n) log|A_n(x)|.
GrowthReport growth_report(const Cocycle& co, std::int64_t n, unsigned threads = 1);

// 4 x the largest difference between grid neighbours; bounds the variation
// of a grid function inside one grid cell.
double grid_margin(const BaseSystem& sys, const std::vector<double>& values);

struct GrowthTest {
  bool pass = false;
  double margin = 0.0;
  GrowthReport report;
};

GrowthTest uniform_growth_test(const Cocycle& co, double eps, std::int64_t n, unsigned threads = 1);

enum class UhVerdict { Certificate, Witness, Inconclusive };

const char* to_string(UhVerdict v);

struct UhResult {
  UhVerdict verdict = UhVerdict::Inconclusive;
  std::int64_t n = 0;
  // Certificate: cone half-width, expansion min |A_n v| over the cones
  // and its per-step rate, the certified slack and margins, and the cone
  // centres per grid point.
  double half_width = 0.0;
  double expansion = 0.0;
  double rate = 0.0;
  double slack = 0.0;
  double margin = 0.0;
  std::vector<double> centers;
  // Witness: point and horizon with small growth.
  BasePoint witness;
  double witness_value = 0.0;
};

struct UhOptions {
  std::int64_t n_max = 64;
  int pushforward = 20;
  double min_half_width = 1e-6;
  double witness_rate = 1e-2;
  unsigned threads = 1;
};

// Centre of the cone field at x: direction of A_k(f^{-k} x) (1, 0).
Vec2 pushforward_direction(const Cocycle& co, const BasePoint& x, int k);

UhResult uh_certify(const Cocycle& co, const UhOptions& opt = {});

struct EmpiricalMeasure {
  BasePoint x;
  std::int64_t n = 1;
};

double empirical_exponent(const Cocycle& co, const EmpiricalMeasure& mu, std::int64_t s);

struct GrowthWitness {
  BasePoint x;
  std::int64_t n = 0;
  double value = 0.0;  // (1/n) log |A_n(x)|
};

// First (horizon, grid point) in order with |A_n(x)| > e^{eps n}.
std::optional<GrowthWitness> subexponential_witness_search(const Cocycle& co, double eps,
                                                           const std::vector<std::int64_t>& horizons,
                                                           unsigned threads = 1);

}  // namespace cocyclab
