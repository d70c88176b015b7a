#pragma once

#include <mpfr.h>

#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "cocyclab/sl2.hpp"

namespace cocyclab {

// Owning wrapper around an mpfr_t with a fixed precision in bits.
class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t bits);
  BigFloat(mpfr_prec_t bits, double value);
  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  mpfr_ptr get() { return value_; }
  mpfr_srcptr get() const { return value_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(value_); }
  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }

  // Hexadecimal floating literal, e.g. "0x1.8p+1"; exact at full precision.
  std::string to_hex() const;
  static BigFloat from_hex(const std::string& text, mpfr_prec_t bits);

 private:
  mpfr_t value_;
};

struct WideVec2 {
  BigFloat x;
  BigFloat y;

  WideVec2(mpfr_prec_t bits, Vec2 v) : x(bits, v.x), y(bits, v.y) {}
  WideVec2(BigFloat px, BigFloat py) : x(std::move(px)), y(std::move(py)) {}

  Vec2 to_vec2() const;
  void normalize();
};

// 2x2 matrix with MPFR entries. Products of double matrices are formed
// exactly up to the working precision.
class WideMat2 {
 public:
  explicit WideMat2(mpfr_prec_t bits);  // identity
  WideMat2(mpfr_prec_t bits, const Mat2& m);
  WideMat2(BigFloat a, BigFloat b, BigFloat c, BigFloat d);

  mpfr_prec_t precision() const { return a_.precision(); }
  const BigFloat& a() const { return a_; }
  const BigFloat& b() const { return b_; }
  const BigFloat& c() const { return c_; }
  const BigFloat& d() const { return d_; }

  // this <- m * this
  void left_multiply(const Mat2& m);
  // this <- this * m
  void right_multiply(const Mat2& m);

  friend WideMat2 operator*(const WideMat2& p, const WideMat2& q);
  // Product rounded to `bits`; *inexact reports whether any entry rounded.
  friend WideMat2 multiply(const WideMat2& p, const WideMat2& q, mpfr_prec_t bits, bool* inexact);
  WideVec2 operator*(const WideVec2& v) const;
  // Adjugate; parallel to the inverse, so it maps directions identically.
  WideMat2 adjugate() const;

  Mat2 to_mat2() const;
  // log of the largest singular value (any determinant).
  double log_norm() const;
  // Spectral norm of (this - m), rounded to double.
  double distance_to(const Mat2& m) const;
  // Unit expanding axis u (|M u| = |M|) and its orthogonal complement.
  WideVec2 expanding_axis() const;
  WideVec2 contracting_axis() const;

 private:
  BigFloat a_, b_, c_, d_;
};

WideMat2 multiply(const WideMat2& p, const WideMat2& q, mpfr_prec_t bits, bool* inexact = nullptr);

// Rotation taking the line of `from` onto the line of `to`, by an angle in
// [-pi/2, pi/2]; built from the cosine and sine, so no transcendental calls.
WideMat2 wide_line_rotation(const WideVec2& from, const WideVec2& to);

double log_frobenius(const WideMat2& m);
// log(e^p + e^q), accepting -infinity.
double log_add(double p, double q);

// m[count - 1] ... m[0] in exact integer arithmetic, stored at the
// precision its entries need.
WideMat2 exact_product(const Mat2* m, std::size_t count);

// A computed product together with a bound on its distance from the exact
// product of the factors.
struct WideProduct {
  WideMat2 value;
  double log_error = -std::numeric_limits<double>::infinity();  // log of a Frobenius bound

  // log of an upper bound for the norm of the exact product.
  double log_norm_bound() const;
};

// later * earlier, rounded to `bits`, with the error bound propagated.
WideProduct compose(const WideProduct& later, const WideProduct& earlier, mpfr_prec_t bits);

// factor(count - 1) ... factor(0) by balanced splitting. Each node keeps
// only the bits its exact value needs, capped at `bits`, so the cost is
// dominated by the few top-level products.
WideProduct tree_product(std::size_t count, const std::function<WideMat2(std::size_t)>& factor, mpfr_prec_t bits);

}  // namespace cocyclab
