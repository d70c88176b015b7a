#include "cocyclab/wide.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cocyclab/error.hpp"

namespace cocyclab {

BigFloat::BigFloat(mpfr_prec_t bits) {
  mpfr_init2(value_, bits);
  mpfr_set_zero(value_, 1);
}

BigFloat::BigFloat(mpfr_prec_t bits, double value) {
  mpfr_init2(value_, bits);
  mpfr_set_d(value_, value, MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(value_, other.precision());
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  mpfr_init2(value_, mpfr_get_prec(other.value_));
  mpfr_swap(value_, other.value_);
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    mpfr_set_prec(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  mpfr_swap(value_, other.value_);
  return *this;
}

BigFloat::~BigFloat() { mpfr_clear(value_); }

std::string BigFloat::to_hex() const {
  char* text = nullptr;
  mpfr_asprintf(&text, "%Ra", value_);
  std::string out(text);
  mpfr_free_str(text);
  return out;
}

BigFloat BigFloat::from_hex(const std::string& text, mpfr_prec_t bits) {
  BigFloat out(bits);
  if (mpfr_set_str(out.value_, text.c_str(), 0, MPFR_RNDN) != 0) {
    throw Error(ErrorCode::InvalidArgument, "malformed hex float '" + text + "'");
  }
  return out;
}

Vec2 WideVec2::to_vec2() const { return {x.to_double(), y.to_double()}; }

void WideVec2::normalize() {
  BigFloat n(x.precision());
  mpfr_hypot(n.get(), x.get(), y.get(), MPFR_RNDN);
  mpfr_div(x.get(), x.get(), n.get(), MPFR_RNDN);
  mpfr_div(y.get(), y.get(), n.get(), MPFR_RNDN);
}

WideMat2::WideMat2(mpfr_prec_t bits) : a_(bits, 1.0), b_(bits, 0.0), c_(bits, 0.0), d_(bits, 1.0) {}

WideMat2::WideMat2(mpfr_prec_t bits, const Mat2& m)
    : a_(bits, m.a), b_(bits, m.b), c_(bits, m.c), d_(bits, m.d) {}

WideMat2::WideMat2(BigFloat a, BigFloat b, BigFloat c, BigFloat d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {}

namespace {

// out = p * x + q * y with double coefficients.
void combine(mpfr_ptr out, double p, mpfr_srcptr x, double q, mpfr_srcptr y, mpfr_ptr scratch) {
  mpfr_mul_d(out, x, p, MPFR_RNDN);
  mpfr_mul_d(scratch, y, q, MPFR_RNDN);
  mpfr_add(out, out, scratch, MPFR_RNDN);
}

// out = p * x + q * y with wide coefficients.
// Returns nonzero when any step rounded.
int combine(mpfr_ptr out, mpfr_srcptr p, mpfr_srcptr x, mpfr_srcptr q, mpfr_srcptr y, mpfr_ptr scratch) {
  int inexact = mpfr_mul(out, p, x, MPFR_RNDN);
  inexact |= mpfr_mul(scratch, q, y, MPFR_RNDN);
  inexact |= mpfr_add(out, out, scratch, MPFR_RNDN);
  return inexact;
}

}  // namespace

void WideMat2::left_multiply(const Mat2& m) {
  const mpfr_prec_t bits = precision();
  BigFloat na(bits), nb(bits), nc(bits), nd(bits), t(bits);
  combine(na.get(), m.a, a_.get(), m.b, c_.get(), t.get());
  combine(nb.get(), m.a, b_.get(), m.b, d_.get(), t.get());
  combine(nc.get(), m.c, a_.get(), m.d, c_.get(), t.get());
  combine(nd.get(), m.c, b_.get(), m.d, d_.get(), t.get());
  a_ = std::move(na);
  b_ = std::move(nb);
  c_ = std::move(nc);
  d_ = std::move(nd);
}

void WideMat2::right_multiply(const Mat2& m) {
  const mpfr_prec_t bits = precision();
  BigFloat na(bits), nb(bits), nc(bits), nd(bits), t(bits);
  combine(na.get(), m.a, a_.get(), m.c, b_.get(), t.get());
  combine(nb.get(), m.b, a_.get(), m.d, b_.get(), t.get());
  combine(nc.get(), m.a, c_.get(), m.c, d_.get(), t.get());
  combine(nd.get(), m.b, c_.get(), m.d, d_.get(), t.get());
  a_ = std::move(na);
  b_ = std::move(nb);
  c_ = std::move(nc);
  d_ = std::move(nd);
}

WideMat2 operator*(const WideMat2& p, const WideMat2& q) {
  return multiply(p, q, std::max(p.precision(), q.precision()));
}

WideMat2 multiply(const WideMat2& p, const WideMat2& q, mpfr_prec_t bits, bool* inexact) {
  BigFloat a(bits), b(bits), c(bits), d(bits), t(std::max(bits, p.precision() + q.precision()));
  int flag = combine(a.get(), p.a_.get(), q.a_.get(), p.b_.get(), q.c_.get(), t.get());
  flag |= combine(b.get(), p.a_.get(), q.b_.get(), p.b_.get(), q.d_.get(), t.get());
  flag |= combine(c.get(), p.c_.get(), q.a_.get(), p.d_.get(), q.c_.get(), t.get());
  flag |= combine(d.get(), p.c_.get(), q.b_.get(), p.d_.get(), q.d_.get(), t.get());
  if (inexact) *inexact = flag != 0;
  return WideMat2(std::move(a), std::move(b), std::move(c), std::move(d));
}

WideVec2 WideMat2::operator*(const WideVec2& v) const {
  const mpfr_prec_t bits = precision();
  BigFloat x(bits), y(bits), t(bits);
  combine(x.get(), a_.get(), v.x.get(), b_.get(), v.y.get(), t.get());
  combine(y.get(), c_.get(), v.x.get(), d_.get(), v.y.get(), t.get());
  return WideVec2(std::move(x), std::move(y));
}

WideMat2 WideMat2::adjugate() const {
  BigFloat nb = b_, nc = c_;
  mpfr_neg(nb.get(), nb.get(), MPFR_RNDN);
  mpfr_neg(nc.get(), nc.get(), MPFR_RNDN);
  return WideMat2(d_, std::move(nb), std::move(nc), a_);
}

Mat2 WideMat2::to_mat2() const {
  return {a_.to_double(), b_.to_double(), c_.to_double(), d_.to_double()};
}

namespace {

// Largest singular value: (|(a+d, b-c)| + |(a-d, b+c)|) / 2.
BigFloat sigma_max(mpfr_srcptr a, mpfr_srcptr b, mpfr_srcptr c, mpfr_srcptr d, mpfr_prec_t bits) {
  BigFloat s1(bits), s2(bits), t1(bits), t2(bits);
  mpfr_add(t1.get(), a, d, MPFR_RNDN);
  mpfr_sub(t2.get(), b, c, MPFR_RNDN);
  mpfr_hypot(s1.get(), t1.get(), t2.get(), MPFR_RNDN);
  mpfr_sub(t1.get(), a, d, MPFR_RNDN);
  mpfr_add(t2.get(), b, c, MPFR_RNDN);
  mpfr_hypot(s2.get(), t1.get(), t2.get(), MPFR_RNDN);
  mpfr_add(s1.get(), s1.get(), s2.get(), MPFR_RNDN);
  mpfr_div_2ui(s1.get(), s1.get(), 1, MPFR_RNDN);
  return s1;
}

}  // namespace

double WideMat2::log_norm() const {
  const BigFloat s = sigma_max(a_.get(), b_.get(), c_.get(), d_.get(), precision());
  long e = 0;
  const double mant = mpfr_get_d_2exp(&e, s.get(), MPFR_RNDN);
  return std::log(mant) + static_cast<double>(e) * std::log(2.0);
}

double WideMat2::distance_to(const Mat2& m) const {
  const mpfr_prec_t bits = precision();
  BigFloat a = a_, b = b_, c = c_, d = d_;
  mpfr_sub_d(a.get(), a.get(), m.a, MPFR_RNDN);
  mpfr_sub_d(b.get(), b.get(), m.b, MPFR_RNDN);
  mpfr_sub_d(c.get(), c.get(), m.c, MPFR_RNDN);
  mpfr_sub_d(d.get(), d.get(), m.d, MPFR_RNDN);
  return sigma_max(a.get(), b.get(), c.get(), d.get(), bits).to_double();
}

WideVec2 WideMat2::expanding_axis() const {
  const mpfr_prec_t bits = precision();
  // Principal axis of M^T M = [[p, q], [q, r]] at angle atan2(2q, p - r) / 2.
  BigFloat p(bits), q(bits), r(bits), t(bits);
  combine(p.get(), a_.get(), a_.get(), c_.get(), c_.get(), t.get());
  combine(q.get(), a_.get(), b_.get(), c_.get(), d_.get(), t.get());
  combine(r.get(), b_.get(), b_.get(), d_.get(), d_.get(), t.get());
  mpfr_mul_2ui(q.get(), q.get(), 1, MPFR_RNDN);
  mpfr_sub(p.get(), p.get(), r.get(), MPFR_RNDN);
  BigFloat theta(bits);
  mpfr_atan2(theta.get(), q.get(), p.get(), MPFR_RNDN);
  mpfr_div_2ui(theta.get(), theta.get(), 1, MPFR_RNDN);
  BigFloat x(bits), y(bits);
  mpfr_sin_cos(y.get(), x.get(), theta.get(), MPFR_RNDN);
  return WideVec2(std::move(x), std::move(y));
}

WideVec2 WideMat2::contracting_axis() const {
  WideVec2 u = expanding_axis();
  mpfr_neg(u.y.get(), u.y.get(), MPFR_RNDN);
  return WideVec2(std::move(u.y), std::move(u.x));
}

WideMat2 wide_line_rotation(const WideVec2& from, const WideVec2& to) {
  const mpfr_prec_t bits = std::max(from.x.precision(), to.x.precision());
  WideVec2 u = from, v = to;
  u.normalize();
  v.normalize();
  BigFloat c(bits), s(bits), t(bits);
  combine(c.get(), u.x.get(), v.x.get(), u.y.get(), v.y.get(), t.get());
  mpfr_mul(s.get(), u.x.get(), v.y.get(), MPFR_RNDN);
  mpfr_mul(t.get(), u.y.get(), v.x.get(), MPFR_RNDN);
  mpfr_sub(s.get(), s.get(), t.get(), MPFR_RNDN);
  if (mpfr_sgn(c.get()) < 0) {
    mpfr_neg(c.get(), c.get(), MPFR_RNDN);
    mpfr_neg(s.get(), s.get(), MPFR_RNDN);
  }
  BigFloat ns = s;
  mpfr_neg(ns.get(), ns.get(), MPFR_RNDN);
  return WideMat2(c, std::move(ns), std::move(s), c);
}

double log_frobenius(const WideMat2& m) {
  double out = -std::numeric_limits<double>::infinity();
  for (const BigFloat* x : {&m.a(), &m.b(), &m.c(), &m.d()}) {
    if (mpfr_zero_p(x->get())) continue;
    long e = 0;
    const double mant = mpfr_get_d_2exp(&e, x->get(), MPFR_RNDN);
    out = log_add(out, 2.0 * (std::log(std::abs(mant)) + static_cast<double>(e) * std::log(2.0)));
  }
  return 0.5 * out;
}

double log_add(double p, double q) {
  if (p < q) std::swap(p, q);
  if (q == -std::numeric_limits<double>::infinity()) return p;
  return p + std::log1p(std::exp(q - p));
}

double WideProduct::log_norm_bound() const { return log_add(value.log_norm(), log_error); }

WideProduct compose(const WideProduct& later, const WideProduct& earlier, mpfr_prec_t bits) {
  bool inexact = false;
  WideProduct out{multiply(later.value, earlier.value, bits, &inexact), later.log_error};
  const double fl = log_frobenius(later.value), fe = log_frobenius(earlier.value);
  double err = log_add(fl + earlier.log_error, later.log_error + fe);
  err = log_add(err, later.log_error + earlier.log_error);
  // Each entry is two rounded products and a rounded sum.
  if (inexact) err = log_add(err, std::log(3.0) + fl + fe - static_cast<double>(bits) * std::log(2.0));
  out.log_error = err;
  return out;
}

namespace {

// 2^exp [[v0, v1], [v2, v3]] with integer entries.
struct IntMat {
  mpz_t v[4];
  long exp = 0;

  IntMat() {
    for (auto& x : v) mpz_init(x);
  }
  IntMat(const IntMat&) = delete;
  IntMat& operator=(const IntMat&) = delete;
  ~IntMat() {
    for (auto& x : v) mpz_clear(x);
  }
  void swap(IntMat& o) {
    for (int i = 0; i < 4; ++i) mpz_swap(v[i], o.v[i]);
    std::swap(exp, o.exp);
  }
  std::size_t bits() const {
    std::size_t b = 1;
    for (const auto& x : v) b = std::max(b, mpz_sizeinbase(x, 2));
    return b;
  }
  double log_frobenius() const {
    double out = -std::numeric_limits<double>::infinity();
    for (const auto& x : v) {
      if (mpz_sgn(x) == 0) continue;
      long e = 0;
      const double mant = mpz_get_d_2exp(&e, x);
      out = log_add(out, 2.0 * (std::log(std::abs(mant)) + static_cast<double>(e + exp) * std::log(2.0)));
    }
    return 0.5 * out;
  }
};

// out = p q exactly.
void int_multiply(IntMat& out, const IntMat& p, const IntMat& q) {
  mpz_mul(out.v[0], p.v[0], q.v[0]);
  mpz_addmul(out.v[0], p.v[1], q.v[2]);
  mpz_mul(out.v[1], p.v[0], q.v[1]);
  mpz_addmul(out.v[1], p.v[1], q.v[3]);
  mpz_mul(out.v[2], p.v[2], q.v[0]);
  mpz_addmul(out.v[2], p.v[3], q.v[2]);
  mpz_mul(out.v[3], p.v[2], q.v[1]);
  mpz_addmul(out.v[3], p.v[3], q.v[3]);
  out.exp = p.exp + q.exp;
}

// Exact integer form of a double matrix.
void int_from_mat2(IntMat& out, const Mat2& m) {
  const double v[4] = {m.a, m.b, m.c, m.d};
  long lowest = std::numeric_limits<long>::max();
  int e[4] = {0, 0, 0, 0};
  double mant[4];
  for (int i = 0; i < 4; ++i) {
    mant[i] = std::ldexp(std::frexp(v[i], &e[i]), 53);
    if (v[i] != 0.0) lowest = std::min(lowest, static_cast<long>(e[i]) - 53);
  }
  if (lowest == std::numeric_limits<long>::max()) lowest = 0;
  for (int i = 0; i < 4; ++i) {
    mpz_set_d(out.v[i], mant[i]);
    if (v[i] != 0.0) mpz_mul_2exp(out.v[i], out.v[i], static_cast<mp_bitcnt_t>(e[i] - 53 - lowest));
  }
  out.exp = lowest;
}

void int_from_wide(IntMat& out, const WideMat2& m) {
  const BigFloat* src[4] = {&m.a(), &m.b(), &m.c(), &m.d()};
  long e[4];
  long lowest = std::numeric_limits<long>::max();
  for (int i = 0; i < 4; ++i) {
    e[i] = mpfr_zero_p(src[i]->get()) ? 0 : mpfr_get_z_2exp(out.v[i], src[i]->get());
    if (mpfr_zero_p(src[i]->get())) mpz_set_ui(out.v[i], 0);
    else lowest = std::min(lowest, e[i]);
  }
  if (lowest == std::numeric_limits<long>::max()) lowest = 0;
  for (int i = 0; i < 4; ++i) {
    if (mpz_sgn(out.v[i]) != 0) mpz_mul_2exp(out.v[i], out.v[i], static_cast<mp_bitcnt_t>(e[i] - lowest));
  }
  out.exp = lowest;
}

WideMat2 int_to_wide(const IntMat& m) {
  const mpfr_prec_t bits = std::max<mpfr_prec_t>(53, static_cast<mpfr_prec_t>(m.bits()));
  BigFloat out[4] = {BigFloat(bits), BigFloat(bits), BigFloat(bits), BigFloat(bits)};
  for (int i = 0; i < 4; ++i) mpfr_set_z_2exp(out[i].get(), m.v[i], m.exp, MPFR_RNDN);
  return WideMat2(std::move(out[0]), std::move(out[1]), std::move(out[2]), std::move(out[3]));
}

void int_exact_product(IntMat& p, const Mat2* m, std::size_t count) {
  IntMat f, q;
  mpz_set_ui(p.v[0], 1);
  mpz_set_ui(p.v[1], 0);
  mpz_set_ui(p.v[2], 0);
  mpz_set_ui(p.v[3], 1);
  p.exp = 0;
  for (std::size_t k = 0; k < count; ++k) {
    int_from_mat2(f, m[k]);
    int_multiply(q, f, p);
    p.swap(q);
  }
}

struct IntNode {
  IntMat value;
  double log_error = -std::numeric_limits<double>::infinity();
};

// Keeps at most `bits` significant bits; truncation moves each entry by
// less than one unit of the new exponent.
void truncate(IntNode& node, std::size_t bits) {
  const std::size_t size = node.value.bits();
  if (size <= bits) return;
  const mp_bitcnt_t shift = size - bits;
  for (auto& x : node.value.v) mpz_tdiv_q_2exp(x, x, shift);
  node.value.exp += static_cast<long>(shift);
  node.log_error = log_add(node.log_error, std::log(2.0) + static_cast<double>(node.value.exp) * std::log(2.0));
}

void tree(IntNode& out, std::size_t begin, std::size_t end, const std::function<WideMat2(std::size_t)>& factor,
          std::size_t bits) {
  if (end - begin == 1) {
    int_from_wide(out.value, factor(begin));
    truncate(out, bits);
    return;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  IntNode lo, hi;
  tree(lo, begin, mid, factor, bits);
  tree(hi, mid, end, factor, bits);
  int_multiply(out.value, hi.value, lo.value);
  const double fh = hi.value.log_frobenius(), fl = lo.value.log_frobenius();
  out.log_error = log_add(log_add(fh + lo.log_error, hi.log_error + fl), hi.log_error + lo.log_error);
  truncate(out, bits);
}

}  // namespace

WideMat2 exact_product(const Mat2* m, std::size_t count) {
  IntMat p;
  int_exact_product(p, m, count);
  return int_to_wide(p);
}

WideProduct tree_product(std::size_t count, const std::function<WideMat2(std::size_t)>& factor, mpfr_prec_t bits) {
  if (count == 0) return WideProduct{WideMat2(bits)};
  IntNode root;
  tree(root, 0, count, factor, static_cast<std::size_t>(bits));
  return WideProduct{int_to_wide(root.value), root.log_error};
}

}  // namespace cocyclab
