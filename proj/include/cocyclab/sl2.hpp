#pragma once

#include <array>
#include <cmath>

namespace cocyclab {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const {
    const double n = norm();
    return {x / n, y / n};
  }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator+(Vec2 p, Vec2 q) { return {p.x + q.x, p.y + q.y}; }
  friend Vec2 operator-(Vec2 p, Vec2 q) { return {p.x - q.x, p.y - q.y}; }
};

inline double dot(Vec2 p, Vec2 q) { return p.x * q.x + p.y * q.y; }
inline double cross(Vec2 p, Vec2 q) { return p.x * q.y - p.y * q.x; }

// Direction of a line through the origin, in [0, pi).
double line_angle(Vec2 v);
// Unsigned angle between the lines spanned by v and w, in [0, pi/2].
double line_distance(Vec2 v, Vec2 w);
// Signed rotation in (-pi/2, pi/2] taking the line of `from` onto the line of `to`.
double line_turn(Vec2 from, Vec2 to);
inline Vec2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Row-major 2x2 real matrix. Elements of SL(2,R) are the intended values;
// general 2x2 arithmetic is available for differences and tangent vectors.
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  double frobenius_sq() const { return a * a + b * b + c * c + d * d; }
  // Inverse of a unimodular matrix (adjugate).
  Mat2 inverse_unimodular() const { return {d, -b, -c, a}; }
  Mat2 inverse() const {
    const double k = 1.0 / det();
    return {d * k, -b * k, -c * k, a * k};
  }

  friend Mat2 operator*(const Mat2& p, const Mat2& q) {
    return {p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d,
            p.c * q.a + p.d * q.c, p.c * q.b + p.d * q.d};
  }
  friend Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
  }
  friend Mat2 operator*(double s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
  friend Mat2 operator+(const Mat2& p, const Mat2& q) {
    return {p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d};
  }
  friend Mat2 operator-(const Mat2& p, const Mat2& q) {
    return {p.a - q.a, p.b - q.b, p.c - q.c, p.d - q.d};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

inline Mat2 diag(double s) { return {s, 0.0, 0.0, 1.0 / s}; }
Mat2 rotation(double theta);

// Determinant drift of a computed product is measured relative to the
// conditioning of ad - bc, i.e. relative to max(1, |A|_F^2).
double det_drift(const Mat2& m);
// Divides by sqrt(det) when the drift exceeds 1e-12; throws InvalidArgument
// when it exceeds 1e-9.
Mat2 renormalized(const Mat2& m);

// A * B with the determinant invariant maintained.
Mat2 compose(const Mat2& lhs, const Mat2& rhs);

// Largest singular value of a unimodular matrix, >= 1.
double operator_norm(const Mat2& m);
// Largest singular value of an arbitrary 2x2 matrix (used for distances).
double spectral_norm(const Mat2& m);
inline double distance(const Mat2& p, const Mat2& q) { return spectral_norm(p - q); }

struct SingularAxes {
  Vec2 u;       // expanding axis: |A u| = |A|
  Vec2 s;       // contracting axis: |A s| = 1/|A|
  double norm;  // |A|
};

inline constexpr double kRotationTolerance = 1e-8;

// Throws DegenerateAxes when |A| <= 1 + 1e-8. Both axes are reported with a
// nonnegative first coordinate (positive second coordinate when it is zero).
SingularAxes singular_axes(const Mat2& m);

// Traceless 2x2 matrix [[p, q], [r, -p]]: the tangent space of SL(2,R) at Id.
struct TangentVec {
  double p = 0.0, q = 0.0, r = 0.0;

  Mat2 matrix() const { return {p, q, r, -p}; }
  friend TangentVec operator*(double s, TangentVec v) { return {s * v.p, s * v.q, s * v.r}; }
  friend TangentVec operator+(TangentVec u, TangentVec v) { return {u.p + v.p, u.q + v.q, u.r + v.r}; }
  friend bool operator==(const TangentVec&, const TangentVec&) = default;
};

Mat2 exp_map(const TangentVec& v);
// Principal real logarithm; throws LogDomain when trace <= -2 + 1e-6.
TangentVec log_map(const Mat2& m);

}  // namespace cocyclab
