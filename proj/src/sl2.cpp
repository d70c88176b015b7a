#include "cocyclab/sl2.hpp"

#include <algorithm>
#include <sstream>

#include "cocyclab/error.hpp"

namespace cocyclab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateAxes: return "DegenerateAxes";
    case ErrorCode::LogDomain: return "LogDomain";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::NoBalancedIndex: return "NoBalancedIndex";
    case ErrorCode::SteeringFailed: return "SteeringFailed";
    case ErrorCode::CoveringFailed: return "CoveringFailed";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::SearchFailed: return "SearchFailed";
    case ErrorCode::NotRepresentable: return "NotRepresentable";
    case ErrorCode::DisjointnessFailed: return "DisjointnessFailed";
    case ErrorCode::ShrinkExhausted: return "ShrinkExhausted";
    case ErrorCode::ResolutionExceeded: return "ResolutionExceeded";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::BlendBoundViolated: return "BlendBoundViolated";
    case ErrorCode::DecompositionFailed: return "DecompositionFailed";
    case ErrorCode::LiftFailed: return "LiftFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

double line_angle(Vec2 v) {
  double t = std::atan2(v.y, v.x);
  if (t < 0.0) t += kPi;
  if (t >= kPi) t -= kPi;
  return t;
}

double line_turn(Vec2 from, Vec2 to) {
  // atan2 of (cross, dot) gives the signed angle in (-pi, pi]; fold mod pi.
  double t = std::atan2(cross(from, to), dot(from, to));
  if (t > kPi / 2) t -= kPi;
  if (t <= -kPi / 2) t += kPi;
  return t;
}

double line_distance(Vec2 v, Vec2 w) { return std::abs(line_turn(v, w)); }

Mat2 rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c, -s, s, c};
}

double det_drift(const Mat2& m) {
  return std::abs(m.det() - 1.0) / std::max(1.0, m.frobenius_sq());
}

Mat2 renormalized(const Mat2& m) {
  const double drift = det_drift(m);
  if (drift > 1e-9) {
    std::ostringstream os;
    os << "determinant " << m.det() << " is not unimodular";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  if (drift > 1e-12) return (1.0 / std::sqrt(m.det())) * m;
  return m;
}

Mat2 compose(const Mat2& lhs, const Mat2& rhs) { return renormalized(lhs * rhs); }

double operator_norm(const Mat2& m) {
  // sigma1 +- sigma2 = sqrt(g +- 2) with g = |A|_F^2 >= 2 for det = 1.
  const double g = std::max(2.0, m.frobenius_sq());
  return 0.5 * (std::sqrt(g + 2.0) + std::sqrt(g - 2.0));
}

double spectral_norm(const Mat2& m) {
  // sigma1 = (|(a+d, b-c)| + |(a-d, b+c)|) / 2, free of cancellation.
  return 0.5 * (std::hypot(m.a + m.d, m.b - m.c) + std::hypot(m.a - m.d, m.b + m.c));
}

namespace {

Vec2 canonical_sign(Vec2 v) {
  if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) return {-v.x, -v.y};
  return v;
}

}  // namespace

SingularAxes singular_axes(const Mat2& m) {
  const double norm = operator_norm(m);
  if (norm <= 1.0 + kRotationTolerance) {
    std::ostringstream os;
    os << "operator norm " << norm << " is within rotation tolerance";
    throw Error(ErrorCode::DegenerateAxes, os.str());
  }
  // Principal axis of A^T A = [[p, q], [q, r]].
  const double p = m.a * m.a + m.c * m.c;
  const double q = m.a * m.b + m.c * m.d;
  const double r = m.b * m.b + m.d * m.d;
  const double theta = 0.5 * std::atan2(2.0 * q, p - r);
  const Vec2 u = unit(theta);
  const Vec2 s{-u.y, u.x};
  return {canonical_sign(u), canonical_sign(s), norm};
}

namespace {

// cosh(sqrt(D)) and sinh(sqrt(D))/sqrt(D), continued analytically to D <= 0.
void exp_coefficients(double D, double& c0, double& c1) {
  if (std::abs(D) < 1e-4) {
    c0 = 1.0 + D / 2.0 + D * D / 24.0 + D * D * D / 720.0;
    c1 = 1.0 + D / 6.0 + D * D / 120.0 + D * D * D / 5040.0;
  } else if (D > 0.0) {
    const double k = std::sqrt(D);
    c0 = std::cosh(k);
    c1 = std::sinh(k) / k;
  } else {
    const double k = std::sqrt(-D);
    c0 = std::cos(k);
    c1 = std::sin(k) / k;
  }
}

}  // namespace

Mat2 exp_map(const TangentVec& v) {
  const double D = v.p * v.p + v.q * v.r;  // X^2 = D * Id
  double c0 = 0.0, c1 = 0.0;
  exp_coefficients(D, c0, c1);
  return {c0 + c1 * v.p, c1 * v.q, c1 * v.r, c0 - c1 * v.p};
}

TangentVec log_map(const Mat2& m) {
  const double tr = m.trace();
  if (tr <= -2.0 + 1e-6) {
    std::ostringstream os;
    os << "trace " << tr << " has no principal real logarithm";
    throw Error(ErrorCode::LogDomain, os.str());
  }
  const double t = 0.5 * tr;
  const double u = t - 1.0;
  double f = 0.0;  // s / sinh(s) with cosh(s) = t, continued to t < 1
  if (std::abs(u) < 1e-5) {
    f = 1.0 - u / 3.0 + 2.0 * u * u / 15.0;
  } else if (t > 1.0) {
    const double s = std::acosh(t);
    f = s / std::sinh(s);
  } else {
    const double s = std::acos(t);
    f = s / std::sin(s);
  }
  return {f * 0.5 * (m.a - m.d), f * m.b, f * m.c};
}

}  // namespace cocyclab
