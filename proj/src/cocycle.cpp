#include "cocyclab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cocyclab/error.hpp"
#include "cocyclab/parallel.hpp"

namespace cocyclab {

namespace {

class Schrodinger final : public Generator {
 public:
  Schrodinger(double e, double lambda) : e_(e), lambda_(lambda) {}
  Mat2 operator()(const BasePoint& x) const override {
    return {e_ - 2.0 * lambda_ * std::cos(2.0 * kPi * x.coord()), -1.0, 1.0, 0.0};
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "schrodinger(E=" << e_ << ", lambda=" << lambda_ << ")";
    return os.str();
  }
  std::optional<double> sup_norm_bound() const override {
    return operator_norm(Mat2{std::abs(e_) + 2.0 * std::abs(lambda_), -1.0, 1.0, 0.0});
  }

 private:
  double e_, lambda_;
};

class RotationValued final : public Generator {
 public:
  RotationValued(double phase, int k) : phase_(phase), k_(k) {}
  Mat2 operator()(const BasePoint& x) const override {
    return rotation(phase_ + 2.0 * kPi * k_ * x.coord());
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "rotation(phase=" << phase_ << ", frequency=" << k_ << ")";
    return os.str();
  }
  std::optional<double> sup_norm_bound() const override { return 1.0; }

 private:
  double phase_;
  int k_;
};

class Constant final : public Generator {
 public:
  explicit Constant(const Mat2& m) : m_(renormalized(m)) {}
  Mat2 operator()(const BasePoint&) const override { return m_; }
  std::string describe() const override {
    std::ostringstream os;
    os << "constant([" << m_.a << ", " << m_.b << "; " << m_.c << ", " << m_.d << "])";
    return os.str();
  }
  std::optional<double> sup_norm_bound() const override { return operator_norm(m_); }

 private:
  Mat2 m_;
};

class Hopf final : public Generator {
 public:
  explicit Hopf(double alpha) : alpha_(alpha) {}
  Mat2 operator()(const BasePoint& x) const override {
    const double theta = 2.0 * kPi * x.coord();
    return rotation(theta + alpha_) * diag(2.0) * rotation(-theta);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "hopf(alpha=" << alpha_ << ")";
    return os.str();
  }
  std::optional<double> sup_norm_bound() const override { return 2.0; }

 private:
  double alpha_;
};

class Table final : public Generator {
 public:
  explicit Table(std::vector<Mat2> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw Error(ErrorCode::InvalidArgument, "table needs at least two values");
    for (auto& v : values_) v = renormalized(v);
    for (std::size_t k = 0; k < values_.size(); ++k) {
      const Mat2 rel = values_[k].inverse_unimodular() * values_[(k + 1) % values_.size()];
      try {
        steps_.push_back(log_map(rel));
      } catch (const Error&) {
        throw Error(ErrorCode::InvalidArgument, "adjacent table values are too far apart to interpolate");
      }
    }
  }
  Mat2 operator()(const BasePoint& x) const override {
    const std::size_t g = values_.size();
    const double t = x.coord() * static_cast<double>(g);
    std::size_t k = static_cast<std::size_t>(std::floor(t));
    const double frac = t - static_cast<double>(k);
    k %= g;
    if (frac == 0.0) return values_[k];
    return values_[k] * exp_map(frac * steps_[k]);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "table(" << values_.size() << " values)";
    return os.str();
  }

 private:
  std::vector<Mat2> values_;
  std::vector<TangentVec> steps_;
};

}  // namespace

GeneratorPtr schrodinger(double energy, double coupling) {
  return std::make_shared<Schrodinger>(energy, coupling);
}
GeneratorPtr rotation_valued(double phase, int frequency) {
  return std::make_shared<RotationValued>(phase, frequency);
}
GeneratorPtr constant(const Mat2& m) { return std::make_shared<Constant>(m); }
GeneratorPtr hopf(double alpha) { return std::make_shared<Hopf>(alpha); }
GeneratorPtr table(std::vector<Mat2> values) { return std::make_shared<Table>(std::move(values)); }

Cocycle::Cocycle(BaseSystem base, GeneratorPtr generator)
    : base_(std::move(base)), generator_(std::move(generator)) {
  if (!generator_) throw Error(ErrorCode::InvalidArgument, "cocycle needs a generator");
  double sup = 1.0;
  for (std::size_t k = 0; k < base_.grid_size(); ++k) sup = std::max(sup, operator_norm(at(base_.grid_point(k))));
  if (auto bound = generator_->sup_norm_bound()) sup = std::max(sup, *bound);
  sup_norm_ = sup;
}

void ScaledProduct::left_multiply(const Mat2& a) {
  m = a * m;
  if (++pending >= 32) rescale();
}

void ScaledProduct::right_multiply(const Mat2& a) {
  m = m * a;
  if (++pending >= 32) rescale();
}

void ScaledProduct::rescale() {
  const double s = std::sqrt(m.frobenius_sq());
  m = (1.0 / s) * m;
  log_scale += std::log(s);
  pending = 0;
}

double ScaledProduct::log_norm() const { return log_scale + std::log(spectral_norm(m)); }

Mat2 iterate(const Cocycle& co, const BasePoint& x, std::int64_t n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "iterate needs n >= 0");
  Mat2 p = Mat2::identity();
  BasePoint y = x;
  for (std::int64_t j = 0; j < n; ++j) {
    p = compose(co.at(y), p);
    if (std::max({std::abs(p.a), std::abs(p.b), std::abs(p.c), std::abs(p.d)}) > 1e300) {
      throw Error(ErrorCode::Overflow, "product entries exceed 1e300; use log_norm_of_product");
    }
    y = co.base().step(y, 1);
  }
  return p;
}

double log_norm_of_product(const Cocycle& co, const BasePoint& x, std::int64_t n) {
  ScaledProduct p;
  BasePoint y = x;
  for (std::int64_t j = 0; j < n; ++j) {
    p.left_multiply(co.at(y));
    y = co.base().step(y, 1);
  }
  return std::max(0.0, p.log_norm());
}

double lyapunov_estimate(const Cocycle& co, const BasePoint& x, std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "lyapunov_estimate needs n >= 1");
  return log_norm_of_product(co, x, n) / static_cast<double>(n);
}

GrowthReport growth_report(const Cocycle& co, std::int64_t n, unsigned threads) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "growth horizon must be at least 1");
  const BaseSystem& sys = co.base();
  GrowthReport r;
  r.n = n;
  r.grid_size = sys.grid_size();
  r.values.resize(r.grid_size);
  parallel_for(r.grid_size, threads, [&](std::size_t k) {
    r.values[k] = log_norm_of_product(co, sys.grid_point(k), n) / static_cast<double>(n);
  });
  r.min = r.max = r.values[0];
  double total = 0.0;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    r.min = std::min(r.min, r.values[k]);
    if (r.values[k] > r.max) {
      r.max = r.values[k];
      arg = k;
    }
    total += r.values[k];
  }
  r.mean = std::clamp(total / static_cast<double>(r.values.size()), r.min, r.max);
  r.argmax = sys.grid_point(arg);
  return r;
}

double grid_margin(const BaseSystem& sys, const std::vector<double>& values) {
  const std::size_t g = static_cast<std::size_t>(sys.grid());
  double worst = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::size_t stride = 1;
    for (int i = 0; i < sys.dim(); ++i, stride *= g) {
      const std::size_t digit = (k / stride) % g;
      const std::size_t next = k - digit * stride + ((digit + 1) % g) * stride;
      worst = std::max(worst, std::abs(values[next] - values[k]));
    }
  }
  return 4.0 * worst;
}

GrowthTest uniform_growth_test(const Cocycle& co, double eps, std::int64_t n, unsigned threads) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  GrowthTest t;
  t.report = growth_report(co, n, threads);
  t.margin = grid_margin(co.base(), t.report.values);
  t.pass = t.report.max < eps - t.margin;
  return t;
}

const char* to_string(UhVerdict v) {
  switch (v) {
    case UhVerdict::Certificate: return "certificate";
    case UhVerdict::Witness: return "witness";
    case UhVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

Vec2 pushforward_direction(const Cocycle& co, const BasePoint& x, int k) {
  Vec2 v{1.0, 0.0};
  BasePoint y = co.base().step(x, -k);
  for (int j = 0; j < k; ++j) {
    v = (co.at(y) * v).normalized();
    y = co.base().step(y, 1);
  }
  return v;
}

namespace {

struct ConeSample {
  double center = 0.0;  // angle of the cone centre at x
  double target = 0.0;  // angle of the cone centre at f^n x
  ScaledProduct product;
};

}  // namespace

UhResult uh_certify(const Cocycle& co, const UhOptions& opt) {
  const BaseSystem& sys = co.base();
  const std::size_t size = sys.grid_size();
  std::vector<double> widths;
  for (double w = 0.25; w > opt.min_half_width; w *= 0.5) widths.push_back(w);
  widths.push_back(opt.min_half_width);

  std::vector<double> centers(size);
  parallel_for(size, opt.threads, [&](std::size_t k) {
    centers[k] = line_angle(pushforward_direction(co, sys.grid_point(k), opt.pushforward));
  });

  UhResult out;
  std::vector<ConeSample> samples(size);
  std::int64_t last_n = 0;
  for (std::int64_t n = 1; n <= opt.n_max; n *= 2) {
    last_n = n;
    parallel_for(size, opt.threads, [&](std::size_t k) {
      ConeSample& s = samples[k];
      BasePoint y = sys.grid_point(k);
      s.center = centers[k];
      s.product = ScaledProduct{};
      for (std::int64_t j = 0; j < n; ++j) {
        s.product.left_multiply(co.at(y));
        y = sys.step(y, 1);
      }
      s.product.rescale();
      s.target = line_angle(pushforward_direction(co, y, opt.pushforward));
    });

    bool found = false;
    for (double w : widths) {
      std::vector<double> slack(size), expansion(size);
      parallel_for(size, opt.threads, [&](std::size_t k) {
        const ConeSample& s = samples[k];
        const Mat2& m = s.product.m;
        const Vec2 lo = m * unit(s.center - w);
        const Vec2 hi = m * unit(s.center + w);
        const Vec2 target = unit(s.target);
        const double t_lo = line_turn(target, lo);
        const double t_hi = line_turn(target, hi);
        // Orientation must be kept, else the image arc is the long one.
        slack[k] = t_lo < t_hi ? w - std::max(std::abs(t_lo), std::abs(t_hi)) : -1.0;
        double least = std::min(lo.norm(), hi.norm());
        // |m v| is smallest along the contracting axis of m.
        const double p = m.a * m.a + m.c * m.c, q = m.a * m.b + m.c * m.d, r = m.b * m.b + m.d * m.d;
        const double axis = 0.5 * std::atan2(2.0 * q, p - r) + kPi / 2;
        if (line_distance(unit(axis), unit(s.center)) < w) least = std::min(least, (m * unit(axis)).norm());
        expansion[k] = s.product.log_scale + std::log(least);
      });
      const double q_margin = grid_margin(sys, slack);
      const double e_margin = grid_margin(sys, expansion);
      const double q_min = *std::min_element(slack.begin(), slack.end());
      const double e_min = *std::min_element(expansion.begin(), expansion.end());
      if (q_min - q_margin > 0.0 && e_min - e_margin > 0.0) {
        if (!found || e_min - e_margin > std::log(out.expansion)) {
          out.verdict = UhVerdict::Certificate;
          out.n = n;
          out.half_width = w;
          out.expansion = std::exp(e_min - e_margin);
          out.rate = std::exp((e_min - e_margin) / static_cast<double>(n));
          out.slack = q_min;
          out.margin = q_margin;
        }
        found = true;
      }
    }
    if (found) {
      out.centers = centers;
      return out;
    }
  }

  std::size_t arg = 0;
  double least = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    const double v = std::max(0.0, samples[k].product.log_norm()) / static_cast<double>(last_n);
    if (k == 0 || v < least) {
      least = v;
      arg = k;
    }
  }
  out.n = last_n;
  if (least < opt.witness_rate) {
    out.verdict = UhVerdict::Witness;
    out.witness = sys.grid_point(arg);
    out.witness_value = least;
  }
  return out;
}

double empirical_exponent(const Cocycle& co, const EmpiricalMeasure& mu, std::int64_t s) {
  if (s < 1 || s > mu.n) throw Error(ErrorCode::InvalidArgument, "need 1 <= s <= n");
  const std::int64_t m = mu.n / s;
  double total = 0.0;
  BasePoint y = mu.x;
  for (std::int64_t j = 0; j < s * m; ++j) {
    total += log_norm_of_product(co, y, s);
    y = co.base().step(y, 1);
  }
  // (1/s) of the integral of log|A_s| against the block measure: a per-step rate.
  return total / static_cast<double>(s * s * m);
}

std::optional<GrowthWitness> subexponential_witness_search(const Cocycle& co, double eps,
                                                           const std::vector<std::int64_t>& horizons,
                                                           unsigned threads) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  for (std::int64_t n : horizons) {
    const GrowthReport r = growth_report(co, n, threads);
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      if (r.values[k] > eps) return GrowthWitness{co.base().grid_point(k), n, r.values[k]};
    }
  }
  return std::nullopt;
}

}  // namespace cocyclab
