#include "cocyclab/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cocyclab/error.hpp"
#include "cocyclab/parallel.hpp"
#include "json.hpp"

namespace cocyclab {

std::array<double, 4> HopfSystem::step(const std::array<double, 4>& p) const {
  const double c = std::cos(alpha), s = std::sin(alpha);
  const double zr = p[0], zi = p[1], wr = p[2] + p[0], wi = p[3] + p[1];
  std::array<double, 4> q{c * zr - s * zi, s * zr + c * zi, c * wr - s * wi, s * wr + c * wi};
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double& v : q) v /= norm;
  return q;
}

std::array<double, 4> HopfSystem::on_circle(double theta) { return {0.0, 0.0, std::cos(theta), std::sin(theta)}; }

Mat2 hopf_generator(double theta, double alpha) { return rotation(theta + alpha) * diag(2.0) * rotation(-theta); }

int winding_number(const DirectionField& field) {
  const auto& a = field.angles;
  if (a.empty()) return 0;
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = std::remainder(a[(k + 1) % a.size()] - a[k], kPi);
    if (std::abs(d) >= kPi / 4.0) throw Error(ErrorCode::LiftFailed, "neighbouring directions differ by pi/4 or more");
    total += d;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

Cocycle hopf_cocycle(double alpha, int grid) {
  return Cocycle(BaseSystem::circle(alpha / (2.0 * kPi), grid), hopf(alpha));
}

HopfCertificate certify_restricted_uh(double alpha, int grid, unsigned threads) {
  const Cocycle co = hopf_cocycle(alpha, grid);
  const BaseSystem& sys = co.base();
  HopfCertificate out;
  UhOptions opt;
  opt.threads = threads;
  out.uh = uh_certify(co, opt);
  if (out.uh.verdict != UhVerdict::Certificate) {
    throw Error(ErrorCode::CertificationFailed, "no cone field certificate on the invariant circle");
  }
  const std::size_t size = sys.grid_size();
  out.eu.angles = out.uh.centers;
  out.es.angles.resize(size);
  std::vector<double> orth(size), inv(size);
  parallel_for(size, threads, [&](std::size_t k) {
    const BasePoint x = sys.grid_point(k);
    // E^s(x): contracting axis of A_n(x) for large n.
    out.es.angles[k] = line_angle(singular_axes(iterate(co, x, 30)).s);
    orth[k] = std::abs(std::cos(out.eu.angles[k] - out.es.angles[k]));
    const Vec2 image = co.at(x) * unit(out.eu.angles[k]);
    inv[k] = line_distance(image, pushforward_direction(co, sys.step(x, 1), opt.pushforward));
  });
  for (std::size_t k = 0; k < size; ++k) {
    out.max_orthogonality = std::max(out.max_orthogonality, orth[k]);
    out.max_invariance = std::max(out.max_invariance, inv[k]);
  }
  out.winding = winding_number(out.eu);
  return out;
}

std::string field_to_csv(const DirectionField& field) {
  std::ostringstream os;
  os << "theta,angle\n";
  char buf[80];
  for (std::size_t k = 0; k < field.angles.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", 2.0 * kPi * static_cast<double>(k) / field.angles.size(),
                  field.angles[k]);
    os << buf;
  }
  return os.str();
}

std::string hopf_to_json(const HopfCertificate& h) {
  nlohmann::json j;
  j["verdict"] = to_string(h.uh.verdict);
  j["horizon"] = h.uh.n;
  j["half_width"] = h.uh.half_width;
  j["expansion"] = h.uh.expansion;
  j["rate"] = h.uh.rate;
  j["winding"] = h.winding;
  j["max_orthogonality"] = h.max_orthogonality;
  j["max_invariance"] = h.max_invariance;
  return j.dump(2) + "\n";
}

}  // namespace cocyclab
