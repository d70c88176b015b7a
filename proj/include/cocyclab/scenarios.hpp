#pragma once

#include <array>
#include <string>
#include <vector>

#include "cocyclab/cocycle.hpp"

namespace cocyclab {

// (z, w) -> (e^{i alpha} z, e^{i alpha} (z + w)) on S^3, points stored as
// unit vectors (Re z, Im z, Re w, Im w).
struct HopfSystem {
  double alpha = 0.0;

  std::array<double, 4> step(const std::array<double, 4>& p) const;
  // The invariant circle z = 0 at angle theta.
  static std::array<double, 4> on_circle(double theta);
};

// R_{theta + alpha} diag(2, 1/2) R_{-theta}.
Mat2 hopf_generator(double theta, double alpha);

// Line angles in [0, pi) at theta_k = 2 pi k / size.
struct DirectionField {
  std::vector<double> angles;
};

// Number of turns of the line over one loop: the lifted total turn divided
// by 2 pi, rounded. Throws LiftFailed when neighbours jump by pi / 4 or more.
int winding_number(const DirectionField& field);

struct HopfCertificate {
  UhResult uh;
  DirectionField eu;
  DirectionField es;
  int winding = 0;
  double max_orthogonality = 0.0;  // max |cos angle(E^u, E^s)|
  double max_invariance = 0.0;     // max line distance of A E^u(theta) to E^u(theta + alpha)
};

// Circle rotation by alpha / 2 pi with generator hopf_generator(2 pi x, alpha).
Cocycle hopf_cocycle(double alpha, int grid = 4096);

HopfCertificate certify_restricted_uh(double alpha, int grid = 4096, unsigned threads = 1);

// theta, angle per sample.
std::string field_to_csv(const DirectionField& field);
std::string hopf_to_json(const HopfCertificate& h);

}  // namespace cocyclab
