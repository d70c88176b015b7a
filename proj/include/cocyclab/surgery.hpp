#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cocyclab/cocycle.hpp"
#include "cocyclab/perturb.hpp"
#include "cocyclab/towers.hpp"

namespace cocyclab {

// Largest delta = 2^-k / 2 with |A(x) - A(y)| < eps whenever d(x, y) < delta,
// checked on grid pairs with 4 x the neighbour difference as margin. On
// rotations f^j is an isometry, so one check covers every 0 <= j <= N.
double continuity_modulus(const Cocycle& co, double eps, std::int64_t n);

struct Representative {
  std::int64_t height = 0;   // l in {N, N + 1}
  std::size_t cell = 0;      // index i of U_i
  BasePoint x;               // x_{l,i}
  std::vector<Arc> region;   // B_l intersected with U_i
};

struct SurgeryConfig {
  double eps = 0.0;
  double c = 0.0;        // log(sup + eps) + 1e-9
  double balance = 0.0;  // eps + sup + 1e-9, the balance constant of the plans
  double exponent = 0.0; // pre-surgery estimate
  std::int64_t n = 0;
  SteeringWindow window;
  std::int64_t m1 = 0;
  double delta = 0.0;
  Castle castle;
  // U_i = [cuts[i], cuts[i + 1]) with the last arc wrapping; every cut lies
  // in a gap of B.
  std::vector<Fixed> cuts;
  std::vector<Fixed> l_points;  // boundary of every B_l intersected with U_i
  FreqBound freq;
  std::vector<Representative> reps;
  std::vector<std::size_t> tower_rep;  // representative of each tower
};

struct SurgeryOptions {
  unsigned threads = 1;
  double min_exponent = 1e-3;
  std::int64_t exponent_horizon = 100000;
  FreqOptions freq;
};

SurgeryConfig build_config(const Cocycle& co, double eps, const SurgeryOptions& opt = {});

// Recomputes every SurgeryConfig invariant; returns the names that fail.
std::vector<std::string> check_config(const Cocycle& co, const SurgeryConfig& cfg, unsigned threads = 1);

// A(y) exp(b xi) on the floor f^j(z) of the tower with base point z, where
// xi = log(A(y)^-1 L_{l,i,j}) and the bump b depends only on z: 0 within
// rho / 2 of the boundary points, 1 at distance >= rho, smooth between. The
// bump is below 1 only inside V.
class PerturbedGenerator final : public Generator {
 public:
  PerturbedGenerator(GeneratorPtr original, const BaseSystem& sys, std::shared_ptr<const SurgeryConfig> cfg,
                     std::vector<std::vector<Mat2>> tables);

  Mat2 operator()(const BasePoint& x) const override;
  std::string describe() const override;
  std::optional<double> sup_norm_bound() const override { return std::nullopt; }

  // Tower and base point of x; throws DecompositionFailed if x is not
  // reached from B within N + 1 backward steps.
  struct Position {
    std::size_t tower = 0;
    std::int64_t floor = 0;
    Fixed base = 0;
  };
  Position locate(Fixed x) const;
  Mat2 at(const Position& p) const;
  double bump(Fixed base) const;

  const SurgeryConfig& config() const { return *cfg_; }
  const std::vector<std::vector<Mat2>>& tables() const { return tables_; }

 private:
  GeneratorPtr original_;
  BaseSystem sys_;
  std::shared_ptr<const SurgeryConfig> cfg_;
  std::vector<std::vector<Mat2>> tables_;  // per representative, l matrices
  Fixed rho_ = 0;
};

struct PerturbedCocycle {
  Cocycle original;
  Cocycle perturbed;
  std::shared_ptr<const SurgeryConfig> config;
  std::shared_ptr<const PerturbedGenerator> generator;
  std::vector<SegmentPlan> plans;  // per representative
  double sup_distance = 0.0;       // max over the grid and region points of |A~ - A|
  double distance_bound = 0.0;     // e^c (e^c + 1) eps
  double lipschitz = 0.0;          // max neighbour difference / spacing on the grid
  double lipschitz_bound = 0.0;
  bool interior_exact = false;     // A~ equals the table where the bump is 1
};

PerturbedCocycle assemble_perturbation(const Cocycle& co, const SurgeryConfig& cfg, unsigned threads = 1);

struct GrowthCertificate {
  std::int64_t n = 0;
  std::size_t grid = 0;
  double max_direct = 0.0;      // max over the grid of (1/n) log |A~_n(x)|
  double margin = 0.0;
  double max_structural = 0.0;  // max over the grid of the product bound / n
  double bound = 0.0;           // (3c + 2) eps
  bool dominated = false;       // structural >= direct at every grid point
  bool pass = false;
  std::int64_t max_v_visits = 0;  // over the grid, B-visits landing in V
  std::map<std::int64_t, std::int64_t> r_hist, p_hist, q_hist;
  std::vector<double> direct;     // per grid point
  std::vector<double> structural;
};

GrowthCertificate verify_growth(const PerturbedCocycle& pc, std::int64_t n, unsigned threads = 1);

std::string certificate_to_json(const GrowthCertificate& g);
// x, a, b, c, d, bump per grid point.
std::string perturbation_to_csv(const PerturbedCocycle& pc);

}  // namespace cocyclab
