#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cocyclab/base.hpp"
#include "cocyclab/cocycle.hpp"
#include "cocyclab/sl2.hpp"
#include "cocyclab/wide.hpp"

namespace cocyclab {

// Largest rotation angle phi with |(R_phi - Id) a| = 2 sin(phi/2) |a| < eps.
double steering_cap(const Mat2& a, double eps);

struct SteeringBlock {
  BasePoint x;
  int m = 0;
  std::vector<Mat2> matrices;  // M_j = R_{phi_j} A(f^j x)
  std::vector<double> angles;  // phi_j
  double eps = 0.0;
  double error = 0.0;  // angle between M_{m-1} ... M_0 v and w
};

// Greedy steering with exactly m steps. nullopt when no step can reach the
// pulled-back target.
std::optional<SteeringBlock> steer_fixed(const std::vector<Mat2>& a, const BasePoint& x, Vec2 v, Vec2 w,
                                         double eps);

// Shortest block (m <= m_max) sending the line of v onto the line of w.
SteeringBlock steer_direction(const Cocycle& co, const BasePoint& x, Vec2 v, Vec2 w, double eps, int m_max);

struct BalanceProfile {
  BasePoint x;
  int n = 0;
  // log Delta_j = log|A_j(x)| - log|A_{N-j}(f^j x)|, 0 <= j <= N.
  std::vector<double> log_delta;
  std::vector<double> log_head;  // log|A_j(x)|
  std::vector<double> log_tail;  // log|A_{N-j}(f^j x)|
  int j0 = -1;
  double c = 0.0;

  double delta(int j) const;
};

BalanceProfile balance_profile(const Cocycle& co, const BasePoint& x, int n, double c);

enum class Branch { Steered, EarlyExit };

const char* to_string(Branch b);

struct SegmentPlan {
  BasePoint x;
  int n = 0;
  double eps = 0.0;
  std::vector<Mat2> l;
  Branch branch = Branch::EarlyExit;
  int j0 = -1;
  int j1 = -1;
  SteeringBlock block;
  // The one steering step whose exact angle is needed beyond double
  // precision; l[wide_index] is its rounding.
  int wide_index = -1;
  std::optional<WideMat2> wide;
  // Certified by recomputation before the plan is returned.
  double log_norm = 0.0;
  double max_distance = 0.0;
  // L_{N-1} ... L_0 rounded to double.
  Mat2 product;
};

struct SegmentOptions {
  double c = 0.0;        // balance constant; 0 selects eps + sup_norm + 1e-9
  int extra_bits = 256;  // bits beyond the growth of the product
};

SegmentPlan plan_segment(const Cocycle& co, const BasePoint& x, double eps, int n, const Cell& w, int m1, int m,
                         const SegmentOptions& opt = {});

struct SegmentReport {
  double max_distance = 0.0;
  double log_norm = 0.0;
  bool pass = false;
};

SegmentReport verify_segment(const Cocycle& co, const SegmentPlan& plan);

// L_{N-1} ... L_0 (with the wide step) and its rounding error bound.
WideProduct plan_product(const SegmentPlan& plan, mpfr_prec_t bits);
mpfr_prec_t plan_precision(const Cocycle& co, const SegmentPlan& plan, int extra_bits = 256);

std::string plan_to_text(const SegmentPlan& plan);
SegmentPlan plan_from_text(const std::string& text);

struct SteeringWindow {
  Cell w;
  int m = 0;
  double center = 0.0;
  double width = 0.0;
  std::size_t grid_points = 0;
};

// Directions at angles (k + 1/2) pi / pairs, k < pairs.
std::vector<Vec2> sweep_directions(int pairs);

// True when steer_fixed succeeds for every (v, w) sweep pair at x.
bool steering_feasible(const Cocycle& co, const BasePoint& x, double eps, int m, int pairs = 32);

// min over 1 <= j < m of |j alpha|.
double return_gap(const BaseSystem& sys, int m);

SteeringWindow choose_steering_window(const Cocycle& co, double eps, unsigned threads = 1);

int choose_n(const Cocycle& co, double eps, double c, int m1);

}  // namespace cocyclab
