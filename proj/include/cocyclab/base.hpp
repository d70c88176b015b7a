#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cocyclab {

// Points of R/Z are stored as u / 2^64. Rotation is wrapping addition, so
// iteration and all interval comparisons are exact integer operations.
using Fixed = std::uint64_t;

Fixed to_fixed(double x);
double from_fixed(Fixed u);
// Signed distance u - v folded into [-1/2, 1/2), in units of 1.
double signed_gap(Fixed u, Fixed v);
double circle_distance(Fixed u, Fixed v);

enum class BaseKind { CircleRotation, TorusTranslation, SturmianShift };

const char* to_string(BaseKind kind);

inline constexpr int kMaxDim = 3;

struct BasePoint {
  std::array<Fixed, kMaxDim> u{};

  double coord(int i = 0) const { return from_fixed(u[i]); }
  friend bool operator==(const BasePoint&, const BasePoint&) = default;
};

// Half-open arc [lo, lo + len). `full` marks the whole circle.
struct Arc {
  Fixed lo = 0;
  Fixed len = 0;
  bool full = false;

  static Arc whole() { return {0, 0, true}; }
  // [lo, hi) taken counterclockwise; hi == lo gives an empty arc.
  static Arc between(Fixed lo, Fixed hi) { return {lo, hi - lo, false}; }
  static Arc from_reals(double lo, double hi);

  bool empty() const { return !full && len == 0; }
  bool contains(Fixed x) const { return full || x - lo < len; }
  Fixed hi() const { return lo + len; }
  double length() const;
  Arc shifted(Fixed by) const { return {lo + by, len, full}; }
  friend bool operator==(const Arc&, const Arc&) = default;
};

bool arcs_intersect(const Arc& p, const Arc& q);
// Length of the shorter of the two gaps between the arcs (0 if they meet).
double arc_separation(const Arc& p, const Arc& q);

struct Box {
  std::array<Arc, kMaxDim> sides{};
};

// Finite union of pairwise disjoint boxes (arcs when dim == 1). Shift
// cylinders are clopen and report no boundary points.
struct Cell {
  int dim = 1;
  std::vector<Box> boxes;
  bool clopen = false;

  static Cell whole(int dim);
  static Cell arc(const Arc& a, bool clopen = false);

  bool empty() const;
  bool is_whole() const;
  bool contains(const BasePoint& x) const;
  double measure() const;
  double diameter() const;
  // Arc endpoints for dim == 1, sorted; empty for clopen cells.
  std::vector<Fixed> boundary_points() const;
  std::vector<Arc> arcs() const;  // dim == 1 only
};

class BaseSystem {
 public:
  static BaseSystem circle(double alpha, int grid = 4096);
  static BaseSystem golden(int grid = 4096);  // alpha = (sqrt 5 - 1)/2
  static BaseSystem silver(int grid = 4096);  // alpha = sqrt 2 - 1
  static BaseSystem torus(const std::vector<double>& translation, int grid = 64);
  static BaseSystem sturmian(double slope, int depth, int grid = 4096);

  BaseKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int grid() const { return grid_; }
  int depth() const { return depth_; }
  const std::string& tag() const { return tag_; }
  Fixed shift(int i = 0) const { return shift_[i]; }
  double angle(int i = 0) const { return from_fixed(shift_[i]); }

  BasePoint point(double x) const;
  BasePoint point(const std::array<double, kMaxDim>& x) const;
  BasePoint step(const BasePoint& x, std::int64_t n) const;
  // Sup over coordinates of the circle distance.
  double distance(const BasePoint& x, const BasePoint& y) const;

  // Uniform grid of grid()^dim() points, index-ordered with the first
  // coordinate varying fastest.
  std::size_t grid_size() const;
  BasePoint grid_point(std::size_t k) const;
  double grid_spacing() const { return 1.0 / grid_; }

  // Cylinder of the two-letter coding (letter 1 on [1 - slope, 1)) that
  // contains x, fixed by the letters at times 0..depth-1.
  Cell cylinder(const BasePoint& x, int depth) const;

  // Message when the orbit of 0 comes back within 1e-12 before 1e5 steps.
  std::optional<std::string> near_rational_warning() const;

 private:
  BaseKind kind_ = BaseKind::CircleRotation;
  int dim_ = 1;
  int grid_ = 4096;
  int depth_ = 0;
  std::string tag_;
  std::array<Fixed, kMaxDim> shift_{};
};

inline constexpr std::int64_t kDefaultHorizon = 1000000;

// Smallest m1 with W, f(W), ..., f^{m1}(W) covering K. Exact for dim == 1;
// on tori every grid point must lie one grid spacing inside some f^j(W).
std::int64_t covering_time(const BaseSystem& sys, const Cell& w,
                           std::int64_t horizon = kDefaultHorizon);

// Cell of diameter at most 4 eps containing x0 whose endpoints stay away
// from the first 1e5 orbit points of x0.
Cell small_boundary_cell(const BaseSystem& sys, const BasePoint& x0, double eps);

struct ReturnClass {
  Cell cell;
  std::int64_t time = 0;
};

// Partition of U by first-return time, sorted by time. dim == 1 only.
std::vector<ReturnClass> first_return(const BaseSystem& sys, const Cell& u,
                                      std::int64_t horizon = kDefaultHorizon);

// Smallest j in [1, horizon] with (j * shift) mod 2^64 < w, or nullopt.
std::optional<std::int64_t> first_small_multiple(Fixed shift, Fixed w, std::int64_t horizon);

}  // namespace cocyclab
