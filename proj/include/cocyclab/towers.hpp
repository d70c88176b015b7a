#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cocyclab/base.hpp"

namespace cocyclab {

// Least n1 >= 1 such that every n >= n1 is l N + l' (N + 1) with l, l' >= 0.
std::int64_t frobenius_threshold(std::int64_t n);

// (l, l') with l N + l' (N + 1) = n and l' maximal.
std::pair<std::int64_t, std::int64_t> decompose_height(std::int64_t n, std::int64_t big_n);

struct Tower {
  Arc base;
  std::int64_t height = 0;
};

struct Castle {
  std::int64_t n = 0;
  std::vector<Tower> towers;  // sorted by base.lo
  Cell b;                     // union of the bases, one arc per tower
  Cell u;                     // the cell whose first returns were cut
  std::int64_t n1 = 0;
  std::int64_t max_return = 0;

  // Index of the tower whose base contains x, or -1.
  std::ptrdiff_t tower_of(Fixed x) const;
};

struct CastleCheck {
  bool heights = false;   // every height is N or N + 1
  bool disjoint = false;  // bases disjoint and no floor below the top meets B
  bool covers = false;    // floor lengths sum to exactly 2^64
  bool returns = false;   // f^h(base) lies in B for every tower
  bool boundary = false;  // B has finitely many boundary points, none periodic
  bool ok() const { return heights && disjoint && covers && returns && boundary; }
};

// Exact integer checks. Floors are visited one by one but never stored.
CastleCheck check_castle(const BaseSystem& sys, const Castle& castle, unsigned threads = 1);

Castle build_castle(const BaseSystem& sys, std::int64_t n, unsigned threads = 1);

// One row per tower: lo, hi, height.
std::string castle_to_csv(const Castle& castle);

struct FreqBound {
  Cell v;  // merged arcs of radius rho around the points
  std::vector<Fixed> points;
  double rho = 0.0;
  std::int64_t n0 = 0;
  double eps = 0.0;
  // Upper bound of (1/n) #{0 <= j < n : f^j(x) in V} over every x and every
  // n0 <= n <= 8 n0.
  double sup_frequency = 0.0;
};

struct FreqOptions {
  std::int64_t max_visits = 25000000;  // budget for n * (arcs of V) per sweep
  int max_halvings = 48;
  unsigned threads = 1;
};

// Exact sup over x of #{0 <= j < n : f^j(x) in V}.
std::int64_t max_visits(const BaseSystem& sys, const Cell& v, std::int64_t n);

FreqBound visit_freq_bound(const BaseSystem& sys, const std::vector<Fixed>& points, double eps,
                           const FreqOptions& opt = {});

std::string freq_to_json(const FreqBound& f);

}  // namespace cocyclab
