#pragma once

#include <cstddef>
#include <vector>

#include "colu/activation.hpp"

namespace colu::analysis {

enum class Direction { Increasing, Decreasing };

struct MonotoneInterval {
  double lo;
  double hi;
  Direction direction;
};

struct Minimum {
  double x;
  double f;
};

/// Numerically certified shape properties of one activation.
struct PropertyReport {
  act::ActivationKind kind;
  double global_min_x = 0.0;
  double global_min_f = 0.0;
  bool bounded_below = false;
  bool bounded_above = false;
  bool monotonic = false;
  bool saturates_above = false;
  bool kink_at_zero = false;
};

// (f(x+h) - f(x-h)) / 2h. Throws ArgumentError if h <= 0.
double central_diff(act::ActivationKind kind, double x, double h);

/// Grid scan with `grid_points` samples, then golden-section search on the
/// two cells around the best sample until the bracket is narrower than 1e-9.
/// Ties on the grid go to the leftmost sample; the refined point replaces the
/// grid point only when it is strictly lower, so flat minima (ReLU) report
/// the leftmost grid point of the flat set.
Minimum global_minimum(act::ActivationKind kind, double lo, double hi, std::size_t grid_points = 10001);

/// Maximal intervals on which `derivative` keeps one sign, from an n-point
/// scan. Grid points with a zero derivative never split an interval; each
/// sign change is refined by bisection to 1e-9.
std::vector<MonotoneInterval> monotonic_intervals(act::ActivationKind kind, double lo, double hi,
                                                  std::size_t n);

PropertyReport classify(act::ActivationKind kind);

}  // namespace colu::analysis
