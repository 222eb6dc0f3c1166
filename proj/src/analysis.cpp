#include "colu/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "colu/errors.hpp"

namespace colu::analysis {

namespace {

constexpr double kXTolerance = 1e-9;

// Boundedness and saturation probes.
constexpr double kProbeNear = 50.0;
constexpr double kProbeMid = 100.0;
constexpr double kProbeFar = 200.0;
constexpr double kGrowthMargin = 1.0;

constexpr double kKinkOffset = 1e-7;
constexpr double kKinkStep = 1e-8;
constexpr double kKinkGap = 1e-3;

constexpr double kWindow = 50.0;
constexpr std::size_t kMonotoneGrid = 10001;

void require_interval(double lo, double hi, const char* fn) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ArgumentError(std::string(fn) + ": need finite lo < hi, got [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  }
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

double grid_point(double lo, double hi, std::size_t i, std::size_t n) {
  if (i + 1 == n) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

double central_diff(act::ActivationKind kind, double x, double h) {
  if (!(h > 0.0)) throw ArgumentError("central_diff: step must be positive, got " + std::to_string(h));
  return (act::eval(kind, x + h) - act::eval(kind, x - h)) / (2.0 * h);
}

Minimum global_minimum(act::ActivationKind kind, double lo, double hi, std::size_t grid_points) {
  require_interval(lo, hi, "global_minimum");
  if (grid_points < 3) throw ArgumentError("global_minimum: need at least 3 grid points");

  std::size_t best = 0;
  double best_f = act::eval(kind, lo);
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double f = act::eval(kind, grid_point(lo, hi, i, grid_points));
    if (f < best_f) {
      best_f = f;
      best = i;
    }
  }
  const double best_x = grid_point(lo, hi, best, grid_points);

  double a = grid_point(lo, hi, best == 0 ? 0 : best - 1, grid_points);
  double b = grid_point(lo, hi, std::min(best + 1, grid_points - 1), grid_points);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = act::eval(kind, c);
  double fd = act::eval(kind, d);
  while (b - a > kXTolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = act::eval(kind, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = act::eval(kind, d);
    }
  }
  const double refined_x = 0.5 * (a + b);
  const double refined_f = act::eval(kind, refined_x);
  if (refined_f < best_f) return {refined_x, refined_f};
  return {best_x, best_f};
}

std::vector<MonotoneInterval> monotonic_intervals(act::ActivationKind kind, double lo, double hi,
                                                  std::size_t n) {
  if (n < 2) throw ArgumentError("monotonic_intervals: need n >= 2, got " + std::to_string(n));
  require_interval(lo, hi, "monotonic_intervals");

  std::vector<double> boundaries;
  int first_sign = 0;
  int prev_sign = 0;
  double prev_x = lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid_point(lo, hi, i, n);
    const int s = sign_of(act::derivative(kind, x));
    if (s == 0) continue;
    if (prev_sign == 0) {
      first_sign = s;
    } else if (s != prev_sign) {
      double a = prev_x;
      double b = x;
      while (b - a > kXTolerance) {
        const double mid = 0.5 * (a + b);
        const int sm = sign_of(act::derivative(kind, mid));
        if (sm == prev_sign) {
          a = mid;
        } else if (sm == s) {
          b = mid;
        } else {
          a = b = mid;
        }
      }
      boundaries.push_back(0.5 * (a + b));
    }
    prev_sign = s;
    prev_x = x;
  }

  std::vector<MonotoneInterval> out;
  Direction dir = first_sign < 0 ? Direction::Decreasing : Direction::Increasing;
  double start = lo;
  for (double boundary : boundaries) {
    out.push_back({start, boundary, dir});
    start = boundary;
    dir = dir == Direction::Increasing ? Direction::Decreasing : Direction::Increasing;
  }
  out.push_back({start, hi, dir});
  return out;
}

PropertyReport classify(act::ActivationKind kind) {
  PropertyReport report;
  report.kind = kind;

  const Minimum minimum = global_minimum(kind, -kWindow, kWindow);
  report.global_min_x = minimum.x;
  report.global_min_f = minimum.f;

  const auto f = [kind](double x) { return act::eval(kind, x); };

  // Growth past the window decides boundedness on each side; a bounded side
  // has to stay within the margin between the two far probes.
  const bool unbounded_above = f(kProbeFar) > f(kProbeMid) + kGrowthMargin;
  const bool unbounded_below = f(-kProbeFar) < f(-kProbeMid) - kGrowthMargin;
  report.bounded_above = !unbounded_above;
  report.bounded_below = !unbounded_below && std::isfinite(minimum.f);

  // Saturation: bounded above and already flat at the probes.
  const double spread = std::max(std::fabs(f(kProbeFar) - f(kProbeMid)), std::fabs(f(kProbeMid) - f(kProbeNear)));
  report.saturates_above = report.bounded_above && spread < 1e-9;

  report.monotonic = monotonic_intervals(kind, -kWindow, kWindow, kMonotoneGrid).size() == 1;

  const double left = central_diff(kind, -kKinkOffset, kKinkStep);
  const double right = central_diff(kind, kKinkOffset, kKinkStep);
  report.kink_at_zero = std::fabs(left - right) > kKinkGap;
  return report;
}

}  // namespace colu::analysis
