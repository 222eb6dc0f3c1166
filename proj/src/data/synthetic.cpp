#include <algorithm>
#include <cmath>
#include <numbers>

#include "colu/data.hpp"
#include "colu/errors.hpp"

namespace colu::data {

namespace {
constexpr std::size_t kSide = 28;
constexpr double kHalfLength = 11.0;
constexpr double kHalfWidth = 1.25;
constexpr double kNoise = 0.3;
constexpr int kJitter = 2;
}  // namespace

Dataset synthetic_dataset(std::uint64_t seed, std::size_t n) {
  if (n < kNumClasses) throw ArgumentError("synthetic_dataset: need at least 10 samples");
  Rng rng(seed, streams::kSynthetic);
  Dataset ds;
  ds.name = "synthetic";
  ds.labels.resize(n);
  ds.images = Tensor({n, 1, kSide, kSide});
  const double center = (kSide - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::uint8_t>(i % kNumClasses);
    ds.labels[i] = label;
    const double angle = static_cast<double>(label) * std::numbers::pi / static_cast<double>(kNumClasses);
    const double ux = std::cos(angle), uy = std::sin(angle);
    // Fixed draw order per image: jitter y, jitter x, intensity, then noise per pixel.
    const double cy = center + static_cast<double>(static_cast<int>(rng.below(2 * kJitter + 1)) - kJitter);
    const double cx = center + static_cast<double>(static_cast<int>(rng.below(2 * kJitter + 1)) - kJitter);
    const double intensity = rng.uniform(0.7, 1.0);
    double* img = ds.images.data() + i * kSide * kSide;
    for (std::size_t y = 0; y < kSide; ++y) {
      for (std::size_t x = 0; x < kSide; ++x) {
        const double dx = static_cast<double>(x) - cx;
        const double dy = static_cast<double>(y) - cy;
        const double along = dx * ux + dy * uy;
        const double across = -dx * uy + dy * ux;
        const bool on_bar = std::fabs(across) <= kHalfWidth && std::fabs(along) <= kHalfLength;
        const double v = (on_bar ? intensity : 0.0) + kNoise * rng.uniform();
        img[y * kSide + x] = std::min(1.0, v);
      }
    }
  }
  return ds;
}

}  // namespace colu::data
