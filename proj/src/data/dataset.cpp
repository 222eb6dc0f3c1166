#include <algorithm>
#include <cmath>
#include <numeric>

#include "colu/data.hpp"
#include "colu/errors.hpp"

namespace colu::data {

void Dataset::validate() const {
  if (images.rank() != 4) throw FormatError(name + ": images must be (N, C, H, W)");
  if (images.dim(0) != labels.size()) {
    throw FormatError(name + ": " + std::to_string(images.dim(0)) + " images but " + std::to_string(labels.size()) +
                      " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses) {
      throw FormatError(name + ": label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                        " outside [0, 10)");
    }
  }
  for (double v : images.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw FormatError(name + ": pixel value outside [0, 1]");
  }
}

Dataset pad_images(const Dataset& dataset, std::size_t size) {
  const std::size_t n = dataset.size(), c = dataset.channels(), h = dataset.height(), w = dataset.width();
  if (size < h || size < w) throw ArgumentError("pad_images: target smaller than the images");
  const std::size_t top = (size - h) / 2, left = (size - w) / 2;
  Dataset out;
  out.name = dataset.name;
  out.labels = dataset.labels;
  out.images = Tensor({n, c, size, size});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) out.images.at(i, ch, y + top, x + left) = dataset.images.at(i, ch, y, x);
      }
    }
  }
  return out;
}

Dataset gather(const Dataset& dataset, std::span<const std::size_t> indices) {
  const std::size_t per = dataset.images.size() / std::max<std::size_t>(dataset.size(), 1);
  Shape shape = dataset.images.shape();
  shape[0] = indices.size();
  Dataset out;
  out.name = dataset.name;
  out.images = Tensor(shape);
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= dataset.size()) throw ArgumentError("gather: index out of range");
    std::copy(dataset.images.data() + src * per, dataset.images.data() + (src + 1) * per, out.images.data() + i * per);
    out.labels[i] = dataset.labels[src];
  }
  return out;
}

Dataset subset(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n > dataset.size()) {
    throw ArgumentError("subset: requested " + std::to_string(n) + " of " + std::to_string(dataset.size()) + " samples");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, streams::kSubset);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(n);
  return gather(dataset, order);
}

}  // namespace colu::data
