#include <cmath>

#include "colu/data.hpp"
#include "colu/errors.hpp"

namespace colu::data {

namespace {
constexpr std::size_t kPlane = kCifarSide * kCifarSide;
constexpr std::size_t kPad = 4;
constexpr std::size_t kOffsets = 2 * kPad + 1;
}  // namespace

Dataset parse_cifar10(std::span<const std::uint8_t> bytes, std::string name) {
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError("CIFAR-10: size " + std::to_string(bytes.size()) + " is not a multiple of " +
                      std::to_string(kCifarRecordBytes) + " (truncated record)");
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  Dataset ds;
  ds.name = std::move(name);
  ds.labels.resize(n);
  ds.images = Tensor({n, 3, kCifarSide, kCifarSide});
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* record = bytes.data() + i * kCifarRecordBytes;
    ds.labels[i] = record[0];
    double* dst = ds.images.data() + i * 3 * kPlane;
    for (std::size_t j = 0; j < 3 * kPlane; ++j) dst[j] = static_cast<double>(record[1 + j]) / 255.0;
  }
  ds.validate();
  return ds;
}

Dataset load_cifar10(const std::vector<std::filesystem::path>& batch_paths) {
  std::vector<std::uint8_t> all;
  for (const auto& path : batch_paths) {
    auto bytes = read_file(path);
    if (bytes.size() % kCifarRecordBytes != 0) {
      throw FormatError("CIFAR-10 " + path.string() + ": size " + std::to_string(bytes.size()) +
                        " is not a multiple of " + std::to_string(kCifarRecordBytes));
    }
    all.insert(all.end(), bytes.begin(), bytes.end());
  }
  return parse_cifar10(all);
}

Dataset load_cifar10_split(const std::filesystem::path& dir, Split split) {
  std::vector<std::filesystem::path> paths;
  if (split == Split::Train) {
    for (int i = 1; i <= 5; ++i) paths.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
  } else {
    paths.push_back(dir / "test_batch.bin");
  }
  return load_cifar10(paths);
}

std::vector<std::uint8_t> serialize_cifar10(const Dataset& dataset) {
  if (dataset.images.shape() != Shape{dataset.size(), 3, kCifarSide, kCifarSide}) {
    throw ShapeError("serialize_cifar10: images must be (N, 3, 32, 32), got " + shape_string(dataset.images.shape()));
  }
  std::vector<std::uint8_t> out(dataset.size() * kCifarRecordBytes);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::uint8_t* record = out.data() + i * kCifarRecordBytes;
    record[0] = dataset.labels[i];
    const double* src = dataset.images.data() + i * 3 * kPlane;
    for (std::size_t j = 0; j < 3 * kPlane; ++j) record[1 + j] = static_cast<std::uint8_t>(std::lround(src[j] * 255.0));
  }
  return out;
}

Tensor augment_cifar(const Tensor& image, std::size_t offset_y, std::size_t offset_x, bool flip) {
  require_shape(image, {3, kCifarSide, kCifarSide}, "augment_cifar");
  if (offset_y > 2 * kPad || offset_x > 2 * kPad) throw ArgumentError("augment_cifar: crop offset outside [0, 8]");
  Tensor out({3, kCifarSide, kCifarSide});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < kCifarSide; ++y) {
      // Row y of the crop is row y + offset_y - 4 of the original.
      const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + offset_y) - static_cast<std::ptrdiff_t>(kPad);
      for (std::size_t x = 0; x < kCifarSide; ++x) {
        const std::size_t cx = flip ? kCifarSide - 1 - x : x;
        const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(cx + offset_x) - static_cast<std::ptrdiff_t>(kPad);
        double v = 0.0;
        if (sy >= 0 && sy < static_cast<std::ptrdiff_t>(kCifarSide) && sx >= 0 &&
            sx < static_cast<std::ptrdiff_t>(kCifarSide)) {
          v = image[(c * kCifarSide + static_cast<std::size_t>(sy)) * kCifarSide + static_cast<std::size_t>(sx)];
        }
        out[(c * kCifarSide + y) * kCifarSide + x] = v;
      }
    }
  }
  return out;
}

Tensor augment_cifar(const Tensor& image, Rng& rng) {
  const std::uint64_t offset = rng.below(kOffsets * kOffsets);
  const bool flip = (rng.next() >> 63) != 0;
  return augment_cifar(image, static_cast<std::size_t>(offset / kOffsets), static_cast<std::size_t>(offset % kOffsets),
                       flip);
}

Tensor augment_cifar_batch(const Tensor& batch, Rng& rng) {
  require_rank(batch, 4, "augment_cifar_batch");
  const std::size_t per = 3 * kPlane;
  Tensor out(batch.shape());
  for (std::size_t n = 0; n < batch.dim(0); ++n) {
    Tensor image({3, kCifarSide, kCifarSide},
                 std::vector<double>(batch.data() + n * per, batch.data() + (n + 1) * per));
    const Tensor aug = augment_cifar(image, rng);
    std::copy(aug.data(), aug.data() + per, out.data() + n * per);
  }
  return out;
}

}  // namespace colu::data
