#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "colu/rng.hpp"
#include "colu/tensor.hpp"

namespace colu::data {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kNumClasses = 10;

/// Images (N, C, H, W) scaled to [0, 1] and labels in [0, 10).
struct Dataset {
  Tensor images;
  std::vector<std::uint8_t> labels;
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t channels() const { return images.dim(1); }
  std::size_t height() const { return images.dim(2); }
  std::size_t width() const { return images.dim(3); }

  // Throws FormatError unless counts agree, labels < 10 and pixels in [0,1].
  void validate() const;
};

/// Unsigned-byte IDX array: big-endian magic (0x000008TT, TT = 0x08 for
/// ubyte, low byte = rank), rank x u32 big-endian extents, raw bytes.
struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> bytes;
};

// Parses and checks the header, magic family and payload length.
IdxArray parse_idx(std::span<const std::uint8_t> file);
std::vector<std::uint8_t> serialize_idx(const IdxArray& array);

// Image files must have magic 0x00000803 (N x rows x cols), label files
// 0x00000801 (N). Wrong magic or truncation raises FormatError.
IdxArray load_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// value / 255, no mean subtraction.
Tensor normalize(std::span<const std::uint8_t> raw, Shape shape);

/// CIFAR-10 binary: 3073-byte records, one label byte then R, G, B planes of
/// 32x32 row-major pixels. The concatenated files form one dataset.
Dataset parse_cifar10(std::span<const std::uint8_t> bytes, std::string name = "cifar10");
Dataset load_cifar10(const std::vector<std::filesystem::path>& batch_paths);
std::vector<std::uint8_t> serialize_cifar10(const Dataset& dataset);

// Image/label IDX pair, e.g. MNIST's t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte.
Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels, std::string name);

enum class Split { Train, Test };

// Standard file names inside `dir`:
//   MNIST / Fashion-MNIST: {train,t10k}-{images-idx3,labels-idx1}-ubyte
//   CIFAR-10:              data_batch_{1..5}.bin / test_batch.bin
Dataset load_mnist_like(const std::filesystem::path& dir, Split split, std::string name);
Dataset load_cifar10_split(const std::filesystem::path& dir, Split split);

/// Pad by 4 zeros on each side, crop 32x32 at (offset_y, offset_x) in [0, 8],
/// then optionally mirror horizontally. Input and output are (3, 32, 32).
Tensor augment_cifar(const Tensor& image, std::size_t offset_y, std::size_t offset_x, bool flip);

// Draws exactly two values: crop offset (one of 81), then the flip bit.
Tensor augment_cifar(const Tensor& image, Rng& rng);

// Augments every image of an (N, 3, 32, 32) batch in order.
Tensor augment_cifar_batch(const Tensor& batch, Rng& rng);

/// Ten classes of oriented bars (class k at k * 18 degrees) through a
/// jittered center on a 28x28 canvas, plus uniform noise. Labels are
/// round-robin, so n = 10m gives exactly m of each class.
Dataset synthetic_dataset(std::uint64_t seed, std::size_t n);

// Centers each image on a size x size zero canvas.
Dataset pad_images(const Dataset& dataset, std::size_t size);

// First n samples after a seeded shuffle of the indices (order preserved as shuffled).
Dataset subset(const Dataset& dataset, std::size_t n, std::uint64_t seed);

// Rows `indices` in the given order.
Dataset gather(const Dataset& dataset, std::span<const std::size_t> indices);

}  // namespace colu::data
