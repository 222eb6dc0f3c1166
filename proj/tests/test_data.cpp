#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <functional>
#include <unistd.h>
#include <filesystem>
#include <string>

#include "colu/data.hpp"
#include "colu/errors.hpp"

using namespace colu;
using namespace colu::data;

namespace fs = std::filesystem;

namespace {

// Class-0 vs class-1 mean-image distance of synthetic_dataset(2024, 1000),
// frozen from the generator.
constexpr double kSyntheticMeanGap = 2.5388495487054987;

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("colu_test_data_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

// Two 2x2 images by hand: header then bytes.
std::vector<std::uint8_t> idx_fixture(std::uint32_t magic = 0x00000803) {
  std::vector<std::uint8_t> f;
  put_u32(f, magic);
  put_u32(f, 2);
  put_u32(f, 2);
  put_u32(f, 2);
  for (std::uint8_t b : {0, 1, 128, 255, 7, 8, 9, 10}) f.push_back(b);
  return f;
}

std::vector<std::uint8_t> label_fixture() {
  std::vector<std::uint8_t> f;
  put_u32(f, 0x00000801);
  put_u32(f, 2);
  f.push_back(3);
  f.push_back(9);
  return f;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("idx fixture round trip") {
  const auto bytes = idx_fixture();
  const IdxArray arr = parse_idx(bytes);
  CHECK(arr.magic == kIdxImageMagic);
  CHECK(arr.dims == std::vector<std::uint32_t>{2, 2, 2});
  CHECK(arr.bytes.size() == 8);
  CHECK(arr.bytes[3] == 255);
  CHECK(serialize_idx(arr) == bytes);

  const fs::path dir = scratch_dir();
  write_file(dir / "img", bytes);
  write_file(dir / "lbl", label_fixture());
  CHECK(serialize_idx(load_idx_images(dir / "img")) == bytes);
  CHECK(load_idx_labels(dir / "lbl") == std::vector<std::uint8_t>{3, 9});

  const Dataset ds = load_idx_dataset(dir / "img", dir / "lbl", "fixture");
  CHECK(ds.images.shape() == Shape{2, 1, 2, 2});
  CHECK(ds.images[3] == 1.0);
  CHECK(ds.labels == std::vector<std::uint8_t>{3, 9});
  fs::remove_all(dir);
}

TEST_CASE("idx error paths") {
  const fs::path dir = scratch_dir();
  write_file(dir / "wrong", idx_fixture(0x00000802));
  const std::string msg = message_of([&] { load_idx_images(dir / "wrong"); });
  CHECK(msg.find("0x00000802") != std::string::npos);

  // A label file handed to the image loader.
  write_file(dir / "lbl", label_fixture());
  CHECK_THROWS_AS(load_idx_images(dir / "lbl"), FormatError);
  CHECK_THROWS_AS(load_idx_labels(dir / "wrong"), FormatError);

  auto cut = idx_fixture();
  cut.pop_back();
  const std::string trunc = message_of([&] { parse_idx(cut); });
  CHECK(trunc.find("expected 24 bytes, got 23") != std::string::npos);

  CHECK_THROWS_AS(parse_idx(std::vector<std::uint8_t>{0, 0}), FormatError);
  CHECK_THROWS_AS(parse_idx(std::vector<std::uint8_t>{0, 0, 0x08, 0x03, 0, 0}), FormatError);
  CHECK_THROWS_AS(load_idx_images(dir / "missing"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("real MNIST test images when available") {
  const char* dir = std::getenv("COLU_MNIST_DIR");
  if (!dir) return;
  const fs::path p = fs::path(dir) / "t10k-images-idx3-ubyte";
  if (!fs::exists(p)) return;
  const IdxArray arr = load_idx_images(p);
  CHECK(arr.magic == 0x00000803);
  CHECK(arr.dims == std::vector<std::uint32_t>{10000, 28, 28});
}

TEST_CASE("normalize") {
  const std::vector<std::uint8_t> raw{0, 255, 128};
  const Tensor t = normalize(raw, {3});
  CHECK(t[0] == 0.0);
  CHECK(t[1] == 1.0);
  CHECK(t[2] == 128.0 / 255.0);
}

TEST_CASE("cifar fixture") {
  std::vector<std::uint8_t> rec(kCifarRecordBytes, 0);
  rec[0] = 7;
  rec[1] = 255;                    // R plane, (0, 0)
  rec[1 + 1024 + 32 * 2 + 5] = 51;  // G plane, (2, 5)
  const Dataset ds = parse_cifar10(rec);
  CHECK(ds.size() == 1);
  CHECK(ds.labels[0] == 7);
  CHECK(ds.images.shape() == Shape{1, 3, 32, 32});
  CHECK(ds.images.at(0, 0, 0, 0) == 1.0);
  CHECK(ds.images.at(0, 1, 2, 5) == 0.2);
  CHECK(serialize_cifar10(ds) == rec);

  std::vector<std::uint8_t> two = rec;
  two.insert(two.end(), rec.begin(), rec.end());
  two[kCifarRecordBytes] = 2;
  CHECK(serialize_cifar10(parse_cifar10(two)) == two);

  const fs::path dir = scratch_dir();
  write_file(dir / "b.bin", two);
  CHECK(load_cifar10({dir / "b.bin", dir / "b.bin"}).size() == 4);

  auto cut = rec;
  cut.pop_back();
  CHECK_THROWS_AS(parse_cifar10(cut), FormatError);
  write_file(dir / "cut.bin", cut);
  CHECK_THROWS_AS(load_cifar10({dir / "cut.bin"}), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("cifar augmentation") {
  Rng rng(3);
  Tensor img({3, 32, 32});
  for (double& v : img.values()) v = rng.uniform();

  CHECK(augment_cifar(img, 4, 4, false) == img);
  CHECK(augment_cifar(augment_cifar(img, 4, 4, true), 4, 4, true) == img);

  const Tensor flipped = augment_cifar(img, 4, 4, true);
  CHECK(flipped[5] == img[31 - 5]);
  const Tensor shifted = augment_cifar(img, 0, 0, false);
  CHECK(shifted[0] == 0.0);                              // padding corner
  CHECK(shifted[4 * 32 + 4] == img[0]);                  // original (0, 0)
  const Tensor down = augment_cifar(img, 8, 8, false);
  CHECK(down[0] == img[4 * 32 + 4]);
  CHECK(down[31 * 32 + 31] == 0.0);

  Tensor batch({4, 3, 32, 32});
  for (double& v : batch.values()) v = rng.uniform();
  Rng a(11, streams::kAugment), b(11, streams::kAugment);
  CHECK(augment_cifar_batch(batch, a) == augment_cifar_batch(batch, b));

  // Two draws per image, in order: crop offset then flip bit.
  Rng used(5), reference(5);
  augment_cifar(img, used);
  const std::uint64_t crop = reference.below(81);
  const bool flip = (reference.next() >> 63) != 0;
  CHECK(used.next() == reference.next());
  Rng again(5);
  CHECK(augment_cifar(img, again) == augment_cifar(img, crop / 9, crop % 9, flip));
}

TEST_CASE("synthetic dataset") {
  const Dataset a = synthetic_dataset(2024, 100);
  const Dataset b = synthetic_dataset(2024, 100);
  CHECK(a.images == b.images);
  CHECK(a.labels == b.labels);
  CHECK(a.images.shape() == Shape{100, 1, 28, 28});
  CHECK_NOTHROW(a.validate());
  std::size_t counts[10] = {};
  for (auto l : a.labels) ++counts[l];
  for (std::size_t c : counts) CHECK(c == 10);
  CHECK_FALSE(synthetic_dataset(2025, 100).images == a.images);
  CHECK_THROWS_AS(synthetic_dataset(1, 9), ArgumentError);

  const Dataset big = synthetic_dataset(2024, 1000);
  std::vector<double> m0(784, 0.0), m1(784, 0.0);
  for (std::size_t i = 0; i < big.size(); ++i) {
    auto& m = big.labels[i] == 0 ? m0 : m1;
    if (big.labels[i] > 1) continue;
    for (std::size_t p = 0; p < 784; ++p) m[p] += big.images[i * 784 + p] / 100.0;
  }
  double gap = 0.0;
  for (std::size_t p = 0; p < 784; ++p) gap += (m0[p] - m1[p]) * (m0[p] - m1[p]);
  gap = std::sqrt(gap);
  CHECK(gap == doctest::Approx(kSyntheticMeanGap).epsilon(1e-12));
}

TEST_CASE("subset, gather and padding") {
  const Dataset ds = synthetic_dataset(7, 50);
  const Dataset s1 = subset(ds, 20, 3), s2 = subset(ds, 20, 3);
  CHECK(s1.size() == 20);
  CHECK(s1.images == s2.images);
  CHECK(s1.labels == s2.labels);
  CHECK(subset(ds, 50, 3).size() == 50);
  CHECK_THROWS_AS(subset(ds, 51, 3), ArgumentError);

  const std::vector<std::size_t> idx{4, 1};
  const Dataset g = gather(ds, idx);
  CHECK(g.labels == std::vector<std::uint8_t>{ds.labels[4], ds.labels[1]});
  CHECK(g.images.slice(0, 1) == ds.images.slice(4, 1).reshaped({1, 1, 28, 28}));

  const Dataset p = pad_images(ds, 32);
  CHECK(p.images.shape() == Shape{50, 1, 32, 32});
  CHECK(p.images.at(3, 0, 2, 2) == ds.images.at(3, 0, 0, 0));
  CHECK(p.images.at(3, 0, 0, 0) == 0.0);
  CHECK(p.images.at(3, 0, 31, 31) == 0.0);
}
