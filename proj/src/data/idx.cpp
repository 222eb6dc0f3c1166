#include <cstdio>
#include <fstream>
#include <iterator>

#include "colu/data.hpp"
#include "colu/errors.hpp"

namespace colu::data {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex_magic(std::uint32_t magic) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", magic);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

IdxArray parse_idx(std::span<const std::uint8_t> file) {
  if (file.size() < 4) {
    throw FormatError("IDX: truncated header, expected at least 4 bytes, got " + std::to_string(file.size()));
  }
  IdxArray array;
  array.magic = read_be32(file, 0);
  const std::uint32_t type = (array.magic >> 8) & 0xFF;
  const std::uint32_t rank = array.magic & 0xFF;
  if ((array.magic >> 16) != 0 || type != 0x08 || rank == 0) {
    throw FormatError("IDX: unsupported magic " + hex_magic(array.magic));
  }
  const std::size_t header = 4 + 4 * std::size_t{rank};
  if (file.size() < header) {
    throw FormatError("IDX: truncated header, expected " + std::to_string(header) + " bytes, got " +
                      std::to_string(file.size()));
  }
  std::size_t payload = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    array.dims.push_back(read_be32(file, 4 + 4 * std::size_t{i}));
    payload *= array.dims.back();
  }
  if (file.size() != header + payload) {
    throw FormatError("IDX: expected " + std::to_string(header + payload) + " bytes, got " +
                      std::to_string(file.size()));
  }
  array.bytes.assign(file.begin() + static_cast<std::ptrdiff_t>(header), file.end());
  return array;
}

std::vector<std::uint8_t> serialize_idx(const IdxArray& array) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * array.dims.size() + array.bytes.size());
  append_be32(out, array.magic);
  for (std::uint32_t d : array.dims) append_be32(out, d);
  out.insert(out.end(), array.bytes.begin(), array.bytes.end());
  return out;
}

IdxArray load_idx_images(const std::filesystem::path& path) {
  const auto file = read_file(path);
  if (file.size() >= 4 && read_be32(file, 0) != kIdxImageMagic) {
    throw FormatError("IDX images " + path.string() + ": expected magic " + hex_magic(kIdxImageMagic) + ", found " +
                      hex_magic(read_be32(file, 0)));
  }
  return parse_idx(file);
}

std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path) {
  const auto file = read_file(path);
  if (file.size() >= 4 && read_be32(file, 0) != kIdxLabelMagic) {
    throw FormatError("IDX labels " + path.string() + ": expected magic " + hex_magic(kIdxLabelMagic) + ", found " +
                      hex_magic(read_be32(file, 0)));
  }
  return parse_idx(file).bytes;
}

Tensor normalize(std::span<const std::uint8_t> raw, Shape shape) {
  Tensor out(std::move(shape));
  if (out.size() != raw.size()) {
    throw ShapeError("normalize: " + std::to_string(raw.size()) + " bytes for shape " + shape_string(out.shape()));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<double>(raw[i]) / 255.0;
  return out;
}

Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels, std::string name) {
  const IdxArray raw = load_idx_images(images);
  Dataset ds;
  ds.labels = load_idx_labels(labels);
  if (raw.dims[0] != ds.labels.size()) {
    throw FormatError("IDX: " + std::to_string(raw.dims[0]) + " images but " + std::to_string(ds.labels.size()) +
                      " labels");
  }
  ds.images = normalize(raw.bytes, {raw.dims[0], 1, raw.dims[1], raw.dims[2]});
  ds.name = std::move(name);
  ds.validate();
  return ds;
}

Dataset load_mnist_like(const std::filesystem::path& dir, Split split, std::string name) {
  const std::string prefix = split == Split::Train ? "train" : "t10k";
  return load_idx_dataset(dir / (prefix + "-images-idx3-ubyte"), dir / (prefix + "-labels-idx1-ubyte"),
                          std::move(name));
}

}  // namespace colu::data
