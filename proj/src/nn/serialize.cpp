#include "colu/nn/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "colu/errors.hpp"

namespace colu::nn {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'L', 'U', 'T', 'N', 'S', 'R'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw FormatError("tensor record: unexpected end of data");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if constexpr (std::is_floating_point_v<T>) {
    return std::bit_cast<T>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_tensors(std::ostream& out, const std::vector<const Tensor*>& tensors) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor* t : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t extent : t->shape()) put<std::uint64_t>(out, extent);
  }
  for (const Tensor* t : tensors) {
    for (double v : t->values()) put<double>(out, v);
  }
}

void read_tensors(std::istream& in, const std::vector<Tensor*>& tensors) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError("tensor record: bad magic");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw FormatError("tensor record: unsupported version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  if (count != tensors.size()) {
    throw FormatError("tensor record: holds " + std::to_string(count) + " tensors, expected " +
                      std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Shape shape(get<std::uint32_t>(in));
    for (auto& extent : shape) extent = static_cast<std::size_t>(get<std::uint64_t>(in));
    if (shape != tensors[i]->shape()) {
      throw FormatError("tensor record: tensor " + std::to_string(i) + " has shape " + shape_string(shape) +
                        ", expected " + shape_string(tensors[i]->shape()));
    }
  }
  for (Tensor* t : tensors) {
    for (double& v : t->values()) v = get<double>(in);
  }
}

void save_network(Network& net, std::ostream& out) {
  std::vector<const Tensor*> all;
  for (const auto& p : net.parameters()) all.push_back(p.value);
  for (Tensor* b : net.buffers()) all.push_back(b);
  write_tensors(out, all);
}

void load_network(Network& net, std::istream& in) {
  std::vector<Tensor*> all;
  for (const auto& p : net.parameters()) all.push_back(p.value);
  for (Tensor* b : net.buffers()) all.push_back(b);
  read_tensors(in, all);
}

}  // namespace colu::nn
