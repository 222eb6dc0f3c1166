#pragma once

#include <iosfwd>
#include <vector>

#include "colu/nn/network.hpp"

namespace colu::nn {

/// Tensor record layout (all integers and floats little-endian):
///
///   "COLUTNSR"                 8 bytes
///   version                    u32 (1)
///   tensor count               u32
///   per tensor: rank u32, then rank x u64 extents     (the shape manifest)
///   all tensor data, in order, as IEEE-754 float64
///
/// Reading requires every stored shape to equal the destination shape.
void write_tensors(std::ostream& out, const std::vector<const Tensor*>& tensors);
void read_tensors(std::istream& in, const std::vector<Tensor*>& tensors);

// Parameters followed by buffers (batchnorm running statistics).
void save_network(Network& net, std::ostream& out);
void load_network(Network& net, std::istream& in);

}  // namespace colu::nn
