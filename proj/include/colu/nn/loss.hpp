#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "colu/nn/layer.hpp"
#include "colu/tensor.hpp"

namespace colu::nn {

struct LossResult {
  double loss;         // batch mean
  Tensor grad_logits;  // (softmax - onehot) / N
};

/// Mean softmax cross-entropy over rows of (N, K) logits, computed with the
/// row maximum subtracted. Throws ArgumentError for labels outside [0, K).
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels);

// Per-sample losses, same conventions.
std::vector<double> per_sample_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels);

struct L2Result {
  double loss;
  std::vector<Tensor> grads;  // aligned with the params argument; zeros for non-weights
};

/// factor * sum(w^2) over Weight-role params (conv and dense kernels only).
L2Result l2_penalty(const std::vector<Param>& params, double factor);

// Adds 2*factor*w into each weight gradient; returns the penalty.
double add_l2_gradients(const std::vector<Param>& params, double factor);

}  // namespace colu::nn
