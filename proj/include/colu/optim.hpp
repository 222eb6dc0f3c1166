#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "colu/nn/layer.hpp"
#include "colu/tensor.hpp"

namespace colu::optim {

enum class DecayMode {
  LearningRate,  // lr_t = lr0 / (1 + decay * t)
  Weight,        // constant lr, g += decay * w on every parameter
};

struct SgdConfig {
  double lr0 = 0.001;
  double momentum = 0.9;
  double decay = 1e-4;
  double l2_factor = 1e-4;
  DecayMode decay_mode = DecayMode::LearningRate;
};

// Throws ArgumentError: lr0 must be >= 0 (0 freezes training), momentum in
// [0, 1), decay and l2_factor >= 0.
void validate(const SgdConfig& config);

struct OptState {
  std::vector<Tensor> velocities;
  std::uint64_t iteration = 0;
};

double effective_lr(const SgdConfig& config, std::uint64_t iteration);

/// Classical momentum, one call per batch:
///   v <- momentum * v - lr_t * g
///   w <- w + v
/// Velocities are created as zeros on the first call. Gradients are expected
/// to already contain the L2 term.
void sgd_step(const std::vector<nn::Param>& params, OptState& state, const SgdConfig& config);

// Span-level variant on raw tensors, same update rule.
void sgd_step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads, OptState& state,
              const SgdConfig& config);

// Zero velocities shaped like `params`; load_state needs this as its target.
OptState make_state(const std::vector<nn::Param>& params);

// Iteration count and velocities, in the tensor record format of nn/serialize.
void save_state(const OptState& state, std::ostream& out);
void load_state(OptState& state, std::istream& in);

}  // namespace colu::optim
