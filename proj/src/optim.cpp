#include "colu/optim.hpp"

#include <istream>
#include <ostream>

#include "colu/errors.hpp"
#include "colu/nn/serialize.hpp"

namespace colu::optim {

void validate(const SgdConfig& config) {
  if (!(config.lr0 >= 0.0)) throw ArgumentError("sgd: learning rate must be non-negative");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw ArgumentError("sgd: momentum must lie in [0, 1)");
  if (!(config.decay >= 0.0)) throw ArgumentError("sgd: decay must be non-negative");
  if (!(config.l2_factor >= 0.0)) throw ArgumentError("sgd: L2 factor must be non-negative");
}

double effective_lr(const SgdConfig& config, std::uint64_t iteration) {
  if (config.decay_mode == DecayMode::Weight) return config.lr0;
  return config.lr0 / (1.0 + config.decay * static_cast<double>(iteration));
}

void sgd_step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads, OptState& state,
              const SgdConfig& config) {
  if (params.size() != grads.size()) {
    throw ShapeError("sgd_step: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (state.velocities.empty()) {
    for (const Tensor* p : params) state.velocities.emplace_back(p->shape());
  }
  if (state.velocities.size() != params.size()) throw ShapeError("sgd_step: velocity count differs from parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != state.velocities[i].shape()) {
      throw ShapeError("sgd_step: shape mismatch at parameter " + std::to_string(i));
    }
  }

  const double lr = effective_lr(config, state.iteration);
  const double weight_decay = config.decay_mode == DecayMode::Weight ? config.decay : 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = *params[i];
    const Tensor& g = *grads[i];
    Tensor& v = state.velocities[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double grad = g[j] + weight_decay * w[j];
      v[j] = config.momentum * v[j] - lr * grad;
      w[j] += v[j];
    }
  }
  ++state.iteration;
}

void sgd_step(const std::vector<nn::Param>& params, OptState& state, const SgdConfig& config) {
  std::vector<Tensor*> values;
  std::vector<const Tensor*> grads;
  values.reserve(params.size());
  grads.reserve(params.size());
  for (const auto& p : params) {
    values.push_back(p.value);
    grads.push_back(p.grad);
  }
  sgd_step(std::move(values), grads, state, config);
}

OptState make_state(const std::vector<nn::Param>& params) {
  OptState state;
  for (const auto& p : params) state.velocities.emplace_back(p.value->shape());
  return state;
}

void save_state(const OptState& state, std::ostream& out) {
  // Iteration travels as a rank-1 tensor; 2^53 batches is far beyond any run.
  const Tensor iteration({1}, static_cast<double>(state.iteration));
  std::vector<const Tensor*> all{&iteration};
  for (const auto& v : state.velocities) all.push_back(&v);
  Tensor count({1}, static_cast<double>(state.velocities.size()));
  // Count first, in its own record, so load knows how many velocities to expect.
  nn::write_tensors(out, {&count});
  nn::write_tensors(out, all);
}

void load_state(OptState& state, std::istream& in) {
  Tensor count({1});
  nn::read_tensors(in, {&count});
  const auto n = static_cast<std::size_t>(count[0]);
  if (state.velocities.size() != n) {
    throw FormatError("optimizer state: stored " + std::to_string(n) + " velocities, destination has " +
                      std::to_string(state.velocities.size()));
  }
  Tensor iteration({1});
  std::vector<Tensor*> all{&iteration};
  for (auto& v : state.velocities) all.push_back(&v);
  nn::read_tensors(in, all);
  state.iteration = static_cast<std::uint64_t>(iteration[0]);
}

}  // namespace colu::optim
