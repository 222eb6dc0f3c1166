#pragma once

#include <cstdint>
#include <vector>

#include "colu/nn/layers.hpp"

namespace colu::nn {

/// Ordered layer stack. Single owner: forward caches per-layer state that
/// backward consumes, so one instance must not be shared across threads.
class Network {
 public:
  Network() = default;
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }
  void add(LayerPtr layer) { layers_.push_back(std::move(layer)); }

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  void set_mode(Mode mode) { mode_ = mode; }
  Mode mode() const { return mode_; }

  // Dropout masks are drawn from this generator in train mode.
  void seed_dropout(std::uint64_t seed) { dropout_rng_ = Rng(seed, streams::kDropout); }
  Rng& dropout_rng() { return dropout_rng_; }

  // Freeze/unfreeze every dropout mask in the network (gradient checks).
  void freeze_dropout(bool frozen);

  Tensor forward(const Tensor& input);
  // Returns d(loss)/d(input); parameter gradients are left in each Param::grad.
  Tensor backward(const Tensor& grad_output);

  std::vector<Param> parameters();
  std::vector<Tensor*> buffers();
  void zero_grad();
  std::size_t parameter_count();

  // Top-level layer kinds in order.
  std::vector<LayerKind> layer_kinds() const;
  // Occurrences of `kind`, descending into residual groups.
  std::size_t count(LayerKind kind) const;

  std::string describe() const;

 private:
  std::vector<LayerPtr> layers_;
  Mode mode_ = Mode::Train;
  Rng dropout_rng_{0, streams::kDropout};
  bool cached_ = false;
};

}  // namespace colu::nn
