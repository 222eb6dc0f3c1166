#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "colu/activation.hpp"
#include "colu/nn/layer.hpp"

namespace colu::nn {

/// Stride-1 convolution with zero padding of kernel/2 ("same" for odd
/// kernels). Weights (C_out, C_in, k, k), bias (C_out).
class Conv2d : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel = 3);

  LayerKind kind() const override { return LayerKind::Conv2d; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Param>& out, const std::string& prefix) override;
  std::string describe() const override;

  // He-uniform weights, zero bias.
  void initialize(Rng& rng);

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }
  const Tensor& weight_grad() const { return weight_grad_; }
  const Tensor& bias_grad() const { return bias_grad_; }
  std::size_t in_channels() const { return in_channels_; }
  std::size_t out_channels() const { return out_channels_; }

 private:
  std::size_t in_channels_;
  std::size_t out_channels_;
  std::size_t kernel_;
  Tensor weight_, bias_, weight_grad_, bias_grad_;
  Shape input_shape_;
  std::vector<double> columns_;  // im2col of the cached input
  bool cached_ = false;
};

/// out = input * W^T + b, input (N, in), W (out, in).
class Dense : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  LayerKind kind() const override { return LayerKind::Dense; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Param>& out, const std::string& prefix) override;
  std::string describe() const override;

  void initialize(Rng& rng);

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }
  const Tensor& weight_grad() const { return weight_grad_; }
  const Tensor& bias_grad() const { return bias_grad_; }

 private:
  std::size_t in_features_;
  std::size_t out_features_;
  Tensor weight_, bias_, weight_grad_, bias_grad_;
  std::optional<Tensor> input_;
};

/// Per-channel batch normalization over (N, H, W).
///
/// Train mode normalizes with the biased batch variance and folds the batch
/// statistics into the running estimates as
///   running = (1 - momentum) * running + momentum * batch
/// using the unbiased variance. Eval mode uses the running estimates only and
/// has no side effects.
class BatchNorm2d : public Layer {
 public:
  static constexpr double kDefaultEpsilon = 1e-5;
  static constexpr double kDefaultMomentum = 0.1;

  explicit BatchNorm2d(std::size_t channels, double epsilon = kDefaultEpsilon,
                       double momentum = kDefaultMomentum);

  LayerKind kind() const override { return LayerKind::BatchNorm2d; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Param>& out, const std::string& prefix) override;
  void collect_buffers(std::vector<Tensor*>& out) override;
  std::string describe() const override;

  Tensor& scale() { return gamma_; }
  Tensor& shift() { return beta_; }
  Tensor& running_mean() { return running_mean_; }
  Tensor& running_var() { return running_var_; }
  const Tensor& scale_grad() const { return gamma_grad_; }
  const Tensor& shift_grad() const { return beta_grad_; }

 private:
  std::size_t channels_;
  double epsilon_;
  double momentum_;
  Tensor gamma_, beta_, gamma_grad_, beta_grad_;
  Tensor running_mean_, running_var_;
  // Cached for backward.
  Mode cached_mode_ = Mode::Train;
  Tensor normalized_;
  std::vector<double> inv_std_;
  bool cached_ = false;
};

/// Non-overlapping max pooling (window == stride). Odd extents are padded on
/// the right/bottom with -inf, so the output is ceil(H/k) x ceil(W/k).
/// Ties go to the first element of the window in row-major order.
class MaxPool2d : public Layer {
 public:
  explicit MaxPool2d(std::size_t window = 2);

  LayerKind kind() const override { return LayerKind::MaxPool2d; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override;

  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
  bool cached_ = false;
};

/// Inverted dropout: keep with probability 1 - rate, scale kept values by
/// 1/(1 - rate). Identity in eval mode.
class Dropout : public Layer {
 public:
  explicit Dropout(double rate);

  LayerKind kind() const override { return LayerKind::Dropout; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override;

  double rate() const { return rate_; }
  // While frozen, train-mode forward reuses the last mask (if shapes match)
  // instead of drawing a new one. Used by gradient checks.
  void set_frozen(bool frozen) { frozen_ = frozen; }
  const std::vector<double>& mask() const { return mask_; }

 private:
  double rate_;
  bool frozen_ = false;
  Shape mask_shape_;
  std::vector<double> mask_;  // 0 or 1/(1-rate); empty means identity
  bool cached_ = false;
};

class Activation : public Layer {
 public:
  explicit Activation(act::ActivationKind kind);

  LayerKind kind() const override { return LayerKind::Activation; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override;

  act::ActivationKind activation() const { return activation_; }

 private:
  act::ActivationKind activation_;
  // Train mode caches f'(x) directly; eval mode keeps x.
  std::optional<Tensor> input_;
  std::optional<Tensor> slope_;
};

/// (N, ...) -> (N, prod(...)).
class Flatten : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::Flatten; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "Flatten"; }

 private:
  Shape input_shape_;
  bool cached_ = false;
};

/// y = x + inner(x). The inner sequence must preserve the input shape.
class ResidualGroup : public Layer {
 public:
  ResidualGroup() = default;
  explicit ResidualGroup(std::vector<LayerPtr> inner);

  LayerKind kind() const override { return LayerKind::ResidualGroup; }
  Tensor forward(const Tensor& input, ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Param>& out, const std::string& prefix) override;
  void collect_buffers(std::vector<Tensor*>& out) override;
  std::string describe() const override;

  void add(LayerPtr layer) { inner_.push_back(std::move(layer)); }
  const std::vector<LayerPtr>& inner() const { return inner_; }

 private:
  std::vector<LayerPtr> inner_;
  bool cached_ = false;
};

}  // namespace colu::nn
