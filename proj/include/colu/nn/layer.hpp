#pragma once

#include <memory>
#include <string>
#include <vector>

#include "colu/rng.hpp"
#include "colu/tensor.hpp"

namespace colu::nn {

enum class Mode { Train, Eval };

enum class LayerKind { Conv2d, Dense, BatchNorm2d, MaxPool2d, Dropout, Activation, Flatten, ResidualGroup };

const char* layer_kind_name(LayerKind kind);

enum class ParamRole { Weight, Bias, Scale, Shift };

/// Non-owning view of a trainable tensor and its gradient slot.
struct Param {
  std::string name;
  Tensor* value;
  Tensor* grad;
  ParamRole role;
};

struct ForwardContext {
  Mode mode = Mode::Train;
  Rng* rng = nullptr;  // dropout masks; required in train mode when dropout is active
};

/// One stage of a network. forward caches what backward needs; backward
/// overwrites the layer's parameter gradients and returns d(loss)/d(input).
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual Tensor forward(const Tensor& input, ForwardContext& ctx) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual void collect_parameters(std::vector<Param>& /*out*/, const std::string& /*prefix*/) {}
  // Non-trainable state that must round-trip through serialization.
  virtual void collect_buffers(std::vector<Tensor*>& /*out*/) {}

  virtual std::string describe() const = 0;
};

using LayerPtr = std::unique_ptr<Layer>;

}  // namespace colu::nn
