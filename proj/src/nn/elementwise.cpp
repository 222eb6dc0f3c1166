#include "colu/nn/layers.hpp"
#include "common.hpp"

namespace colu::nn {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2d: return "conv";
    case LayerKind::Dense: return "dense";
    case LayerKind::BatchNorm2d: return "batchnorm";
    case LayerKind::MaxPool2d: return "pool";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Activation: return "act";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::ResidualGroup: return "residual";
  }
  return "unknown";
}

// Activation

Activation::Activation(act::ActivationKind kind) : activation_(kind) {}

Tensor Activation::forward(const Tensor& input, ForwardContext& ctx) {
  Tensor out(input.shape());
  if (ctx.mode == Mode::Train) {
    Tensor slope(input.shape());
    act::eval_and_derivative_into(activation_, input.values(), out.values(), slope.values());
    slope_ = std::move(slope);
    input_.reset();
  } else {
    act::eval_into(activation_, input.values(), out.values());
    input_ = input;
    slope_.reset();
  }
  detail::debug_check_finite(out, "Activation::forward");
  return out;
}

Tensor Activation::backward(const Tensor& grad_out) {
  if (!input_ && !slope_) detail::backward_before_forward("Activation");
  require_shape(grad_out, slope_ ? slope_->shape() : input_->shape(), "Activation::backward");
  Tensor grad_in = slope_ ? *slope_ : Tensor(grad_out.shape());
  if (!slope_) act::derivative_into(activation_, input_->values(), grad_in.values());
  for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] *= grad_out[i];
  return grad_in;
}

std::string Activation::describe() const { return "Activation(" + activation_.name() + ")"; }

// Flatten

Tensor Flatten::forward(const Tensor& input, ForwardContext& /*ctx*/) {
  if (input.rank() < 2) throw ShapeError("Flatten: need rank >= 2, got " + shape_string(input.shape()));
  input_shape_ = input.shape();
  cached_ = true;
  const std::size_t n = input.dim(0);
  return input.reshaped({n, input.size() / n});
}

Tensor Flatten::backward(const Tensor& grad_out) {
  if (!cached_) detail::backward_before_forward("Flatten");
  return grad_out.reshaped(input_shape_);
}

// ResidualGroup

ResidualGroup::ResidualGroup(std::vector<LayerPtr> inner) : inner_(std::move(inner)) {}

Tensor ResidualGroup::forward(const Tensor& input, ForwardContext& ctx) {
  Tensor x = input;
  for (auto& layer : inner_) x = layer->forward(x, ctx);
  if (x.shape() != input.shape()) {
    throw ShapeError("ResidualGroup: inner output " + shape_string(x.shape()) + " does not match input " +
                     shape_string(input.shape()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += input[i];
  cached_ = true;
  return x;
}

Tensor ResidualGroup::backward(const Tensor& grad_out) {
  if (!cached_) detail::backward_before_forward("ResidualGroup");
  Tensor g = grad_out;
  for (auto it = inner_.rbegin(); it != inner_.rend(); ++it) g = (*it)->backward(g);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += grad_out[i];
  return g;
}

void ResidualGroup::collect_parameters(std::vector<Param>& out, const std::string& prefix) {
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    inner_[i]->collect_parameters(out, prefix + std::to_string(i) + ".");
  }
}

void ResidualGroup::collect_buffers(std::vector<Tensor*>& out) {
  for (auto& layer : inner_) layer->collect_buffers(out);
}

std::string ResidualGroup::describe() const {
  std::string out = "ResidualGroup[";
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    if (i) out += ", ";
    out += inner_[i]->describe();
  }
  return out + "]";
}

}  // namespace colu::nn
