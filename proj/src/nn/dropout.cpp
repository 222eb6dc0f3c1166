#include "colu/nn/layers.hpp"
#include "common.hpp"

namespace colu::nn {

Dropout::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ArgumentError("Dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

Tensor Dropout::forward(const Tensor& input, ForwardContext& ctx) {
  cached_ = true;
  if (ctx.mode == Mode::Eval || rate_ == 0.0) {
    mask_.clear();
    mask_shape_.clear();
    return input;
  }
  const bool reuse = frozen_ && mask_shape_ == input.shape() && mask_.size() == input.size();
  if (!reuse) {
    if (ctx.rng == nullptr) throw UsageError("Dropout: train-mode forward needs a random generator");
    const double keep = 1.0 - rate_;
    const double scale = 1.0 / keep;
    mask_.resize(input.size());
    for (double& m : mask_) m = ctx.rng->uniform() < keep ? scale : 0.0;
    mask_shape_ = input.shape();
  }
  Tensor out(input.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = input[i] * mask_[i];
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  if (!cached_) detail::backward_before_forward("Dropout");
  if (mask_.empty()) return grad_out;
  require_shape(grad_out, mask_shape_, "Dropout::backward");
  Tensor grad_in(grad_out.shape());
  for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] = grad_out[i] * mask_[i];
  return grad_in;
}

std::string Dropout::describe() const { return "Dropout(" + std::to_string(rate_) + ")"; }

}  // namespace colu::nn
