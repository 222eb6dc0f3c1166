#include <limits>

#include "colu/nn/layers.hpp"
#include "common.hpp"

namespace colu::nn {

MaxPool2d::MaxPool2d(std::size_t window) : window_(window) {
  if (window == 0) throw ArgumentError("MaxPool2d: window must be positive");
}

Tensor MaxPool2d::forward(const Tensor& input, ForwardContext& /*ctx*/) {
  require_rank(input, 4, "MaxPool2d");
  const std::size_t n_batch = input.dim(0), channels = input.dim(1), height = input.dim(2), width = input.dim(3);
  const std::size_t out_h = (height + window_ - 1) / window_;
  const std::size_t out_w = (width + window_ - 1) / window_;

  Tensor out({n_batch, channels, out_h, out_w});
  argmax_.assign(out.size(), 0);
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < n_batch * channels; ++nc) {
    const std::size_t base = nc * height * width;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox, ++o) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_index = base + oy * window_ * width + ox * window_;
        for (std::size_t dy = 0; dy < window_; ++dy) {
          const std::size_t y = oy * window_ + dy;
          if (y >= height) break;
          for (std::size_t dx = 0; dx < window_; ++dx) {
            const std::size_t x = ox * window_ + dx;
            if (x >= width) break;
            const std::size_t index = base + y * width + x;
            if (input[index] > best) {
              best = input[index];
              best_index = index;
            }
          }
        }
        out[o] = best;
        argmax_[o] = best_index;
      }
    }
  }
  input_shape_ = input.shape();
  cached_ = true;
  return out;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
  if (!cached_) detail::backward_before_forward("MaxPool2d");
  if (grad_out.size() != argmax_.size()) {
    throw ShapeError("MaxPool2d::backward: gradient shape " + shape_string(grad_out.shape()) +
                     " does not match the cached output");
  }
  Tensor grad_in(input_shape_);
  for (std::size_t o = 0; o < argmax_.size(); ++o) grad_in[argmax_[o]] += grad_out[o];
  return grad_in;
}

std::string MaxPool2d::describe() const { return "MaxPool2d(" + std::to_string(window_) + ")"; }

}  // namespace colu::nn
