#include <cmath>

#include "colu/nn/layers.hpp"
#include "common.hpp"

namespace colu::nn {

BatchNorm2d::BatchNorm2d(std::size_t channels, double epsilon, double momentum)
    : channels_(channels),
      epsilon_(epsilon),
      momentum_(momentum),
      gamma_({channels}, 1.0),
      beta_({channels}, 0.0),
      gamma_grad_({channels}),
      beta_grad_({channels}),
      running_mean_({channels}, 0.0),
      running_var_({channels}, 1.0) {
  if (channels == 0) throw ArgumentError("BatchNorm2d: channel count must be positive");
  if (!(epsilon > 0.0)) throw ArgumentError("BatchNorm2d: epsilon must be positive");
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ArgumentError("BatchNorm2d: momentum must lie in [0, 1]");
}

Tensor BatchNorm2d::forward(const Tensor& input, ForwardContext& ctx) {
  require_rank(input, 4, "BatchNorm2d");
  if (input.dim(1) != channels_) {
    throw ShapeError("BatchNorm2d: expected " + std::to_string(channels_) + " channels, got shape " +
                     shape_string(input.shape()));
  }
  const std::size_t n_batch = input.dim(0);
  const std::size_t plane = input.dim(2) * input.dim(3);
  const std::size_t count = n_batch * plane;

  if (ctx.mode == Mode::Train && n_batch < 2) {
    throw UsageError("BatchNorm2d: train mode needs a batch of at least 2 samples");
  }

  Tensor out(input.shape());
  normalized_ = Tensor(input.shape());
  inv_std_.assign(channels_, 0.0);
  cached_mode_ = ctx.mode;

  for (std::size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (ctx.mode == Mode::Train) {
      // Fixed reduction order: n, then spatial.
      for (std::size_t n = 0; n < n_batch; ++n) {
        const double* src = input.data() + (n * channels_ + c) * plane;
        for (std::size_t p = 0; p < plane; ++p) mean += src[p];
      }
      mean /= static_cast<double>(count);
      for (std::size_t n = 0; n < n_batch; ++n) {
        const double* src = input.data() + (n * channels_ + c) * plane;
        for (std::size_t p = 0; p < plane; ++p) {
          const double d = src[p] - mean;
          var += d * d;
        }
      }
      var /= static_cast<double>(count);
      const double unbiased = count > 1 ? var * static_cast<double>(count) / static_cast<double>(count - 1) : var;
      running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
      running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + epsilon_);
    inv_std_[c] = inv_std;
    const double g = gamma_[c];
    const double b = beta_[c];
    for (std::size_t n = 0; n < n_batch; ++n) {
      const std::size_t base = (n * channels_ + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const double xhat = (input[base + p] - mean) * inv_std;
        normalized_[base + p] = xhat;
        out[base + p] = g * xhat + b;
      }
    }
  }
  cached_ = true;
  detail::debug_check_finite(out, "BatchNorm2d::forward");
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  if (!cached_) detail::backward_before_forward("BatchNorm2d");
  require_shape(grad_out, normalized_.shape(), "BatchNorm2d::backward");
  const std::size_t n_batch = grad_out.dim(0);
  const std::size_t plane = grad_out.dim(2) * grad_out.dim(3);
  const double count = static_cast<double>(n_batch * plane);

  Tensor grad_in(grad_out.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < n_batch; ++n) {
      const std::size_t base = (n * channels_ + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        sum_dy += grad_out[base + p];
        sum_dy_xhat += grad_out[base + p] * normalized_[base + p];
      }
    }
    gamma_grad_[c] = sum_dy_xhat;
    beta_grad_[c] = sum_dy;

    const double g = gamma_[c];
    const double inv_std = inv_std_[c];
    for (std::size_t n = 0; n < n_batch; ++n) {
      const std::size_t base = (n * channels_ + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        if (cached_mode_ == Mode::Train) {
          // Includes the coupling through the batch mean and variance.
          grad_in[base + p] = g * inv_std *
                              (grad_out[base + p] - sum_dy / count - normalized_[base + p] * sum_dy_xhat / count);
        } else {
          grad_in[base + p] = g * inv_std * grad_out[base + p];
        }
      }
    }
  }
  detail::debug_check_finite(grad_in, "BatchNorm2d::backward");
  return grad_in;
}

void BatchNorm2d::collect_parameters(std::vector<Param>& out, const std::string& prefix) {
  out.push_back({prefix + "scale", &gamma_, &gamma_grad_, ParamRole::Scale});
  out.push_back({prefix + "shift", &beta_, &beta_grad_, ParamRole::Shift});
}

void BatchNorm2d::collect_buffers(std::vector<Tensor*>& out) {
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

std::string BatchNorm2d::describe() const { return "BatchNorm2d(" + std::to_string(channels_) + ")"; }

}  // namespace colu::nn
