#include <algorithm>
#include <cmath>
#include <cstring>

#include "colu/nn/layers.hpp"
#include "common.hpp"

namespace colu::nn {

using detail::ConstMatrixMap;
using detail::MatrixMap;
using detail::RowMatrix;

namespace {

// Column matrix (C*k*k, N*H*W), row-major. Row (c, ki, kj) holds the input
// shifted by (ki - pad, kj - pad) for every (n, y, x).
void im2col(const Tensor& input, std::size_t kernel, std::vector<double>& cols) {
  const std::size_t n_batch = input.dim(0), channels = input.dim(1), height = input.dim(2), width = input.dim(3);
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const std::size_t plane = height * width;
  const std::size_t row_len = n_batch * plane;
  cols.assign(channels * kernel * kernel * row_len, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ki = 0; ki < kernel; ++ki) {
      for (std::size_t kj = 0; kj < kernel; ++kj) {
        double* row = cols.data() + ((c * kernel + ki) * kernel + kj) * row_len;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ki) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kj) - pad;
        for (std::size_t n = 0; n < n_batch; ++n) {
          const double* src = input.data() + (n * channels + c) * plane;
          double* dst = row + n * plane;
          for (std::size_t y = 0; y < height; ++y) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) + dy;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) continue;
            const std::ptrdiff_t x_begin = std::max<std::ptrdiff_t>(0, -dx);
            const std::ptrdiff_t x_end = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(width),
                                                                  static_cast<std::ptrdiff_t>(width) - dx);
            for (std::ptrdiff_t x = x_begin; x < x_end; ++x) {
              dst[y * width + static_cast<std::size_t>(x)] = src[static_cast<std::size_t>(iy) * width + static_cast<std::size_t>(x + dx)];
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into an (N, C, H, W) tensor.
void col2im(const RowMatrix& cols, std::size_t kernel, Tensor& grad_in) {
  const std::size_t n_batch = grad_in.dim(0), channels = grad_in.dim(1), height = grad_in.dim(2), width = grad_in.dim(3);
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ki = 0; ki < kernel; ++ki) {
      for (std::size_t kj = 0; kj < kernel; ++kj) {
        const double* row = cols.data() + ((c * kernel + ki) * kernel + kj) * cols.cols();
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ki) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kj) - pad;
        for (std::size_t n = 0; n < n_batch; ++n) {
          const double* src = row + n * plane;
          double* dst = grad_in.data() + (n * channels + c) * plane;
          for (std::size_t y = 0; y < height; ++y) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) + dy;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) continue;
            const std::ptrdiff_t x_begin = std::max<std::ptrdiff_t>(0, -dx);
            const std::ptrdiff_t x_end = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(width),
                                                                  static_cast<std::ptrdiff_t>(width) - dx);
            for (std::ptrdiff_t x = x_begin; x < x_end; ++x) {
              dst[static_cast<std::size_t>(iy) * width + static_cast<std::size_t>(x + dx)] += src[y * width + static_cast<std::size_t>(x)];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      weight_({out_channels, in_channels, kernel, kernel}),
      bias_({out_channels}),
      weight_grad_({out_channels, in_channels, kernel, kernel}),
      bias_grad_({out_channels}) {
  if (in_channels == 0 || out_channels == 0 || kernel == 0 || kernel % 2 == 0) {
    throw ArgumentError("Conv2d: channels must be positive and the kernel odd");
  }
}

void Conv2d::initialize(Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_channels_ * kernel_ * kernel_));
  for (double& w : weight_.values()) w = rng.uniform(-bound, bound);
  bias_.fill(0.0);
}

Tensor Conv2d::forward(const Tensor& input, ForwardContext& /*ctx*/) {
  require_rank(input, 4, "Conv2d");
  if (input.dim(1) != in_channels_) {
    throw ShapeError("Conv2d: expected " + std::to_string(in_channels_) + " input channels, got shape " +
                     shape_string(input.shape()));
  }
  const std::size_t n_batch = input.dim(0), height = input.dim(2), width = input.dim(3);
  const std::size_t plane = height * width;
  const std::size_t depth = in_channels_ * kernel_ * kernel_;

  im2col(input, kernel_, columns_);
  input_shape_ = input.shape();
  cached_ = true;

  const ConstMatrixMap cols(columns_.data(), static_cast<Eigen::Index>(depth), static_cast<Eigen::Index>(n_batch * plane));
  const ConstMatrixMap w(weight_.data(), static_cast<Eigen::Index>(out_channels_), static_cast<Eigen::Index>(depth));
  const RowMatrix product = w * cols;

  Tensor out({n_batch, out_channels_, height, width});
  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t co = 0; co < out_channels_; ++co) {
      const double* src = product.data() + co * product.cols() + n * plane;
      double* dst = out.data() + (n * out_channels_ + co) * plane;
      const double b = bias_[co];
      for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] + b;
    }
  }
  detail::debug_check_finite(out, "Conv2d::forward");
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  if (!cached_) detail::backward_before_forward("Conv2d");
  const std::size_t n_batch = input_shape_[0], height = input_shape_[2], width = input_shape_[3];
  require_shape(grad_out, {n_batch, out_channels_, height, width}, "Conv2d::backward");
  const std::size_t plane = height * width;
  const std::size_t depth = in_channels_ * kernel_ * kernel_;
  const auto cols_n = static_cast<Eigen::Index>(n_batch * plane);

  RowMatrix g(static_cast<Eigen::Index>(out_channels_), cols_n);
  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t co = 0; co < out_channels_; ++co) {
      std::memcpy(g.data() + co * g.cols() + n * plane, grad_out.data() + (n * out_channels_ + co) * plane,
                  plane * sizeof(double));
    }
  }

  const ConstMatrixMap cols(columns_.data(), static_cast<Eigen::Index>(depth), cols_n);
  const ConstMatrixMap w(weight_.data(), static_cast<Eigen::Index>(out_channels_), static_cast<Eigen::Index>(depth));
  MatrixMap dw(weight_grad_.data(), static_cast<Eigen::Index>(out_channels_), static_cast<Eigen::Index>(depth));
  dw.noalias() = g * cols.transpose();
  for (std::size_t co = 0; co < out_channels_; ++co) bias_grad_[co] = g.row(static_cast<Eigen::Index>(co)).sum();

  const RowMatrix dcols = w.transpose() * g;
  Tensor grad_in(input_shape_);
  col2im(dcols, kernel_, grad_in);
  detail::debug_check_finite(grad_in, "Conv2d::backward");
  return grad_in;
}

void Conv2d::collect_parameters(std::vector<Param>& out, const std::string& prefix) {
  out.push_back({prefix + "weight", &weight_, &weight_grad_, ParamRole::Weight});
  out.push_back({prefix + "bias", &bias_, &bias_grad_, ParamRole::Bias});
}

std::string Conv2d::describe() const {
  return "Conv2d(" + std::to_string(in_channels_) + "->" + std::to_string(out_channels_) + ", k=" +
         std::to_string(kernel_) + ")";
}

}  // namespace colu::nn
