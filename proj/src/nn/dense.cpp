#include <cmath>

#include "colu/nn/layers.hpp"
#include "common.hpp"

namespace colu::nn {

using detail::ConstMatrixMap;
using detail::MatrixMap;

Dense::Dense(std::size_t in_features, std::size_t out_features)
    : in_features_(in_features),
      out_features_(out_features),
      weight_({out_features, in_features}),
      bias_({out_features}),
      weight_grad_({out_features, in_features}),
      bias_grad_({out_features}) {
  if (in_features == 0 || out_features == 0) throw ArgumentError("Dense: feature counts must be positive");
}

void Dense::initialize(Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_features_));
  for (double& w : weight_.values()) w = rng.uniform(-bound, bound);
  bias_.fill(0.0);
}

Tensor Dense::forward(const Tensor& input, ForwardContext& /*ctx*/) {
  require_rank(input, 2, "Dense");
  if (input.dim(1) != in_features_) {
    throw ShapeError("Dense: expected " + std::to_string(in_features_) + " input features, got shape " +
                     shape_string(input.shape()));
  }
  const auto rows = static_cast<Eigen::Index>(input.dim(0));
  const auto in_n = static_cast<Eigen::Index>(in_features_);
  const auto out_n = static_cast<Eigen::Index>(out_features_);
  input_ = input;

  Tensor out({input.dim(0), out_features_});
  const ConstMatrixMap x(input.data(), rows, in_n);
  const ConstMatrixMap w(weight_.data(), out_n, in_n);
  MatrixMap y(out.data(), rows, out_n);
  y.noalias() = x * w.transpose();
  const Eigen::Map<const Eigen::RowVectorXd> b(bias_.data(), out_n);
  y.rowwise() += b;
  detail::debug_check_finite(out, "Dense::forward");
  return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
  if (!input_) detail::backward_before_forward("Dense");
  const Tensor& input = *input_;
  require_shape(grad_out, {input.dim(0), out_features_}, "Dense::backward");
  const auto rows = static_cast<Eigen::Index>(input.dim(0));
  const auto in_n = static_cast<Eigen::Index>(in_features_);
  const auto out_n = static_cast<Eigen::Index>(out_features_);

  const ConstMatrixMap x(input.data(), rows, in_n);
  const ConstMatrixMap g(grad_out.data(), rows, out_n);
  const ConstMatrixMap w(weight_.data(), out_n, in_n);
  MatrixMap dw(weight_grad_.data(), out_n, in_n);
  dw.noalias() = g.transpose() * x;
  Eigen::Map<Eigen::RowVectorXd> db(bias_grad_.data(), out_n);
  db = g.colwise().sum();

  Tensor grad_in(input.shape());
  MatrixMap dx(grad_in.data(), rows, in_n);
  dx.noalias() = g * w;
  return grad_in;
}

void Dense::collect_parameters(std::vector<Param>& out, const std::string& prefix) {
  out.push_back({prefix + "weight", &weight_, &weight_grad_, ParamRole::Weight});
  out.push_back({prefix + "bias", &bias_, &bias_grad_, ParamRole::Bias});
}

std::string Dense::describe() const {
  return "Dense(" + std::to_string(in_features_) + "->" + std::to_string(out_features_) + ")";
}

}  // namespace colu::nn
