#pragma once

#include <Eigen/Core>
#include <cassert>

#include "colu/errors.hpp"
#include "colu/tensor.hpp"

namespace colu::nn::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

inline void debug_check_finite([[maybe_unused]] const Tensor& t, [[maybe_unused]] const char* where) {
#ifndef NDEBUG
  assert(t.all_finite() && where);
#endif
}

[[noreturn]] inline void backward_before_forward(const char* layer) {
  throw UsageError(std::string(layer) + ": backward called without a cached forward pass");
}

}  // namespace colu::nn::detail
