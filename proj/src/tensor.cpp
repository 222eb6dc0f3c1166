#include "colu/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "colu/errors.hpp"

namespace colu {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::from(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

Tensor Tensor::slice(std::size_t first, std::size_t count) const {
  if (shape_.empty() || first + count > shape_[0]) {
    throw ShapeError("slice out of range for " + shape_string(shape_));
  }
  const std::size_t row = data_.size() / std::max<std::size_t>(shape_[0], 1);
  Shape out_shape = shape_;
  out_shape[0] = count;
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(first * row),
                          data_.begin() + static_cast<std::ptrdiff_t>((first + count) * row));
  return Tensor(std::move(out_shape), std::move(out));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw ShapeError(std::string(what) + ": expected shape " + shape_string(expected) + ", got " +
                     shape_string(t.shape()));
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     shape_string(t.shape()));
  }
}

}  // namespace colu
