#include "colu/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "colu/errors.hpp"

namespace colu::nn {

namespace {

void check_inputs(const Tensor& logits, std::span<const std::uint8_t> labels) {
  require_rank(logits, 2, "softmax_cross_entropy");
  if (labels.size() != logits.dim(0)) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(logits.dim(0)) + " rows");
  }
  const std::size_t classes = logits.dim(1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) {
      throw ArgumentError("softmax_cross_entropy: label " + std::to_string(labels[i]) + " at row " +
                          std::to_string(i) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

// Returns log-sum-exp of the row and writes exp(z - max) into `scratch`.
double row_logsumexp(const double* row, std::size_t k, double* scratch) {
  const double m = *std::max_element(row, row + k);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    scratch[j] = std::exp(row[j] - m);
    sum += scratch[j];
  }
  return m + std::log(sum);
}

}  // namespace

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels) {
  check_inputs(logits, labels);
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  LossResult result{0.0, Tensor(logits.shape())};
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> scratch(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * k;
    const double lse = row_logsumexp(row, k, scratch.data());
    result.loss += lse - row[labels[i]];
    double* g = result.grad_logits.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) g[j] = std::exp(row[j] - lse) * inv_n;
    g[labels[i]] -= inv_n;
  }
  result.loss *= inv_n;
  return result;
}

std::vector<double> per_sample_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels) {
  check_inputs(logits, labels);
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  std::vector<double> out(n);
  std::vector<double> scratch(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * k;
    out[i] = row_logsumexp(row, k, scratch.data()) - row[labels[i]];
  }
  return out;
}

L2Result l2_penalty(const std::vector<Param>& params, double factor) {
  if (!(factor >= 0.0)) throw ArgumentError("l2_penalty: factor must be non-negative");
  L2Result result{0.0, {}};
  result.grads.reserve(params.size());
  for (const auto& p : params) {
    Tensor g(p.value->shape());
    if (p.role == ParamRole::Weight) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = (*p.value)[i];
        result.loss += w * w;
        g[i] = 2.0 * factor * w;
      }
    }
    result.grads.push_back(std::move(g));
  }
  result.loss *= factor;
  return result;
}

double add_l2_gradients(const std::vector<Param>& params, double factor) {
  if (!(factor >= 0.0)) throw ArgumentError("l2_penalty: factor must be non-negative");
  if (factor == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& p : params) {
    if (p.role != ParamRole::Weight) continue;
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const double w = (*p.value)[i];
      sum += w * w;
      (*p.grad)[i] += 2.0 * factor * w;
    }
  }
  return factor * sum;
}

}  // namespace colu::nn
