#pragma once

// Oracles shared by the unit tests and the acceptance runner. Nothing here
// calls back into the code under test except through the public layer and
// network interfaces being checked.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "colu/nn/loss.hpp"
#include "colu/nn/network.hpp"
#include "colu/rng.hpp"
#include "colu/tensor.hpp"

namespace colu::testing {

// Distance in units in the last place between two finite doubles.
inline std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  auto ordered = [](double v) {
    const auto bits = std::bit_cast<std::int64_t>(v);
    return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
  };
  const std::int64_t ia = ordered(a), ib = ordered(b);
  return ia > ib ? static_cast<std::uint64_t>(ia) - static_cast<std::uint64_t>(ib)
                 : static_cast<std::uint64_t>(ib) - static_cast<std::uint64_t>(ia);
}

// Extended-precision (x87 80-bit) reference forms, written straight from the
// defining formulas.
inline long double colu_ld(long double x) { return x / (1.0L - x * std::exp(-(x + std::exp(x)))); }
inline long double swish_ld(long double x) { return x / (1.0L + std::exp(-x)); }

// f'(x) = lambda (lambda - x^2 (e^x + 1)) / (lambda - x)^2, lambda = e^{x + e^x}.
inline long double colu_prime_lambda_ld(long double x) {
  const long double lambda = std::exp(x + std::exp(x));
  return lambda * (lambda - x * x * (std::exp(x) + 1.0L)) / ((lambda - x) * (lambda - x));
}

inline double colu_prime_lambda(double x) {
  const double lambda = std::exp(x + std::exp(x));
  return lambda * (lambda - x * x * (std::exp(x) + 1.0)) / ((lambda - x) * (lambda - x));
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// |a - n| / max(1, |a|, |n|): relative for large gradients, absolute near zero.
inline double scaled_error(double analytic, double numeric) {
  return std::fabs(analytic - numeric) / std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
}

struct GradCheck {
  double max_error = 0.0;
  std::size_t checked = 0;
  std::string worst;

  void record(double analytic, double numeric, const std::string& where) {
    const double e = scaled_error(analytic, numeric);
    ++checked;
    if (e >= max_error) {
      max_error = e;
      worst = where + " analytic=" + std::to_string(analytic) + " numeric=" + std::to_string(numeric);
    }
  }
};

// Indices to probe in a tensor of `size` elements: all of them when
// `limit` is 0 or covers the tensor, otherwise `limit` distinct seeded picks.
inline std::vector<std::size_t> probe_indices(std::size_t size, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  if (limit == 0 || limit >= size) return idx;
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Central differences of `loss` with respect to every probed coordinate of
// `target`, compared to `analytic` (same shape).
inline void compare_coordinates(GradCheck& check, Tensor& target, const Tensor& analytic,
                                const std::function<double()>& loss, double h, std::size_t limit, Rng& rng,
                                const std::string& label) {
  for (std::size_t i : probe_indices(target.size(), limit, rng)) {
    const double saved = target[i];
    target[i] = saved + h;
    const double up = loss();
    target[i] = saved - h;
    const double down = loss();
    target[i] = saved;
    check.record(analytic[i], (up - down) / (2.0 * h), label + "[" + std::to_string(i) + "]");
  }
}

// Whole-layer check with loss = sum(forward(x) * r) for a fixed random r.
inline GradCheck check_layer(nn::Layer& layer, Tensor input, nn::Mode mode, double h, Rng& rng,
                             std::size_t limit = 0) {
  Rng dropout_rng(1, streams::kDropout);
  nn::ForwardContext ctx{mode, &dropout_rng};
  const Tensor out0 = layer.forward(input, ctx);
  const Tensor r = random_tensor(out0.shape(), rng);
  const Tensor grad_in = layer.backward(r);
  std::vector<nn::Param> params;
  layer.collect_parameters(params, "");
  std::vector<Tensor> grads;
  for (const auto& p : params) grads.push_back(*p.grad);

  auto loss = [&]() {
    const Tensor out = layer.forward(input, ctx);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * r[i];
    return s;
  };
  GradCheck check;
  compare_coordinates(check, input, grad_in, loss, h, limit, rng, "input");
  for (std::size_t k = 0; k < params.size(); ++k) {
    compare_coordinates(check, *params[k].value, grads[k], loss, h, limit, rng, params[k].name);
  }
  return check;
}

// Network check under mean softmax cross-entropy. Dropout masks must be
// frozen by the caller; train mode is used so batchnorm couples the batch.
inline GradCheck check_network(nn::Network& net, Tensor input, const std::vector<std::uint8_t>& labels, double h,
                               Rng& rng, std::size_t limit = 0) {
  net.set_mode(nn::Mode::Train);
  const Tensor logits = net.forward(input);
  const auto res = nn::softmax_cross_entropy(logits, labels);
  const Tensor grad_in = net.backward(res.grad_logits);
  auto params = net.parameters();
  std::vector<Tensor> grads;
  for (const auto& p : params) grads.push_back(*p.grad);

  auto loss = [&]() { return nn::softmax_cross_entropy(net.forward(input), labels).loss; };
  GradCheck check;
  compare_coordinates(check, input, grad_in, loss, h, limit, rng, "input");
  for (std::size_t k = 0; k < params.size(); ++k) {
    compare_coordinates(check, *params[k].value, grads[k], loss, h, limit, rng, params[k].name);
  }
  return check;
}

}  // namespace colu::testing
