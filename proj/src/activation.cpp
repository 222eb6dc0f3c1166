#include "colu/activation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "colu/errors.hpp"

namespace colu::act {

namespace {

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": non-finite input " + std::to_string(x));
  }
}

// 1 - tanh(y)^2 without cancellation or overflow.
double sech2(double y) {
  const double e = std::exp(-2.0 * std::fabs(y));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

double colu_unchecked(double x) {
  if (x >= kColuUpper) return x;
  if (x <= kColuLower) return -std::exp(x);
  return x / (1.0 - x * std::exp(-(x + std::exp(x))));
}

double colu_prime_unchecked(double x) {
  if (x >= kColuUpper) return 1.0;
  if (x <= kColuLower) return -std::exp(x);
  const double ex = std::exp(x);
  const double a = std::exp(-ex);
  const double b = std::exp(-(x + ex));
  const double d = 1.0 - x * b;
  return (1.0 - x * x * (a + b)) / (d * d);
}

double sigmoid_unchecked(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_unchecked(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

// Shared-subexpression evaluation of value and slope. Functors without a
// `both` member fall back to the separate calls.
template <typename F>
void value_and_slope(const F& f, double x, double& v, double& d) {
  if constexpr (requires { f.both(x, v, d); }) {
    f.both(x, v, d);
  } else {
    v = f.value(x);
    d = f.slope(x);
  }
}

struct Relu {
  double value(double x) const { return x >= 0.0 ? x : 0.0; }
  double slope(double x) const { return x >= 0.0 ? 1.0 : 0.0; }
};

struct Colu {
  double value(double x) const { return colu_unchecked(x); }
  double slope(double x) const { return colu_prime_unchecked(x); }
  void both(double x, double& v, double& d) const {
    if (x >= kColuUpper || x <= kColuLower) {
      v = colu_unchecked(x);
      d = colu_prime_unchecked(x);
      return;
    }
    const double ex = std::exp(x);
    const double b = std::exp(-(x + ex));
    const double den = 1.0 - x * b;
    v = x / den;
    d = (1.0 - x * x * (std::exp(-ex) + b)) / (den * den);
  }
};

struct Swish {
  // x / (1 + e^{-x}): for x -> -inf the denominator becomes +inf and the
  // quotient a signed zero, never NaN.
  double value(double x) const { return x / (1.0 + std::exp(-x)); }
  double slope(double x) const {
    const double s = sigmoid_unchecked(x);
    return s + x * s * sigmoid_unchecked(-x);
  }
};

struct Sigmoid {
  double value(double x) const { return sigmoid_unchecked(x); }
  double slope(double x) const { return sigmoid_unchecked(x) * sigmoid_unchecked(-x); }
};

// x tanh(softplus(x)) == x((1+e^x)^2 - 1)/((1+e^x)^2 + 1).
struct Mish {
  double value(double x) const { return x * std::tanh(softplus_unchecked(x)); }
  double slope(double x) const {
    const double sp = softplus_unchecked(x);
    return std::tanh(sp) + x * sigmoid_unchecked(x) * sech2(sp);
  }
  void both(double x, double& v, double& d) const {
    const double sp = softplus_unchecked(x);
    const double t = std::tanh(sp);
    v = x * t;
    d = t + x * sigmoid_unchecked(x) * sech2(sp);
  }
};

struct Elu {
  double alpha;
  double value(double x) const { return x >= 0.0 ? x : alpha * std::expm1(x); }
  double slope(double x) const { return x >= 0.0 ? 1.0 : alpha * std::exp(x); }
};

struct Selu {
  double value(double x) const { return kSeluScale * (x >= 0.0 ? x : kSeluAlpha * std::expm1(x)); }
  double slope(double x) const { return kSeluScale * (x >= 0.0 ? 1.0 : kSeluAlpha * std::exp(x)); }
};

struct Tanh {
  double value(double x) const { return std::tanh(x); }
  double slope(double x) const { return sech2(x); }
};

struct Softplus {
  double value(double x) const { return softplus_unchecked(x); }
  double slope(double x) const { return sigmoid_unchecked(x); }
};

template <typename Visitor>
decltype(auto) dispatch(ActivationKind kind, Visitor&& visit) {
  switch (kind.tag()) {
    case Tag::CoLU: return visit(Colu{});
    case Tag::ReLU: return visit(Relu{});
    case Tag::Swish: return visit(Swish{});
    case Tag::Sigmoid: return visit(Sigmoid{});
    case Tag::Mish: return visit(Mish{});
    case Tag::ELU: return visit(Elu{kind.alpha()});
    case Tag::SELU: return visit(Selu{});
    case Tag::TanH: return visit(Tanh{});
    case Tag::Softplus: return visit(Softplus{});
  }
  throw ArgumentError("unknown activation tag");
}

void require_all_finite(std::span<const double> in, const char* fn) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!std::isfinite(in[i])) {
      throw DomainError(std::string(fn) + ": non-finite element at index " + std::to_string(i));
    }
  }
}

void require_same_size(std::span<const double> in, std::span<double> out, const char* fn) {
  if (in.size() != out.size()) {
    throw ShapeError(std::string(fn) + ": output size " + std::to_string(out.size()) +
                     " differs from input size " + std::to_string(in.size()));
  }
}

}  // namespace

ActivationKind ActivationKind::elu(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ArgumentError("ELU alpha must be positive and finite, got " + std::to_string(alpha));
  }
  ActivationKind kind(Tag::ELU);
  kind.alpha_ = alpha;
  return kind;
}

std::string_view tag_name(Tag tag) {
  switch (tag) {
    case Tag::CoLU: return "colu";
    case Tag::ReLU: return "relu";
    case Tag::Swish: return "swish";
    case Tag::Sigmoid: return "sigmoid";
    case Tag::Mish: return "mish";
    case Tag::ELU: return "elu";
    case Tag::SELU: return "selu";
    case Tag::TanH: return "tanh";
    case Tag::Softplus: return "softplus";
  }
  return "unknown";
}

std::string ActivationKind::name() const {
  std::string out(tag_name(tag_));
  if (tag_ == Tag::ELU && alpha_ != 1.0) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, alpha_);
    out += ':';
    out.append(buf, res.ptr);
  }
  return out;
}

std::optional<ActivationKind> parse_activation(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.rfind("elu:", 0) == 0) {
    double alpha = 0.0;
    const char* first = lower.data() + 4;
    const char* last = lower.data() + lower.size();
    auto res = std::from_chars(first, last, alpha);
    if (res.ec != std::errc() || res.ptr != last || !(alpha > 0.0)) return std::nullopt;
    return ActivationKind::elu(alpha);
  }
  for (Tag tag : kAllTags) {
    if (lower == tag_name(tag)) return ActivationKind(tag);
  }
  return std::nullopt;
}

double colu(double x) {
  require_finite(x, "colu");
  return colu_unchecked(x);
}

double colu_prime(double x) {
  require_finite(x, "colu_prime");
  return colu_prime_unchecked(x);
}

double sigmoid(double x) {
  require_finite(x, "sigmoid");
  return sigmoid_unchecked(x);
}

double softplus(double x) {
  require_finite(x, "softplus");
  return softplus_unchecked(x);
}

double eval(ActivationKind kind, double x) {
  require_finite(x, "eval");
  return dispatch(kind, [x](const auto& f) { return f.value(x); });
}

double derivative(ActivationKind kind, double x) {
  require_finite(x, "derivative");
  return dispatch(kind, [x](const auto& f) { return f.slope(x); });
}

void eval_into(ActivationKind kind, std::span<const double> in, std::span<double> out) {
  require_same_size(in, out, "eval_batch");
  require_all_finite(in, "eval_batch");
  dispatch(kind, [&](const auto& f) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f.value(in[i]);
  });
}

void derivative_into(ActivationKind kind, std::span<const double> in, std::span<double> out) {
  require_same_size(in, out, "derivative_batch");
  require_all_finite(in, "derivative_batch");
  dispatch(kind, [&](const auto& f) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f.slope(in[i]);
  });
}

void eval_and_derivative_into(ActivationKind kind, std::span<const double> in, std::span<double> values,
                              std::span<double> slopes) {
  require_same_size(in, values, "eval_batch");
  require_same_size(in, slopes, "derivative_batch");
  require_all_finite(in, "eval_batch");
  dispatch(kind, [&](const auto& f) {
    for (std::size_t i = 0; i < in.size(); ++i) value_and_slope(f, in[i], values[i], slopes[i]);
  });
}

Tensor eval_batch(ActivationKind kind, const Tensor& xs) {
  Tensor out(xs.shape());
  eval_into(kind, xs.values(), out.values());
  return out;
}

Tensor derivative_batch(ActivationKind kind, const Tensor& xs) {
  Tensor out(xs.shape());
  derivative_into(kind, xs.values(), out.values());
  return out;
}

}  // namespace colu::act
