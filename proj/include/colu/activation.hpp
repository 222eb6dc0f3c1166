#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "colu/tensor.hpp"

namespace colu::act {

enum class Tag { CoLU, ReLU, Swish, Sigmoid, Mish, ELU, SELU, TanH, Softplus };

inline constexpr std::array<Tag, 9> kAllTags = {Tag::CoLU, Tag::ReLU, Tag::Swish,
                                                Tag::Sigmoid, Tag::Mish, Tag::ELU,
                                                Tag::SELU, Tag::TanH, Tag::Softplus};

// SELU constants from the self-normalizing networks literature; fixed.
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluScale = 1.0507009873554805;

// CoLU switches to closed asymptotic forms outside [kColuLower, kColuUpper].
// Above: the correction e^{-(x+e^x)} is below 1e-9000, so f(x) == x exactly.
// Below: f(x) = -e^x (1 + O(e^x)), relative error < 1e-13.
inline constexpr double kColuUpper = 10.0;
inline constexpr double kColuLower = -30.0;

/// Identity of an activation function. Only ELU carries a parameter.
class ActivationKind {
 public:
  constexpr ActivationKind() = default;
  constexpr ActivationKind(Tag tag) : tag_(tag) {}  // NOLINT: implicit

  // Throws ArgumentError unless alpha > 0 and finite.
  static ActivationKind elu(double alpha);

  constexpr Tag tag() const { return tag_; }
  constexpr double alpha() const { return alpha_; }

  // Lower-case identifier, e.g. "colu", "elu".
  std::string name() const;

  friend constexpr bool operator==(const ActivationKind&, const ActivationKind&) = default;

 private:
  Tag tag_ = Tag::CoLU;
  double alpha_ = 1.0;
};

std::string_view tag_name(Tag tag);

// Accepts the lower-case names, case-insensitively; also "elu:<alpha>".
std::optional<ActivationKind> parse_activation(std::string_view text);

/// f(x) = x / (1 - x e^{-(x + e^x)}).
///
/// Evaluated directly on [-30, 10], where no intermediate overflows, and
/// by its asymptotes outside. Throws DomainError for non-finite x.
double colu(double x);

/// CoLU derivative. The textbook form lambda(lambda - x^2(e^x+1))/(lambda-x)^2
/// with lambda = e^{x+e^x} overflows once x exceeds ~6.57; dividing through by
/// lambda^2 gives
///
///   f'(x) = (1 - x^2 (e^{-e^x} + e^{-(x+e^x)})) / (1 - x e^{-(x+e^x)})^2
///
/// which is what is computed on [-30, 10].
double colu_prime(double x);

// Overflow-safe building blocks, exposed for tests and the nn layers.
double sigmoid(double x);
double softplus(double x);

double eval(ActivationKind kind, double x);

/// Analytic derivative of eval. ReLU, ELU and SELU return the right-hand
/// derivative at x == 0.
double derivative(ActivationKind kind, double x);

// Elementwise maps; out.size() must equal in.size(). Non-finite input raises
// DomainError naming the element index.
void eval_into(ActivationKind kind, std::span<const double> in, std::span<double> out);
void derivative_into(ActivationKind kind, std::span<const double> in, std::span<double> out);

// Both maps in one pass; each output is bit-identical to the separate calls.
void eval_and_derivative_into(ActivationKind kind, std::span<const double> in, std::span<double> values,
                              std::span<double> slopes);

Tensor eval_batch(ActivationKind kind, const Tensor& xs);
Tensor derivative_batch(ActivationKind kind, const Tensor& xs);

}  // namespace colu::act
