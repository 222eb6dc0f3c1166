#include "colu/nn/architectures.hpp"

#include <algorithm>
#include <cmath>

#include "colu/errors.hpp"

namespace colu::nn {

namespace {

std::size_t scaled(std::size_t width, double mult) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(width) * mult)));
}

std::size_t pooled(std::size_t extent, std::size_t window = 2) { return (extent + window - 1) / window; }

void check_options(const ArchOptions& o) {
  if (o.in_channels == 0 || o.image_size == 0 || o.n_classes == 0) {
    throw ArgumentError("architecture: channels, image size and class count must be positive");
  }
  if (!(o.width_mult > 0.0)) throw ArgumentError("architecture: width multiplier must be positive");
}

// conv -> batchnorm -> activation, appended to `out`.
template <typename Sink>
void conv_block(Sink&& add, Rng& rng, std::size_t in, std::size_t out, act::ActivationKind activation) {
  auto conv = std::make_unique<Conv2d>(in, out, 3);
  conv->initialize(rng);
  add(std::move(conv));
  add(std::make_unique<BatchNorm2d>(out));
  add(std::make_unique<Activation>(activation));
}

std::unique_ptr<ResidualGroup> residual(Rng& rng, std::size_t width, act::ActivationKind activation) {
  auto group = std::make_unique<ResidualGroup>();
  auto sink = [&](LayerPtr layer) { group->add(std::move(layer)); };
  conv_block(sink, rng, width, width, activation);
  auto conv = std::make_unique<Conv2d>(width, width, 3);
  conv->initialize(rng);
  group->add(std::move(conv));
  group->add(std::make_unique<BatchNorm2d>(width));
  return group;
}

void add_dense(Network& net, Rng& rng, std::size_t in, std::size_t out) {
  net.emplace<Dense>(in, out).initialize(rng);
}

}  // namespace

Network build_depth_sweep_cnn(std::size_t n_conv, act::ActivationKind activation, const ArchOptions& options) {
  if (n_conv < 1) throw ArgumentError("build_depth_sweep_cnn: need at least one conv layer");
  check_options(options);
  static constexpr std::size_t kWidths[] = {32, 64, 128, 128};

  Rng rng(options.seed, streams::kInit);
  Network net;
  net.seed_dropout(options.seed);
  auto sink = [&](LayerPtr layer) { net.add(std::move(layer)); };

  std::size_t channels = options.in_channels;
  std::size_t extent = options.image_size;
  for (std::size_t i = 0; i < n_conv; ++i) {
    const std::size_t width = scaled(i < 4 ? kWidths[i] : 128, options.width_mult);
    conv_block(sink, rng, channels, width, activation);
    channels = width;
    if (i < kSweepMaxPools) {
      net.emplace<MaxPool2d>(2);
      net.emplace<Dropout>(kSweepDropout);
      extent = pooled(extent);
    }
  }
  net.emplace<Flatten>();
  add_dense(net, rng, channels * extent * extent, options.n_classes);
  return net;
}

Network build_small_cnn8(act::ActivationKind activation, const ArchOptions& options) {
  return build_depth_sweep_cnn(8, activation, options);
}

Network build_vgg13(act::ActivationKind activation, const ArchOptions& options) {
  check_options(options);
  static constexpr std::size_t kStages[5] = {64, 128, 256, 512, 512};

  Rng rng(options.seed, streams::kInit);
  Network net;
  net.seed_dropout(options.seed);
  auto sink = [&](LayerPtr layer) { net.add(std::move(layer)); };

  std::size_t channels = options.in_channels;
  std::size_t extent = options.image_size;
  for (std::size_t width_full : kStages) {
    const std::size_t width = scaled(width_full, options.width_mult);
    conv_block(sink, rng, channels, width, activation);
    conv_block(sink, rng, width, width, activation);
    channels = width;
    net.emplace<MaxPool2d>(2);
    extent = pooled(extent);
  }
  const std::size_t hidden = scaled(4096, options.width_mult);
  net.emplace<Flatten>();
  add_dense(net, rng, channels * extent * extent, hidden);
  net.emplace<Activation>(activation);
  add_dense(net, rng, hidden, hidden);
  net.emplace<Activation>(activation);
  add_dense(net, rng, hidden, options.n_classes);
  return net;
}

Network build_resnet9(act::ActivationKind activation, const ArchOptions& options) {
  check_options(options);
  Rng rng(options.seed, streams::kInit);
  Network net;
  net.seed_dropout(options.seed);
  auto sink = [&](LayerPtr layer) { net.add(std::move(layer)); };
  const double m = options.width_mult;

  std::size_t extent = options.image_size;
  conv_block(sink, rng, options.in_channels, scaled(64, m), activation);
  conv_block(sink, rng, scaled(64, m), scaled(128, m), activation);
  net.emplace<MaxPool2d>(2);
  extent = pooled(extent);
  net.add(residual(rng, scaled(128, m), activation));
  conv_block(sink, rng, scaled(128, m), scaled(256, m), activation);
  net.emplace<MaxPool2d>(2);
  extent = pooled(extent);
  conv_block(sink, rng, scaled(256, m), scaled(512, m), activation);
  net.emplace<MaxPool2d>(2);
  extent = pooled(extent);
  net.add(residual(rng, scaled(512, m), activation));
  net.emplace<MaxPool2d>(extent);
  net.emplace<Flatten>();
  add_dense(net, rng, scaled(512, m), options.n_classes);
  return net;
}

}  // namespace colu::nn
