#pragma once

#include <cstdint>

#include "colu/activation.hpp"
#include "colu/nn/network.hpp"

namespace colu::nn {

struct ArchOptions {
  std::size_t in_channels = 1;
  std::size_t image_size = 28;  // square inputs
  std::size_t n_classes = 10;
  double width_mult = 1.0;      // scales every hidden width, minimum 1
  std::uint64_t seed = 0;       // He-uniform initialization stream
};

inline constexpr double kSweepDropout = 0.25;
inline constexpr std::size_t kSweepMaxPools = 4;

/// n_conv blocks of conv3x3 -> batchnorm -> activation. Blocks 1..4 are each
/// followed by maxpool 2x2 and dropout 0.25. Widths 32, 64, 128, 128, then
/// 128 for every deeper block. Ends in flatten -> dense(n_classes).
Network build_depth_sweep_cnn(std::size_t n_conv, act::ActivationKind activation, const ArchOptions& options = {});

// The 8-conv member of the sweep family.
Network build_small_cnn8(act::ActivationKind activation, const ArchOptions& options = {});

/// VGG-13: conv stages (64,64) (128,128) (256,256) (512,512) (512,512), each
/// conv followed by batchnorm and activation, a 2x2 pool after every stage,
/// then dense(4096) -> act -> dense(4096) -> act -> dense(n_classes).
/// Expects 32x32 input (pad 28x28 images first).
Network build_vgg13(act::ActivationKind activation, const ArchOptions& options);

/// ResNet-9: conv64 -> conv128+pool -> res(128) -> conv256+pool ->
/// conv512+pool -> res(512) -> global max pool -> dense(n_classes).
/// Each residual group is conv-bn-act-conv-bn added to its input, so the
/// group is the identity when its parameters are zero.
Network build_resnet9(act::ActivationKind activation, const ArchOptions& options);

}  // namespace colu::nn
