#include <chrono>
#include <cmath>
#include <numeric>

#include "colu/errors.hpp"
#include "colu/experiments.hpp"
#include "colu/nn/architectures.hpp"
#include "colu/nn/loss.hpp"

namespace colu::exp {

namespace {
constexpr std::size_t kVggSide = 32;
}

TrainConfig protocol_config(ArchKind arch) {
  TrainConfig config;
  config.arch.kind = arch;
  config.sgd = optim::SgdConfig{};
  switch (arch) {
    case ArchKind::DepthSweep:
    case ArchKind::SmallCnn8:
      config.batch_size = 64;
      config.epochs = 30;
      config.dataset.kind = DatasetKind::Mnist;
      break;
    case ArchKind::Vgg13:
      config.batch_size = 64;
      config.epochs = 100;
      config.dataset.kind = DatasetKind::FashionMnist;
      break;
    case ArchKind::Resnet9:
      config.batch_size = 400;
      config.epochs = 100;
      config.augment = true;
      config.dataset.kind = DatasetKind::Cifar10;
      break;
  }
  return config;
}

std::string dataset_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Mnist: return "mnist";
    case DatasetKind::FashionMnist: return "fashion";
    case DatasetKind::Cifar10: return "cifar10";
    case DatasetKind::Synthetic: return "synthetic";
  }
  return "unknown";
}

std::string arch_name(const Architecture& arch) {
  switch (arch.kind) {
    case ArchKind::DepthSweep: return "depth_sweep(" + std::to_string(arch.n_conv) + ")";
    case ArchKind::SmallCnn8: return "small_cnn8";
    case ArchKind::Vgg13: return "vgg13";
    case ArchKind::Resnet9: return "resnet9";
  }
  return "unknown";
}

Splits load_splits(const TrainConfig& config) {
  const DatasetSpec& spec = config.dataset;
  Splits splits;
  switch (spec.kind) {
    case DatasetKind::Synthetic:
      splits.train = data::synthetic_dataset(config.seed, spec.synthetic_train);
      // The test split comes from a disjoint seed family.
      splits.test = data::synthetic_dataset(~config.seed, spec.synthetic_test);
      break;
    case DatasetKind::Mnist:
    case DatasetKind::FashionMnist:
      splits.train = data::load_mnist_like(spec.data_dir, data::Split::Train, dataset_name(spec.kind));
      splits.test = data::load_mnist_like(spec.data_dir, data::Split::Test, dataset_name(spec.kind));
      break;
    case DatasetKind::Cifar10:
      splits.train = data::load_cifar10_split(spec.data_dir, data::Split::Train);
      splits.test = data::load_cifar10_split(spec.data_dir, data::Split::Test);
      break;
  }
  if (spec.subset > 0 && spec.kind != DatasetKind::Synthetic) {
    splits.train = data::subset(splits.train, std::min(spec.subset, splits.train.size()), config.seed);
  }
  if (spec.test_subset > 0) {
    splits.test = data::subset(splits.test, std::min(spec.test_subset, splits.test.size()), config.seed);
  }
  if (config.arch.kind == ArchKind::Vgg13 && splits.train.height() < kVggSide) {
    splits.train = data::pad_images(splits.train, kVggSide);
    splits.test = data::pad_images(splits.test, kVggSide);
  }
  return splits;
}

nn::Network build_network(const TrainConfig& config, std::size_t in_channels, std::size_t image_size) {
  nn::ArchOptions options;
  options.in_channels = in_channels;
  options.image_size = image_size;
  options.n_classes = data::kNumClasses;
  options.width_mult = config.arch.width_mult;
  options.seed = config.seed;
  switch (config.arch.kind) {
    case ArchKind::DepthSweep: return nn::build_depth_sweep_cnn(config.arch.n_conv, config.activation, options);
    case ArchKind::SmallCnn8: return nn::build_small_cnn8(config.activation, options);
    case ArchKind::Vgg13: return nn::build_vgg13(config.activation, options);
    case ArchKind::Resnet9: return nn::build_resnet9(config.activation, options);
  }
  throw ConfigError("unknown architecture");
}

void validate(const TrainConfig& config, const data::Dataset& sample) {
  if (config.batch_size < 2) throw ConfigError("batch size must be at least 2 (batch normalization)");
  if (config.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (config.arch.kind == ArchKind::DepthSweep && config.arch.n_conv < 1) {
    throw ConfigError("depth sweep needs at least one conv layer");
  }
  if (!(config.arch.width_mult > 0.0)) throw ConfigError("width multiplier must be positive");
  try {
    optim::validate(config.sgd);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (sample.size() < 2) throw ConfigError("dataset needs at least two samples");
  if (sample.height() != sample.width()) throw ConfigError("architectures expect square images");
  if (config.augment && (sample.channels() != 3 || sample.height() != data::kCifarSide)) {
    throw ConfigError("augmentation needs 3x32x32 images, dataset has " + shape_string(sample.images.shape()));
  }
  if (config.arch.kind == ArchKind::Vgg13 && sample.height() < 32) {
    throw ConfigError("VGG-13 needs images of at least 32x32 (pad first)");
  }
}

EvalResult score_logits(const Tensor& logits, std::span<const std::uint8_t> labels) {
  if (labels.empty()) throw ArgumentError("evaluate: empty dataset");
  const auto losses = nn::per_sample_cross_entropy(logits, labels);
  const std::size_t k = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double* row = logits.data() + i * k;
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (row[j] > row[best]) best = j;
    }
    if (best == labels[i]) ++correct;
  }
  EvalResult result;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  result.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(labels.size());
  return result;
}

EvalResult evaluate(nn::Network& net, const data::Dataset& dataset, std::size_t batch) {
  if (dataset.size() == 0) throw ArgumentError("evaluate: empty dataset");
  if (batch == 0) throw ArgumentError("evaluate: batch must be positive");
  const nn::Mode previous = net.mode();
  net.set_mode(nn::Mode::Eval);
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t first = 0; first < dataset.size(); first += batch) {
    const std::size_t count = std::min(batch, dataset.size() - first);
    const Tensor logits = net.forward(dataset.images.slice(first, count));
    const std::span<const std::uint8_t> labels(dataset.labels.data() + first, count);
    const EvalResult part = score_logits(logits, labels);
    correct += static_cast<std::size_t>(std::lround(part.accuracy * static_cast<double>(count)));
    loss_sum += part.loss * static_cast<double>(count);
  }
  net.set_mode(previous);
  return {static_cast<double>(correct) / static_cast<double>(dataset.size()),
          loss_sum / static_cast<double>(dataset.size())};
}

TrainReport train(const TrainConfig& config, const data::Dataset& train_set, const data::Dataset& test_set,
                  nn::Network* trained, const EpochCallback& on_epoch) {
  validate(config, train_set);
  if (test_set.size() == 0) throw ConfigError("test split is empty");
  if (test_set.images.shape().size() != 4 || test_set.channels() != train_set.channels() ||
      test_set.height() != train_set.height() || test_set.width() != train_set.width()) {
    throw ConfigError("train and test images differ in shape");
  }

  nn::Network net = build_network(config, train_set.channels(), train_set.height());
  net.seed_dropout(config.seed);
  {
    // Shape probe so incompatibilities surface before any training work.
    nn::Network probe = build_network(config, train_set.channels(), train_set.height());
    probe.set_mode(nn::Mode::Eval);
    try {
      const Tensor out = probe.forward(train_set.images.slice(0, 1));
      if (out.shape() != Shape{1, data::kNumClasses}) throw ShapeError("unexpected output " + shape_string(out.shape()));
    } catch (const ShapeError& e) {
      throw ConfigError(std::string("architecture does not fit the dataset: ") + e.what());
    }
  }

  std::vector<nn::Param> params = net.parameters();
  optim::OptState state = optim::make_state(params);
  Rng shuffle_rng(config.seed, streams::kShuffle);
  Rng augment_rng(config.seed, streams::kAugment);

  TrainReport report;
  report.config = config;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t seen = 0;
    net.set_mode(nn::Mode::Train);
    for (std::size_t first = 0; first + 2 <= order.size(); first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      if (count < 2) break;
      data::Dataset batch = data::gather(train_set, std::span<const std::size_t>(order.data() + first, count));
      if (config.augment) batch.images = data::augment_cifar_batch(batch.images, augment_rng);

      const Tensor logits = net.forward(batch.images);
      nn::LossResult loss = nn::softmax_cross_entropy(logits, batch.labels);
      net.backward(loss.grad_logits);
      const double penalty = nn::add_l2_gradients(params, config.sgd.l2_factor);
      optim::sgd_step(params, state, config.sgd);

      loss_sum += (loss.loss + penalty) * static_cast<double>(count);
      seen += count;
    }

    EpochRecord record;
    record.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    const EvalResult test = evaluate(net, test_set);
    record.test_accuracy = test.accuracy;
    record.test_loss = test.loss;
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(record);
    if (on_epoch) on_epoch(epoch, record);
  }
  report.final_accuracy = report.epochs.back().test_accuracy;
  report.final_loss = report.epochs.back().test_loss;
  if (trained) *trained = std::move(net);
  return report;
}

TrainReport train(const TrainConfig& config, const EpochCallback& on_epoch) {
  const Splits splits = load_splits(config);
  return train(config, splits.train, splits.test, nullptr, on_epoch);
}

}  // namespace colu::exp
