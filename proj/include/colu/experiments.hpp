#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "colu/activation.hpp"
#include "colu/data.hpp"
#include "colu/nn/network.hpp"
#include "colu/optim.hpp"

namespace colu::exp {

enum class ArchKind { DepthSweep, SmallCnn8, Vgg13, Resnet9 };

struct Architecture {
  ArchKind kind = ArchKind::SmallCnn8;
  std::size_t n_conv = 8;  // DepthSweep only
  double width_mult = 1.0;
};

enum class DatasetKind { Mnist, FashionMnist, Cifar10, Synthetic };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Synthetic;
  std::filesystem::path data_dir;
  std::size_t subset = 0;          // first N training samples after a seeded shuffle; 0 keeps all
  std::size_t test_subset = 0;     // same for the test split
  std::size_t synthetic_train = 2000;
  std::size_t synthetic_test = 500;
};

struct TrainConfig {
  act::ActivationKind activation = act::Tag::CoLU;
  Architecture arch;
  optim::SgdConfig sgd;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  bool augment = false;
};

/// Training protocol hyperparameters for each architecture:
/// SGD lr 0.001, lr decay 1e-4, momentum 0.9, L2 1e-4; batch 64 for 30
/// epochs (sweep / 8-conv), 64 for 100 (VGG-13), 400 for 100 with
/// augmentation (ResNet-9).
TrainConfig protocol_config(ArchKind arch);

struct EpochRecord {
  double train_loss = 0.0;  // mean cross-entropy + L2 penalty over the epoch
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
};

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

struct Splits {
  data::Dataset train;
  data::Dataset test;
};

std::string dataset_name(DatasetKind kind);
std::string arch_name(const Architecture& arch);

// Loads (or generates) the train/test splits and applies subsets and the
// 32x32 padding VGG-13 needs. Missing files raise FormatError.
Splits load_splits(const TrainConfig& config);

// Throws ConfigError for invalid hyperparameters or an architecture that
// cannot consume the dataset's image shape.
void validate(const TrainConfig& config, const data::Dataset& sample);

nn::Network build_network(const TrainConfig& config, std::size_t in_channels, std::size_t image_size);

/// accuracy = fraction of rows whose argmax (lowest index on ties) equals the
/// label; loss = mean per-sample cross-entropy. Throws ArgumentError when empty.
EvalResult score_logits(const Tensor& logits, std::span<const std::uint8_t> labels);

// Eval-mode pass in chunks of `batch` samples; restores the previous mode.
EvalResult evaluate(nn::Network& net, const data::Dataset& dataset, std::size_t batch = 256);

using EpochCallback = std::function<void(std::size_t epoch, const EpochRecord&)>;

/// Seeded training run. Each epoch shuffles the training set, then for every
/// batch of at least two samples: train-mode forward, cross-entropy plus L2,
/// backward, one SGD step. The test split is evaluated after every epoch.
TrainReport train(const TrainConfig& config, const data::Dataset& train_set, const data::Dataset& test_set,
                  nn::Network* trained = nullptr, const EpochCallback& on_epoch = {});
TrainReport train(const TrainConfig& config, const EpochCallback& on_epoch = {});

// Sweep cells

struct SweepRow {
  std::string activation;
  std::size_t n_conv = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kSweepCsvHeader = "activation,n_conv,final_accuracy,final_loss,seed";

/// One depth-sweep model per (depth, activation), depth-major. Cell i uses
/// seed base.seed + i. The dataset is loaded once and shared.
std::vector<SweepRow> run_depth_sweep(const TrainConfig& base, const std::vector<std::size_t>& depths,
                                      const std::vector<act::ActivationKind>& activations,
                                      const EpochCallback& on_epoch = {});
std::vector<SweepRow> run_depth_sweep(const TrainConfig& base, const Splits& splits,
                                      const std::vector<std::size_t>& depths,
                                      const std::vector<act::ActivationKind>& activations,
                                      const EpochCallback& on_epoch = {});
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Repeated runs

struct RunStats {
  std::size_t n_runs = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_loss = 0.0;
  double std_loss = 0.0;
  std::vector<TrainReport> reports;
};

/// Mean and sample (n - 1) standard deviation of the final accuracy and loss.
/// Throws ArgumentError for fewer than two reports.
RunStats summarize(std::vector<TrainReport> reports);

using Trainer = std::function<TrainReport(const TrainConfig&)>;

// Run i trains with seed config.seed + i.
RunStats run_repeated(const TrainConfig& config, std::size_t n_runs, const Trainer& trainer);
RunStats run_repeated(const TrainConfig& config, std::size_t n_runs);

void write_repeat_csv(std::ostream& out, const RunStats& stats);

// Text output

// One key=value per line; deterministic (no wall-clock values).
void write_report(std::ostream& out, const TrainReport& report);
std::string format_number(double value);

// Plots

/// Writes <kind>.svg (f and f' over [-6, 6], 601 samples) for every
/// activation plus bump_overlay.svg with CoLU, Mish and Swish. Returns the
/// files in the order written.
std::vector<std::filesystem::path> emit_activation_plots(const std::filesystem::path& dir);

// CLI

/// Subcommands: classify, plot, train, sweep, repeat. Returns 0 on success,
/// 1 on usage or configuration errors, 2 on data or format errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace colu::exp
