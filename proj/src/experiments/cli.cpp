#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "colu/analysis.hpp"
#include "colu/errors.hpp"
#include "colu/experiments.hpp"

namespace colu::exp {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct Flags {
  std::string activation = "colu";
  std::string arch = "small_cnn8";
  std::string depth;
  std::string dataset;
  std::string data_dir;
  std::size_t subset = 0;
  std::size_t test_subset = 0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  double lr = 0.0;
  double decay = 0.0;
  std::string decay_mode = "lr";
  double momentum = 0.0;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  std::size_t runs = 10;
  double width_mult = 1.0;
  std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

act::ActivationKind activation_from(const std::string& text) {
  const auto kind = act::parse_activation(text);
  if (!kind) throw ConfigError("unknown activation '" + text + "'");
  return *kind;
}

std::vector<std::size_t> depths_from(const std::string& text) {
  std::vector<std::size_t> depths;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      depths.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("invalid depth '" + item + "'");
    }
  }
  if (depths.empty()) throw ConfigError("no depth given");
  return depths;
}

ArchKind arch_from(const std::string& text) {
  if (text == "small_cnn8") return ArchKind::SmallCnn8;
  if (text == "depth_sweep") return ArchKind::DepthSweep;
  if (text == "vgg13") return ArchKind::Vgg13;
  if (text == "resnet9") return ArchKind::Resnet9;
  throw ConfigError("unknown architecture '" + text + "' (small_cnn8, depth_sweep, vgg13, resnet9)");
}

DatasetKind dataset_from(const std::string& text) {
  if (text == "mnist") return DatasetKind::Mnist;
  if (text == "fashion" || text == "fashion-mnist" || text == "fashion_mnist") return DatasetKind::FashionMnist;
  if (text == "cifar10" || text == "cifar-10") return DatasetKind::Cifar10;
  if (text == "synthetic") return DatasetKind::Synthetic;
  throw ConfigError("unknown dataset '" + text + "' (mnist, fashion, cifar10, synthetic)");
}

void add_training_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--activation", f.activation, "Activation name (comma list for sweep)");
  cmd.add_option("--arch", f.arch, "small_cnn8 | depth_sweep | vgg13 | resnet9");
  cmd.add_option("--depth", f.depth, "Conv layer count (comma list for sweep)");
  cmd.add_option("--dataset", f.dataset, "mnist | fashion | cifar10 | synthetic");
  cmd.add_option("--data-dir", f.data_dir, "Directory holding the dataset files");
  cmd.add_option("--subset", f.subset, "Train on the first N samples after a seeded shuffle");
  cmd.add_option("--test-subset", f.test_subset, "Evaluate on N test samples");
  cmd.add_option("--epochs", f.epochs, "Epoch count");
  cmd.add_option("--batch-size", f.batch_size, "Batch size");
  cmd.add_option("--lr", f.lr, "Initial learning rate");
  cmd.add_option("--decay", f.decay, "Decay factor");
  cmd.add_option("--decay-mode", f.decay_mode, "lr (lr0/(1+decay*t)) | weight")->check(CLI::IsMember({"lr", "weight"}));
  cmd.add_option("--momentum", f.momentum, "SGD momentum");
  cmd.add_option("--l2", f.l2, "L2 factor on conv/dense weights");
  cmd.add_option("--seed", f.seed, "Base seed");
  cmd.add_option("--width-mult", f.width_mult, "Width multiplier for hidden layers");
  cmd.add_option("--out", f.out, "Output file");
}

TrainConfig config_from(const CLI::App& cmd, const Flags& f, ArchKind arch) {
  TrainConfig c = protocol_config(arch);
  c.arch.kind = arch;
  c.arch.width_mult = f.width_mult;
  if (arch == ArchKind::DepthSweep) c.arch.n_conv = f.depth.empty() ? 8 : depths_from(f.depth).front();
  c.activation = activation_from(split_list(f.activation).empty() ? "colu" : split_list(f.activation).front());
  if (cmd.count("--dataset")) c.dataset.kind = dataset_from(f.dataset);
  c.dataset.data_dir = f.data_dir;
  if (cmd.count("--subset")) {
    c.dataset.subset = f.subset;
    if (c.dataset.kind == DatasetKind::Synthetic) c.dataset.synthetic_train = f.subset;
  }
  if (cmd.count("--test-subset")) {
    c.dataset.test_subset = f.test_subset;
    if (c.dataset.kind == DatasetKind::Synthetic) c.dataset.synthetic_test = f.test_subset;
  }
  if (cmd.count("--epochs")) c.epochs = f.epochs;
  if (cmd.count("--batch-size")) c.batch_size = f.batch_size;
  if (cmd.count("--lr")) c.sgd.lr0 = f.lr;
  if (cmd.count("--decay")) c.sgd.decay = f.decay;
  c.sgd.decay_mode = f.decay_mode == "weight" ? optim::DecayMode::Weight : optim::DecayMode::LearningRate;
  if (cmd.count("--momentum")) c.sgd.momentum = f.momentum;
  if (cmd.count("--l2")) c.sgd.l2_factor = f.l2;
  c.seed = f.seed;
  if (c.dataset.kind != DatasetKind::Synthetic && c.dataset.data_dir.empty()) {
    throw ConfigError("--data-dir is required for dataset " + dataset_name(c.dataset.kind));
  }
  return c;
}

// Writes to --out when given, otherwise to `fallback`.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  write(file);
}

const char* yes_no(bool v) { return v ? "yes" : "no"; }

void run_classify(const Flags& f, std::ostream& out) {
  std::vector<analysis::PropertyReport> reports;
  for (act::Tag tag : act::kAllTags) reports.push_back(analysis::classify(tag));

  char line[160];
  std::snprintf(line, sizeof line, "%-9s %10s %11s %6s %6s %6s %6s %6s\n", "function", "min_x", "min_f", "b_low",
                "b_up", "mono", "sat", "kink");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-9s %10.6f %11.8f %6s %6s %6s %6s %6s\n", r.kind.name().c_str(),
                  r.global_min_x, r.global_min_f, yes_no(r.bounded_below), yes_no(r.bounded_above),
                  yes_no(r.monotonic), yes_no(r.saturates_above), yes_no(r.kink_at_zero));
    out << line;
  }
  if (!f.out.empty()) {
    emit(f.out, out, [&](std::ostream& csv) {
      csv << "activation,global_min_x,global_min_f,bounded_below,bounded_above,monotonic,saturates_above,kink_at_zero\n";
      for (const auto& r : reports) {
        csv << r.kind.name() << ',' << format_number(r.global_min_x) << ',' << format_number(r.global_min_f) << ','
            << r.bounded_below << ',' << r.bounded_above << ',' << r.monotonic << ',' << r.saturates_above << ','
            << r.kink_at_zero << '\n';
      }
    });
  }
}

EpochCallback progress(std::ostream& err) {
  return [&err](std::size_t epoch, const EpochRecord& r) {
    char line[160];
    std::snprintf(line, sizeof line, "epoch %zu: train_loss=%.5f test_acc=%.4f test_loss=%.5f (%.1fs)\n", epoch + 1,
                  r.train_loss, r.test_accuracy, r.test_loss, r.seconds);
    err << line << std::flush;
  };
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CoLU activation zoo: property analysis, plots and CNN training experiments", "colu"};
  app.require_subcommand(1);
  Flags f;

  auto* classify = app.add_subcommand("classify", "Certify shape properties of every activation");
  classify->add_option("--out", f.out, "CSV output file");
  auto* plot = app.add_subcommand("plot", "Write SVG plots of each activation and its derivative");
  plot->add_option("--out", f.out, "Output directory (default: plots)");
  auto* train_cmd = app.add_subcommand("train", "Train one model and print its report");
  add_training_flags(*train_cmd, f);
  auto* sweep = app.add_subcommand("sweep", "Depth sweep over conv layer counts and activations (CSV)");
  add_training_flags(*sweep, f);
  auto* repeat = app.add_subcommand("repeat", "Repeat one configuration over consecutive seeds");
  add_training_flags(*repeat, f);
  repeat->add_option("--runs", f.runs, "Number of runs (>= 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*classify) {
      run_classify(f, out);
    } else if (*plot) {
      const auto files = emit_activation_plots(f.out.empty() ? "plots" : f.out);
      for (const auto& p : files) out << p.string() << '\n';
    } else if (*train_cmd) {
      const TrainConfig config = config_from(*train_cmd, f, arch_from(f.arch));
      const TrainReport report = train(config, progress(err));
      emit(f.out, out, [&](std::ostream& o) { write_report(o, report); });
    } else if (*sweep) {
      TrainConfig base = config_from(*sweep, f, ArchKind::DepthSweep);
      std::vector<act::ActivationKind> activations;
      for (const auto& name : split_list(f.activation)) activations.push_back(activation_from(name));
      const auto depths = depths_from(f.depth.empty() ? "2,4,6" : f.depth);
      const auto rows = run_depth_sweep(base, depths, activations, progress(err));
      emit(f.out, out, [&](std::ostream& o) { write_sweep_csv(o, rows); });
    } else if (*repeat) {
      const TrainConfig config = config_from(*repeat, f, arch_from(f.arch));
      if (f.runs < 2) throw ConfigError("--runs must be at least 2");
      const auto cb = progress(err);
      const RunStats stats =
          run_repeated(config, f.runs, [&](const TrainConfig& c) { return train(c, cb); });
      emit(f.out, out, [&](std::ostream& o) { write_repeat_csv(o, stats); });
      out << "n_runs=" << stats.n_runs << '\n'
          << "mean_accuracy=" << format_number(stats.mean_accuracy) << '\n'
          << "std_accuracy=" << format_number(stats.std_accuracy) << '\n'
          << "mean_loss=" << format_number(stats.mean_loss) << '\n'
          << "std_loss=" << format_number(stats.std_loss) << '\n';
    }
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n'
        << "Datasets are not downloaded automatically. Place the MNIST / Fashion-MNIST IDX files\n"
        << "(train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte)\n"
        << "or the CIFAR-10 binary batches (data_batch_1..5.bin, test_batch.bin) in --data-dir.\n";
    return kExitData;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArgumentError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace colu::exp
