#include <algorithm>
#include <cmath>
#include <ostream>

#include "colu/errors.hpp"
#include "colu/experiments.hpp"

namespace colu::exp {

std::vector<SweepRow> run_depth_sweep(const TrainConfig& base, const Splits& splits,
                                      const std::vector<std::size_t>& depths,
                                      const std::vector<act::ActivationKind>& activations,
                                      const EpochCallback& on_epoch) {
  if (depths.empty()) throw ArgumentError("run_depth_sweep: no depths given");
  if (activations.empty()) throw ArgumentError("run_depth_sweep: no activations given");
  std::vector<SweepRow> rows;
  std::uint64_t cell = 0;
  for (std::size_t depth : depths) {
    for (const auto& activation : activations) {
      TrainConfig config = base;
      config.arch.kind = ArchKind::DepthSweep;
      config.arch.n_conv = depth;
      config.activation = activation;
      config.seed = base.seed + cell++;
      const TrainReport report = train(config, splits.train, splits.test, nullptr, on_epoch);
      rows.push_back({activation.name(), depth, report.final_accuracy, report.final_loss, config.seed});
    }
  }
  return rows;
}

std::vector<SweepRow> run_depth_sweep(const TrainConfig& base, const std::vector<std::size_t>& depths,
                                      const std::vector<act::ActivationKind>& activations,
                                      const EpochCallback& on_epoch) {
  return run_depth_sweep(base, load_splits(base), depths, activations, on_epoch);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& row : rows) {
    out << row.activation << ',' << row.n_conv << ',' << format_number(row.final_accuracy) << ','
        << format_number(row.final_loss) << ',' << row.seed << '\n';
  }
}

RunStats summarize(std::vector<TrainReport> reports) {
  if (reports.size() < 2) throw ArgumentError("summarize: need at least two runs");
  const double n = static_cast<double>(reports.size());
  RunStats stats;
  stats.n_runs = reports.size();
  for (const auto& r : reports) {
    stats.mean_accuracy += r.final_accuracy;
    stats.mean_loss += r.final_loss;
  }
  stats.mean_accuracy /= n;
  stats.mean_loss /= n;
  double ss_acc = 0.0, ss_loss = 0.0;
  for (const auto& r : reports) {
    ss_acc += (r.final_accuracy - stats.mean_accuracy) * (r.final_accuracy - stats.mean_accuracy);
    ss_loss += (r.final_loss - stats.mean_loss) * (r.final_loss - stats.mean_loss);
  }
  stats.std_accuracy = std::sqrt(ss_acc / (n - 1.0));
  stats.std_loss = std::sqrt(ss_loss / (n - 1.0));
  stats.reports = std::move(reports);
  return stats;
}

RunStats run_repeated(const TrainConfig& config, std::size_t n_runs, const Trainer& trainer) {
  if (n_runs < 2) throw ArgumentError("run_repeated: need at least two runs");
  std::vector<TrainReport> reports;
  reports.reserve(n_runs);
  for (std::size_t i = 0; i < n_runs; ++i) {
    TrainConfig run = config;
    run.seed = config.seed + i;
    reports.push_back(trainer(run));
  }
  return summarize(std::move(reports));
}

RunStats run_repeated(const TrainConfig& config, std::size_t n_runs) {
  return run_repeated(config, n_runs, [](const TrainConfig& c) { return train(c); });
}

void write_repeat_csv(std::ostream& out, const RunStats& stats) {
  out << "run,seed,final_accuracy,final_loss\n";
  for (std::size_t i = 0; i < stats.reports.size(); ++i) {
    const auto& r = stats.reports[i];
    out << i << ',' << r.config.seed << ',' << format_number(r.final_accuracy) << ',' << format_number(r.final_loss)
        << '\n';
  }
}

}  // namespace colu::exp
