#include <cstdio>
#include <ostream>

#include "colu/experiments.hpp"

namespace colu::exp {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void write_report(std::ostream& out, const TrainReport& report) {
  const TrainConfig& c = report.config;
  out << "activation=" << c.activation.name() << '\n'
      << "arch=" << arch_name(c.arch) << '\n'
      << "width_mult=" << format_number(c.arch.width_mult) << '\n'
      << "dataset=" << dataset_name(c.dataset.kind) << '\n'
      << "subset=" << c.dataset.subset << '\n'
      << "epochs=" << c.epochs << '\n'
      << "batch_size=" << c.batch_size << '\n'
      << "lr=" << format_number(c.sgd.lr0) << '\n'
      << "decay=" << format_number(c.sgd.decay) << '\n'
      << "decay_mode=" << (c.sgd.decay_mode == optim::DecayMode::LearningRate ? "lr" : "weight") << '\n'
      << "momentum=" << format_number(c.sgd.momentum) << '\n'
      << "l2=" << format_number(c.sgd.l2_factor) << '\n'
      << "augment=" << (c.augment ? 1 : 0) << '\n'
      << "seed=" << c.seed << '\n';
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const auto& r = report.epochs[e];
    const std::string key = "epoch." + std::to_string(e + 1) + ".";
    out << key << "train_loss=" << format_number(r.train_loss) << '\n'
        << key << "test_accuracy=" << format_number(r.test_accuracy) << '\n'
        << key << "test_loss=" << format_number(r.test_loss) << '\n';
  }
  out << "final_accuracy=" << format_number(report.final_accuracy) << '\n'
      << "final_loss=" << format_number(report.final_loss) << '\n';
}

}  // namespace colu::exp
