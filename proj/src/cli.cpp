#include "tce/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <ostream>

#include "tce/config.hpp"
#include "tce/error.hpp"
#include "tce/gradcheck.hpp"
#include "tce/sweep.hpp"
#include "tce/training.hpp"

namespace tce::cli {
namespace {

// String-typed flags that need parsing after CLI11 is done.
struct ListFlags {
  std::string loss;
  std::string dataset;
  std::string lr_drops;
  std::string hidden;
  std::string data_dir;
  std::string out;
};

void add_config_flags(CLI::App& cmd, TrainConfig& c, ListFlags& lists) {
  cmd.add_option("--config", "JSON config file; other flags override its values");
  cmd.add_option("--loss", lists.loss, "Loss: ce, tce, mse or mae")
      ->check(CLI::IsMember({"ce", "tce", "mse", "mae"}));
  cmd.add_option("--alpha", c.alpha, "TCE taming exponent (>= 0)")->check(CLI::NonNegativeNumber);
  cmd.add_option("--eta", c.eta, "Fraction of training labels resampled uniformly")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--epochs", c.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd.add_option("--batch-size", c.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  cmd.add_option("--lr", c.lr, "Initial learning rate")->check(CLI::PositiveNumber);
  cmd.add_option("--momentum", c.momentum, "Nesterov momentum in [0, 1)");
  cmd.add_option("--weight-decay", c.weight_decay, "L2 weight decay on weights")->check(CLI::NonNegativeNumber);
  cmd.add_option("--lr-drops", lists.lr_drops, "Epochs at which the learning rate is divided, e.g. 30,45");
  cmd.add_option("--lr-drop-factor", c.lr_drop_factor, "Divisor applied at each drop")->check(CLI::PositiveNumber);
  cmd.add_option("--hidden", lists.hidden, "Hidden layer widths, e.g. 256,128");
  cmd.add_option("--dataset", lists.dataset, "mnist or blobs")->check(CLI::IsMember({"mnist", "blobs"}));
  cmd.add_option("--data-dir", lists.data_dir, "Directory with MNIST IDX files (optionally .gz)");
  cmd.add_option("--train-limit", c.train_limit, "Use only the first n training samples (0 = all)");
  cmd.add_option("--holdout", c.holdout, "Validation samples held out of the training set");
  cmd.add_option("--data-seed", c.data_seed, "Seed for splits and blob generation");
  cmd.add_option("--blob-classes", c.blob_classes, "Blobs: number of classes");
  cmd.add_option("--blob-dim", c.blob_dim, "Blobs: feature dimension");
  cmd.add_option("--blob-train-per-class", c.blob_train_per_class, "Blobs: train+validation samples per class");
  cmd.add_option("--blob-test-per-class", c.blob_test_per_class, "Blobs: test samples per class");
  cmd.add_option("--blob-separation", c.blob_separation, "Blobs: minimum distance between centers");
  cmd.add_option("--blob-std", c.blob_std, "Blobs: per-coordinate cluster standard deviation");
  cmd.add_option("--threshold", c.threshold, "Accuracy threshold (percent) for epochs-to-threshold")
      ->check(CLI::Range(0.0, 100.0));
  cmd.add_option("--out", lists.out, "Output directory");
}

void apply_lists(TrainConfig& c, const ListFlags& lists) {
  if (!lists.loss.empty()) c.loss = parse_loss_kind(lists.loss);
  if (!lists.dataset.empty()) c.dataset = parse_dataset_kind(lists.dataset);
  if (!lists.lr_drops.empty()) c.lr_drops = parse_size_list(lists.lr_drops);
  if (!lists.hidden.empty()) c.hidden = parse_size_list(lists.hidden);
  if (!lists.data_dir.empty()) c.data_dir = lists.data_dir;
  if (!lists.out.empty()) c.out_dir = lists.out;
}

// --config must be applied before the other flags so they can override it.
std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void print_row(std::ostream& out, const MetricsRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch %3zu  lr %.4g  loss %.5f  train %.2f%%  val %.2f%%  test %.2f%%\n", r.epoch,
                r.lr, r.train_loss, r.train_top1, r.val_top1, r.test_top1);
  out << buf << std::flush;
}

void print_summary(std::ostream& out, const RunSummary& s) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "best epoch %zu  test top-1 at best %.2f%%  (val %.2f%%)\n", s.best_epoch,
                s.test_top1_at_best, s.val_top1_at_best);
  out << buf;
  if (s.epochs_to_threshold) out << "epochs to threshold: " << *s.epochs_to_threshold << '\n';
  if (s.diverged) out << "DIVERGED: " << s.divergence << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tamed cross entropy: losses, gradient checks and label-noise experiments", "tce"};
  app.require_subcommand(1);

  TrainConfig config;
  if (const auto path = find_config(args)) {
    try {
      config = TrainConfig::load(*path);
    } catch (const ContractViolation& e) {
      err << "error: " << e.what() << '\n';
      return kUsageError;
    } catch (const DataError& e) {
      err << "error: " << e.what() << '\n';
      return kDataError;
    }
  }
  ListFlags lists;

  auto* train = app.add_subcommand("train", "Train one model and write metrics.csv");
  add_config_flags(*train, config, lists);
  train->add_option("--seed", config.seed, "Run seed (init, shuffling, label noise)");
  bool quiet = false;
  train->add_flag("--quiet", quiet, "Do not print per-epoch metrics");

  auto* sweep = app.add_subcommand("sweep", "Train every (loss, eta, seed) combination and summarize");
  add_config_flags(*sweep, config, lists);
  std::string losses_flag;
  std::string etas_flag = "0,0.8";
  std::string seeds_flag = "1,2,3";
  std::size_t jobs = 1;
  sweep->add_option("--losses", losses_flag, "Loss grid, e.g. ce,tce:0.5,tce:2,mse,mae (default: --loss/--alpha)");
  sweep->add_option("--etas", etas_flag, "Noise grid, e.g. 0,0.4,0.8");
  sweep->add_option("--seeds", seeds_flag, "Run seeds, e.g. 1,2,3");
  sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic loss gradients with finite differences");
  std::string grad_loss = "ce";
  double grad_alpha = 1.0;
  std::size_t grad_trials = 100;
  std::uint64_t grad_seed = 0;
  std::size_t grad_classes = 10;
  std::size_t grad_batch = 8;
  double grad_tolerance = 0.0;
  grad->add_option("--loss", grad_loss, "ce, tce, mse or mae")->check(CLI::IsMember({"ce", "tce", "mse", "mae"}));
  grad->add_option("--alpha", grad_alpha, "TCE taming exponent (>= 0)")->check(CLI::NonNegativeNumber);
  grad->add_option("--trials", grad_trials, "Random batches to check")->check(CLI::PositiveNumber);
  grad->add_option("--seed", grad_seed, "Sampling seed");
  grad->add_option("--classes", grad_classes, "Number of classes")->check(CLI::Range(2, 100000));
  grad->add_option("--batch", grad_batch, "Rows per batch")->check(CLI::PositiveNumber);
  grad->add_option("--tolerance", grad_tolerance, "Relative error tolerance (default 1e-5, 1e-4 for mae)")
      ->check(CLI::PositiveNumber);

  auto* summarize = app.add_subcommand("summarize", "Aggregate run directories into summary tables");
  std::string summarize_dir;
  double summarize_threshold = 0.0;
  summarize->add_option("--out", summarize_dir, "Directory containing run subdirectories")->required();
  summarize->add_option("--threshold", summarize_threshold, "Accuracy threshold (percent) for epochs-to-threshold")
      ->check(CLI::Range(0.0, 100.0));

  std::vector<std::string> argv_storage{"tce"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    apply_lists(config, lists);

    if (train->parsed()) {
      config.validate();
      const RunResult result = run_training(config, [&](const MetricsRow& r) {
        if (!quiet) print_row(out, r);
      });
      print_summary(out, result.summary);
      if (!config.out_dir.empty()) out << "wrote " << (config.out_dir / "metrics.csv").string() << '\n';
      return kSuccess;
    }

    if (sweep->parsed()) {
      const std::vector<LossChoice> losses =
          losses_flag.empty() ? std::vector<LossChoice>{{config.loss, config.loss == LossKind::TCE ? config.alpha : 0.0}}
                              : LossChoice::parse_list(losses_flag);
      const std::vector<double> etas = parse_double_list(etas_flag);
      const std::vector<std::uint64_t> seeds = parse_u64_list(seeds_flag);
      const SweepResult result = run_sweep(config, losses, etas, seeds, jobs);
      out << format_summary_csv(result.cells);
      if (!config.out_dir.empty()) out << "wrote " << (config.out_dir / "summary.csv").string() << '\n';
      return kSuccess;
    }

    if (grad->parsed()) {
      const LossSpec spec{parse_loss_kind(grad_loss), grad_alpha, grad_classes};
      gradcheck::CheckOptions options;
      options.trials = grad_trials;
      options.seed = grad_seed;
      options.batch = grad_batch;
      if (grad_tolerance > 0.0) options.tolerance = grad_tolerance;
      const gradcheck::GradReport report = gradcheck::check_loss(spec, options);
      out << gradcheck::format_report(spec, report) << '\n';
      return report.passed ? kSuccess : kGradcheckFailure;
    }

    if (summarize->parsed()) {
      const SweepResult result = summarize_directory(summarize_dir, summarize_threshold);
      write_sweep_outputs(summarize_dir, result);
      out << format_summary_csv(result.cells);
      return kSuccess;
    }
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tce::cli
