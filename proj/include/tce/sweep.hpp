#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tce/config.hpp"
#include "tce/losses.hpp"
#include "tce/training.hpp"

namespace tce {

/// A loss choice without a class count: kind plus alpha (TCE only).
struct LossChoice {
  LossKind kind = LossKind::CE;
  double alpha = 0.0;

  /// "ce", "mse", "mae", "tce" (alpha 1) or "tce:<alpha>".
  static LossChoice parse(const std::string& text);
  static std::vector<LossChoice> parse_list(const std::string& text);
  /// "ce", "tce-a2", "tce-a0.5", ...
  std::string tag() const;

  friend bool operator==(const LossChoice&, const LossChoice&) = default;
};

struct RunRecord {
  LossChoice loss;
  double eta = 0.0;
  std::uint64_t seed = 0;
  RunSummary summary;
};

/// Aggregate of all seeds for one (loss, alpha, eta) cell.
struct SweepCell {
  LossChoice loss;
  double eta = 0.0;
  /// Runs that completed at least one epoch and therefore have a best epoch.
  std::size_t n_seeds = 0;
  std::size_t n_diverged = 0;
  double mean_test_top1 = 0.0;
  std::optional<double> std_test_top1;
  double mean_best_epoch = 0.0;
  /// Mean over runs that reached the threshold; absent if none did.
  std::optional<double> mean_epochs_to_threshold;
  std::size_t n_reached_threshold = 0;
};

struct SweepResult {
  std::vector<RunRecord> runs;
  std::vector<SweepCell> cells;
};

/// Groups runs by (loss, alpha, eta) in first-seen order.
std::vector<SweepCell> aggregate(std::span<const RunRecord> runs);

/// One run per (loss, eta, seed). Data is prepared once and shared read-only;
/// up to `jobs` runs execute concurrently. Diverged runs are recorded, not fatal.
/// With base.out_dir set, each run writes into its own subdirectory and the
/// sweep tables are written at the top level.
SweepResult run_sweep(const TrainConfig& base, const std::vector<LossChoice>& losses,
                      const std::vector<double>& etas, const std::vector<std::uint64_t>& seeds,
                      std::size_t jobs = 1);

std::string run_directory_name(const LossChoice& loss, double eta, std::uint64_t seed);

/// loss,alpha,eta,mean_test_top1,std_test_top1,mean_best_epoch,n_seeds
std::string format_summary_csv(std::span<const SweepCell> cells);
/// Losses as rows, eta values as columns, mean test top-1 in each cell.
std::string format_table_csv(std::span<const SweepCell> cells);
std::string format_runs_csv(std::span<const RunRecord> runs);

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result);

/// Rebuilds run records from every subdirectory of dir that holds config.json
/// and metrics.csv, then aggregates them.
SweepResult summarize_directory(const std::filesystem::path& dir, double threshold);

}  // namespace tce
