#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tce/config.hpp"
#include "tce/dataset.hpp"
#include "tce/metrics.hpp"
#include "tce/mlp.hpp"

namespace tce {

/// Normalized splits that do not depend on the run seed or eta.
/// The validation and test splits are never corrupted.
struct PreparedData {
  Dataset train;
  Dataset validation;
  Dataset test;
  std::size_t num_classes = 0;
};

/// Loads (or generates) the dataset, carves out validation (and, for blobs, test)
/// with data_seed, and standardizes every split with the training statistics.
/// Missing MNIST files raise DataError naming the expected paths.
PreparedData prepare_data(const TrainConfig& config);

struct RunSummary {
  /// 0 when no epoch completed.
  std::size_t best_epoch = 0;
  double test_top1_at_best = 0.0;
  double val_top1_at_best = 0.0;
  std::optional<std::size_t> epochs_to_threshold;
  std::size_t epochs_completed = 0;
  bool diverged = false;
  std::string divergence;

  std::string to_json() const;
  static RunSummary from_json(const std::string& text);
};

struct RunResult {
  std::vector<MetricsRow> metrics;
  RunSummary summary;
};

/// Noise seed for a run: a stream split by (seed, eta) so sweeps over eta stay independent.
std::uint64_t noise_seed(std::uint64_t seed, double eta);

using EpochCallback = std::function<void(const MetricsRow&)>;

/// Trains on already prepared data. Label noise is injected here from
/// (config.seed, config.eta); nothing is written to disk.
RunResult train_on(const TrainConfig& config, const PreparedData& data, const EpochCallback& on_epoch = {});

/// prepare_data + train_on, then writes metrics.csv, summary.json and config.json
/// into config.out_dir when it is set.
RunResult run_training(const TrainConfig& config, const EpochCallback& on_epoch = {});

void write_run_outputs(const std::filesystem::path& dir, const TrainConfig& config, const RunResult& result);

RunSummary summarize_run(const std::vector<MetricsRow>& metrics, double threshold);

/// Argmax predictions in chunks (lowest index wins ties).
std::vector<std::size_t> predict(const Mlp& model, const Matrix& images);

}  // namespace tce
