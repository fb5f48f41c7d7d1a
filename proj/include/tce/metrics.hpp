#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tce {

/// One epoch of a run. Accuracies are top-1 percentages (error = 100 - accuracy).
struct MetricsRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_top1 = 0.0;
  double val_top1 = 0.0;
  double test_top1 = 0.0;
  double lr = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader = "epoch,train_loss,train_top1,val_top1,test_top1,lr";

std::string format_metrics_csv(std::span<const MetricsRow> rows);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Epoch with the lowest validation error; the earliest one wins ties.
std::size_t select_best_epoch(std::span<const MetricsRow> rows);

/// First epoch whose test accuracy is strictly above threshold, if any.
std::optional<std::size_t> epochs_to_threshold(std::span<const MetricsRow> rows, double threshold);

/// Top-1 accuracy in percent of argmax predictions (lowest index wins ties).
double top1_percent(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

struct MeanStd {
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator); absent for fewer than two values.
  std::optional<double> std;
};

MeanStd mean_std(std::span<const double> values);

}  // namespace tce
