#include "tce/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tce/error.hpp"

namespace tce {

std::string format_metrics_csv(std::span<const MetricsRow> rows) {
  std::string out = kMetricsHeader;
  out += '\n';
  char buf[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.4f,%.4f,%.4f,%.10g\n", r.epoch, r.train_loss,
                  r.train_top1, r.val_top1, r.test_top1, r.lr);
    out += buf;
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_metrics_csv(rows);
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw DataError("metrics.csv header must be '" + std::string(kMetricsHeader) + "'");
  }
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    MetricsRow r;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf,%lf", &r.epoch, &r.train_loss, &r.train_top1,
                    &r.val_top1, &r.test_top1, &r.lr) != 6) {
      throw DataError("malformed metrics.csv line " + std::to_string(line_no));
    }
    if (!rows.empty() && r.epoch <= rows.back().epoch) {
      throw DataError("metrics.csv epochs not strictly increasing at line " + std::to_string(line_no));
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_metrics_csv(buffer.str());
}

std::size_t select_best_epoch(std::span<const MetricsRow> rows) {
  require(!rows.empty(), "select_best_epoch needs at least one epoch");
  const MetricsRow* best = &rows.front();
  for (const MetricsRow& r : rows) {
    // Lowest validation error == highest validation accuracy; strict > keeps the earliest.
    if (r.val_top1 > best->val_top1) best = &r;
  }
  return best->epoch;
}

std::optional<std::size_t> epochs_to_threshold(std::span<const MetricsRow> rows, double threshold) {
  require(threshold > 0.0 && threshold < 100.0, "threshold must be in (0, 100)");
  for (const MetricsRow& r : rows) {
    if (r.test_top1 > threshold) return r.epoch;
  }
  return std::nullopt;
}

double top1_percent(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
  require(predictions.size() == labels.size(), "prediction and label counts differ");
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == labels[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace tce
