#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tce/losses.hpp"
#include "tce/matrix.hpp"

namespace tce {

/// Samples (one per row) with their current labels.
///
/// labels is what training sees. clean_labels keeps the original annotation,
/// and corrupted_mask[i] is set when the noise injector resampled sample i
/// (the resampled label may equal the original).
struct Dataset {
  Matrix images;
  std::vector<Label> labels;
  std::vector<Label> clean_labels;
  std::vector<bool> corrupted_mask;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t features() const noexcept { return images.cols(); }

  /// Checks sizes agree and every label is in [0, num_classes).
  void validate() const;

  /// Builds a clean dataset (labels == clean_labels, empty mask).
  static Dataset from_labels(Matrix images, std::vector<Label> labels, std::size_t num_classes);
};

/// Rows of ds at the given indices, in that order.
Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

struct BlobOptions {
  std::size_t n_per_class = 100;
  std::size_t num_classes = 3;
  std::size_t dim = 2;
  double separation = 10.0;
  /// Per-coordinate standard deviation of each cluster.
  double cluster_std = 1.0;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian clusters around seeded centers whose pairwise distance is
/// at least `separation`. Samples are grouped by class (class 0 first).
Dataset make_blobs(const BlobOptions& options);
Dataset make_blobs(std::size_t n_per_class, std::size_t num_classes, std::size_t dim,
                   double separation, std::uint64_t seed);

struct NormalizationStats {
  std::vector<double> means;
  std::vector<double> stds;
};

inline constexpr double kStdFloor = 1e-8;

/// Per-feature mean and (population) standard deviation, std floored at 1e-8.
NormalizationStats feature_stats(const Dataset& ds);
/// (x - mean) / std with the given statistics.
Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats);
/// Standardizes ds with its own statistics and returns them for reuse on other splits.
std::pair<Dataset, NormalizationStats> normalize(const Dataset& ds);

struct NoiseSpec {
  double eta = 0.0;
  std::uint64_t seed = 0;
};

/// Number of samples the injector corrupts: floor(eta * n).
std::size_t corrupted_count(double eta, std::size_t n);

/// Picks floor(eta * n) samples by seeded shuffle and gives each a label drawn
/// uniformly from all classes. clean_labels is left untouched.
Dataset inject_noise(const Dataset& ds, const NoiseSpec& spec);

/// Seeded shuffle, then the first `holdout` samples become the validation split.
std::pair<Dataset, Dataset> holdout_split(const Dataset& ds, std::size_t holdout, std::uint64_t seed);

}  // namespace tce
