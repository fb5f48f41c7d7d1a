#include "tce/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tce/error.hpp"
#include "tce/rng.hpp"

namespace tce {

void Dataset::validate() const {
  require(images.rows() == labels.size(), "image rows and label count differ");
  require(clean_labels.size() == labels.size(), "clean_labels length differs from labels");
  require(corrupted_mask.empty() || corrupted_mask.size() == labels.size(),
          "corrupted_mask length differs from labels");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] < num_classes && clean_labels[i] < num_classes,
            "label at index " + std::to_string(i) + " out of range [0, " +
                std::to_string(num_classes) + ")");
  }
}

Dataset Dataset::from_labels(Matrix images, std::vector<Label> labels, std::size_t num_classes) {
  Dataset ds;
  ds.images = std::move(images);
  ds.clean_labels = labels;
  ds.labels = std::move(labels);
  ds.corrupted_mask.assign(ds.labels.size(), false);
  ds.num_classes = num_classes;
  ds.validate();
  return ds;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.num_classes = ds.num_classes;
  out.images = Matrix(indices.size(), ds.features());
  out.labels.reserve(indices.size());
  out.clean_labels.reserve(indices.size());
  out.corrupted_mask.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    require(i < ds.size(), "subset index out of range");
    std::copy_n(ds.images.row(i).begin(), ds.features(), out.images.row(k).begin());
    out.labels.push_back(ds.labels[i]);
    out.clean_labels.push_back(ds.clean_labels[i]);
    out.corrupted_mask.push_back(ds.corrupted_mask.empty() ? false : ds.corrupted_mask[i]);
  }
  return out;
}

Dataset make_blobs(const BlobOptions& o) {
  require(o.n_per_class >= 1 && o.num_classes >= 1 && o.dim >= 1, "blob counts must be >= 1");
  require(o.separation >= 0.0 && o.cluster_std >= 0.0, "blob separation and std must be >= 0");
  const Rng root(o.seed);
  Rng center_rng = root.split("centers");
  Rng sample_rng = root.split("samples");

  // Rejection sampling in a cube that grows whenever placement stalls.
  double half_width = o.separation * std::max(1.0, std::ceil(std::pow(o.num_classes, 1.0 / o.dim)));
  if (half_width == 0.0) half_width = 1.0;
  std::vector<std::vector<double>> centers;
  std::size_t failures = 0;
  while (centers.size() < o.num_classes) {
    std::vector<double> candidate(o.dim);
    for (double& v : candidate) v = center_rng.uniform(-half_width, half_width);
    const bool clear = std::all_of(centers.begin(), centers.end(), [&](const auto& c) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < o.dim; ++k) d2 += (c[k] - candidate[k]) * (c[k] - candidate[k]);
      return d2 >= o.separation * o.separation;
    });
    if (clear) {
      centers.push_back(std::move(candidate));
      failures = 0;
    } else if (++failures == 1000) {
      half_width *= 1.1;
      failures = 0;
    }
  }

  const std::size_t n = o.n_per_class * o.num_classes;
  Matrix images(n, o.dim);
  std::vector<Label> labels(n);
  for (std::size_t c = 0; c < o.num_classes; ++c) {
    for (std::size_t s = 0; s < o.n_per_class; ++s) {
      const std::size_t row = c * o.n_per_class + s;
      labels[row] = c;
      for (std::size_t k = 0; k < o.dim; ++k) {
        images(row, k) = centers[c][k] + o.cluster_std * sample_rng.normal();
      }
    }
  }
  return Dataset::from_labels(std::move(images), std::move(labels), o.num_classes);
}

Dataset make_blobs(std::size_t n_per_class, std::size_t num_classes, std::size_t dim,
                   double separation, std::uint64_t seed) {
  BlobOptions o;
  o.n_per_class = n_per_class;
  o.num_classes = num_classes;
  o.dim = dim;
  o.separation = separation;
  o.seed = seed;
  return make_blobs(o);
}

NormalizationStats feature_stats(const Dataset& ds) {
  require(ds.size() >= 1, "cannot compute statistics of an empty dataset");
  const std::size_t f = ds.features();
  const double n = static_cast<double>(ds.size());
  NormalizationStats stats{std::vector<double>(f, 0.0), std::vector<double>(f, 0.0)};
  for (std::size_t r = 0; r < ds.size(); ++r) {
    auto row = ds.images.row(r);
    for (std::size_t k = 0; k < f; ++k) stats.means[k] += row[k];
  }
  for (double& m : stats.means) m /= n;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    auto row = ds.images.row(r);
    for (std::size_t k = 0; k < f; ++k) {
      const double d = row[k] - stats.means[k];
      stats.stds[k] += d * d;
    }
  }
  for (double& s : stats.stds) s = std::max(kStdFloor, std::sqrt(s / n));
  return stats;
}

Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats) {
  require(stats.means.size() == ds.features() && stats.stds.size() == ds.features(),
          "normalization statistics do not match feature count");
  Dataset out = ds;
  for (std::size_t r = 0; r < out.size(); ++r) {
    auto row = out.images.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] = (row[k] - stats.means[k]) / stats.stds[k];
    }
  }
  return out;
}

std::pair<Dataset, NormalizationStats> normalize(const Dataset& ds) {
  NormalizationStats stats = feature_stats(ds);
  Dataset out = apply_normalization(ds, stats);
  return {std::move(out), std::move(stats)};
}

std::size_t corrupted_count(double eta, std::size_t n) {
  require(eta >= 0.0 && eta <= 1.0, "noise ratio eta must be in [0, 1]");
  // The epsilon absorbs representation error, e.g. 0.7 * 10 = 6.9999999999999991.
  const double exact = eta * static_cast<double>(n);
  return std::min(n, static_cast<std::size_t>(std::floor(exact + 1e-9 * std::max(1.0, exact))));
}

Dataset inject_noise(const Dataset& ds, const NoiseSpec& spec) {
  const std::size_t count = corrupted_count(spec.eta, ds.size());
  require(ds.num_classes >= 1, "dataset has no classes");
  Dataset out = ds;
  if (out.corrupted_mask.size() != out.size()) out.corrupted_mask.assign(out.size(), false);

  Rng rng = Rng(spec.seed).split("label-noise");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = order[k];
    out.labels[i] = rng.uniform_int(ds.num_classes);
    out.corrupted_mask[i] = true;
  }
  return out;
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& ds, std::size_t holdout, std::uint64_t seed) {
  require(holdout < ds.size() || (holdout == 0 && ds.size() == 0),
          "holdout " + std::to_string(holdout) + " must be smaller than the dataset size " +
              std::to_string(ds.size()));
  Rng rng = Rng(seed).split("holdout");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const std::span<const std::size_t> all(order);
  Dataset validation = subset(ds, all.first(holdout));
  Dataset train = subset(ds, all.subspan(holdout));
  return {std::move(train), std::move(validation)};
}

}  // namespace tce
