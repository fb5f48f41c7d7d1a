#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tce/losses.hpp"
#include "tce/sgd.hpp"

namespace tce {

enum class DatasetKind { Mnist, Blobs };

DatasetKind parse_dataset_kind(const std::string& name);
std::string to_string(DatasetKind kind);

/// Everything that determines one training run. Defaults are the desk-scale
/// protocol: MNIST subset, 784-256-128-10 MLP, 60 epochs with lr drops at 30
/// and 45, Nesterov SGD (lr 0.1, momentum 0.9, decay 1e-4), batch 128.
struct TrainConfig {
  LossKind loss = LossKind::CE;
  double alpha = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 1;

  std::size_t epochs = 60;
  std::size_t batch_size = 128;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<std::size_t> lr_drops{30, 45};
  double lr_drop_factor = 10.0;

  std::vector<std::size_t> hidden{256, 128};

  DatasetKind dataset = DatasetKind::Mnist;
  std::filesystem::path data_dir = "data/mnist10k";
  /// Keep only the first n training samples (0 keeps all).
  std::size_t train_limit = 0;
  std::size_t holdout = 1000;
  /// Seeds the validation/test split and blob generation; fixed across run seeds.
  std::uint64_t data_seed = 0;

  std::size_t blob_classes = 10;
  std::size_t blob_dim = 20;
  std::size_t blob_train_per_class = 100;
  std::size_t blob_test_per_class = 50;
  double blob_separation = 4.0;
  double blob_std = 1.0;

  /// Accuracy threshold (percent) for epochs-to-threshold; 0 disables it.
  double threshold = 0.0;

  std::filesystem::path out_dir;

  /// Throws ContractViolation on any out-of-contract field.
  void validate() const;

  LossSpec loss_spec(std::size_t num_classes) const { return {loss, alpha, num_classes}; }
  SgdConfig sgd() const { return {lr, momentum, weight_decay}; }
  LrSchedule schedule() const { return {lr, lr_drops, lr_drop_factor}; }

  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static TrainConfig load(const std::filesystem::path& path);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// "1,2,3" -> {1, 2, 3}. Throws ContractViolation on malformed entries.
std::vector<std::uint64_t> parse_u64_list(const std::string& text);
std::vector<std::size_t> parse_size_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace tce
