#include "tce/training.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "tce/error.hpp"
#include "tce/idx.hpp"
#include "tce/losses.hpp"
#include "tce/rng.hpp"
#include "tce/sgd.hpp"

namespace tce {
namespace {

constexpr std::size_t kEvalChunk = 512;

std::filesystem::path find_idx(const std::filesystem::path& dir, const std::string& stem) {
  for (const std::string& name : {stem, stem + ".gz"}) {
    if (std::filesystem::exists(dir / name)) return dir / name;
  }
  throw DataError("MNIST file not found: expected " + (dir / stem).string() + " or " +
                  (dir / (stem + ".gz")).string() +
                  " (point --data-dir at an MNIST download, or build the bundled subset with "
                  "tools/make_mnist_subset.py)");
}

Dataset first_n(const Dataset& ds, std::size_t n) {
  std::vector<std::size_t> idx(std::min(n, ds.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return subset(ds, idx);
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::copy_n(m.row(rows[k]).begin(), m.cols(), out.row(k).begin());
  }
  return out;
}

double accuracy(const Mlp& model, const Dataset& ds) {
  return top1_percent(predict(model, ds.images), ds.labels);
}

}  // namespace

PreparedData prepare_data(const TrainConfig& config) {
  config.validate();
  Dataset train;
  Dataset validation;
  Dataset test;

  if (config.dataset == DatasetKind::Mnist) {
    Dataset full = idx::load_mnist(find_idx(config.data_dir, "train-images-idx3-ubyte"),
                                   find_idx(config.data_dir, "train-labels-idx1-ubyte"));
    if (config.train_limit > 0) full = first_n(full, config.train_limit);
    test = idx::load_mnist(find_idx(config.data_dir, "t10k-images-idx3-ubyte"),
                           find_idx(config.data_dir, "t10k-labels-idx1-ubyte"));
    require(config.holdout < full.size(), "holdout " + std::to_string(config.holdout) +
                                              " must be smaller than the training set (" +
                                              std::to_string(full.size()) + ")");
    std::tie(train, validation) = holdout_split(full, config.holdout, config.data_seed);
  } else {
    BlobOptions blobs;
    blobs.n_per_class = config.blob_train_per_class + config.blob_test_per_class;
    blobs.num_classes = config.blob_classes;
    blobs.dim = config.blob_dim;
    blobs.separation = config.blob_separation;
    blobs.cluster_std = config.blob_std;
    blobs.seed = config.data_seed;
    const Dataset full = make_blobs(blobs);
    Dataset rest;
    const std::size_t test_count = config.blob_test_per_class * config.blob_classes;
    std::tie(rest, test) = holdout_split(full, test_count, Rng(config.data_seed).split("test").lineage());
    require(config.holdout < rest.size(), "holdout " + std::to_string(config.holdout) +
                                              " must be smaller than the training set (" +
                                              std::to_string(rest.size()) + ")");
    std::tie(train, validation) = holdout_split(rest, config.holdout, config.data_seed);
  }

  PreparedData out;
  out.num_classes = train.num_classes;
  auto [normalized, stats] = normalize(train);
  out.train = std::move(normalized);
  out.validation = apply_normalization(validation, stats);
  out.test = apply_normalization(test, stats);
  return out;
}

std::uint64_t noise_seed(std::uint64_t seed, double eta) {
  return Rng(seed).split("noise").split(std::bit_cast<std::uint64_t>(eta)).lineage();
}

std::vector<std::size_t> predict(const Mlp& model, const Matrix& images) {
  std::vector<std::size_t> out;
  out.reserve(images.rows());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < images.rows(); start += kEvalChunk) {
    const std::size_t end = std::min(images.rows(), start + kEvalChunk);
    rows.resize(end - start);
    std::iota(rows.begin(), rows.end(), start);
    const std::vector<std::size_t> chunk = rowwise_argmax(model.forward(gather_rows(images, rows)));
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

RunSummary summarize_run(const std::vector<MetricsRow>& metrics, double threshold) {
  RunSummary s;
  s.epochs_completed = metrics.size();
  if (metrics.empty()) return s;
  s.best_epoch = select_best_epoch(metrics);
  const auto best = std::find_if(metrics.begin(), metrics.end(),
                                 [&](const MetricsRow& r) { return r.epoch == s.best_epoch; });
  s.test_top1_at_best = best->test_top1;
  s.val_top1_at_best = best->val_top1;
  if (threshold > 0.0) s.epochs_to_threshold = epochs_to_threshold(metrics, threshold);
  return s;
}

RunResult train_on(const TrainConfig& config, const PreparedData& data, const EpochCallback& on_epoch) {
  config.validate();
  const LossSpec spec = config.loss_spec(data.num_classes);
  spec.validate();
  require(data.train.size() >= 1, "empty training set");

  const Dataset train = inject_noise(data.train, {config.eta, noise_seed(config.seed, config.eta)});

  const Rng root(config.seed);
  Rng init = root.split("init");
  std::vector<std::size_t> widths{train.features()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(data.num_classes);
  Mlp model(widths, init);

  Sgd optimizer(config.sgd());
  const LrSchedule schedule = config.schedule();

  RunResult result;
  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 1; epoch <= config.epochs && !result.summary.diverged; ++epoch) {
    const double lr = schedule.at(epoch);
    optimizer.set_learning_rate(lr);

    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = root.split("shuffle").split(epoch);
    shuffle.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::vector<Label> batch_labels;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      batch_labels.resize(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) batch_labels[k] = train.labels[rows[k]];

      const MlpTrace trace = model.forward_trace(gather_rows(train.images, rows));
      if (!trace.logits.all_finite()) {
        result.summary.diverged = true;
        result.summary.divergence = "non-finite logits in epoch " + std::to_string(epoch);
        break;
      }
      const LossOutput out = evaluate(spec, trace.logits, batch_labels);
      if (!std::isfinite(out.value) || !out.grad_logits.all_finite()) {
        result.summary.diverged = true;
        result.summary.divergence = "non-finite loss in epoch " + std::to_string(epoch);
        break;
      }
      loss_sum += out.value * static_cast<double>(rows.size());
      const std::vector<std::size_t> predicted = rowwise_argmax(trace.logits);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (predicted[k] == batch_labels[k]) ++correct;
      }

      sgd_step(optimizer, model, model.backward(trace, out.grad_logits));
      if (!model.all_finite()) {
        result.summary.diverged = true;
        result.summary.divergence = "non-finite weights in epoch " + std::to_string(epoch);
        break;
      }
    }
    if (result.summary.diverged) break;

    MetricsRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(train.size());
    row.train_top1 = 100.0 * static_cast<double>(correct) / static_cast<double>(train.size());
    row.val_top1 = accuracy(model, data.validation);
    row.test_top1 = accuracy(model, data.test);
    row.lr = lr;
    result.metrics.push_back(row);
    if (on_epoch) on_epoch(row);
  }

  const bool diverged = result.summary.diverged;
  const std::string why = result.summary.divergence;
  result.summary = summarize_run(result.metrics, config.threshold);
  result.summary.diverged = diverged;
  result.summary.divergence = why;
  return result;
}

RunResult run_training(const TrainConfig& config, const EpochCallback& on_epoch) {
  const PreparedData data = prepare_data(config);
  RunResult result = train_on(config, data, on_epoch);
  if (!config.out_dir.empty()) write_run_outputs(config.out_dir, config, result);
  return result;
}

void write_run_outputs(const std::filesystem::path& dir, const TrainConfig& config, const RunResult& result) {
  std::filesystem::create_directories(dir);
  write_metrics_csv(dir / "metrics.csv", result.metrics);
  config.save(dir / "config.json");
  std::ofstream summary(dir / "summary.json");
  if (!summary) throw DataError("cannot write " + (dir / "summary.json").string());
  summary << result.summary.to_json() << '\n';
}

std::string RunSummary::to_json() const {
  nlohmann::json j;
  j["best_epoch"] = best_epoch;
  j["test_top1_at_best"] = test_top1_at_best;
  j["val_top1_at_best"] = val_top1_at_best;
  j["epochs_to_threshold"] = epochs_to_threshold ? nlohmann::json(*epochs_to_threshold) : nlohmann::json();
  j["epochs_completed"] = epochs_completed;
  j["diverged"] = diverged;
  j["divergence"] = divergence;
  return j.dump(2);
}

RunSummary RunSummary::from_json(const std::string& text) {
  RunSummary s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.best_epoch = j.at("best_epoch").get<std::size_t>();
    s.test_top1_at_best = j.at("test_top1_at_best").get<double>();
    s.val_top1_at_best = j.at("val_top1_at_best").get<double>();
    if (!j.at("epochs_to_threshold").is_null()) {
      s.epochs_to_threshold = j.at("epochs_to_threshold").get<std::size_t>();
    }
    s.epochs_completed = j.at("epochs_completed").get<std::size_t>();
    s.diverged = j.at("diverged").get<bool>();
    s.divergence = j.value("divergence", "");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed run summary: ") + e.what());
  }
  return s;
}

}  // namespace tce
