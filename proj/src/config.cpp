#include "tce/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "tce/error.hpp"

namespace tce {
namespace {

using nlohmann::json;

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  require(!text.empty() && text.back() != ',', "empty entry in list '" + text + "'");
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    require(first != std::string::npos, "empty entry in list '" + text + "'");
    item = item.substr(first, last - first + 1);
    std::size_t used = 0;
    T value{};
    try {
      value = parse(item, &used);
    } catch (const std::exception&) {
      throw ContractViolation("malformed list entry '" + item + "'");
    }
    require(used == item.size(), "malformed list entry '" + item + "'");
    out.push_back(value);
  }
  return out;
}

}  // namespace

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "mnist") return DatasetKind::Mnist;
  if (name == "blobs") return DatasetKind::Blobs;
  throw ContractViolation("unknown dataset '" + name + "' (expected mnist or blobs)");
}

std::string to_string(DatasetKind kind) { return kind == DatasetKind::Mnist ? "mnist" : "blobs"; }

void TrainConfig::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
  require(eta >= 0.0 && eta <= 1.0, "eta must be in [0, 1]");
  require(epochs >= 1, "epochs must be >= 1");
  require(batch_size >= 1, "batch size must be >= 1");
  sgd().validate();
  schedule().validate();
  for (std::size_t w : hidden) require(w >= 1, "hidden widths must be >= 1");
  require(holdout >= 1, "holdout must be >= 1 (best-epoch selection needs a validation split)");
  require(threshold >= 0.0 && threshold < 100.0, "threshold must be in (0, 100), or 0 to disable");
  if (dataset == DatasetKind::Blobs) {
    require(blob_classes >= 2, "blobs need at least two classes");
    require(blob_dim >= 1 && blob_train_per_class >= 1 && blob_test_per_class >= 1,
            "blob sizes must be >= 1");
    require(blob_separation >= 0.0 && blob_std >= 0.0, "blob separation and std must be >= 0");
  }
}

std::string TrainConfig::to_json() const {
  json j;
  j["loss"] = to_string(loss);
  j["alpha"] = alpha;
  j["eta"] = eta;
  j["seed"] = seed;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["lr"] = lr;
  j["momentum"] = momentum;
  j["weight_decay"] = weight_decay;
  j["lr_drops"] = lr_drops;
  j["lr_drop_factor"] = lr_drop_factor;
  j["hidden"] = hidden;
  j["dataset"] = to_string(dataset);
  j["data_dir"] = data_dir.string();
  j["train_limit"] = train_limit;
  j["holdout"] = holdout;
  j["data_seed"] = data_seed;
  j["blob_classes"] = blob_classes;
  j["blob_dim"] = blob_dim;
  j["blob_train_per_class"] = blob_train_per_class;
  j["blob_test_per_class"] = blob_test_per_class;
  j["blob_separation"] = blob_separation;
  j["blob_std"] = blob_std;
  j["threshold"] = threshold;
  j["out_dir"] = out_dir.string();
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  TrainConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractViolation(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    // Missing keys keep their defaults.
    if (j.contains("loss")) c.loss = parse_loss_kind(j["loss"].get<std::string>());
    if (j.contains("dataset")) c.dataset = parse_dataset_kind(j["dataset"].get<std::string>());
    if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("alpha", c.alpha);
    get("eta", c.eta);
    get("seed", c.seed);
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("lr", c.lr);
    get("momentum", c.momentum);
    get("weight_decay", c.weight_decay);
    get("lr_drops", c.lr_drops);
    get("lr_drop_factor", c.lr_drop_factor);
    get("hidden", c.hidden);
    get("train_limit", c.train_limit);
    get("holdout", c.holdout);
    get("data_seed", c.data_seed);
    get("blob_classes", c.blob_classes);
    get("blob_dim", c.blob_dim);
    get("blob_train_per_class", c.blob_train_per_class);
    get("blob_test_per_class", c.blob_test_per_class);
    get("blob_separation", c.blob_separation);
    get("blob_std", c.blob_std);
    get("threshold", c.threshold);
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("bad config field: ") + e.what());
  }
  return c;
}

void TrainConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json() << '\n';
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  return parse_list<std::uint64_t>(text, [](const std::string& s, std::size_t* used) {
    require(!s.empty() && s[0] != '-', "negative seed");
    return static_cast<std::uint64_t>(std::stoull(s, used));
  });
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  return parse_list<std::size_t>(text, [](const std::string& s, std::size_t* used) {
    require(!s.empty() && s[0] != '-', "negative count");
    return static_cast<std::size_t>(std::stoull(s, used));
  });
}

std::vector<double> parse_double_list(const std::string& text) {
  return parse_list<double>(text, [](const std::string& s, std::size_t* used) { return std::stod(s, used); });
}

}  // namespace tce
