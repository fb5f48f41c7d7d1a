#include "tce/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "tce/error.hpp"

namespace tce {
namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace

LossChoice LossChoice::parse(const std::string& text) {
  const auto colon = text.find(':');
  LossChoice choice;
  choice.kind = parse_loss_kind(text.substr(0, colon));
  if (colon != std::string::npos) {
    require(choice.kind == LossKind::TCE, "only tce takes an alpha: '" + text + "'");
    const std::string alpha = text.substr(colon + 1);
    std::size_t used = 0;
    try {
      choice.alpha = std::stod(alpha, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(!alpha.empty() && used == alpha.size(), "malformed alpha in '" + text + "'");
    require(choice.alpha >= 0.0, "alpha must be >= 0 in '" + text + "'");
  } else if (choice.kind == LossKind::TCE) {
    choice.alpha = 1.0;
  }
  return choice;
}

std::vector<LossChoice> LossChoice::parse_list(const std::string& text) {
  std::vector<LossChoice> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    require(!item.empty(), "empty entry in loss list '" + text + "'");
    out.push_back(parse(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string LossChoice::tag() const {
  if (kind != LossKind::TCE) return to_string(kind);
  return "tce-a" + format_number(alpha);
}

std::vector<SweepCell> aggregate(std::span<const RunRecord> runs) {
  std::vector<SweepCell> cells;
  std::vector<std::vector<const RunRecord*>> members;
  for (const RunRecord& run : runs) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const SweepCell& c) {
      return c.loss == run.loss && c.eta == run.eta;
    });
    if (it == cells.end()) {
      SweepCell cell;
      cell.loss = run.loss;
      cell.eta = run.eta;
      cells.push_back(cell);
      members.emplace_back();
      it = cells.end() - 1;
    }
    members[static_cast<std::size_t>(it - cells.begin())].push_back(&run);
  }

  for (std::size_t i = 0; i < cells.size(); ++i) {
    SweepCell& cell = cells[i];
    std::vector<double> test;
    std::vector<double> best;
    std::vector<double> reach;
    for (const RunRecord* run : members[i]) {
      if (run->summary.diverged) ++cell.n_diverged;
      if (run->summary.epochs_completed == 0) continue;
      test.push_back(run->summary.test_top1_at_best);
      best.push_back(static_cast<double>(run->summary.best_epoch));
      if (run->summary.epochs_to_threshold) {
        reach.push_back(static_cast<double>(*run->summary.epochs_to_threshold));
      }
    }
    cell.n_seeds = test.size();
    const MeanStd t = mean_std(test);
    cell.mean_test_top1 = t.mean;
    cell.std_test_top1 = t.std;
    cell.mean_best_epoch = mean_std(best).mean;
    cell.n_reached_threshold = reach.size();
    if (!reach.empty()) cell.mean_epochs_to_threshold = mean_std(reach).mean;
  }
  return cells;
}

std::string run_directory_name(const LossChoice& loss, double eta, std::uint64_t seed) {
  return loss.tag() + "_eta" + format_number(eta) + "_seed" + std::to_string(seed);
}

SweepResult run_sweep(const TrainConfig& base, const std::vector<LossChoice>& losses,
                      const std::vector<double>& etas, const std::vector<std::uint64_t>& seeds,
                      std::size_t jobs) {
  require(!losses.empty() && !etas.empty() && !seeds.empty(), "sweep grids must be nonempty");
  base.validate();
  const PreparedData data = prepare_data(base);

  std::vector<TrainConfig> configs;
  SweepResult result;
  for (const LossChoice& loss : losses) {
    for (double eta : etas) {
      for (std::uint64_t seed : seeds) {
        TrainConfig c = base;
        c.loss = loss.kind;
        c.alpha = loss.alpha;
        c.eta = eta;
        c.seed = seed;
        if (!base.out_dir.empty()) c.out_dir = base.out_dir / run_directory_name(loss, eta, seed);
        c.validate();
        configs.push_back(std::move(c));
        result.runs.push_back({loss, eta, seed, {}});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const RunResult run = train_on(configs[i], data);
        if (!configs[i].out_dir.empty()) write_run_outputs(configs[i].out_dir, configs[i], run);
        result.runs[i].summary = run.summary;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, configs.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.cells = aggregate(result.runs);
  if (!base.out_dir.empty()) write_sweep_outputs(base.out_dir, result);
  return result;
}

std::string format_summary_csv(std::span<const SweepCell> cells) {
  std::string out = "loss,alpha,eta,mean_test_top1,std_test_top1,mean_best_epoch,n_seeds\n";
  char buf[256];
  for (const SweepCell& c : cells) {
    const std::string std_field = c.std_test_top1 ? format_number(*c.std_test_top1) : "";
    std::snprintf(buf, sizeof buf, "%s,%g,%g,%.4f,%s,%.2f,%zu\n", to_string(c.loss.kind).c_str(),
                  c.loss.alpha, c.eta, c.mean_test_top1, std_field.c_str(), c.mean_best_epoch, c.n_seeds);
    out += buf;
  }
  return out;
}

std::string format_table_csv(std::span<const SweepCell> cells) {
  std::vector<double> etas;
  std::vector<LossChoice> losses;
  for (const SweepCell& c : cells) {
    if (std::find(etas.begin(), etas.end(), c.eta) == etas.end()) etas.push_back(c.eta);
    if (std::find(losses.begin(), losses.end(), c.loss) == losses.end()) losses.push_back(c.loss);
  }
  std::sort(etas.begin(), etas.end());
  std::string out = "loss";
  for (double eta : etas) out += ",eta=" + format_number(eta);
  out += '\n';
  char buf[64];
  for (const LossChoice& loss : losses) {
    out += loss.tag();
    for (double eta : etas) {
      const auto it = std::find_if(cells.begin(), cells.end(),
                                   [&](const SweepCell& c) { return c.loss == loss && c.eta == eta; });
      out += ',';
      if (it != cells.end() && it->n_seeds > 0) {
        std::snprintf(buf, sizeof buf, "%.2f", it->mean_test_top1);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

std::string format_runs_csv(std::span<const RunRecord> runs) {
  std::string out = "loss,alpha,eta,seed,best_epoch,test_top1_at_best,epochs_to_threshold,epochs_completed,diverged\n";
  char buf[256];
  for (const RunRecord& r : runs) {
    const std::string reach = r.summary.epochs_to_threshold ? std::to_string(*r.summary.epochs_to_threshold) : "";
    std::snprintf(buf, sizeof buf, "%s,%g,%g,%llu,%zu,%.4f,%s,%zu,%d\n", to_string(r.loss.kind).c_str(),
                  r.loss.alpha, r.eta, static_cast<unsigned long long>(r.seed), r.summary.best_epoch,
                  r.summary.test_top1_at_best, reach.c_str(), r.summary.epochs_completed,
                  r.summary.diverged ? 1 : 0);
    out += buf;
  }
  return out;
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result) {
  std::filesystem::create_directories(dir);
  write_text(dir / "summary.csv", format_summary_csv(result.cells));
  write_text(dir / "table.csv", format_table_csv(result.cells));
  write_text(dir / "runs.csv", format_runs_csv(result.runs));
}

SweepResult summarize_directory(const std::filesystem::path& dir, double threshold) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> run_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "config.json") &&
        std::filesystem::exists(entry.path() / "metrics.csv")) {
      run_dirs.push_back(entry.path());
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  if (run_dirs.empty()) throw DataError("no run directories (config.json + metrics.csv) under " + dir.string());

  SweepResult result;
  for (const auto& run_dir : run_dirs) {
    const TrainConfig config = TrainConfig::load(run_dir / "config.json");
    const std::vector<MetricsRow> metrics = read_metrics_csv(run_dir / "metrics.csv");
    RunRecord record{{config.loss, config.loss == LossKind::TCE ? config.alpha : 0.0}, config.eta,
                     config.seed, summarize_run(metrics, threshold)};
    const auto summary_path = run_dir / "summary.json";
    if (std::filesystem::exists(summary_path)) {
      std::ifstream in(summary_path);
      const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const RunSummary stored = RunSummary::from_json(text);
      record.summary.diverged = stored.diverged;
      record.summary.divergence = stored.divergence;
    }
    result.runs.push_back(std::move(record));
  }
  result.cells = aggregate(result.runs);
  return result;
}

}  // namespace tce
