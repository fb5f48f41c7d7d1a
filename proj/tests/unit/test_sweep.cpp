#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "tce/error.hpp"
#include "tce/sweep.hpp"

using namespace tce;
namespace fs = std::filesystem;

TEST_CASE("loss choice parsing") {
  CHECK(LossChoice::parse("ce") == LossChoice{LossKind::CE, 0.0});
  CHECK(LossChoice::parse("tce") == LossChoice{LossKind::TCE, 1.0});
  CHECK(LossChoice::parse("tce:0.5") == LossChoice{LossKind::TCE, 0.5});
  CHECK(LossChoice::parse("tce:2").tag() == "tce-a2");
  CHECK(LossChoice::parse_list("ce,mae").size() == 2);
  CHECK_THROWS_AS(LossChoice::parse("hinge"), ContractViolation);
  CHECK(run_directory_name(LossChoice::parse("tce:2"), 0.8, 1) == "tce-a2_eta0.8_seed1");
}

TEST_CASE("aggregate computes per-cell mean and sample std") {
  std::vector<RunRecord> runs;
  const double accs[] = {1.0, 2.0, 4.0};
  for (std::uint64_t s = 0; s < 3; ++s) {
    RunRecord r;
    r.loss = LossChoice::parse("ce");
    r.seed = s;
    r.summary.best_epoch = 1;
    r.summary.epochs_completed = 1;
    r.summary.test_top1_at_best = accs[s];
    runs.push_back(r);
  }
  const auto cells = aggregate(runs);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].n_seeds == 3);
  CHECK(cells[0].mean_test_top1 == doctest::Approx(7.0 / 3.0));
  CHECK(*cells[0].std_test_top1 == doctest::Approx(1.5275252316519468));
}

TEST_CASE("sweep runs the full grid and summarize rebuilds it") {
  const fs::path out = fs::temp_directory_path() / "tce_sweep_test";
  fs::remove_all(out);
  TrainConfig base;
  base.dataset = DatasetKind::Blobs;
  base.blob_classes = 3;
  base.blob_dim = 2;
  base.blob_train_per_class = 30;
  base.blob_test_per_class = 10;
  base.holdout = 15;
  base.hidden = {8};
  base.epochs = 2;
  base.batch_size = 16;
  base.out_dir = out;

  const SweepResult r = run_sweep(base, LossChoice::parse_list("ce,tce:2"), {0.0, 0.4}, {1, 2, 3}, 4);
  CHECK(r.runs.size() == 12);
  REQUIRE(r.cells.size() == 4);
  for (const auto& cell : r.cells) {
    CHECK(cell.n_seeds == 3);
    CHECK(cell.std_test_top1.has_value());
  }
  for (const char* f : {"summary.csv", "table.csv", "runs.csv"}) CHECK(fs::exists(out / f));
  CHECK(fs::exists(out / "tce-a2_eta0.4_seed3" / "metrics.csv"));

  const SweepResult again = summarize_directory(out, 0.0);
  CHECK(again.runs.size() == 12);
  REQUIRE(again.cells.size() == 4);
  for (const auto& cell : again.cells) {
    const auto match = std::find_if(r.cells.begin(), r.cells.end(), [&](const SweepCell& c) {
      return c.loss == cell.loss && c.eta == cell.eta;
    });
    REQUIRE(match != r.cells.end());
    // metrics.csv keeps four decimals of accuracy.
    CHECK(cell.mean_test_top1 == doctest::Approx(match->mean_test_top1).epsilon(1e-5));
    CHECK(cell.mean_best_epoch == match->mean_best_epoch);
  }

  const SweepResult serial = run_sweep([&] { auto b = base; b.out_dir.clear(); return b; }(),
                                       LossChoice::parse_list("ce,tce:2"), {0.0, 0.4}, {1, 2, 3}, 1);
  CHECK(format_summary_csv(serial.cells) == format_summary_csv(r.cells));
}
