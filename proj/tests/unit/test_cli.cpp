#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "tce/cli.hpp"

using namespace tce;

namespace {

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("gradcheck exit codes") {
  std::string text;
  CHECK(run_cli({"gradcheck", "--loss", "tce", "--alpha", "1.5", "--trials", "10"}, &text) == 0);
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(run_cli({"gradcheck", "--loss", "tce", "--alpha", "-1"}) == cli::kUsageError);
  CHECK(run_cli({"gradcheck", "--loss", "tce", "--tolerance", "1e-30", "--trials", "5"}) ==
        cli::kGradcheckFailure);
}

TEST_CASE("usage errors") {
  CHECK(run_cli({}) == cli::kUsageError);
  CHECK(run_cli({"frobnicate"}) == cli::kUsageError);
  CHECK(run_cli({"train", "--loss", "hinge"}) == cli::kUsageError);
  CHECK(run_cli({"train", "--eta", "1.5", "--dataset", "blobs"}) == cli::kUsageError);
  CHECK(run_cli({"--help"}) == cli::kSuccess);
}

TEST_CASE("missing data gives exit 2") {
  std::string text;
  CHECK(run_cli({"train", "--data-dir", "/nonexistent/x", "--epochs", "1"}, &text) == cli::kDataError);
  CHECK(text.find("/nonexistent/x") != std::string::npos);
}

TEST_CASE("train and summarize on blobs") {
  const auto out = std::filesystem::temp_directory_path() / "tce_cli_test";
  std::filesystem::remove_all(out);
  CHECK(run_cli({"train", "--dataset", "blobs", "--blob-classes", "3", "--blob-dim", "2", "--epochs", "2",
                 "--hidden", "8", "--holdout", "30", "--quiet", "--out", (out / "run").string()}) == 0);
  CHECK(std::filesystem::exists(out / "run" / "metrics.csv"));
  CHECK(run_cli({"train", "--config", (out / "run" / "config.json").string(), "--epochs", "1", "--quiet", "--out",
                 (out / "run2").string()}) == 0);
  CHECK(run_cli({"summarize", "--out", out.string()}) == 0);
  CHECK(std::filesystem::exists(out / "summary.csv"));
}
