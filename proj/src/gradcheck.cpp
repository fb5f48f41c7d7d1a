#include "tce/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "tce/error.hpp"
#include "tce/rng.hpp"

namespace tce::gradcheck {
namespace {

bool clear_of_kinks(std::span<const double> logits_row, Label target) {
  Matrix single(1, logits_row.size(), std::vector<double>(logits_row.begin(), logits_row.end()));
  const Matrix q = softmax(single);
  for (std::size_t j = 0; j < q.cols(); ++j) {
    const double residual = q(0, j) - (j == target ? 1.0 : 0.0);
    if (std::abs(residual) <= kMaeKinkMargin) {
      return false;
    }
  }
  return true;
}

}  // namespace

NonFiniteEvaluation::NonFiniteEvaluation(Coordinate where, double value)
    : std::runtime_error("non-finite function value " + std::to_string(value) + " at coordinate (" +
                         std::to_string(where.row) + ", " + std::to_string(where.col) + ")"),
      coordinate(where) {}

Matrix finite_diff(const ScalarFunction& f, const Matrix& x, double step, Stencil stencil) {
  require(step > 0.0 && std::isfinite(step), "finite_diff step must be positive");
  Matrix probe = x;
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double original = probe(r, c);
      auto at = [&](double offset) {
        probe(r, c) = original + offset;
        const double v = f(probe);
        probe(r, c) = original;
        if (!std::isfinite(v)) throw NonFiniteEvaluation({r, c}, v);
        return v;
      };
      const double near = at(step) - at(-step);
      if (stencil == Stencil::Central) {
        out(r, c) = near / (2.0 * step);
      } else {
        const double far = at(2.0 * step) - at(-2.0 * step);
        out(r, c) = (8.0 * near - far) / (12.0 * step);
      }
    }
  }
  return out;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradReport compare(const Matrix& analytic, const Matrix& numeric, double tolerance) {
  require(analytic.rows() == numeric.rows() && analytic.cols() == numeric.cols(),
          "gradient shapes differ");
  GradReport report;
  report.tolerance = tolerance;
  report.trials = 1;
  for (std::size_t r = 0; r < analytic.rows(); ++r) {
    for (std::size_t c = 0; c < analytic.cols(); ++c) {
      const double err = relative_error(analytic(r, c), numeric(r, c));
      if (err > report.max_rel_error || std::isnan(err)) {
        report.max_rel_error = err;
        report.worst_coordinate = {r, c};
      }
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

double default_tolerance(LossKind kind) {
  return kind == LossKind::MAE ? kMaeTolerance : kSmoothTolerance;
}

GradReport check_loss(const LossSpec& spec, const CheckOptions& options) {
  spec.validate();
  require(options.trials >= 1, "check_loss needs at least one trial");
  require(options.batch >= 1, "check_loss needs a nonempty batch");

  const double tolerance = options.tolerance.value_or(default_tolerance(spec.kind));
  const double scale = spec.gradient_scale();
  const std::size_t classes = spec.num_classes;

  GradReport worst;
  worst.tolerance = tolerance;
  worst.trials = options.trials;
  const Rng root(options.seed);

  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    Rng rng = root.split(trial);
    Matrix logits(options.batch, classes);
    std::vector<Label> labels(options.batch);
    for (std::size_t r = 0; r < options.batch; ++r) {
      do {
        for (double& v : logits.row(r)) {
          v = rng.uniform(-kLogitRange, kLogitRange);
        }
        labels[r] = rng.uniform_int(classes);
      } while (spec.kind == LossKind::MAE && !clear_of_kinks(logits.row(r), labels[r]));
    }

    const LossOutput analytic = evaluate(spec, logits, labels);
    Matrix numeric;
    try {
      numeric = finite_diff([&](const Matrix& x) { return scale * evaluate(spec, x, labels).value; },
                            logits, options.step, options.stencil);
    } catch (const NonFiniteEvaluation& e) {
      worst.passed = false;
      worst.worst_coordinate = e.coordinate;
      worst.failure = "trial " + std::to_string(trial) + ": " + e.what();
      return worst;
    }

    const GradReport trial_report = compare(analytic.grad_logits, numeric, tolerance);
    if (trial == 0 || trial_report.max_rel_error > worst.max_rel_error) {
      worst.max_rel_error = trial_report.max_rel_error;
      worst.worst_coordinate = trial_report.worst_coordinate;
    }
  }
  worst.passed = worst.max_rel_error < tolerance;
  return worst;
}

std::string format_report(const LossSpec& spec, const GradReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s: %s  max_rel_error=%.3e  tolerance=%.1e  worst=(%zu,%zu)  trials=%zu",
                spec.label().c_str(), report.passed ? "PASS" : "FAIL", report.max_rel_error,
                report.tolerance, report.worst_coordinate.row, report.worst_coordinate.col,
                report.trials);
  std::string out = buf;
  if (!report.failure.empty()) {
    out += "  (" + report.failure + ")";
  }
  return out;
}

}  // namespace tce::gradcheck
