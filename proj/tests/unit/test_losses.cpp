#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "tce/error.hpp"
#include "tce/losses.hpp"

using namespace tce;
using tce::testing::numeric_partial;
using tce::testing::random_matrix;
using tce::testing::rel_err;

namespace {

struct Draw {
  Matrix logits;
  std::vector<Label> labels;
};

Draw random_draw(Rng& rng, std::size_t batch, std::size_t classes) {
  Draw d{random_matrix(rng, batch, classes, -5, 5), std::vector<Label>(batch)};
  for (auto& y : d.labels) y = rng.uniform_int(classes);
  return d;
}

// Worst relative error between analytic grad_logits and test-local differences
// of scale * value.
double worst_fd_error(const LossSpec& spec, Draw d) {
  const LossOutput analytic = evaluate(spec, d.logits, d.labels);
  const double scale = spec.gradient_scale();
  double worst = 0.0;
  for (std::size_t r = 0; r < d.logits.rows(); ++r) {
    for (std::size_t c = 0; c < d.logits.cols(); ++c) {
      const double n = numeric_partial([&] { return scale * evaluate(spec, d.logits, d.labels).value; },
                                       d.logits(r, c), 2e-3);
      worst = std::max(worst, rel_err(analytic.grad_logits(r, c), n));
    }
  }
  return worst;
}

bool residuals_clear(const Draw& d, double margin) {
  const Matrix q = softmax(d.logits);
  for (std::size_t r = 0; r < q.rows(); ++r)
    for (std::size_t j = 0; j < q.cols(); ++j)
      if (std::abs(q(r, j) - (j == d.labels[r] ? 1.0 : 0.0)) <= margin) return false;
  return true;
}

}  // namespace

TEST_CASE("log_softmax") {
  const Matrix uniform = log_softmax(Matrix{{0, 0}});
  CHECK(uniform(0, 0) == doctest::Approx(-std::numbers::ln2).epsilon(1e-15));
  CHECK(uniform(0, 1) == doctest::Approx(-std::numbers::ln2).epsilon(1e-15));

  // Shifted direct formula: [0 - log(1 + e^-1000), -1000 - log(1 + e^-1000)].
  const Matrix big = log_softmax(Matrix{{1000, 0}});
  CHECK(big.all_finite());
  CHECK(std::abs(big(0, 0) - 0.0) < 1e-12);
  CHECK(std::abs(big(0, 1) + 1000.0) < 1e-12);

  Rng rng(3);
  const Matrix out = log_softmax(random_matrix(rng, 50, 9, -30, 30));
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double total = 0.0;
    for (double v : out.row(r)) {
      CHECK(v <= 0.0);
      total += std::exp(v);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }

  CHECK_THROWS_AS(log_softmax(Matrix{{0, std::nan("")}}), ContractViolation);
  CHECK_THROWS_AS(log_softmax(Matrix{{0, INFINITY}}), ContractViolation);
}

TEST_CASE("cross entropy") {
  const std::vector<Label> zero{0};
  const LossOutput out = ce(Matrix{{0, 0}}, zero);
  CHECK(out.value == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(out.grad_logits(0, 0) == doctest::Approx(-0.5));
  CHECK(out.grad_logits(0, 1) == doctest::Approx(0.5));

  // Log-likelihood gradient: -1 at the target, 0 elsewhere.
  const Matrix g = ce_loglik_gradient(log_softmax(Matrix{{1, 2, 3}, {0, 0, 0}}), std::vector<Label>{2, 0});
  CHECK(g == Matrix{{0, 0, -1}, {-1, 0, 0}});

  CHECK_THROWS_AS(ce(Matrix{{0, 0}}, std::vector<Label>{2}), ContractViolation);
  CHECK_THROWS_AS(ce(Matrix{{0, 0}}, std::vector<Label>{0, 1}), ContractViolation);

  Rng rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) worst = std::max(worst, worst_fd_error(LossSpec::ce(6), random_draw(rng, 4, 6)));
  CHECK(worst < 1e-6);
}

TEST_CASE("TCE with alpha = 0 is cross entropy") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const Draw d = random_draw(rng, 8, 10);
    const LossOutput a = tce::tce(d.logits, d.labels, 0.0);
    const LossOutput b = ce(d.logits, d.labels);
    CHECK(std::abs(a.value - b.value) < 1e-12);
    CHECK(max_abs_diff(a.grad_logits, b.grad_logits) < 1e-12);
  }
}

TEST_CASE("TCE closed forms") {
  // log q_t = -4, alpha = 1: gradient -(1 + 4)^-1 and value ln(1 + 4).
  CHECK(tce_target_gradient(-4.0, 1.0) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(tce_sample_value(-4.0, 1.0) == doctest::Approx(std::log(5.0)).epsilon(1e-15));

  // Same point reached through logits: [[0, x]] with x = log(e^4 - 1) gives log q_0 = -4.
  const double x = std::log(std::exp(4.0) - 1.0);
  const LossOutput out = tce::tce(Matrix{{0, x}}, std::vector<Label>{0}, 1.0);
  CHECK(std::abs(out.value - std::log(5.0)) < 1e-12);
  const double q0 = std::exp(-4.0);
  CHECK(std::abs(out.grad_logits(0, 0) - 0.2 * (q0 - 1.0)) < 1e-12);
  CHECK(std::abs(out.grad_logits(0, 1) - 0.2 * (1.0 - q0)) < 1e-12);

  for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0, 3.7}) {
    CHECK(tce_target_gradient(0.0, alpha) == -1.0);
    CHECK(tce_sample_value(0.0, alpha) == 0.0);
  }
  // Values against the un-normalized expression, away from alpha = 1.
  for (double alpha : {0.5, 1.5, 2.0}) {
    for (double lq : {-0.1, -1.0, -7.0}) {
      const double direct = (std::pow(1.0 - lq, 1.0 - alpha) - 1.0) / (1.0 - alpha);
      CHECK(tce_sample_value(lq, alpha) == doctest::Approx(direct).epsilon(1e-13));
    }
  }
  // Approaching alpha = 1 from either side converges to the log limit.
  CHECK(tce_sample_value(-3.0, 1.0 + 1e-9) == doctest::Approx(std::log(4.0)).epsilon(1e-8));
  CHECK(tce_sample_value(-3.0, 1.0 - 1e-9) == doctest::Approx(std::log(4.0)).epsilon(1e-8));

  CHECK_THROWS_AS(tce::tce(Matrix{{0, 0}}, std::vector<Label>{0}, -0.5), ContractViolation);
}

TEST_CASE("TCE gradient goals in log-likelihood space") {
  // Confident and correct: exactly -1 for every alpha.
  // Confidently wrong: vanishing; non-target coordinates exactly 0.
  CHECK(std::abs(tce_target_gradient(-1000.0, 1.0)) < 0.05);
  const Matrix log_q{{-1000.0, -1e-300}, {0.0, -50.0}};
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    const Matrix g = tce_loglik_gradient(log_q, std::vector<Label>{0, 0}, alpha);
    CHECK(g(0, 1) == 0.0);
    CHECK(g(1, 1) == 0.0);
    CHECK(g(1, 0) == -1.0);
    CHECK(g(0, 0) < 0.0);
  }
}

TEST_CASE("TCE gradient magnitude decreases as confidence drops") {
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    double previous = INFINITY;
    for (int i = 0; i <= 1000; ++i) {
      const double lq = -10.0 * i / 1000.0;
      const double magnitude = std::abs(tce_target_gradient(lq, alpha));
      CHECK(magnitude < previous);
      previous = magnitude;
    }
  }
}

TEST_CASE("TCE log-likelihood gradient is a nonnegative multiple of CE's") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Draw d = random_draw(rng, 6, 5);
    const Matrix lq = log_softmax(d.logits);
    const Matrix gc = ce_loglik_gradient(lq, d.labels);
    const Matrix gt = tce_loglik_gradient(lq, d.labels, 1.5);
    for (std::size_t r = 0; r < lq.rows(); ++r) {
      const double k = gt(r, d.labels[r]) / gc(r, d.labels[r]);
      CHECK(k >= 0.0);
      for (std::size_t c = 0; c < lq.cols(); ++c) CHECK(gt(r, c) == doctest::Approx(k * gc(r, c)));
    }
  }
}

TEST_CASE("CE and TCE are shift invariant with zero-sum gradient rows") {
  Rng rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const Draw d = random_draw(rng, 5, 7);
    Matrix shifted = d.logits;
    for (std::size_t r = 0; r < shifted.rows(); ++r) {
      const double c = rng.uniform(-20, 20);
      for (double& v : shifted.row(r)) v += c;
    }
    for (const LossSpec& spec : {LossSpec::ce(7), LossSpec::tce(0.5, 7), LossSpec::tce(2.0, 7)}) {
      const LossOutput a = evaluate(spec, d.logits, d.labels);
      const LossOutput b = evaluate(spec, shifted, d.labels);
      CHECK(std::abs(a.value - b.value) < 1e-10);
      CHECK(max_abs_diff(a.grad_logits, b.grad_logits) < 1e-10);
      for (std::size_t r = 0; r < a.grad_logits.rows(); ++r) {
        double sum = 0.0;
        for (double v : a.grad_logits.row(r)) sum += v;
        CHECK(std::abs(sum) < 1e-12);
      }
    }
  }
}

TEST_CASE("TCE gradient matches finite differences") {
  Rng rng(25);
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
      worst = std::max(worst, worst_fd_error(LossSpec::tce(alpha, 6), random_draw(rng, 4, 6)));
    CHECK_MESSAGE(worst < 1e-6, "alpha=" << alpha << " worst=" << worst);
  }
}

TEST_CASE("MSE adapted for classification") {
  const LossOutput perfect = mse_classif(Matrix{{1000, 0}}, std::vector<Label>{0}, 2);
  CHECK(perfect.value == 0.0);
  CHECK(perfect.grad_logits == Matrix(1, 2));

  // ((0.5 - 1)^2 + (0.5 - 0)^2) / 2
  CHECK(mse_classif(Matrix{{0, 0}}, std::vector<Label>{0}, 2).value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(mse_classif(Matrix{{0, 0}}, std::vector<Label>{3}, 2), ContractViolation);
  CHECK_THROWS_AS(mse_classif(Matrix{{0, 0}}, std::vector<Label>{0}, 3), ContractViolation);

  Rng rng(26);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) worst = std::max(worst, worst_fd_error(LossSpec::mse(6), random_draw(rng, 4, 6)));
  CHECK(worst < 1e-6);
}

TEST_CASE("MAE adapted for classification") {
  CHECK(mae_classif(Matrix{{1000, 0}}, std::vector<Label>{0}, 2).value == 0.0);
  CHECK(mae_classif(Matrix{{0, 0}}, std::vector<Label>{0}, 2).value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(mae_classif(Matrix{{0, 0}}, std::vector<Label>{2}, 2), ContractViolation);

  // At a residual kink the subgradient contribution is 0: a saturated softmax
  // has every residual exactly 0, so the whole gradient vanishes.
  CHECK(mae_classif(Matrix{{1000, 0}}, std::vector<Label>{0}, 2).grad_logits == Matrix(1, 2));

  Rng rng(27);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    Draw d = random_draw(rng, 1, 4);
    if (!residuals_clear(d, 1e-3)) continue;
    worst = std::max(worst, worst_fd_error(LossSpec::mae(4), d));
    ++checked;
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("per-sample values agree with batch means") {
  Rng rng(28);
  const Draw d = random_draw(rng, 9, 5);
  for (const LossSpec& spec : {LossSpec::ce(5), LossSpec::tce(1.0, 5), LossSpec::mse(5), LossSpec::mae(5)}) {
    const std::vector<double> each = per_sample_values(spec, d.logits, d.labels);
    double mean = 0.0;
    for (double v : each) mean += v / each.size();
    CHECK(mean == doctest::Approx(evaluate(spec, d.logits, d.labels).value).epsilon(1e-12));
  }
}

TEST_CASE("LossSpec validation and names") {
  CHECK_THROWS_AS(LossSpec::tce(-1.0, 10).validate(), ContractViolation);
  CHECK_THROWS_AS(LossSpec::ce(1).validate(), ContractViolation);
  CHECK(LossSpec::mse(10).gradient_scale() == 10.0);
  CHECK(LossSpec::tce(2.0, 10).gradient_scale() == 1.0);
  CHECK(parse_loss_kind("TCE") == LossKind::TCE);
  CHECK_THROWS_AS(parse_loss_kind("huber"), ContractViolation);
  CHECK(LossSpec::tce(1.5, 10).label() == "tce(alpha=1.5)");
}
