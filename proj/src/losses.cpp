#include "tce/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tce/error.hpp"

namespace tce {
namespace {

void check_batch(const Matrix& logits, std::span<const Label> targets) {
  require(logits.rows() >= 1 && logits.cols() >= 2,
          "loss needs at least one sample and two classes, got " + std::to_string(logits.rows()) +
              "x" + std::to_string(logits.cols()));
  require(targets.size() == logits.rows(), "target count " + std::to_string(targets.size()) +
                                               " does not match batch size " +
                                               std::to_string(logits.rows()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    require(targets[i] < logits.cols(), "label " + std::to_string(targets[i]) + " at row " +
                                            std::to_string(i) + " out of range [0, " +
                                            std::to_string(logits.cols()) + ")");
  }
}

void check_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha >= 0.0,
          "TCE alpha must be a finite value >= 0, got " + std::to_string(alpha));
}

// Neumaier-compensated mean; keeps the batch reduction from swamping the
// per-sample differences that finite-difference checks look at.
class MeanAccumulator {
public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
    ++count_;
  }
  double mean() const noexcept { return count_ == 0 ? 0.0 : (sum_ + carry_) / static_cast<double>(count_); }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
  std::size_t count_ = 0;
};

// Chains a probability-space gradient g (dL/dq) through softmax:
// dL/do_j = q_j * (g_j - sum_i g_i q_i).
void chain_through_softmax(std::span<const double> q, std::span<double> g) {
  double dot = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    dot += g[j] * q[j];
  }
  for (std::size_t j = 0; j < q.size(); ++j) {
    g[j] = q[j] * (g[j] - dot);
  }
}

enum class Residual { Squared, Absolute };

LossOutput regression_classif(const Matrix& logits, std::span<const Label> targets,
                              std::size_t num_classes, Residual kind) {
  check_batch(logits, targets);
  require(num_classes == logits.cols(), "num_classes " + std::to_string(num_classes) +
                                            " does not match logits width " +
                                            std::to_string(logits.cols()));
  const Matrix q = softmax(logits);
  const double n = static_cast<double>(num_classes);
  const double batch = static_cast<double>(logits.rows());

  LossOutput out{0.0, Matrix(logits.rows(), logits.cols())};
  MeanAccumulator mean;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto qr = q.row(r);
    auto g = out.grad_logits.row(r);
    double sample = 0.0;
    for (std::size_t j = 0; j < qr.size(); ++j) {
      const double residual = qr[j] - (j == targets[r] ? 1.0 : 0.0);
      if (kind == Residual::Squared) {
        sample += residual * residual;
        // d/dq of sum(r^2)/N is 2r/N; scaling by N leaves 2r.
        g[j] = 2.0 * residual;
      } else {
        sample += std::abs(residual);
        g[j] = residual > 0.0 ? 1.0 : (residual < 0.0 ? -1.0 : 0.0);
      }
    }
    mean.add(sample / n);
    chain_through_softmax(qr, g);
    for (double& v : g) {
      v /= batch;
    }
  }
  out.value = mean.mean();
  return out;
}

}  // namespace

void LossSpec::validate() const {
  require(num_classes >= 2, "num_classes must be >= 2, got " + std::to_string(num_classes));
  check_alpha(alpha);
}

double LossSpec::gradient_scale() const {
  return (kind == LossKind::MSE || kind == LossKind::MAE) ? static_cast<double>(num_classes) : 1.0;
}

std::string LossSpec::name() const { return to_string(kind); }

std::string LossSpec::label() const {
  if (kind != LossKind::TCE) {
    return name();
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "tce(alpha=%g)", alpha);
  return buf;
}

LossKind parse_loss_kind(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ce") return LossKind::CE;
  if (lower == "tce") return LossKind::TCE;
  if (lower == "mse") return LossKind::MSE;
  if (lower == "mae") return LossKind::MAE;
  throw ContractViolation("unknown loss '" + name + "' (expected ce, tce, mse or mae)");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::CE: return "ce";
    case LossKind::TCE: return "tce";
    case LossKind::MSE: return "mse";
    case LossKind::MAE: return "mae";
  }
  return "?";
}

Matrix log_softmax(const Matrix& logits) {
  require(logits.all_finite(), "log_softmax input contains non-finite values");
  Matrix out = rowwise_max_shift(logits);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double total = 0.0;
    for (double v : row) {
      total += std::exp(v);
    }
    // The shifted maximum is 0, so total >= 1 and the log is >= 0.
    const double lse = std::log(total);
    for (double& v : row) {
      v -= lse;
    }
  }
  return out;
}

Matrix softmax(const Matrix& logits) {
  require(logits.all_finite(), "softmax input contains non-finite values");
  Matrix out = rowwise_max_shift(logits);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v);
      total += v;
    }
    for (double& v : row) {
      v /= total;
    }
  }
  return out;
}

double tce_target_gradient(double log_q_target, double alpha) {
  return -std::pow(1.0 - log_q_target, -alpha);
}

double tce_sample_value(double log_q_target, double alpha) {
  // With u = log(1 - log q_t) >= 0 the normalized loss is expm1((1-a) u) / (1-a),
  // whose a -> 1 limit is u itself.
  const double u = std::log1p(-log_q_target);
  const double k = 1.0 - alpha;
  if (k == 0.0) {
    return u;
  }
  return std::expm1(k * u) / k;
}

LossOutput ce(const Matrix& logits, std::span<const Label> targets) {
  check_batch(logits, targets);
  const Matrix log_q = log_softmax(logits);
  const double batch = static_cast<double>(logits.rows());

  LossOutput out{0.0, Matrix(logits.rows(), logits.cols())};
  MeanAccumulator mean;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto lq = log_q.row(r);
    auto g = out.grad_logits.row(r);
    mean.add(-lq[targets[r]]);
    const double weight = 1.0 / batch;
    for (std::size_t j = 0; j < lq.size(); ++j) {
      g[j] = weight * std::exp(lq[j]);
    }
    g[targets[r]] -= weight;
  }
  out.value = mean.mean();
  return out;
}

LossOutput tce(const Matrix& logits, std::span<const Label> targets, double alpha) {
  check_alpha(alpha);
  check_batch(logits, targets);
  const Matrix log_q = log_softmax(logits);
  const double batch = static_cast<double>(logits.rows());

  LossOutput out{0.0, Matrix(logits.rows(), logits.cols())};
  MeanAccumulator mean;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto lq = log_q.row(r);
    auto g = out.grad_logits.row(r);
    const double lq_t = lq[targets[r]];
    mean.add(tce_sample_value(lq_t, alpha));
    // Only the target coordinate carries gradient in log-likelihood space, so
    // chaining through log-softmax gives w * (q - onehot) with w = -dL/dlog q_t.
    const double weight = -tce_target_gradient(lq_t, alpha) / batch;
    for (std::size_t j = 0; j < lq.size(); ++j) {
      g[j] = weight * std::exp(lq[j]);
    }
    g[targets[r]] -= weight;
  }
  out.value = mean.mean();
  return out;
}

LossOutput mse_classif(const Matrix& logits, std::span<const Label> targets, std::size_t num_classes) {
  return regression_classif(logits, targets, num_classes, Residual::Squared);
}

LossOutput mae_classif(const Matrix& logits, std::span<const Label> targets, std::size_t num_classes) {
  return regression_classif(logits, targets, num_classes, Residual::Absolute);
}

LossOutput evaluate(const LossSpec& spec, const Matrix& logits, std::span<const Label> targets) {
  spec.validate();
  require(spec.num_classes == logits.cols(), "loss configured for " +
                                                 std::to_string(spec.num_classes) +
                                                 " classes but logits have " +
                                                 std::to_string(logits.cols()));
  switch (spec.kind) {
    case LossKind::CE: return ce(logits, targets);
    case LossKind::TCE: return tce(logits, targets, spec.alpha);
    case LossKind::MSE: return mse_classif(logits, targets, spec.num_classes);
    case LossKind::MAE: return mae_classif(logits, targets, spec.num_classes);
  }
  throw ContractViolation("unhandled loss kind");
}

std::vector<double> per_sample_values(const LossSpec& spec, const Matrix& logits,
                                      std::span<const Label> targets) {
  spec.validate();
  check_batch(logits, targets);
  std::vector<double> out(logits.rows());
  if (spec.kind == LossKind::CE || spec.kind == LossKind::TCE) {
    const Matrix log_q = log_softmax(logits);
    for (std::size_t r = 0; r < out.size(); ++r) {
      const double lq_t = log_q(r, targets[r]);
      out[r] = spec.kind == LossKind::CE ? -lq_t : tce_sample_value(lq_t, spec.alpha);
    }
    return out;
  }
  const Matrix q = softmax(logits);
  for (std::size_t r = 0; r < out.size(); ++r) {
    double sample = 0.0;
    for (std::size_t j = 0; j < q.cols(); ++j) {
      const double residual = q(r, j) - (j == targets[r] ? 1.0 : 0.0);
      sample += spec.kind == LossKind::MSE ? residual * residual : std::abs(residual);
    }
    out[r] = sample / static_cast<double>(q.cols());
  }
  return out;
}

Matrix ce_loglik_gradient(const Matrix& log_q, std::span<const Label> targets) {
  check_batch(log_q, targets);
  Matrix out(log_q.rows(), log_q.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    out(r, targets[r]) = -1.0;
  }
  return out;
}

Matrix tce_loglik_gradient(const Matrix& log_q, std::span<const Label> targets, double alpha) {
  check_alpha(alpha);
  check_batch(log_q, targets);
  Matrix out(log_q.rows(), log_q.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    out(r, targets[r]) = tce_target_gradient(log_q(r, targets[r]), alpha);
  }
  return out;
}

}  // namespace tce
