#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tce/matrix.hpp"

namespace tce {

/// Class index of the single active entry of a one-hot target.
using Label = std::size_t;

enum class LossKind { CE, TCE, MSE, MAE };

/// Which loss to train with, plus its parameters.
///
/// alpha is the taming exponent and only matters for TCE; num_classes sets the
/// gradient scale of the softmax-prefixed regression losses (MSE, MAE).
struct LossSpec {
  LossKind kind = LossKind::CE;
  double alpha = 0.0;
  std::size_t num_classes = 2;

  static LossSpec ce(std::size_t num_classes) { return {LossKind::CE, 0.0, num_classes}; }
  static LossSpec tce(double alpha, std::size_t num_classes) { return {LossKind::TCE, alpha, num_classes}; }
  static LossSpec mse(std::size_t num_classes) { return {LossKind::MSE, 0.0, num_classes}; }
  static LossSpec mae(std::size_t num_classes) { return {LossKind::MAE, 0.0, num_classes}; }

  /// Throws ContractViolation if alpha < 0 (or non-finite) or num_classes < 2.
  void validate() const;

  /// Factor applied to the gradient relative to d(value)/d(logits): N for MSE/MAE, 1 otherwise.
  double gradient_scale() const;

  /// "ce", "tce", "mse", "mae".
  std::string name() const;
  /// Name plus alpha for TCE, e.g. "tce(alpha=1.5)".
  std::string label() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind kind);

struct LossOutput {
  /// Mean per-sample loss over the batch.
  double value = 0.0;
  /// Gradient of the (scaled) mean loss with respect to the pre-softmax logits.
  Matrix grad_logits;
};

Matrix log_softmax(const Matrix& logits);
Matrix softmax(const Matrix& logits);

LossOutput ce(const Matrix& logits, std::span<const Label> targets);
LossOutput tce(const Matrix& logits, std::span<const Label> targets, double alpha);
LossOutput mse_classif(const Matrix& logits, std::span<const Label> targets, std::size_t num_classes);
LossOutput mae_classif(const Matrix& logits, std::span<const Label> targets, std::size_t num_classes);

/// Dispatches on spec.kind.
LossOutput evaluate(const LossSpec& spec, const Matrix& logits, std::span<const Label> targets);

/// Per-sample losses (no batch reduction, no gradient). Used for reporting.
std::vector<double> per_sample_values(const LossSpec& spec, const Matrix& logits,
                                      std::span<const Label> targets);

// Log-likelihood space. These are the derivatives with respect to log q, before
// chaining through log-softmax. Both are supported on the target class only.

/// d TCE / d log q_t for one sample: -(1 - log q_t)^(-alpha).
double tce_target_gradient(double log_q_target, double alpha);
/// TCE for one sample, normalized to 0 at q_t = 1; the alpha = 1 case is the log limit.
double tce_sample_value(double log_q_target, double alpha);

/// Gradient matrix with respect to the log-likelihood matrix log_q (batch x N), unreduced.
Matrix ce_loglik_gradient(const Matrix& log_q, std::span<const Label> targets);
Matrix tce_loglik_gradient(const Matrix& log_q, std::span<const Label> targets, double alpha);

}  // namespace tce
