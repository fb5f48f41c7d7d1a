#pragma once

#include <cstddef>
#include <vector>

#include "tce/matrix.hpp"
#include "tce/mlp.hpp"

namespace tce {

struct SgdConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;

  /// learning_rate > 0, momentum in [0, 1), weight_decay >= 0.
  void validate() const;
};

/// A parameter tensor paired with its gradient for one update.
struct ParameterRef {
  Matrix* value;
  const Matrix* grad;
  bool decay;
};

/// SGD with Nesterov momentum and L2 weight decay folded into the gradient:
///
///   g <- g + weight_decay * p      (decayed parameters only)
///   v <- momentum * v + g
///   p <- p - lr * (g + momentum * v)
///
/// Velocity buffers are created on the first step and matched to parameters by position.
class Sgd {
public:
  explicit Sgd(SgdConfig config);

  const SgdConfig& config() const noexcept { return config_; }
  void set_learning_rate(double lr);

  void step(const std::vector<ParameterRef>& params);

  const std::vector<Matrix>& velocity() const noexcept { return velocity_; }

private:
  SgdConfig config_;
  std::vector<Matrix> velocity_;
};

/// Applies one update to every layer. Weights are decayed; biases are not.
void sgd_step(Sgd& optimizer, Mlp& model, const MlpGradients& grads);

/// Piecewise-constant step schedule: lr(e) = initial / drop_factor^(#drops <= e).
struct LrSchedule {
  double initial = 0.1;
  std::vector<std::size_t> drop_epochs;
  double drop_factor = 10.0;

  void validate() const;
  double at(std::size_t epoch) const;
};

}  // namespace tce
