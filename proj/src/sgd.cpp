#include "tce/sgd.hpp"

#include <cmath>
#include <string>

#include "tce/error.hpp"

namespace tce {

void SgdConfig::validate() const {
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning rate must be > 0");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must be in [0, 1)");
  require(std::isfinite(weight_decay) && weight_decay >= 0.0, "weight decay must be >= 0");
}

Sgd::Sgd(SgdConfig config) : config_(config) { config_.validate(); }

void Sgd::set_learning_rate(double lr) {
  require(std::isfinite(lr) && lr > 0.0, "learning rate must be > 0");
  config_.learning_rate = lr;
}

void Sgd::step(const std::vector<ParameterRef>& params) {
  if (velocity_.empty()) {
    velocity_.reserve(params.size());
    for (const ParameterRef& p : params) {
      velocity_.emplace_back(p.value->rows(), p.value->cols());
    }
  }
  require(velocity_.size() == params.size(), "parameter list changed between steps");

  const double lr = config_.learning_rate;
  const double m = config_.momentum;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = *params[i].value;
    const Matrix& grad = *params[i].grad;
    Matrix& v = velocity_[i];
    require(grad.rows() == value.rows() && grad.cols() == value.cols() &&
                v.rows() == value.rows() && v.cols() == value.cols(),
            "parameter " + std::to_string(i) + " shape does not match its gradient or velocity");
    const double decay = params[i].decay ? config_.weight_decay : 0.0;
    auto pv = value.values();
    auto gv = grad.values();
    auto vv = v.values();
    for (std::size_t k = 0; k < pv.size(); ++k) {
      const double g = gv[k] + decay * pv[k];
      vv[k] = m * vv[k] + g;
      pv[k] -= lr * (g + m * vv[k]);
    }
  }
}

void sgd_step(Sgd& optimizer, Mlp& model, const MlpGradients& grads) {
  auto& layers = model.layers();
  require(grads.weight.size() == layers.size() && grads.bias.size() == layers.size(),
          "gradient layer count does not match model");
  std::vector<ParameterRef> params;
  params.reserve(2 * layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    params.push_back({&layers[i].weight, &grads.weight[i], true});
    params.push_back({&layers[i].bias, &grads.bias[i], false});
  }
  optimizer.step(params);
}

void LrSchedule::validate() const {
  require(std::isfinite(initial) && initial > 0.0, "initial learning rate must be > 0");
  require(std::isfinite(drop_factor) && drop_factor > 0.0, "lr drop factor must be > 0");
}

double LrSchedule::at(std::size_t epoch) const {
  double lr = initial;
  for (std::size_t drop : drop_epochs) {
    if (drop <= epoch) lr /= drop_factor;
  }
  return lr;
}

}  // namespace tce
