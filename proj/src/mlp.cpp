#include "tce/mlp.hpp"

#include <cmath>
#include <string>

#include "tce/error.hpp"

namespace tce {
namespace {

void relu_inplace(Matrix& m) {
  for (double& v : m.values()) {
    if (v < 0.0) v = 0.0;
  }
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> widths, Rng& rng) : widths_(std::move(widths)) {
  require(widths_.size() >= 2, "an MLP needs at least an input and an output width");
  for (std::size_t w : widths_) {
    require(w >= 1, "MLP widths must be positive");
  }
  layers_.reserve(widths_.size() - 1);
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    const std::size_t fan_in = widths_[i];
    const std::size_t fan_out = widths_[i + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_in, fan_out), Matrix(1, fan_out)};
    for (double& v : layer.weight.values()) {
      v = scale * rng.normal();
    }
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), "an MLP needs at least one layer");
  widths_.push_back(layers_.front().weight.rows());
  for (const DenseLayer& layer : layers_) {
    require(layer.weight.rows() == widths_.back(), "layer input width does not chain");
    require(layer.bias.rows() == 1 && layer.bias.cols() == layer.weight.cols(),
            "bias must be 1 x fan_out");
    widths_.push_back(layer.weight.cols());
  }
}

Matrix Mlp::forward(const Matrix& x) const { return forward_trace(x).logits; }

MlpTrace Mlp::forward_trace(const Matrix& x) const {
  require(x.cols() == input_width(), "input has " + std::to_string(x.cols()) +
                                         " features, model expects " +
                                         std::to_string(input_width()));
  MlpTrace trace;
  trace.inputs.reserve(layers_.size());
  trace.inputs.push_back(x);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = matmul(trace.inputs.back(), layers_[i].weight);
    add_row_broadcast(z, layers_[i].bias);
    if (i + 1 == layers_.size()) {
      trace.logits = std::move(z);
    } else {
      relu_inplace(z);
      trace.inputs.push_back(std::move(z));
    }
  }
  return trace;
}

MlpGradients Mlp::backward(const MlpTrace& trace, const Matrix& grad_logits) const {
  require(grad_logits.rows() == trace.logits.rows() && grad_logits.cols() == trace.logits.cols(),
          "grad_logits shape does not match forward output");
  MlpGradients grads;
  grads.weight.resize(layers_.size());
  grads.bias.resize(layers_.size());

  Matrix upstream = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Matrix& input = trace.inputs[i];
    grads.weight[i] = matmul_tn(input, upstream);
    grads.bias[i] = column_sums(upstream);
    if (i == 0) break;
    Matrix downstream = matmul_nt(upstream, layers_[i].weight);
    // The stored input is post-ReLU; zero entries had non-positive pre-activations.
    for (std::size_t k = 0; k < downstream.size(); ++k) {
      if (input.values()[k] <= 0.0) downstream.values()[k] = 0.0;
    }
    upstream = std::move(downstream);
  }
  return grads;
}

MlpGradients Mlp::backward(const Matrix& x, const Matrix& grad_logits) const {
  return backward(forward_trace(x), grad_logits);
}

bool Mlp::all_finite() const noexcept {
  for (const DenseLayer& layer : layers_) {
    if (!layer.weight.all_finite() || !layer.bias.all_finite()) return false;
  }
  return true;
}

}  // namespace tce
