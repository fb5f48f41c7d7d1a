#pragma once

#include <cstddef>
#include <vector>

#include "tce/matrix.hpp"
#include "tce/rng.hpp"

namespace tce {

/// One affine layer: y = x * weight + bias, weight is fan_in x fan_out.
struct DenseLayer {
  Matrix weight;
  Matrix bias;  // 1 x fan_out
};

struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<Matrix> bias;
};

/// Activations kept from a forward pass so backward can reuse them.
struct MlpTrace {
  /// inputs[i] is the input to layer i (post-ReLU for i > 0); inputs[0] is x.
  std::vector<Matrix> inputs;
  Matrix logits;
};

/// Fully connected classifier: ReLU between hidden layers, identity on the output.
class Mlp {
public:
  /// widths = {input, hidden..., classes}. Weights are He-initialized
  /// (normal, std sqrt(2 / fan_in)), biases start at zero.
  Mlp(std::vector<std::size_t> widths, Rng& rng);
  /// Builds a model from explicit layers; shapes must chain.
  explicit Mlp(std::vector<DenseLayer> layers);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t input_width() const noexcept { return widths_.front(); }
  std::size_t output_width() const noexcept { return widths_.back(); }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  /// Pre-softmax logits, batch x classes.
  Matrix forward(const Matrix& x) const;
  MlpTrace forward_trace(const Matrix& x) const;

  /// Reverse-mode gradients of the loss whose logit gradient is grad_logits.
  MlpGradients backward(const MlpTrace& trace, const Matrix& grad_logits) const;
  MlpGradients backward(const Matrix& x, const Matrix& grad_logits) const;

  bool all_finite() const noexcept;

private:
  std::vector<std::size_t> widths_;
  std::vector<DenseLayer> layers_;
};

}  // namespace tce
