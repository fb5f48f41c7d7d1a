#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "tce/losses.hpp"
#include "tce/matrix.hpp"

namespace tce::gradcheck {

struct Coordinate {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

struct GradReport {
  double max_rel_error = 0.0;
  Coordinate worst_coordinate;
  bool passed = false;
  double tolerance = 0.0;
  std::size_t trials = 0;
  /// Non-empty when the check could not be completed (e.g. a non-finite evaluation).
  std::string failure;
};

/// f evaluated to a non-finite value while probing the given coordinate.
class NonFiniteEvaluation : public std::runtime_error {
public:
  NonFiniteEvaluation(Coordinate where, double value);
  Coordinate coordinate;
};

using ScalarFunction = std::function<double(const Matrix&)>;

inline constexpr double kDefaultStep = 1e-6;
/// Step used by check_loss with the five-point stencil.
inline constexpr double kStencilStep = 2e-3;
inline constexpr double kSmoothTolerance = 1e-5;
inline constexpr double kMaeTolerance = 1e-4;
inline constexpr double kLogitRange = 5.0;
inline constexpr double kMaeKinkMargin = 1e-3;

enum class Stencil {
  /// (f(x + h) - f(x - h)) / 2h, truncation O(h^2).
  Central,
  /// Richardson extrapolation of two central differences (steps h and 2h),
  /// truncation O(h^4). Lets the step grow until round-off in f stops
  /// dominating coordinates whose gradient is ~1e-8.
  FivePoint,
};

/// Central differences for every coordinate of x.
Matrix finite_diff(const ScalarFunction& f, const Matrix& x, double step = kDefaultStep,
                   Stencil stencil = Stencil::Central);

/// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

GradReport compare(const Matrix& analytic, const Matrix& numeric, double tolerance);

double default_tolerance(LossKind kind);

struct CheckOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t batch = 8;
  double step = kStencilStep;
  Stencil stencil = Stencil::FivePoint;
  std::optional<double> tolerance;
};

/// Draws `trials` random batches (logits uniform in [-5, 5], uniform labels) and
/// compares the loss's analytic grad_logits to finite differences of its
/// gradient-scaled value. MAE batches are resampled row by row until every
/// softmax residual is at least 1e-3 away from its kink.
GradReport check_loss(const LossSpec& spec, const CheckOptions& options = {});

std::string format_report(const LossSpec& spec, const GradReport& report);

}  // namespace tce::gradcheck
