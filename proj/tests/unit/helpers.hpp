#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "tce/matrix.hpp"
#include "tce/rng.hpp"

namespace tce::testing {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

// Test-local five-point central difference, kept separate from tce::gradcheck.
inline double numeric_partial(const std::function<double()>& f, double& x, double h) {
  const double x0 = x;
  auto at = [&](double d) {
    x = x0 + d;
    const double v = f();
    x = x0;
    return v;
  };
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

inline double rel_err(double a, double n) {
  return std::abs(a - n) / std::max(1e-8, std::abs(a) + std::abs(n));
}

}  // namespace tce::testing
