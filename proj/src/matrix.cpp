#include "tce/matrix.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "tce/error.hpp"

namespace tce {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMajor>;
using View = Eigen::Map<RowMajor>;

ConstView view(const Matrix& m) {
  return ConstView(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

View view(Matrix& m) {
  return View(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows * cols, "matrix data length " + std::to_string(data_.size()) +
                                           " does not match shape " + shape(*this));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul shape mismatch: " + shape(a) + " x " + shape(b));
  Matrix out(a.rows(), b.cols());
  if (a.cols() == 0) {
    return out;
  }
  view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn shape mismatch: " + shape(a) + "^T x " + shape(b));
  Matrix out(a.cols(), b.cols());
  if (a.rows() == 0) {
    return out;
  }
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt shape mismatch: " + shape(a) + " x " + shape(b) + "^T");
  Matrix out(a.rows(), b.rows());
  if (a.cols() == 0) {
    return out;
  }
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(c, r) = m(r, c);
    }
  }
  return out;
}

void add_row_broadcast(Matrix& m, const Matrix& row) {
  require(row.rows() == 1 && row.cols() == m.cols(),
          "broadcast shape mismatch: " + shape(m) + " + " + shape(row));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto dst = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      dst[c] += row(0, c);
    }
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(0, c) += src[c];
    }
  }
  return out;
}

Matrix rowwise_max_shift(const Matrix& m) {
  require(!m.empty(), "rowwise_max_shift on empty matrix");
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    for (double& v : row) {
      v -= peak;
    }
  }
  return out;
}

std::vector<std::size_t> rowwise_argmax(const Matrix& m) {
  std::vector<std::size_t> out(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    // max_element returns the first maximum, which is the lowest-index tie-break.
    out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "max_abs_diff shape mismatch: " + shape(a) + " vs " + shape(b));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

}  // namespace tce
