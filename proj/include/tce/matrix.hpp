#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tce {

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ · b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a · bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// Adds a 1×cols row vector to every row of m.
void add_row_broadcast(Matrix& m, const Matrix& row);
/// Column sums as a 1×cols matrix.
Matrix column_sums(const Matrix& m);

/// Subtracts each row's maximum from that row.
Matrix rowwise_max_shift(const Matrix& m);

/// Index of the largest entry in each row; ties resolve to the lowest index.
std::vector<std::size_t> rowwise_argmax(const Matrix& m);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace tce
