#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace zsl {

/// Dense row-major matrix of doubles. The universal numeric carrier for
/// features, attributes, activations and parameters.
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

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double factor);

/// Adds a 1×cols row vector to every row of m.
Matrix add_row_broadcast(const Matrix& m, const Matrix& row);
/// 1×cols matrix of column sums.
Matrix column_sums(const Matrix& m);
/// 1×cols matrix of column means.
Matrix column_means(const Matrix& m);

/// Side-by-side concatenation [a | b]; row counts must agree.
Matrix hconcat(const Matrix& a, const Matrix& b);
/// Columns [begin, end) of m.
Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t end);
/// Rows of m at the given indices, in order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices);
/// Stacks a on top of b; column counts must agree.
Matrix vconcat(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);
double max_abs(const Matrix& m);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Throws ShapeError unless a and b have identical shapes.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace zsl
