// Copyright 2026 The grouprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grouprec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Row-major dense matrix of doubles. Used for every embedding block and
/// every intermediate of the convolution pipelines.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw ShapeError("DenseMatrix: value count " + std::to_string(values_.size()) +
                       " does not match " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
    }
  }

  /// Builds a matrix from nested rows; all rows must share a length.
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& row : rows) {
      if (row.size() != cols) throw ShapeError("DenseMatrix::from_rows: ragged rows");
      values.insert(values.end(), row.begin(), row.end());
    }
    return DenseMatrix(rows.size(), cols, std::move(values));
  }

  static DenseMatrix random_normal(std::size_t rows, std::size_t cols, double stddev,
                                   std::mt19937_64& rng) {
    DenseMatrix m(rows, cols);
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : m.values_) v = dist(rng);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

  /// this += alpha * other
  void add_scaled(const DenseMatrix& other, double alpha) {
    require_same_shape(other, "add_scaled");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += alpha * other.values_[i];
  }

  DenseMatrix& operator+=(const DenseMatrix& other) {
    add_scaled(other, 1.0);
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& other) {
    add_scaled(other, -1.0);
    return *this;
  }
  DenseMatrix& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
  friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

  bool operator==(const DenseMatrix&) const = default;

  /// Largest absolute element-wise difference; shapes must agree.
  double max_abs_diff(const DenseMatrix& other) const {
    require_same_shape(other, "max_abs_diff");
    double best = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      best = std::max(best, std::abs(values_[i] - other.values_[i]));
    }
    return best;
  }

  double squared_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Plain triple-loop product. Only used on small test-sized operands.
  DenseMatrix matmul(const DenseMatrix& rhs) const {
    if (cols_ != rhs.rows_) {
      throw ShapeError("matmul: " + shape_string() + " times " + rhs.shape_string());
    }
    DenseMatrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
      }
    return out;
  }

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  void require_same_shape(const DenseMatrix& other, const char* what) const {
    if (!same_shape(other)) {
      throw ShapeError(std::string(what) + ": shape " + shape_string() + " vs " +
                       other.shape_string());
    }
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace grouprec
