#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace otm {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Square sparse matrix in compressed-row form with sorted columns.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(int n) : n_(n), row_ptr_(n + 1, 0) {}

  /// Build from triplets; duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets);

  int size() const { return n_; }
  std::int64_t nonzeros() const { return static_cast<std::int64_t>(values_.size()); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y = A^T x
  void multiply_transposed(std::span<const double> x, std::span<double> y) const;
  /// y += s * A x
  void multiply_add(double s, std::span<const double> x, std::span<double> y) const;
  /// y += s * A^T x
  void multiply_add_transposed(double s, std::span<const double> x,
                               std::span<double> y) const;

  std::vector<double> diagonal() const;
  std::vector<double> row_sums() const;
  double sum() const;

  double coeff(int row, int col) const;
  /// max |A_ij - A_ji| (for symmetry checks in tests).
  double symmetry_gap() const;

 private:
  int n_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

}  // namespace otm
