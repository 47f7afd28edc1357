#include "otm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace otm {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  SparseMatrix m(n);
  m.cols_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const int r = triplets[i].row, c = triplets[i].col;
    if (r < 0 || r >= n || c < 0 || c >= n)
      throw std::invalid_argument("SparseMatrix: triplet index out of range");
    double v = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i)
      v += triplets[i].value;
    m.row_ptr_[r + 1]++;
    m.cols_.push_back(c);
    m.values_.push_back(v);
  }
  for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      acc += values_[k] * x[cols_[k]];
    y[r] = acc;
  }
}

void SparseMatrix::multiply_transposed(std::span<const double> x,
                                       std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  multiply_add_transposed(1.0, x, y);
}

void SparseMatrix::multiply_add(double s, std::span<const double> x,
                                std::span<double> y) const {
  for (int r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      acc += values_[k] * x[cols_[k]];
    y[r] += s * acc;
  }
}

void SparseMatrix::multiply_add_transposed(double s, std::span<const double> x,
                                           std::span<double> y) const {
  for (int r = 0; r < n_; ++r) {
    const double xr = s * x[r];
    if (xr == 0.0) continue;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      y[cols_[k]] += values_[k] * xr;
  }
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (cols_[k] == r) d[r] = values_[k];
  return d;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s[r] += values_[k];
  return s;
}

double SparseMatrix::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double SparseMatrix::coeff(int row, int col) const {
  for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
    if (cols_[k] == col) return values_[k];
  return 0.0;
}

double SparseMatrix::symmetry_gap() const {
  double gap = 0.0;
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      gap = std::max(gap, std::abs(values_[k] - coeff(cols_[k], r)));
  return gap;
}

}  // namespace otm
