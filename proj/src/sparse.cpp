#include "perfospec/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace perfospec {

CsrMatrix::CsrMatrix(std::int32_t rows, std::int32_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(static_cast<std::size_t>(rows_) + 1, 0);
  col_idx_.reserve(triplets.size());
  values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const std::int32_t r = triplets[i].row;
    const std::int32_t c = triplets[i].col;
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    double sum = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
      sum += triplets[i].value;
      ++i;
    }
    col_idx_.push_back(c);
    values_.push_back(sum);
    ++row_ptr_[static_cast<std::size_t>(r) + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
}

double CsrMatrix::coeff(std::int32_t r, std::int32_t c) const {
  for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
    if (col_idx_[k] == c) return values_[k];
  }
  return 0.0;
}

double CsrMatrix::symmetry_defect() const {
  double max_abs = 0.0;
  double max_diff = 0.0;
  for (std::int32_t r = 0; r < rows_; ++r) {
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double v = values_[k];
      max_abs = std::max(max_abs, std::abs(v));
      max_diff = std::max(max_diff, std::abs(v - coeff(col_idx_[k], r)));
    }
  }
  return max_abs > 0.0 ? max_diff / max_abs : 0.0;
}

void spmv_serial(const CsrMatrix& a, const double* x, double* y) {
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  for (std::int32_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (std::int64_t k = rp[r]; k < rp[r + 1]; ++k) acc += v[k] * x[ci[k]];
    y[r] = acc;
  }
}

void spmv_parallel(const CsrMatrix& a, const double* x, double* y) {
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  const std::int32_t n = a.rows();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int32_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::int64_t k = rp[r]; k < rp[r + 1]; ++k) acc += v[k] * x[ci[k]];
    y[r] = acc;
  }
}

void spmv(const CsrMatrix& a, const double* x, double* y, ExecPolicy policy) {
  if (policy == ExecPolicy::Parallel) {
    spmv_parallel(a, x, y);
  } else {
    spmv_serial(a, x, y);
  }
}

std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& x, ExecPolicy policy) {
  assert(static_cast<std::int32_t>(x.size()) == a.cols());
  std::vector<double> y(static_cast<std::size_t>(a.rows()));
  spmv(a, x.data(), y.data(), policy);
  return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace perfospec
