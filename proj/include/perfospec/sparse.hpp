#pragma once

#include <cstdint>
#include <vector>

#include "perfospec/parallel.hpp"

namespace perfospec {

struct Triplet {
  std::int32_t row;
  std::int32_t col;
  double value;
};

/// Compressed-sparse-row matrix. Built from triplets with duplicate summation;
/// column indices sorted within each row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::int32_t rows, std::int32_t cols, std::vector<Triplet> triplets);

  std::int32_t rows() const { return rows_; }
  std::int32_t cols() const { return cols_; }
  std::int64_t nonzeros() const { return static_cast<std::int64_t>(values_.size()); }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  double coeff(std::int32_t r, std::int32_t c) const;

  /// Largest |A_ij - A_ji| over stored entries, relative to the largest |A_ij|.
  double symmetry_defect() const;

 private:
  std::int32_t rows_ = 0;
  std::int32_t cols_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> col_idx_;
  std::vector<double> values_;
};

/// y = A x, serial reference path.
void spmv_serial(const CsrMatrix& a, const double* x, double* y);

/// y = A x, row-parallel. Each row is accumulated in the same order as the
/// serial path, so results are bit-identical.
void spmv_parallel(const CsrMatrix& a, const double* x, double* y);

void spmv(const CsrMatrix& a, const double* x, double* y,
          ExecPolicy policy = ExecPolicy::Parallel);

std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& x,
                         ExecPolicy policy = ExecPolicy::Parallel);

double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace perfospec
