#pragma once

#include <string>
#include <vector>

#include "insfem/types.hpp"

namespace insfem {

// Compressed-row sparse matrix. Column indices are sorted and unique within
// each row. `split` >= 0 marks the first pressure dof for field splitting:
// rows/cols [0, split) form the velocity block, [split, n) the pressure block.
struct SparseMatrixCSR {
  int nrows = 0;
  int ncols = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> vals;
  int split = -1;

  int nnz() const { return static_cast<int>(col_idx.size()); }
  void zero_values() { std::fill(vals.begin(), vals.end(), 0.0); }

  // Position of (i, j) in vals; -1 when outside the pattern.
  int find(int i, int j) const;
  double& at(int i, int j);

  void add(int i, int j, double v) { at(i, j) += v; }

  // Replaces row i by a unit diagonal row (pattern entries zeroed).
  void set_identity_row(int i);
};

SparseMatrixCSR csr_from_pattern(int nrows, int ncols, const std::vector<std::vector<int>>& rows);

// Builds from (i, j, v) triplets; duplicate entries are summed.
SparseMatrixCSR csr_from_triplets(int nrows, int ncols,
                                  const std::vector<std::tuple<int, int, double>>& trip);

std::vector<double> spmv(const SparseMatrixCSR& A, const std::vector<double>& x);
void spmv(const SparseMatrixCSR& A, const double* x, double* y);

// Extract the sub-block with rows [r0, r1) and cols [c0, c1).
SparseMatrixCSR csr_block(const SparseMatrixCSR& A, int r0, int r1, int c0, int c1);

std::vector<double> csr_to_dense(const SparseMatrixCSR& A);

// MatrixMarket coordinate format (1-based indices) for debugging.
void write_matrix_market(const SparseMatrixCSR& A, const std::string& path);

}  // namespace insfem
