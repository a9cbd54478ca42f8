#include "insfem/csr.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <tuple>

namespace insfem {

int SparseMatrixCSR::find(int i, int j) const {
  const int lo = row_ptr[i], hi = row_ptr[i + 1];
  auto it = std::lower_bound(col_idx.begin() + lo, col_idx.begin() + hi, j);
  if (it == col_idx.begin() + hi || *it != j) return -1;
  return static_cast<int>(it - col_idx.begin());
}

double& SparseMatrixCSR::at(int i, int j) {
  const int k = find(i, j);
  if (k < 0) throw InvalidArgument("CSR entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") outside sparsity pattern");
  return vals[k];
}

void SparseMatrixCSR::set_identity_row(int i) {
  for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) vals[k] = col_idx[k] == i ? 1.0 : 0.0;
}

SparseMatrixCSR csr_from_pattern(int nrows, int ncols, const std::vector<std::vector<int>>& rows) {
  SparseMatrixCSR A;
  A.nrows = nrows;
  A.ncols = ncols;
  A.row_ptr.resize(nrows + 1, 0);
  for (int i = 0; i < nrows; ++i) A.row_ptr[i + 1] = A.row_ptr[i] + static_cast<int>(rows[i].size());
  A.col_idx.reserve(A.row_ptr[nrows]);
  for (int i = 0; i < nrows; ++i)
    A.col_idx.insert(A.col_idx.end(), rows[i].begin(), rows[i].end());
  A.vals.assign(A.col_idx.size(), 0.0);
  return A;
}

SparseMatrixCSR csr_from_triplets(int nrows, int ncols,
                                  const std::vector<std::tuple<int, int, double>>& trip) {
  std::vector<std::vector<std::pair<int, double>>> rows(nrows);
  for (const auto& [i, j, v] : trip) rows[i].emplace_back(j, v);
  SparseMatrixCSR A;
  A.nrows = nrows;
  A.ncols = ncols;
  A.row_ptr.resize(nrows + 1, 0);
  for (int i = 0; i < nrows; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    int unique = 0;
    for (size_t k = 0; k < r.size(); ++k) {
      if (k > 0 && r[k].first == r[unique - 1].first)
        r[unique - 1].second += r[k].second;
      else
        r[unique++] = r[k];
    }
    r.resize(unique);
    A.row_ptr[i + 1] = A.row_ptr[i] + unique;
  }
  A.col_idx.reserve(A.row_ptr[nrows]);
  A.vals.reserve(A.row_ptr[nrows]);
  for (const auto& r : rows)
    for (const auto& [j, v] : r) {
      A.col_idx.push_back(j);
      A.vals.push_back(v);
    }
  return A;
}

void spmv(const SparseMatrixCSR& A, const double* x, double* y) {
  for (int i = 0; i < A.nrows; ++i) {
    double s = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.vals[k] * x[A.col_idx[k]];
    y[i] = s;
  }
}

std::vector<double> spmv(const SparseMatrixCSR& A, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != A.ncols) throw InvalidArgument("spmv: shape mismatch");
  std::vector<double> y(A.nrows);
  spmv(A, x.data(), y.data());
  return y;
}

SparseMatrixCSR csr_block(const SparseMatrixCSR& A, int r0, int r1, int c0, int c1) {
  SparseMatrixCSR B;
  B.nrows = r1 - r0;
  B.ncols = c1 - c0;
  B.row_ptr.resize(B.nrows + 1, 0);
  for (int i = r0; i < r1; ++i) {
    int count = 0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col_idx[k] >= c0 && A.col_idx[k] < c1) ++count;
    B.row_ptr[i - r0 + 1] = B.row_ptr[i - r0] + count;
  }
  B.col_idx.reserve(B.row_ptr[B.nrows]);
  B.vals.reserve(B.row_ptr[B.nrows]);
  for (int i = r0; i < r1; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col_idx[k] >= c0 && A.col_idx[k] < c1) {
        B.col_idx.push_back(A.col_idx[k] - c0);
        B.vals.push_back(A.vals[k]);
      }
  return B;
}

std::vector<double> csr_to_dense(const SparseMatrixCSR& A) {
  std::vector<double> d(static_cast<size_t>(A.nrows) * A.ncols, 0.0);
  for (int i = 0; i < A.nrows; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      d[static_cast<size_t>(i) * A.ncols + A.col_idx[k]] = A.vals[k];
  return d;
}

void write_matrix_market(const SparseMatrixCSR& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
  char buf[64];
  for (int i = 0; i < A.nrows; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, A.col_idx[k] + 1, A.vals[k]);
      out << buf;
    }
}

}  // namespace insfem
