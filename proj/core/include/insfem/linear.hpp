#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "insfem/csr.hpp"

namespace insfem {

// Row-major dense LU with partial pivoting, for small systems and the exact
// Schur complement.
class DenseLU {
 public:
  static DenseLU factor(int n, std::vector<double> a);
  void solve(const double* b, double* x) const;
  std::vector<double> solve(const std::vector<double>& b) const;

 private:
  int n_ = 0;
  std::vector<double> a_;
  std::vector<int> piv_;
};

// Reverse Cuthill-McKee ordering of the symmetrized sparsity graph.
std::vector<int> rcm_ordering(const SparseMatrixCSR& A);

// Direct solver: RCM permutation + banded LU with partial pivoting.
class BandLU {
 public:
  static BandLU factor(const SparseMatrixCSR& A);
  void solve(const double* b, double* x) const;
  std::vector<double> solve(const std::vector<double>& b) const;
  int bandwidth() const { return kl_ + ku_; }

 private:
  int n_ = 0, kl_ = 0, ku_ = 0, kv_ = 0, ldab_ = 0;
  std::vector<double> ab_;
  std::vector<int> piv_;
  std::vector<int> perm_, iperm_;
  double& ab(int i, int j) { return ab_[static_cast<size_t>(j) * ldab_ + (kv_ + i - j)]; }
  double abc(int i, int j) const { return ab_[static_cast<size_t>(j) * ldab_ + (kv_ + i - j)]; }
};

// One-shot direct solve with residual verification (|Ax-b| <= 1e-10 |b|).
std::vector<double> lu_direct(const SparseMatrixCSR& A, const std::vector<double>& b);

struct Ilu0Report {
  int shifts = 0;
};

// Incomplete LU with zero fill on the matrix pattern.
class Ilu0 {
 public:
  // shift_on_zero_pivot replaces tiny pivots instead of failing.
  static Ilu0 factor(const SparseMatrixCSR& A, bool shift_on_zero_pivot = false);
  void apply(const double* r, double* z) const;
  const Ilu0Report& report() const { return rep_; }

 private:
  SparseMatrixCSR lu_;
  std::vector<int> diag_;
  Ilu0Report rep_;
};

struct KrylovOptions {
  double l_tol = 1e-6;
  int l_max_its = 500;
  int restart = 30;
};

using LinOp = std::function<void(const double* x, double* y)>;

struct GmresResult {
  int iterations = 0;
  bool converged = false;
  double resid = 0.0;
  std::vector<double> history;  // residual norm per iteration
};

// Right-preconditioned flexible GMRES(restart). `prec` may be null
// (identity); residual norms are true residuals of the unpreconditioned
// system.
GmresResult gmres(int n, const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                  const LinOp& prec, const KrylovOptions& opts);

enum class SchurPrecondition { A11, SelfP, Full };
enum class SchurFactType { Diag, Lower, Upper, Full };
enum class InnerSolve { Lu, Ilu };

struct FieldSplitOptions {
  SchurPrecondition schur = SchurPrecondition::SelfP;
  SchurFactType fact = SchurFactType::Full;
  InnerSolve uu_solver = InnerSolve::Lu;
  InnerSolve s_solver = InnerSolve::Lu;
};

// Applies the chosen factors of the block LDU factorization of the
// saddle-point matrix, with the Schur complement approximated per `schur`.
class FieldSplitSchur {
 public:
  FieldSplitSchur(const SparseMatrixCSR& B, const FieldSplitOptions& opts);
  void apply(const double* r, double* z) const;
  int n() const { return nu_ + np_; }
  // The Schur approximation actually used (dense row-major np x np).
  std::vector<double> shat_dense() const;

 private:
  void solve_uu(const double* r, double* z) const;
  void solve_s(const double* r, double* z) const;

  FieldSplitOptions opts_;
  int nu_ = 0, np_ = 0;
  SparseMatrixCSR Bup_, Bpu_;
  SparseMatrixCSR shat_;  // a11/selfp
  std::unique_ptr<BandLU> uu_lu_;
  std::unique_ptr<Ilu0> uu_ilu_;
  std::unique_ptr<BandLU> s_lu_;
  std::unique_ptr<Ilu0> s_ilu_;
  std::unique_ptr<DenseLU> s_dense_;
  std::vector<double> shat_full_;  // dense S for SchurPrecondition::Full
};

}  // namespace insfem
