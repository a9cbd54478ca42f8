#pragma once

#include <functional>
#include <string>
#include <vector>

#include "insfem/linear.hpp"

namespace insfem {

enum class SolveType { Newton, Pjfnk };
enum class LineSearchKind { None, Basic };

struct NewtonOptions {
  double nl_rel_tol = 1e-8;
  double nl_abs_tol = 1e-12;
  int nl_max_its = 20;
  LineSearchKind line_search = LineSearchKind::Basic;
  SolveType solve_type = SolveType::Newton;
};

enum class PcType { None, Jacobi, Ilu, Lu, FieldSplit };

struct PrecSpec {
  PcType type = PcType::Ilu;
  bool ilu_shift = false;
  FieldSplitOptions fieldsplit;
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_norms;  // includes the initial norm
  bool line_search_warning = false;
  int total_linear_iterations = 0;
  std::string message;
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;
using JacobianFn = std::function<SparseMatrixCSR(const std::vector<double>&)>;

// (F(y + eps v) - F(y)) / eps with the standard sqrt-epsilon step.
std::vector<double> jfnk_matvec(const ResidualFn& F, const std::vector<double>& y,
                                const std::vector<double>& v);
// Variant reusing an already computed F(y).
std::vector<double> jfnk_matvec(const ResidualFn& F, const std::vector<double>& y,
                                const std::vector<double>& Fy, const std::vector<double>& v);

// Backtracking halving from alpha = 1 until the residual norm decreases or
// alpha < 1e-4 (returned anyway; caller records a warning).
double line_search_basic(const ResidualFn& F, const std::vector<double>& y,
                         const std::vector<double>& dy, double f0);

// Newton (or PJFNK) iteration: J dy = -F with right-preconditioned GMRES.
// In PJFNK mode the operator is the jfnk matvec and the assembled matrix only
// builds the preconditioner.
NewtonResult newton_solve(const ResidualFn& F, const JacobianFn& J, std::vector<double>& y,
                          const NewtonOptions& nopts, const KrylovOptions& kopts,
                          const PrecSpec& prec);

double vec_norm2(const std::vector<double>& v);

}  // namespace insfem
