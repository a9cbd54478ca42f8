#include "insfem/newton.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace insfem {

double vec_norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> jfnk_matvec(const ResidualFn& F, const std::vector<double>& y,
                                const std::vector<double>& Fy, const std::vector<double>& v) {
  const double vnorm = vec_norm2(v);
  if (vnorm == 0.0) return std::vector<double>(y.size(), 0.0);
  const double eps =
      std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + vec_norm2(y)) / vnorm;
  std::vector<double> yp(y);
  for (size_t i = 0; i < y.size(); ++i) yp[i] += eps * v[i];
  std::vector<double> Fp = F(yp);
  for (size_t i = 0; i < Fp.size(); ++i) Fp[i] = (Fp[i] - Fy[i]) / eps;
  return Fp;
}

std::vector<double> jfnk_matvec(const ResidualFn& F, const std::vector<double>& y,
                                const std::vector<double>& v) {
  return jfnk_matvec(F, y, F(y), v);
}

double line_search_basic(const ResidualFn& F, const std::vector<double>& y,
                         const std::vector<double>& dy, double f0) {
  double alpha = 1.0;
  std::vector<double> trial(y.size());
  while (alpha >= 1e-4) {
    for (size_t i = 0; i < y.size(); ++i) trial[i] = y[i] + alpha * dy[i];
    const double fn = vec_norm2(F(trial));
    if (fn < f0) return alpha;
    alpha *= 0.5;
  }
  return alpha;  // below 1e-4: accepted with a warning upstream
}

namespace {

struct Preconditioner {
  std::unique_ptr<BandLU> lu;
  std::unique_ptr<Ilu0> ilu;
  std::unique_ptr<FieldSplitSchur> fs;
  std::vector<double> jacobi;

  LinOp op() const {
    if (lu) {
      const BandLU* p = lu.get();
      return [p](const double* r, double* z) { p->solve(r, z); };
    }
    if (ilu) {
      const Ilu0* p = ilu.get();
      return [p](const double* r, double* z) { p->apply(r, z); };
    }
    if (fs) {
      const FieldSplitSchur* p = fs.get();
      return [p](const double* r, double* z) { p->apply(r, z); };
    }
    if (!jacobi.empty()) {
      const std::vector<double>* d = &jacobi;
      return [d](const double* r, double* z) {
        for (size_t i = 0; i < d->size(); ++i) z[i] = r[i] * (*d)[i];
      };
    }
    return {};
  }
};

Preconditioner build_prec(const SparseMatrixCSR& B, const PrecSpec& spec) {
  Preconditioner p;
  switch (spec.type) {
    case PcType::None:
      break;
    case PcType::Lu:
      p.lu = std::make_unique<BandLU>(BandLU::factor(B));
      break;
    case PcType::Ilu:
      p.ilu = std::make_unique<Ilu0>(Ilu0::factor(B, spec.ilu_shift));
      break;
    case PcType::FieldSplit:
      p.fs = std::make_unique<FieldSplitSchur>(B, spec.fieldsplit);
      break;
    case PcType::Jacobi: {
      p.jacobi.resize(B.nrows);
      for (int i = 0; i < B.nrows; ++i) {
        const int k = B.find(i, i);
        const double d = k >= 0 ? B.vals[k] : 0.0;
        p.jacobi[i] = d != 0.0 ? 1.0 / d : 1.0;
      }
      break;
    }
  }
  return p;
}

}  // namespace

NewtonResult newton_solve(const ResidualFn& F, const JacobianFn& J, std::vector<double>& y,
                          const NewtonOptions& nopts, const KrylovOptions& kopts,
                          const PrecSpec& prec) {
  NewtonResult out;
  const int n = static_cast<int>(y.size());
  std::vector<double> Fy = F(y);
  double fnorm = vec_norm2(Fy);
  const double f0 = fnorm;
  out.residual_norms.push_back(fnorm);

  for (int it = 0; it < nopts.nl_max_its; ++it) {
    if (fnorm <= nopts.nl_abs_tol || fnorm <= nopts.nl_rel_tol * f0) {
      out.converged = true;
      return out;
    }
    // A failed factorization (wild iterate, singular system) is a diverged
    // solve, not a crash; the caller may retry with a smaller timestep.
    SparseMatrixCSR B;
    Preconditioner P;
    try {
      B = J(y);
      P = build_prec(B, prec);
    } catch (const std::exception& e) {
      out.message = std::string("linear solver setup failed: ") + e.what();
      return out;
    }

    LinOp op;
    if (nopts.solve_type == SolveType::Pjfnk) {
      op = [&](const double* xin, double* yout) {
        std::vector<double> v(xin, xin + n);
        std::vector<double> r = jfnk_matvec(F, y, Fy, v);
        std::copy(r.begin(), r.end(), yout);
      };
    } else {
      op = [&B](const double* xin, double* yout) { spmv(B, xin, yout); };
    }

    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -Fy[i];
    std::vector<double> dy(n, 0.0);
    const GmresResult lin = gmres(n, op, rhs, dy, P.op(), kopts);
    out.total_linear_iterations += lin.iterations;

    double alpha = 1.0;
    if (nopts.line_search == LineSearchKind::Basic) {
      alpha = line_search_basic(F, y, dy, fnorm);
      if (alpha < 1e-4) out.line_search_warning = true;
    }
    for (int i = 0; i < n; ++i) y[i] += alpha * dy[i];
    Fy = F(y);
    fnorm = vec_norm2(Fy);
    out.residual_norms.push_back(fnorm);
    ++out.iterations;
    if (!std::isfinite(fnorm)) {
      out.message = "residual is not finite";
      return out;
    }
  }
  out.converged = fnorm <= nopts.nl_abs_tol || fnorm <= nopts.nl_rel_tol * f0;
  if (!out.converged) out.message = "maximum nonlinear iterations reached";
  return out;
}

}  // namespace insfem
