#include "insfem/linear.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace insfem {

DenseLU DenseLU::factor(int n, std::vector<double> a) {
  DenseLU lu;
  lu.n_ = n;
  lu.a_ = std::move(a);
  lu.piv_.resize(n);
  auto& m = lu.a_;
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m[i * n + k]) > std::abs(m[p * n + k])) p = i;
    lu.piv_[k] = p;
    if (std::abs(m[p * n + k]) <= 1e-14 * std::max(scale, 1e-300))
      throw SingularMatrix("dense LU: singular pivot at column " + std::to_string(k));
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[p * n + j]);
    const double d = 1.0 / m[k * n + k];
    for (int i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] * d;
      m[i * n + k] = f;
      if (f != 0.0)
        for (int j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
    }
  }
  return lu;
}

void DenseLU::solve(const double* b, double* x) const {
  const int n = n_;
  std::copy(b, b + n, x);
  for (int k = 0; k < n; ++k) {
    std::swap(x[k], x[piv_[k]]);
    for (int i = k + 1; i < n; ++i) x[i] -= a_[i * n + k] * x[k];
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int j = k + 1; j < n; ++j) x[k] -= a_[k * n + j] * x[j];
    x[k] /= a_[k * n + k];
  }
}

std::vector<double> DenseLU::solve(const std::vector<double>& b) const {
  std::vector<double> x(n_);
  solve(b.data(), x.data());
  return x;
}

std::vector<int> rcm_ordering(const SparseMatrixCSR& A) {
  const int n = A.nrows;
  // Symmetrized adjacency.
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const int j = A.col_idx[k];
      if (j != i) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  std::vector<int> degree(n);
  for (int i = 0; i < n; ++i) degree[i] = static_cast<int>(adj[i].size());

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> visited(n, 0);

  auto bfs_far_node = [&](int start) {
    std::vector<char> seen(n, 0);
    std::deque<int> dq{start};
    seen[start] = 1;
    int last = start;
    while (!dq.empty()) {
      last = dq.front();
      dq.pop_front();
      for (int nb : adj[last])
        if (!seen[nb]) {
          seen[nb] = 1;
          dq.push_back(nb);
        }
    }
    return last;
  };

  for (int seed = 0; seed < n; ++seed) {
    if (visited[seed]) continue;
    // Pseudo-peripheral start: lowest degree in the component, pushed outward.
    int start = seed;
    {
      std::deque<int> dq{seed};
      std::vector<char> seen(n, 0);
      seen[seed] = 1;
      int best = seed;
      while (!dq.empty()) {
        const int u = dq.front();
        dq.pop_front();
        if (degree[u] < degree[best]) best = u;
        for (int nb : adj[u])
          if (!seen[nb]) {
            seen[nb] = 1;
            dq.push_back(nb);
          }
      }
      start = bfs_far_node(best);
    }
    std::deque<int> dq{start};
    visited[start] = 1;
    while (!dq.empty()) {
      const int u = dq.front();
      dq.pop_front();
      order.push_back(u);
      std::vector<int> next;
      for (int nb : adj[u])
        if (!visited[nb]) {
          visited[nb] = 1;
          next.push_back(nb);
        }
      std::sort(next.begin(), next.end(), [&](int a, int b) { return degree[a] < degree[b]; });
      for (int nb : next) dq.push_back(nb);
    }
  }
  std::reverse(order.begin(), order.end());
  return order;  // order[k] = original index placed at position k
}

BandLU BandLU::factor(const SparseMatrixCSR& A) {
  if (A.nrows != A.ncols) throw InvalidArgument("BandLU: matrix must be square");
  const int n = A.nrows;
  BandLU lu;
  lu.n_ = n;
  lu.perm_ = rcm_ordering(A);
  lu.iperm_.resize(n);
  for (int k = 0; k < n; ++k) lu.iperm_[lu.perm_[k]] = k;

  int kl = 0, ku = 0;
  for (int i = 0; i < n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const int pi = lu.iperm_[i], pj = lu.iperm_[A.col_idx[k]];
      kl = std::max(kl, pi - pj);
      ku = std::max(ku, pj - pi);
    }
  lu.kl_ = kl;
  lu.ku_ = ku;
  lu.kv_ = kl + ku;
  lu.ldab_ = 2 * kl + ku + 1;
  if (static_cast<double>(lu.ldab_) * n > 4e8)
    throw Error("BandLU: factor storage too large (bandwidth " + std::to_string(kl + ku) + ")");
  lu.ab_.assign(static_cast<size_t>(lu.ldab_) * n, 0.0);
  lu.piv_.resize(n);

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      lu.ab(lu.iperm_[i], lu.iperm_[A.col_idx[k]]) = A.vals[k];
      scale = std::max(scale, std::abs(A.vals[k]));
    }

  const double tol = 1e-14 * std::max(scale, 1e-300);
  for (int j = 0; j < n; ++j) {
    const int km = std::min(kl, n - 1 - j);
    int jp = j;
    for (int i = j + 1; i <= j + km; ++i)
      if (std::abs(lu.abc(i, j)) > std::abs(lu.abc(jp, j))) jp = i;
    lu.piv_[j] = jp;
    if (std::abs(lu.abc(jp, j)) <= tol)
      throw SingularMatrix("BandLU: singular pivot at column " + std::to_string(j));
    const int kend = std::min(n - 1, j + lu.kv_);
    if (jp != j)
      for (int k = j; k <= kend; ++k) std::swap(lu.ab(j, k), lu.ab(jp, k));
    const double d = 1.0 / lu.abc(j, j);
    for (int i = j + 1; i <= j + km; ++i) lu.ab(i, j) *= d;
    for (int k = j + 1; k <= kend; ++k) {
      const double f = lu.abc(j, k);
      if (f != 0.0)
        for (int i = j + 1; i <= j + km; ++i) lu.ab(i, k) -= lu.abc(i, j) * f;
    }
  }
  return lu;
}

void BandLU::solve(const double* b, double* x) const {
  const int n = n_;
  // y in permuted ordering: y[pos] = b[original index at pos]
  std::vector<double> y(n);
  for (int k = 0; k < n; ++k) y[k] = b[perm_[k]];
  for (int j = 0; j < n; ++j) {
    std::swap(y[j], y[piv_[j]]);
    const int km = std::min(kl_, n - 1 - j);
    const double yj = y[j];
    if (yj != 0.0)
      for (int i = j + 1; i <= j + km; ++i) y[i] -= abc(i, j) * yj;
  }
  for (int j = n - 1; j >= 0; --j) {
    y[j] /= abc(j, j);
    const double yj = y[j];
    const int itop = std::max(0, j - kv_);
    if (yj != 0.0)
      for (int i = itop; i < j; ++i) y[i] -= abc(i, j) * yj;
  }
  for (int k = 0; k < n; ++k) x[perm_[k]] = y[k];
}

std::vector<double> BandLU::solve(const std::vector<double>& b) const {
  std::vector<double> x(n_);
  solve(b.data(), x.data());
  return x;
}

std::vector<double> lu_direct(const SparseMatrixCSR& A, const std::vector<double>& b) {
  if (A.nrows != A.ncols) throw InvalidArgument("lu_direct: matrix must be square");
  if (static_cast<int>(b.size()) != A.nrows) throw InvalidArgument("lu_direct: rhs size mismatch");
  const BandLU lu = BandLU::factor(A);
  std::vector<double> x = lu.solve(b);
  const std::vector<double> r = spmv(A, x);
  double rn = 0, bn = 0;
  for (int i = 0; i < A.nrows; ++i) {
    rn += (r[i] - b[i]) * (r[i] - b[i]);
    bn += b[i] * b[i];
  }
  if (std::sqrt(rn) > 1e-10 * std::max(std::sqrt(bn), 1e-300) && std::sqrt(rn) > 1e-12)
    throw SingularMatrix("lu_direct: solution residual exceeds tolerance");
  return x;
}

Ilu0 Ilu0::factor(const SparseMatrixCSR& A, bool shift_on_zero_pivot) {
  if (A.nrows != A.ncols) throw InvalidArgument("ilu0: matrix must be square");
  Ilu0 f;
  f.lu_ = A;
  const int n = A.nrows;
  f.diag_.assign(n, -1);
  auto& lu = f.lu_;
  for (int i = 0; i < n; ++i) {
    const int d = lu.find(i, i);
    if (d < 0) throw SingularMatrix("ilu0: missing diagonal entry in row " + std::to_string(i));
    f.diag_[i] = d;
  }
  double scale = 0.0;
  for (double v : A.vals) scale = std::max(scale, std::abs(v));
  const double tiny = 1e-14 * std::max(scale, 1e-300);

  std::vector<int> pos(n, -1);  // column -> value index in current row
  for (int i = 0; i < n; ++i) {
    for (int k = lu.row_ptr[i]; k < lu.row_ptr[i + 1]; ++k) pos[lu.col_idx[k]] = k;
    for (int k = lu.row_ptr[i]; k < lu.row_ptr[i + 1]; ++k) {
      const int c = lu.col_idx[k];
      if (c >= i) break;
      double piv = lu.vals[f.diag_[c]];
      if (std::abs(piv) <= tiny) {
        if (!shift_on_zero_pivot)
          throw SingularMatrix("ilu0: zero pivot in row " + std::to_string(c));
        piv = piv >= 0 ? std::max(piv, 1e-12 * std::max(scale, 1.0))
                       : std::min(piv, -1e-12 * std::max(scale, 1.0));
        lu.vals[f.diag_[c]] = piv;
        ++f.rep_.shifts;
      }
      const double lik = lu.vals[k] / piv;
      lu.vals[k] = lik;
      for (int kk = f.diag_[c] + 1; kk < lu.row_ptr[c + 1]; ++kk) {
        const int p = pos[lu.col_idx[kk]];
        if (p >= 0) lu.vals[p] -= lik * lu.vals[kk];
      }
    }
    for (int k = lu.row_ptr[i]; k < lu.row_ptr[i + 1]; ++k) pos[lu.col_idx[k]] = -1;
    double& dv = lu.vals[f.diag_[i]];
    if (std::abs(dv) <= tiny) {
      if (!shift_on_zero_pivot) throw SingularMatrix("ilu0: zero pivot in row " + std::to_string(i));
      dv = dv >= 0 ? 1e-12 * std::max(scale, 1.0) : -1e-12 * std::max(scale, 1.0);
      ++f.rep_.shifts;
    }
  }
  return f;
}

void Ilu0::apply(const double* r, double* z) const {
  const int n = lu_.nrows;
  // L y = r (unit lower)
  for (int i = 0; i < n; ++i) {
    double s = r[i];
    for (int k = lu_.row_ptr[i]; k < diag_[i]; ++k) s -= lu_.vals[k] * z[lu_.col_idx[k]];
    z[i] = s;
  }
  // U z = y
  for (int i = n - 1; i >= 0; --i) {
    double s = z[i];
    for (int k = diag_[i] + 1; k < lu_.row_ptr[i + 1]; ++k) s -= lu_.vals[k] * z[lu_.col_idx[k]];
    z[i] = s / lu_.vals[diag_[i]];
  }
}

namespace {
double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}
}  // namespace

GmresResult gmres(int n, const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                  const LinOp& prec, const KrylovOptions& opts) {
  GmresResult out;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    out.converged = true;
    return out;
  }
  const double target = opts.l_tol * bnorm;
  const int m = std::max(1, opts.restart);

  std::vector<double> r(n), w(n);
  std::vector<std::vector<double>> V, Z;
  std::vector<double> H(static_cast<size_t>(m + 1) * m, 0.0);
  std::vector<double> cs(m), sn(m), g(m + 1);

  auto Ax = [&](const std::vector<double>& in, std::vector<double>& outv) {
    A(in.data(), outv.data());
  };

  Ax(x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double beta = norm2(r);
  out.resid = beta;
  out.history.push_back(beta);
  if (beta <= target) {
    out.converged = true;
    return out;
  }

  while (out.iterations < opts.l_max_its) {
    V.assign(1, r);
    for (double& v : V[0]) v /= beta;
    Z.clear();
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int j = 0;
    bool breakdown = false;
    for (; j < m && out.iterations < opts.l_max_its; ++j) {
      Z.emplace_back(n);
      if (prec)
        prec(V[j].data(), Z[j].data());
      else
        Z[j] = V[j];
      Ax(Z[j], w);
      ++out.iterations;
      for (int i = 0; i <= j; ++i) {
        double h = 0;
        for (int k = 0; k < n; ++k) h += w[k] * V[i][k];
        H[i * m + j] = h;
        for (int k = 0; k < n; ++k) w[k] -= h * V[i][k];
      }
      double hj1 = norm2(w);
      // Givens rotations on column j.
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H[i * m + j] + sn[i] * H[(i + 1) * m + j];
        H[(i + 1) * m + j] = -sn[i] * H[i * m + j] + cs[i] * H[(i + 1) * m + j];
        H[i * m + j] = t;
      }
      const double denom = std::hypot(H[j * m + j], hj1);
      if (denom == 0.0) {
        breakdown = true;
        ++j;
        break;
      }
      cs[j] = H[j * m + j] / denom;
      sn[j] = hj1 / denom;
      H[j * m + j] = denom;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      out.resid = std::abs(g[j + 1]);
      out.history.push_back(out.resid);
      if (hj1 <= 1e-14 * bnorm) {
        // Happy breakdown: exact solution within the current subspace.
        breakdown = true;
        ++j;
        break;
      }
      V.emplace_back(w);
      for (double& v : V.back()) v /= hj1;
      if (out.resid <= target) {
        ++j;
        break;
      }
    }
    // y = H^{-1} g on the leading j x j triangle; x += Z y.
    std::vector<double> y(j);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H[i * m + k] * y[k];
      y[i] = s / H[i * m + i];
    }
    for (int i = 0; i < j; ++i)
      for (int k = 0; k < n; ++k) x[k] += y[i] * Z[i][k];

    // The recurrence estimate is the convergence criterion (with inexact
    // matvecs the recomputed residual is floored at the operator noise);
    // restarts still use the true residual.
    if (out.resid <= target || breakdown) {
      out.converged = out.resid <= target;
      Ax(x, r);
      for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
      out.resid = norm2(r);
      return out;
    }
    Ax(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    beta = norm2(r);
    out.resid = beta;
    if (beta <= target) {
      out.converged = true;
      return out;
    }
  }
  out.converged = out.resid <= target;
  return out;
}

FieldSplitSchur::FieldSplitSchur(const SparseMatrixCSR& B, const FieldSplitOptions& opts)
    : opts_(opts) {
  if (B.split <= 0 || B.split >= B.nrows)
    throw ConfigError("field split requires block ranges on the matrix");
  nu_ = B.split;
  np_ = B.nrows - B.split;
  SparseMatrixCSR Buu = csr_block(B, 0, nu_, 0, nu_);
  Bup_ = csr_block(B, 0, nu_, nu_, B.nrows);
  Bpu_ = csr_block(B, nu_, B.nrows, 0, nu_);
  SparseMatrixCSR Bpp = csr_block(B, nu_, B.nrows, nu_, B.nrows);

  if (opts.uu_solver == InnerSolve::Lu)
    uu_lu_ = std::make_unique<BandLU>(BandLU::factor(Buu));
  else
    uu_ilu_ = std::make_unique<Ilu0>(Ilu0::factor(Buu, true));

  switch (opts.schur) {
    case SchurPrecondition::A11: {
      // a11 uses B_pp itself as the Schur complement; without PSPG that block
      // is (up to pinned rows) zero and cannot be inverted.
      for (int i = 0; i < np_; ++i) {
        const int d = Bpp.find(i, i);
        if (d < 0 || Bpp.vals[d] == 0.0)
          throw ConfigError(
              "schur_precondition=a11 requires a nonzero pressure block (enable PSPG)");
      }
      shat_ = Bpp;
      break;
    }
    case SchurPrecondition::SelfP: {
      std::vector<double> dinv(nu_);
      for (int i = 0; i < nu_; ++i) {
        const int d = Buu.find(i, i);
        if (d < 0 || Buu.vals[d] == 0.0)
          throw SingularMatrix("selfp: zero diagonal in velocity block");
        dinv[i] = 1.0 / Buu.vals[d];
      }
      std::vector<std::tuple<int, int, double>> trip;
      for (int i = 0; i < np_; ++i)
        for (int k = Bpp.row_ptr[i]; k < Bpp.row_ptr[i + 1]; ++k)
          trip.emplace_back(i, Bpp.col_idx[k], Bpp.vals[k]);
      for (int i = 0; i < np_; ++i)
        for (int k = Bpu_.row_ptr[i]; k < Bpu_.row_ptr[i + 1]; ++k) {
          const int c = Bpu_.col_idx[k];
          const double f = Bpu_.vals[k] * dinv[c];
          for (int kk = Bup_.row_ptr[c]; kk < Bup_.row_ptr[c + 1]; ++kk)
            trip.emplace_back(i, Bup_.col_idx[kk], -f * Bup_.vals[kk]);
        }
      shat_ = csr_from_triplets(np_, np_, trip);
      break;
    }
    case SchurPrecondition::Full: {
      // Exact S column by column; debugging-scale only.
      shat_full_.assign(static_cast<size_t>(np_) * np_, 0.0);
      std::vector<double> col(nu_), z(nu_);
      for (int jcol = 0; jcol < np_; ++jcol) {
        std::fill(col.begin(), col.end(), 0.0);
        for (int i = 0; i < nu_; ++i) {
          const int k = Bup_.find(i, jcol);
          if (k >= 0) col[i] = Bup_.vals[k];
        }
        solve_uu(col.data(), z.data());
        std::vector<double> pu = spmv(Bpu_, z);
        for (int i = 0; i < np_; ++i) shat_full_[static_cast<size_t>(i) * np_ + jcol] = -pu[i];
      }
      for (int i = 0; i < np_; ++i)
        for (int k = Bpp.row_ptr[i]; k < Bpp.row_ptr[i + 1]; ++k)
          shat_full_[static_cast<size_t>(i) * np_ + Bpp.col_idx[k]] += Bpp.vals[k];
      s_dense_ = std::make_unique<DenseLU>(DenseLU::factor(np_, shat_full_));
      break;
    }
  }
  if (opts.schur != SchurPrecondition::Full) {
    if (opts.s_solver == InnerSolve::Lu)
      s_lu_ = std::make_unique<BandLU>(BandLU::factor(shat_));
    else
      s_ilu_ = std::make_unique<Ilu0>(Ilu0::factor(shat_, true));
  }
}

std::vector<double> FieldSplitSchur::shat_dense() const {
  if (opts_.schur == SchurPrecondition::Full) return shat_full_;
  return csr_to_dense(shat_);
}

void FieldSplitSchur::solve_uu(const double* r, double* z) const {
  if (uu_lu_)
    uu_lu_->solve(r, z);
  else
    uu_ilu_->apply(r, z);
}

void FieldSplitSchur::solve_s(const double* r, double* z) const {
  if (s_dense_)
    s_dense_->solve(r, z);
  else if (s_lu_)
    s_lu_->solve(r, z);
  else
    s_ilu_->apply(r, z);
}

void FieldSplitSchur::apply(const double* r, double* z) const {
  const double* f = r;
  const double* g = r + nu_;
  double* xu = z;
  double* xp = z + nu_;
  std::vector<double> tu(nu_), tp(np_);

  switch (opts_.fact) {
    case SchurFactType::Diag:
      solve_uu(f, xu);
      solve_s(g, xp);
      return;
    case SchurFactType::Upper: {
      solve_s(g, xp);
      std::vector<double> bupx(nu_);
      spmv(Bup_, xp, bupx.data());
      for (int i = 0; i < nu_; ++i) bupx[i] = f[i] - bupx[i];
      solve_uu(bupx.data(), xu);
      return;
    }
    case SchurFactType::Lower: {
      solve_uu(f, xu);
      std::vector<double> bpux(np_);
      spmv(Bpu_, xu, bpux.data());
      for (int i = 0; i < np_; ++i) bpux[i] = g[i] - bpux[i];
      solve_s(bpux.data(), xp);
      return;
    }
    case SchurFactType::Full: {
      solve_uu(f, tu.data());
      std::vector<double> bpux(np_);
      spmv(Bpu_, tu.data(), bpux.data());
      for (int i = 0; i < np_; ++i) bpux[i] = g[i] - bpux[i];
      solve_s(bpux.data(), xp);
      std::vector<double> bupx(nu_);
      spmv(Bup_, xp, bupx.data());
      std::vector<double> corr(nu_);
      solve_uu(bupx.data(), corr.data());
      for (int i = 0; i < nu_; ++i) xu[i] = tu[i] - corr[i];
      return;
    }
  }
}

}  // namespace insfem
