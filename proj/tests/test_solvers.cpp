#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "insfem/linear.hpp"
#include "insfem/newton.hpp"

using namespace insfem;

namespace {

SparseMatrixCSR dense_to_csr(int n, const std::vector<double>& d, int split = -1) {
  std::vector<std::tuple<int, int, double>> trip;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (d[i * n + j] != 0.0) trip.emplace_back(i, j, d[i * n + j]);
  SparseMatrixCSR A = csr_from_triplets(n, n, trip);
  A.split = split;
  return A;
}

SparseMatrixCSR random_spd_band(int n, int bw, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - bw); j <= std::min(n - 1, i + bw); ++j)
      if (i != j) d[i * n + j] = u(rng);
    d[i * n + i] = 2.0 * bw + 1.0 + u(rng);
  }
  return dense_to_csr(n, d);
}

}  // namespace

TEST_CASE("spmv examples") {
  SparseMatrixCSR I = dense_to_csr(3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const std::vector<double> x{1.5, -2, 3};
  CHECK(spmv(I, x) == x);

  SparseMatrixCSR D = dense_to_csr(2, {2, 0, 0, 3});
  const auto y = spmv(D, {1, 1});
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 3.0);

  // random 10x10 vs dense oracle
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> dd(100);
  for (double& v : dd) v = u(rng) > 0.4 ? u(rng) : 0.0;
  SparseMatrixCSR A = dense_to_csr(10, dd);
  std::vector<double> xs(10);
  for (double& v : xs) v = u(rng);
  const auto ys = spmv(A, xs);
  for (int i = 0; i < 10; ++i) {
    double s = 0;
    for (int j = 0; j < 10; ++j) s += dd[i * 10 + j] * xs[j];
    CHECK(ys[i] == doctest::Approx(s).epsilon(1e-13));
  }

  CHECK_THROWS_AS(spmv(A, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("lu_direct examples") {
  SparseMatrixCSR D = dense_to_csr(2, {2, 0, 0, 3});
  const auto x = lu_direct(D, {2, 3});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));

  // duplicate rows -> singular
  SparseMatrixCSR S = dense_to_csr(3, {1, 2, 3, 1, 2, 3, 0, 1, 4});
  CHECK_THROWS_AS(lu_direct(S, {1, 1, 1}), SingularMatrix);
}

TEST_CASE("band LU agrees with dense LU on random banded systems") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 40;
    SparseMatrixCSR A = random_spd_band(n, 3 + trial % 4, 100 + trial);
    std::vector<double> b(n);
    for (double& v : b) v = u(rng);
    const auto x = lu_direct(A, b);
    const DenseLU dl = DenseLU::factor(n, csr_to_dense(A));
    const auto xd = dl.solve(b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xd[i]).epsilon(1e-10));
  }
}

TEST_CASE("gmres basics") {
  // identity: one iteration
  SparseMatrixCSR I = dense_to_csr(4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
  std::vector<double> b{1, 2, 3, 4}, x(4, 0.0);
  KrylovOptions ko;
  ko.l_tol = 1e-12;
  auto op = [&I](const double* in, double* out) { spmv(I, in, out); };
  GmresResult r = gmres(4, op, b, x, nullptr, ko);
  CHECK(r.converged);
  CHECK(r.iterations == 1);

  // diag(1..5): at most 5 iterations
  std::vector<double> d5(25, 0.0);
  for (int i = 0; i < 5; ++i) d5[i * 5 + i] = i + 1.0;
  SparseMatrixCSR D = dense_to_csr(5, d5);
  std::vector<double> b5{1, 1, 1, 1, 1}, x5(5, 0.0);
  auto op5 = [&D](const double* in, double* out) { spmv(D, in, out); };
  r = gmres(5, op5, b5, x5, nullptr, ko);
  CHECK(r.converged);
  CHECK(r.iterations <= 5);

  // perfectly preconditioned: 1 iteration to 1e-12
  SparseMatrixCSR A = random_spd_band(30, 4, 77);
  const BandLU lu = BandLU::factor(A);
  std::vector<double> ba(30, 1.0), xa(30, 0.0);
  auto opa = [&A](const double* in, double* out) { spmv(A, in, out); };
  auto prec = [&lu](const double* in, double* out) { lu.solve(in, out); };
  r = gmres(30, opa, ba, xa, prec, ko);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  const auto res = spmv(A, xa);
  double rn = 0;
  for (int i = 0; i < 30; ++i) rn += (res[i] - ba[i]) * (res[i] - ba[i]);
  CHECK(std::sqrt(rn) <= 1e-12 * std::sqrt(30.0));
}

TEST_CASE("gmres residual history nonincreasing within a cycle") {
  SparseMatrixCSR A = random_spd_band(50, 5, 31);
  std::vector<double> b(50, 1.0), x(50, 0.0);
  KrylovOptions ko;
  ko.restart = 50;
  ko.l_tol = 1e-10;
  auto op = [&A](const double* in, double* out) { spmv(A, in, out); };
  const GmresResult r = gmres(50, op, b, x, nullptr, ko);
  for (size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1] * (1 + 1e-12));
  CHECK(r.converged);
}

TEST_CASE("ilu0 on diagonal and tridiagonal matrices") {
  SparseMatrixCSR D = dense_to_csr(3, {2, 0, 0, 0, 4, 0, 0, 0, 8});
  const Ilu0 f = Ilu0::factor(D);
  double in[3] = {2, 4, 8}, out[3];
  f.apply(in, out);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(1.0));

  // tridiagonal: ILU(0) is the exact factorization
  const int n = 12;
  std::vector<double> td(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    td[i * n + i] = 2.1;
    if (i > 0) td[i * n + i - 1] = -1.0;
    if (i + 1 < n) td[i * n + i + 1] = -1.0;
  }
  SparseMatrixCSR T = dense_to_csr(n, td);
  const Ilu0 ft = Ilu0::factor(T);
  std::vector<double> b(n, 1.0), z(n);
  ft.apply(b.data(), z.data());
  const auto exact = lu_direct(T, b);
  for (int i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(exact[i]).epsilon(1e-12));

  // zero pivot reported (explicit structural zeros on the diagonal)
  SparseMatrixCSR Z =
      csr_from_triplets(2, 2, {{0, 0, 0.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 0.0}});
  CHECK_THROWS_AS(Ilu0::factor(Z, false), SingularMatrix);
  const Ilu0 fs = Ilu0::factor(Z, true);
  CHECK(fs.report().shifts > 0);
}

TEST_CASE("field split: selfp hand example") {
  // B_uu = diag(2,4), B_up = [1;1], B_pu = [1 1], B_pp = [0.1]
  std::vector<double> d{2, 0, 1, 0, 4, 1, 1, 1, 0.1};
  SparseMatrixCSR B = dense_to_csr(3, d, 2);
  FieldSplitOptions opts;
  opts.schur = SchurPrecondition::SelfP;
  const FieldSplitSchur fs(B, opts);
  const auto s = fs.shat_dense();
  REQUIRE(s.size() == 1);
  CHECK(s[0] == 0.1 - (1.0 / 2.0 + 1.0 / 4.0));  // exact arithmetic
}

TEST_CASE("field split: a11 requires nonzero pressure block") {
  std::vector<double> d{2, 0, 1, 0, 4, 1, 1, 1, 0.0};
  SparseMatrixCSR B = dense_to_csr(3, d, 2);
  FieldSplitOptions opts;
  opts.schur = SchurPrecondition::A11;
  CHECK_THROWS_AS(FieldSplitSchur(B, opts), ConfigError);
}

TEST_CASE("field split full/full is an exact inverse") {
  // random nonsingular saddle-like matrix with trailing 2x2 pressure block
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  const int nu = 6, np = 2, n = nu + np;
  std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < nu; ++i) {
    d[i * n + i] = 5.0 + u(rng);
    for (int j = 0; j < n; ++j)
      if (i != j) d[i * n + j] = 0.4 * u(rng);
  }
  for (int i = nu; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i * n + j] = (i == j) ? 0.0 : 0.5 * u(rng);
  SparseMatrixCSR B = dense_to_csr(n, d, nu);

  FieldSplitOptions opts;
  opts.schur = SchurPrecondition::Full;
  opts.fact = SchurFactType::Full;
  const FieldSplitSchur fs(B, opts);

  std::vector<double> b(n, 1.0), x(n, 0.0);
  KrylovOptions ko;
  ko.l_tol = 1e-10;
  auto op = [&B](const double* in, double* out) { spmv(B, in, out); };
  auto prec = [&fs](const double* in, double* out) { fs.apply(in, out); };
  const GmresResult r = gmres(n, op, b, x, prec, ko);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("field split diag ignores couplings") {
  std::vector<double> d{2, 0, 1, 0, 4, 1, 1, 1, 0.5};
  SparseMatrixCSR B = dense_to_csr(3, d, 2);
  FieldSplitOptions opts;
  opts.schur = SchurPrecondition::A11;
  opts.fact = SchurFactType::Diag;
  const FieldSplitSchur fs(B, opts);
  const double r[3] = {2, 4, 0};  // zero pressure part
  double z[3];
  fs.apply(r, z);
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(1.0));
  CHECK(z[2] == doctest::Approx(0.0));
}

TEST_CASE("newton on y^2 - 4") {
  auto F = [](const std::vector<double>& y) { return std::vector<double>{y[0] * y[0] - 4.0}; };
  auto J = [](const std::vector<double>& y) {
    return csr_from_triplets(1, 1, {{0, 0, 2.0 * y[0]}});
  };
  std::vector<double> y{3.0};
  NewtonOptions no;
  no.nl_abs_tol = 1e-13;
  no.nl_rel_tol = 1e-14;
  no.nl_max_its = 10;
  no.line_search = LineSearchKind::None;
  KrylovOptions ko;
  ko.l_tol = 1e-12;
  PrecSpec ps;
  ps.type = PcType::Lu;
  const NewtonResult r = newton_solve(F, J, y, no, ko, ps);
  CHECK(r.converged);
  CHECK(r.iterations <= 7);
  CHECK(std::abs(y[0] - 2.0) < 1e-12);

  // first iterate is 3 - 5/6 = 13/6
  // residual history shows quadratic convergence: F_{k+1} <= C F_k^2
  for (size_t k = 1; k + 1 < r.residual_norms.size(); ++k) {
    const double fk = r.residual_norms[k], fk1 = r.residual_norms[k + 1];
    if (fk > 1e-10) CHECK(fk1 <= 0.5 * fk * fk);
  }
}

TEST_CASE("newton solves a linear system in one iteration") {
  SparseMatrixCSR A = random_spd_band(20, 3, 5);
  std::vector<double> bb(20, 1.0);
  auto F = [&](const std::vector<double>& y) {
    auto r = spmv(A, y);
    for (int i = 0; i < 20; ++i) r[i] -= bb[i];
    return r;
  };
  auto J = [&](const std::vector<double>&) { return A; };
  std::vector<double> y(20, 0.0);
  NewtonOptions no;
  no.line_search = LineSearchKind::None;
  KrylovOptions ko;
  ko.l_tol = 1e-12;
  PrecSpec ps;
  ps.type = PcType::Lu;
  const NewtonResult r = newton_solve(F, J, y, no, ko, ps);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("jfnk matvec") {
  // linear: returns Av up to O(eps)
  SparseMatrixCSR A = random_spd_band(15, 3, 8);
  std::vector<double> b(15, 0.5);
  auto F = [&](const std::vector<double>& y) {
    auto r = spmv(A, y);
    for (int i = 0; i < 15; ++i) r[i] -= b[i];
    return r;
  };
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> y(15), v(15);
  for (double& w : y) w = u(rng);
  for (double& w : v) w = u(rng);
  const auto jv = jfnk_matvec(F, y, v);
  const auto av = spmv(A, v);
  for (int i = 0; i < 15; ++i) CHECK(jv[i] == doctest::Approx(av[i]).epsilon(1e-6));

  // elementwise square at y=1, v=1: derivative 2
  auto F2 = [](const std::vector<double>& y) { return std::vector<double>{y[0] * y[0]}; };
  const auto d = jfnk_matvec(F2, {1.0}, {1.0});
  CHECK(d[0] == doctest::Approx(2.0).epsilon(1e-6));

  // zero direction: zero vector
  const auto z = jfnk_matvec(F2, {1.0}, {0.0});
  CHECK(z[0] == 0.0);
}

TEST_CASE("basic line search") {
  auto F = [](const std::vector<double>& y) { return std::vector<double>{y[0]}; };
  // descent direction on |y|: full step accepted
  CHECK(line_search_basic(F, {1.0}, {-1.0}, 1.0) == 1.0);
  // ascent direction: shrinks
  const double a = line_search_basic(F, {1.0}, {5.0}, 1.0);
  CHECK(a < 1.0);
  CHECK(a > 0.0);
}

TEST_CASE("matrix market dump format") {
  SparseMatrixCSR A = dense_to_csr(2, {1.5, 0, 0, -2});
  write_matrix_market(A, "mm_test.mtx");
  std::ifstream in("mm_test.mtx");
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  int nr, nc, nnz;
  in >> nr >> nc >> nnz;
  CHECK(nr == 2);
  CHECK(nnz == 2);
}

#include "insfem/builtin.hpp"
#include "insfem/kernels.hpp"

TEST_CASE("ilu0 strictly beats unpreconditioned gmres on the cavity jacobian") {
  // 8x8 stabilized cavity system at the initial state.
  Mesh mesh = build_structured_quad_mesh(8, 8, Rect{0, 1, 0, 1}, 1);
  std::vector<Variable> vars{{"vel_x", 1, VarRole::VelocityComponent},
                             {"vel_y", 1, VarRole::VelocityComponent},
                             {"p", 1, VarRole::Pressure}};
  WeakFormConfig cfg;
  cfg.mu = 1e-3;
  cfg.supg = true;
  cfg.pspg = true;
  ConstraintSet cs;
  auto zero = [](double, double, double) { return 0.0; };
  for (const char* s : {"left", "right", "bottom"}) {
    cs.dirichlet.push_back({"vel_x", s, zero});
    cs.dirichlet.push_back({"vel_y", s, zero});
  }
  cs.dirichlet.push_back(
      {"vel_x", "top", [](double x, double, double) { return 4 * x * (1 - x); }});
  cs.dirichlet.push_back({"vel_y", "top", zero});
  cs.pins.push_back({"p", 0, 0.0});
  KernelSet ks = ins_kernels(0, 1, 2, cfg);
  DiscreteSystem sys(mesh, vars, cfg, ks, cs);
  SystemState st;
  st.y.assign(sys.dofs().n_dofs, 0.2);
  const SparseMatrixCSR A = sys.jacobian(st, {});

  std::vector<double> b(A.nrows, 1.0);
  KrylovOptions ko;
  ko.l_tol = 1e-8;
  ko.l_max_its = 3000;
  ko.restart = 60;
  auto op = [&A](const double* x, double* y) { spmv(A, x, y); };

  std::vector<double> x0(A.nrows, 0.0), x1(A.nrows, 0.0);
  const GmresResult plain = gmres(A.nrows, op, b, x0, nullptr, ko);
  const Ilu0 pc = Ilu0::factor(A, true);
  auto prec = [&pc](const double* r, double* z) { pc.apply(r, z); };
  const GmresResult with_ilu = gmres(A.nrows, op, b, x1, prec, ko);
  CHECK(with_ilu.converged);
  CHECK(with_ilu.iterations < plain.iterations);
}
