#include <benchmark/benchmark.h>

#include <random>

#include "insfem/cases.hpp"
#include "insfem/expression.hpp"
#include "insfem/hit.hpp"
#include "insfem/kernels.hpp"
#include "insfem/linear.hpp"

namespace {

using namespace insfem;

DiscreteSystem make_cavity_system(int n) {
  Mesh mesh = build_structured_quad_mesh(n, n, Rect{0, 1, 0, 1}, 1);
  std::vector<Variable> vars{{"vel_x", 1, VarRole::VelocityComponent},
                             {"vel_y", 1, VarRole::VelocityComponent},
                             {"p", 1, VarRole::Pressure}};
  WeakFormConfig cfg;
  cfg.supg = true;
  cfg.pspg = true;
  cfg.mu = 1e-3;
  static Mesh kept;  // keep the mesh alive for the returned system
  kept = std::move(mesh);
  return DiscreteSystem(kept, vars, cfg, ins_kernels(0, 1, 2, cfg), {});
}

void BM_AssembleResidual(benchmark::State& state) {
  DiscreteSystem sys = make_cavity_system(static_cast<int>(state.range(0)));
  std::vector<double> y(sys.dofs().n_dofs, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(sys.residual_raw(y, {}, {}));
}
BENCHMARK(BM_AssembleResidual)->Arg(16)->Arg(32);

void BM_AssembleJacobian(benchmark::State& state) {
  DiscreteSystem sys = make_cavity_system(static_cast<int>(state.range(0)));
  std::vector<double> y(sys.dofs().n_dofs, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(sys.jacobian_raw(y, {}, {}));
}
BENCHMARK(BM_AssembleJacobian)->Arg(16)->Arg(32);

void BM_BandLuFactor(benchmark::State& state) {
  DiscreteSystem sys = make_cavity_system(static_cast<int>(state.range(0)));
  std::vector<double> y(sys.dofs().n_dofs, 0.3);
  const SparseMatrixCSR J = sys.jacobian_raw(y, {}, {});
  for (auto _ : state) benchmark::DoNotOptimize(BandLU::factor(J));
}
BENCHMARK(BM_BandLuFactor)->Arg(16)->Arg(32);

void BM_GmresIlu(benchmark::State& state) {
  DiscreteSystem sys = make_cavity_system(static_cast<int>(state.range(0)));
  std::vector<double> y(sys.dofs().n_dofs, 0.3);
  SparseMatrixCSR J = sys.jacobian_raw(y, {}, {});
  for (int i = 0; i < J.nrows; ++i) J.at(i, i) += 1.0;  // keep it friendly
  std::vector<double> b(J.nrows, 1.0);
  const Ilu0 pc = Ilu0::factor(J, true);
  KrylovOptions ko;
  ko.l_tol = 1e-8;
  for (auto _ : state) {
    std::vector<double> x(J.nrows, 0.0);
    auto op = [&J](const double* a, double* out) { spmv(J, a, out); };
    auto pr = [&pc](const double* a, double* out) { pc.apply(a, out); };
    benchmark::DoNotOptimize(gmres(J.nrows, op, b, x, pr, ko));
  }
}
BENCHMARK(BM_GmresIlu)->Arg(16)->Arg(32);

void BM_ShapeEval(benchmark::State& state) {
  const RefElement ref = ref_element(ElemFamily::QUAD, 2);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(shape_eval(ref, {u(rng), u(rng)}));
}
BENCHMARK(BM_ShapeEval);

void BM_ParseHit(benchmark::State& state) {
  const std::string text = R"([Kernels]
  [./mass]
    type = INSMass
    variable = p
  [../]
  [./x_momentum_space]
    type = INSMomentumLaplaceForm
    variable = vel_x
    component = 0
  [../]
[]
)";
  for (auto _ : state) benchmark::DoNotOptimize(parse_hit(text));
}
BENCHMARK(BM_ParseHit);

void BM_ExpressionEval(benchmark::State& state) {
  const Expression e =
      Expression::parse("sqrt((x-2)^2 * (x+2)^2 * (y-2)^2 * (y+2)^2) / 16 + sin(pi*x*y/5)");
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(e.eval(x, 0.7));
    x += 1e-6;
  }
}
BENCHMARK(BM_ExpressionEval);

}  // namespace

BENCHMARK_MAIN();
