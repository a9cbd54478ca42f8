#include <random>

#include "doctest.h"
#include "insfem/assembly.hpp"
#include "insfem/kernels.hpp"

using namespace insfem;

namespace {

std::vector<Variable> q1q1_vars() {
  return {{"vel_x", 1, VarRole::VelocityComponent},
          {"vel_y", 1, VarRole::VelocityComponent},
          {"p", 1, VarRole::Pressure}};
}

}  // namespace

TEST_CASE("coord_weight") {
  CHECK(coord_weight({3.7, -2}, Coord::XY) == 1.0);
  CHECK(coord_weight({0.5, 3}, Coord::RZ) == 0.5);
  CHECK(coord_weight({0.0, 1}, Coord::RZ) == 0.0);
  CHECK_THROWS_AS(coord_weight({-0.1, 0}, Coord::RZ), InvalidArgument);
}

TEST_CASE("distribute_dofs: counts and block layout") {
  const Mesh m = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 1);
  const DofMap dm = distribute_dofs(m, q1q1_vars());
  CHECK(dm.n_dofs == 27);
  CHECK(dm.blocks[0] == std::pair<int, int>{0, 9});
  CHECK(dm.blocks[1] == std::pair<int, int>{9, 18});
  CHECK(dm.blocks[2] == std::pair<int, int>{18, 27});

  const Mesh m9 = build_structured_quad_mesh(1, 1, Rect{0, 1, 0, 1}, 2);
  const DofMap dm9 = distribute_dofs(
      m9, {{"vel_x", 2, VarRole::VelocityComponent},
           {"vel_y", 2, VarRole::VelocityComponent},
           {"p", 1, VarRole::Pressure}});
  CHECK(dm9.n_dofs == 22);

  CHECK_THROWS_AS(distribute_dofs(m, {{"u", 2, VarRole::Scalar}}), InvalidArgument);
}

TEST_CASE("interpolate: reproduction properties") {
  const Mesh m = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 2);
  const DofMap dm = distribute_dofs(m, {{"u", 2, VarRole::Scalar}});

  std::vector<double> ones(dm.n_dofs, 1.0);
  const InterpValue c = interpolate(dm, ones, {}, 0, 1, {0.3, -0.4});
  CHECK(c.value == doctest::Approx(1.0));
  CHECK(c.grad.norm() == doctest::Approx(0.0).epsilon(1e-13));

  std::vector<double> lin(dm.n_dofs);
  for (int n = 0; n < m.n_nodes(); ++n)
    if (dm.node_dof[0][n] >= 0) lin[dm.node_dof[0][n]] = m.nodes[n].x;
  const InterpValue l = interpolate(dm, lin, {}, 0, 2, {0.1, 0.2});
  CHECK(l.grad.x == doctest::Approx(1.0));
  CHECK(l.grad.y == doctest::Approx(0.0).epsilon(1e-13));

  std::vector<double> quad(dm.n_dofs);
  for (int n = 0; n < m.n_nodes(); ++n)
    if (dm.node_dof[0][n] >= 0) quad[dm.node_dof[0][n]] = m.nodes[n].x * m.nodes[n].x;
  const InterpValue s = interpolate(dm, quad, {}, 0, 0, {-0.2, 0.6});
  CHECK(s.second.xx == doctest::Approx(2.0));
}

TEST_CASE("assembly: no kernels, no constraints gives zero residual") {
  const Mesh m = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 1);
  DiscreteSystem sys(m, q1q1_vars(), WeakFormConfig{}, KernelSet{}, ConstraintSet{});
  SystemState st;
  st.y.assign(sys.dofs().n_dofs, 1.3);
  const auto r = sys.residual(st, {});
  for (double v : r) CHECK(v == 0.0);
}

TEST_CASE("constraint replacement semantics") {
  const Mesh m = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 1);
  ConstraintSet cs;
  cs.dirichlet.push_back({"vel_x", "left", [](double, double, double) { return 1.0; }});
  DiscreteSystem sys(m, q1q1_vars(), WeakFormConfig{}, KernelSet{}, cs);

  SystemState st;
  st.y.assign(sys.dofs().n_dofs, 3.0);
  const auto r = sys.residual(st, {});
  int constrained = 0;
  for (double v : r) {
    if (v != 0.0) {
      CHECK(v == doctest::Approx(2.0));  // y - g = 3 - 1
      ++constrained;
    }
  }
  CHECK(constrained == 3);  // three nodes on the left edge

  // Identity Jacobian rows.
  auto J = sys.jacobian(st, {});
  const auto& dm = sys.dofs();
  for (const auto& c : sys.constraints()) {
    for (int k = J.row_ptr[c.dof]; k < J.row_ptr[c.dof + 1]; ++k)
      CHECK(J.vals[k] == (J.col_idx[k] == c.dof ? 1.0 : 0.0));
  }
  (void)dm;
}

TEST_CASE("constraints: order independence and conflict detection") {
  const Mesh m = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 1);
  auto g0 = [](double, double, double) { return 0.0; };
  ConstraintSet a, b;
  a.dirichlet.push_back({"vel_x", "left", g0});
  a.dirichlet.push_back({"vel_x", "top", g0});
  b.dirichlet.push_back({"vel_x", "top", g0});
  b.dirichlet.push_back({"vel_x", "left", g0});

  DiscreteSystem sa(m, q1q1_vars(), WeakFormConfig{}, KernelSet{}, a);
  DiscreteSystem sb(m, q1q1_vars(), WeakFormConfig{}, KernelSet{}, b);
  SystemState st;
  st.y.assign(sa.dofs().n_dofs, 0.7);
  CHECK(sa.residual(st, {}) == sb.residual(st, {}));

  // Conflicting values on the shared corner dof.
  ConstraintSet bad;
  bad.dirichlet.push_back({"vel_x", "left", g0});
  bad.dirichlet.push_back({"vel_x", "top", [](double, double, double) { return 5.0; }});
  DiscreteSystem sc(m, q1q1_vars(), WeakFormConfig{}, KernelSet{}, bad);
  CHECK_THROWS_AS(sc.residual(st, {}), ConfigError);
}

TEST_CASE("assembly additivity over kernels") {
  const Mesh m = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 1);
  WeakFormConfig cfg;
  cfg.supg = false;
  cfg.pspg = false;
  cfg.convective = true;

  KernelSet k1, k2, both;
  k1.volume.push_back(std::make_shared<MassKernel>(2));
  k2.volume.push_back(std::make_shared<MomentumKernel>(0, 0));
  both.volume = k1.volume;
  both.volume.push_back(k2.volume[0]);

  DiscreteSystem s1(m, q1q1_vars(), cfg, k1, {});
  DiscreteSystem s2(m, q1q1_vars(), cfg, k2, {});
  DiscreteSystem s12(m, q1q1_vars(), cfg, both, {});

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> y(s1.dofs().n_dofs);
  for (double& v : y) v = u(rng);

  const auto r1 = s1.residual_raw(y, {}, {});
  const auto r2 = s2.residual_raw(y, {}, {});
  const auto r12 = s12.residual_raw(y, {}, {});
  for (size_t i = 0; i < y.size(); ++i)
    CHECK(r12[i] == doctest::Approx(r1[i] + r2[i]).epsilon(1e-14));
}

TEST_CASE("pressure-equation residual of a divergence-free nodal field is zero") {
  const Mesh m = build_structured_quad_mesh(3, 3, Rect{0, 1, 0, 1}, 1);
  WeakFormConfig cfg;
  cfg.pspg = false;
  KernelSet ks;
  ks.volume.push_back(std::make_shared<MassKernel>(2));
  DiscreteSystem sys(m, q1q1_vars(), cfg, ks, {});
  const auto& dm = sys.dofs();

  std::vector<double> y(dm.n_dofs, 0.0);
  for (int n = 0; n < m.n_nodes(); ++n) y[dm.node_dof[0][n]] = m.nodes[n].y;  // u = (y, 0)
  const auto r = sys.residual_raw(y, {}, {});
  for (double v : r) CHECK(std::abs(v) < 1e-13);
}

TEST_CASE("consistent mass matrix from the time kernel") {
  // Backward Euler, rho = 1: J = M / dt on a unit QUAD4.
  const Mesh m = build_structured_quad_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
  WeakFormConfig cfg;
  cfg.transient = true;
  KernelSet ks;
  ks.volume.push_back(std::make_shared<MomentumTimeKernel>(0));
  DiscreteSystem sys(m, q1q1_vars(), cfg, ks, {});

  AssemblyOptions opt;
  opt.sigma1 = 1.0 / 0.25;  // dt = 0.25
  std::vector<double> y(sys.dofs().n_dofs, 0.4);
  auto J = sys.jacobian_raw(y, std::vector<double>(y.size(), 0.0), opt);
  // diagonal of consistent mass on the unit square is 1/9
  for (int i = 0; i < 4; ++i) CHECK(J.at(i, i) == doctest::Approx((1.0 / 9.0) / 0.25));
  // row sums of M equal 1/4 (integral of each basis function)
  for (int i = 0; i < 4; ++i) {
    double s = 0;
    for (int k = J.row_ptr[i]; k < J.row_ptr[i + 1]; ++k) s += J.vals[k];
    CHECK(s == doctest::Approx(0.25 / 0.25));
  }
}

TEST_CASE("time kernel with steady executioner is a configuration error") {
  const Mesh m = build_structured_quad_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
  WeakFormConfig cfg;
  cfg.transient = true;
  KernelSet ks;
  ks.volume.push_back(std::make_shared<MomentumTimeKernel>(0));
  DiscreteSystem sys(m, q1q1_vars(), cfg, ks, {});
  std::vector<double> y(sys.dofs().n_dofs, 0.0);
  CHECK_THROWS_AS(sys.residual_raw(y, y, {}), ConfigError);
}

TEST_CASE("serial assembly deterministic and thread merge consistent") {
  const Mesh m = build_structured_quad_mesh(4, 4, Rect{0, 1, 0, 1}, 1);
  WeakFormConfig cfg;
  cfg.supg = true;
  cfg.pspg = true;
  cfg.mu = 0.01;
  KernelSet ks = ins_kernels(0, 1, 2, cfg);
  DiscreteSystem sys(m, q1q1_vars(), cfg, ks, {});
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> y(sys.dofs().n_dofs);
  for (double& v : y) v = u(rng);

  const auto r1 = sys.residual_raw(y, {}, {});
  const auto r2 = sys.residual_raw(y, {}, {});
  CHECK(r1 == r2);  // bitwise
}
