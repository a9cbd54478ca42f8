#include "insfem/builtin.hpp"

#include <cmath>

#include "insfem/cases.hpp"
#include "insfem/kernels.hpp"
#include "insfem/postprocess.hpp"

namespace insfem {

namespace {

SpaceTimeFn constant(double v) {
  return [v](double, double, double) { return v; };
}

}  // namespace

BuiltinCaseResult run_case_lid_cavity(double Re, int n, std::ostream* log) {
  BuiltinCaseResult out;
  out.mesh = std::make_shared<Mesh>(build_structured_quad_mesh(n, n, Rect{0, 1, 0, 1}, 1));

  WeakFormConfig cfg;
  cfg.laplace = true;
  cfg.convective = true;
  cfg.transient = true;
  cfg.supg = true;
  cfg.pspg = true;
  cfg.rho = 1.0;
  cfg.mu = 1.0 / Re;  // unit lid speed and box size

  std::vector<Variable> vars{{"vel_x", 1, VarRole::VelocityComponent},
                             {"vel_y", 1, VarRole::VelocityComponent},
                             {"p", 1, VarRole::Pressure}};
  ConstraintSet cs;
  for (const char* side : {"left", "right", "bottom"}) {
    cs.dirichlet.push_back({"vel_x", side, constant(0)});
    cs.dirichlet.push_back({"vel_y", side, constant(0)});
  }
  cs.dirichlet.push_back({"vel_x", "top", [](double x, double, double) { return 4 * x * (1 - x); }});
  cs.dirichlet.push_back({"vel_y", "top", constant(0)});
  cs.pins.push_back({"p", nearest_node(*out.mesh, {0, 0}), 0.0});

  KernelSet ks = ins_kernels(0, 1, 2, cfg);
  out.system = std::make_shared<DiscreteSystem>(*out.mesh, vars, cfg, ks, cs);

  out.state.y.assign(out.system->dofs().n_dofs, 0.0);
  out.state.y_old = out.state.y;

  // Solver and stepping controls follow the published transient setup.
  // The dt-dependent tau loses pressure stabilization below CFL ~ O(1), so
  // the march starts near CFL 1 (unit lid speed) and never cuts far below it.
  ExecutionerOptions ex;
  ex.transient = true;
  ex.theta = 1.0;
  ex.dt0 = 1.0 / n;
  ex.dtmin = 0.2 / n;
  ex.num_steps = 500;
  ex.ss_check = true;
  ex.ss_check_tol = 1e-10;
  ex.adaptive = AdaptiveDtOptions{8, 1.2, 0.5};
  ex.newton.nl_rel_tol = 1e-8;
  ex.newton.nl_abs_tol = 1e-12;
  ex.newton.nl_max_its = 25;
  ex.newton.line_search = LineSearchKind::Basic;
  const SolverChoice sc = choose_solver(*out.system);
  ex.prec = sc.prec;
  ex.krylov = sc.krylov;
  ex.krylov.l_tol = 1e-8;

  const TransientResult tr = run_transient(*out.system, out.state, ex, {}, log);
  out.ok = tr.ok;
  out.steady_state = tr.steady_state;
  out.steps = tr.steps_taken;
  out.message = tr.message;
  return out;
}

BuiltinCaseResult run_case_lid_cavity_stokes(int n, std::ostream* log) {
  BuiltinCaseResult out;
  out.mesh = std::make_shared<Mesh>(build_structured_quad_mesh(n, n, Rect{0, 1, 0, 1}, 1));

  WeakFormConfig cfg;
  cfg.laplace = true;
  cfg.convective = true;  // negligible at this viscosity
  cfg.supg = true;
  cfg.pspg = true;
  cfg.rho = 1.0;
  cfg.mu = 1e3;

  std::vector<Variable> vars{{"vel_x", 1, VarRole::VelocityComponent},
                             {"vel_y", 1, VarRole::VelocityComponent},
                             {"p", 1, VarRole::Pressure}};
  ConstraintSet cs;
  for (const char* side : {"left", "right", "bottom"}) {
    cs.dirichlet.push_back({"vel_x", side, constant(0)});
    cs.dirichlet.push_back({"vel_y", side, constant(0)});
  }
  cs.dirichlet.push_back({"vel_x", "top", [](double x, double, double) { return 4 * x * (1 - x); }});
  cs.dirichlet.push_back({"vel_y", "top", constant(0)});
  cs.pins.push_back({"p", nearest_node(*out.mesh, {0, 0}), 0.0});

  KernelSet ks = ins_kernels(0, 1, 2, cfg);
  out.system = std::make_shared<DiscreteSystem>(*out.mesh, vars, cfg, ks, cs);
  out.state.y.assign(out.system->dofs().n_dofs, 0.0);

  const SolverChoice sc = choose_solver(*out.system);
  const NewtonResult nr = solve_steady(*out.system, out.state, sc.newton, sc.krylov, sc.prec);
  out.ok = nr.converged;
  out.steady_state = nr.converged;
  if (log)
    (*log) << "stokes cavity: " << (nr.converged ? "converged" : "diverged") << " in "
           << nr.iterations << " newton iterations\n";
  return out;
}

BuiltinCaseResult run_case_axisymmetric_cone(double Re, int nr, int nz, std::ostream* log) {
  BuiltinCaseResult out;
  const bool creeping = Re <= 1.0;
  // Average inlet speed 1/2 over diameter 1 gives Re = 0.5/mu.
  const double mu = 0.5 / Re;

  if (nz % 4 != 0) throw InvalidArgument("cone mesh: nz must be a multiple of 4");
  const int order = creeping ? 2 : 1;
  Mesh mesh = build_structured_tri_mesh(nr, nz, Rect{0, 1, 0, 4}, order);
  // (rho_hat, z) -> (r, z) with the expanding radius profile R(z).
  mesh.transform([](Vec2 q) {
    const double R = q.y <= 1.0 ? 0.5 + 0.5 * q.y : 1.0;
    return Vec2{q.x * R, q.y};
  });
  out.mesh = std::make_shared<Mesh>(std::move(mesh));

  WeakFormConfig cfg;
  cfg.laplace = true;
  cfg.convective = true;
  cfg.coord = Coord::RZ;
  cfg.rho = 1.0;
  cfg.mu = mu;
  cfg.supg = !creeping;
  cfg.pspg = !creeping;
  cfg.transient = !creeping;

  std::vector<Variable> vars{{"vel_r", order, VarRole::VelocityComponent},
                             {"vel_z", order, VarRole::VelocityComponent},
                             {"p", 1, VarRole::Pressure}};
  ConstraintSet cs;
  // bottom = inlet, right = wall, left = axis, top = natural outflow
  cs.dirichlet.push_back({"vel_r", "bottom", constant(0)});
  cs.dirichlet.push_back(
      {"vel_z", "bottom", [](double r, double, double) { return 1.0 - 4.0 * r * r; }});
  cs.dirichlet.push_back({"vel_r", "right", constant(0)});
  cs.dirichlet.push_back({"vel_z", "right", constant(0)});
  cs.dirichlet.push_back({"vel_r", "left", constant(0)});

  KernelSet ks = ins_kernels(0, 1, 2, cfg);
  out.system = std::make_shared<DiscreteSystem>(*out.mesh, vars, cfg, ks, cs);
  out.state.y.assign(out.system->dofs().n_dofs, 0.0);
  out.state.y_old = out.state.y;

  const SolverChoice sc = choose_solver(*out.system);
  if (!creeping) {
    WeakFormConfig scfg = cfg;
    scfg.transient = false;
    scfg.convective = false;
    KernelSet sks = ins_kernels(0, 1, 2, scfg);
    DiscreteSystem stokes(*out.mesh, vars, scfg, sks, cs);
    SystemState s0;
    s0.y.assign(stokes.dofs().n_dofs, 0.0);
    const SolverChoice ssc = choose_solver(stokes);
    const NewtonResult snr = solve_steady(stokes, s0, ssc.newton, ssc.krylov, ssc.prec);
    if (snr.converged) {
      out.state.y = s0.y;
      out.state.y_old = s0.y;
    }
    if (log) (*log) << "stokes start: " << (snr.converged ? "converged" : "skipped") << "\n";
  }
  if (creeping) {
    const NewtonResult nrr = solve_steady(*out.system, out.state, sc.newton, sc.krylov, sc.prec);
    out.ok = nrr.converged;
    out.steady_state = nrr.converged;
    if (log)
      (*log) << "creeping cone: " << (nrr.converged ? "converged" : "diverged") << " in "
             << nrr.iterations << " newton iterations\n";
  } else {
    ExecutionerOptions ex;
    ex.transient = true;
    ex.theta = 1.0;
    ex.dt0 = 4.0 / nz;  // about CFL 1 on the axial spacing at unit inlet speed
    ex.dtmin = 0.8 / nz;
    ex.num_steps = 300;
    ex.ss_check = true;
    ex.ss_check_tol = 1e-9;
    ex.adaptive = AdaptiveDtOptions{8, 1.2, 0.5};
    ex.newton.nl_rel_tol = 1e-8;
    ex.newton.nl_abs_tol = 1e-12;
    ex.newton.nl_max_its = 25;
    ex.newton.line_search = LineSearchKind::Basic;
    ex.prec = sc.prec;
    ex.krylov = sc.krylov;
    ex.krylov.l_tol = 1e-8;
    const TransientResult tr = run_transient(*out.system, out.state, ex, {}, log);
    out.ok = tr.ok;
    out.steady_state = tr.steady_state;
    out.steps = tr.steps_taken;
    out.message = tr.message;
  }

  if (out.ok) {
    out.q_in = volumetric_flow_rate(out.system->dofs(), out.state.y, "bottom", Coord::RZ, 0, 1);
    out.q_out = volumetric_flow_rate(out.system->dofs(), out.state.y, "top", Coord::RZ, 0, 1);
  }
  return out;
}

}  // namespace insfem
