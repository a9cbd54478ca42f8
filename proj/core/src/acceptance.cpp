#include "insfem/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "insfem/builtin.hpp"
#include "insfem/cases.hpp"
#include "insfem/jeffery_hamel.hpp"
#include "insfem/kernels.hpp"
#include "insfem/simulation.hpp"

namespace insfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Checker {
  bool pass = true;
  std::ostringstream details;

  void note(const std::string& line) { details << "    " << line << "\n"; }
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details << (ok ? "    ok   " : "    FAIL ") << what << "\n";
  }
  void in_window(const std::string& what, double value, double target, double halfwidth) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s = %.4g (target %.3g +- %.3g)", what.c_str(), value, target,
                  halfwidth);
    check(std::abs(value - target) <= halfwidth, buf);
  }
  void at_least(const std::string& what, double value, double bound) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s = %.4g (>= %.3g)", what.c_str(), value, bound);
    check(value >= bound, buf);
  }
  void at_most(const std::string& what, double value, double bound) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s = %.4g (<= %.3g)", what.c_str(), value, bound);
    check(value <= bound, buf);
  }
};

// ---- criterion 1: scalar advection rates -----------------------------------

Checker criterion_advection() {
  Checker c;
  const std::vector<int> ns1d{8, 16, 32, 64, 128};
  const std::vector<int> ns2d{8, 16, 32, 64};

  const ConvergenceStudy p1 = run_scalar_advection_study(1, ScalarElement::P1, ns1d);
  c.at_least("P1 L2 slope", p1.slopes[0], 2.3);
  c.in_window("P1 H1 slope", p1.slopes[1], 1.0, 0.15);

  const ConvergenceStudy p2 = run_scalar_advection_study(1, ScalarElement::P2, ns1d);
  c.in_window("P2 L2 slope", p2.slopes[0], 3.0, 0.2);
  c.in_window("P2 H1 slope", p2.slopes[1], 2.0, 0.2);

  const ConvergenceStudy q1 = run_scalar_advection_study(2, ScalarElement::Q1, ns2d);
  c.at_least("Q1 L2 slope", q1.slopes[0], 1.9);
  c.in_window("Q1 H1 slope", q1.slopes[1], 1.0, 0.15);

  const ConvergenceStudy q2 = run_scalar_advection_study(2, ScalarElement::Q2, ns2d);
  c.in_window("Q2 L2 slope", q2.slopes[0], 3.0, 0.2);
  c.in_window("Q2 H1 slope", q2.slopes[1], 2.0, 0.2);
  return c;
}

// ---- criterion 2: INS MMS rates ---------------------------------------------

Checker criterion_ins_mms(std::ostream* log) {
  Checker c;
  const std::vector<int> ns{8, 16, 32, 64};

  const ConvergenceStudy d11 = run_ins_mms_study(MmsRegime::Diffusion, InsElement::Q1Q1, ns, log);
  c.in_window("Q1Q1(D) L2(u)", d11.slopes[0], 2.0, 0.15);
  c.in_window("Q1Q1(D) H1(u)", d11.slopes[1], 1.0, 0.15);
  c.in_window("Q1Q1(D) L2(p)", d11.slopes[2], 1.0, 0.25);

  const ConvergenceStudy d21 = run_ins_mms_study(MmsRegime::Diffusion, InsElement::Q2Q1, ns, log);
  c.in_window("Q2Q1(D) L2(u)", d21.slopes[0], 3.0, 0.2);
  c.in_window("Q2Q1(D) H1(u)", d21.slopes[1], 2.0, 0.2);
  c.in_window("Q2Q1(D) L2(p)", d21.slopes[2], 2.0, 0.25);

  const ConvergenceStudy a11 = run_ins_mms_study(MmsRegime::Advection, InsElement::Q1Q1, ns, log);
  c.in_window("Q1Q1(A) L2(u)", a11.slopes[0], 2.0, 0.2);
  c.in_window("Q1Q1(A) H1(u)", a11.slopes[1], 1.0, 0.2);
  c.in_window("Q1Q1(A) L2(p)", a11.slopes[2], 2.0, 0.3);

  // Observed-anomalous targets per the published table (flagged there).
  const ConvergenceStudy a21 = run_ins_mms_study(MmsRegime::Advection, InsElement::Q2Q1, ns, log);
  c.in_window("Q2Q1(A) L2(u)", a21.slopes[0], 2.0, 0.3);
  c.in_window("Q2Q1(A) H1(u)", a21.slopes[1], 1.0, 0.3);
  c.in_window("Q2Q1(A) L2(p)", a21.slopes[2], 2.0, 0.3);
  return c;
}

// ---- criterion 3: Jeffery-Hamel ---------------------------------------------

Checker criterion_jeffery_hamel(std::ostream* log) {
  Checker c;
  const double alpha = kPi / 12.0;
  const JefferyHamelSolution sol = jeffery_hamel_solve(alpha, 30.0, 1e-12, 4096);
  c.at_most("|K - K_ref|", std::abs(sol.K - (-9.7822146449)), 1e-6);

  const JefferyHamelSolution stokes = jeffery_hamel_solve(alpha, 0.0, 1e-13, 4096);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double eta = i / 100.0;
    const double closed =
        (std::cos(2 * alpha * eta) - std::cos(2 * alpha)) / (1.0 - std::cos(2 * alpha));
    worst = std::max(worst, std::abs(stokes.f_at(eta) - closed));
  }
  c.at_most("Stokes-limit profile error", worst, 1e-8);

  const std::vector<int> ns{8, 16, 32};
  const ConvergenceStudy q2 = run_jeffery_hamel_study(InsElement::Q2Q1, ns, log);
  c.in_window("Q2Q1 L2(u) slope", q2.slopes[0], 3.0, 0.2);
  c.in_window("Q2Q1 H1(u) slope", q2.slopes[1], 2.0, 0.25);

  const ConvergenceStudy q1 = run_jeffery_hamel_study(InsElement::Q1Q1, ns, log);
  c.in_window("Q1Q1+PSPG L2(p) slope", q1.slopes[2], 1.0, 0.25);
  return c;
}

// ---- criterion 4: mass conservation -----------------------------------------

Checker criterion_mass_conservation(std::ostream* log) {
  Checker c;
  const BuiltinCaseResult cone = run_case_axisymmetric_cone(0.5, 8, 48, log);
  c.check(cone.ok, "creeping cone solve converged");
  if (!cone.ok) return c;
  // Inlet normal points out of the domain (-z), so Q_in is negative.
  c.at_most("|Q_in| - pi/8", std::abs(std::abs(cone.q_in) - kPi / 8.0), 1e-10);
  c.at_most("|Q_in + Q_out| / |Q_in|", std::abs(cone.q_in + cone.q_out) / std::abs(cone.q_in),
            1e-8);
  return c;
}

// ---- criterion 5: Jacobian correctness --------------------------------------

double fd_worst_rel(const Mesh& mesh, const std::vector<Variable>& vars,
                    const WeakFormConfig& cfg, const KernelSet& ks, unsigned seed) {
  DiscreteSystem sys(mesh, vars, cfg, ks, {});
  const int n = sys.dofs().n_dofs;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> y(n), yold(n), v(n);
  for (double& w : y) w = 0.3 + u(rng);
  for (double& w : yold) w = 0.3 + u(rng);
  for (double& w : v) w = u(rng);

  AssemblyOptions opt;
  opt.sigma1 = 7.0;
  opt.dt_tau = 0.29;
  opt.tau_state = &y;

  const SparseMatrixCSR J = sys.jacobian_raw(y, yold, opt);
  const std::vector<double> Jv = spmv(J, v);
  const double eps = 1e-7;
  std::vector<double> yp(n), ym(n);
  for (int i = 0; i < n; ++i) {
    yp[i] = y[i] + eps * v[i];
    ym[i] = y[i] - eps * v[i];
  }
  const auto Fp = sys.residual_raw(yp, yold, opt);
  const auto Fm = sys.residual_raw(ym, yold, opt);
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    const double fd = (Fp[i] - Fm[i]) / (2 * eps);
    num += (Jv[i] - fd) * (Jv[i] - fd);
    den += Jv[i] * Jv[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-8);
}

Checker criterion_jacobians() {
  Checker c;
  for (const bool laplace : {true, false}) {
    for (const Coord coord : {Coord::XY, Coord::RZ}) {
      const Rect dom = coord == Coord::XY ? Rect{0, 1, 0, 1} : Rect{0.5, 1.5, 0, 1};
      for (const int order : {1, 2}) {
        const Mesh mesh = build_structured_quad_mesh(2, 2, dom, order);
        const std::vector<Variable> vars{{"u", order, VarRole::VelocityComponent},
                                         {"v", order, VarRole::VelocityComponent},
                                         {"p", 1, VarRole::Pressure}};
        WeakFormConfig cfg;
        cfg.laplace = laplace;
        cfg.coord = coord;
        cfg.mu = 0.7;
        cfg.rho = 1.3;
        cfg.convective = true;
        cfg.transient = true;
        cfg.supg = true;
        cfg.pspg = true;
        cfg.lsic = true;

        const std::string tag = std::string(laplace ? "laplace" : "traction") + "/" +
                                (coord == Coord::XY ? "XY" : "RZ") + "/order" +
                                std::to_string(order);
        std::map<std::string, KernelSet> sets;
        sets["mass+pspg"].volume.push_back(std::make_shared<MassKernel>(2));
        sets["momentum"].volume.push_back(std::make_shared<MomentumKernel>(0, 0));
        sets["momentum"].volume.push_back(std::make_shared<MomentumKernel>(1, 1));
        sets["time"].volume.push_back(std::make_shared<MomentumTimeKernel>(0));
        sets["time"].volume.push_back(std::make_shared<MomentumTimeKernel>(1));
        for (const char* ss : {"left", "right", "bottom", "top"}) {
          sets["no-bc"].boundary.push_back(std::make_shared<NoBcBoundaryKernel>(0, ss, 0, laplace));
          sets["no-bc"].boundary.push_back(std::make_shared<NoBcBoundaryKernel>(1, ss, 1, laplace));
        }
        unsigned seed = 5000;
        for (const auto& [name, ks] : sets) {
          const double rel = fd_worst_rel(mesh, vars, cfg, ks, ++seed);
          c.at_most(name + " " + tag, rel, 1e-5);
        }
      }
    }
  }
  return c;
}

// ---- criterion 6: solver suite ----------------------------------------------

// Pinned Stokes system on a small Q2Q1 mesh.
SparseMatrixCSR pinned_stokes_matrix(bool pspg) {
  const Mesh mesh = build_structured_quad_mesh(4, 4, Rect{0, 1, 0, 1}, 2);
  const std::vector<Variable> vars{{"u", 2, VarRole::VelocityComponent},
                                   {"v", 2, VarRole::VelocityComponent},
                                   {"p", 1, VarRole::Pressure}};
  WeakFormConfig cfg;
  cfg.convective = false;
  cfg.supg = false;
  cfg.pspg = pspg;
  ConstraintSet cs;
  for (const char* s : {"left", "right", "bottom", "top"}) {
    cs.dirichlet.push_back({"u", s, [](double, double, double) { return 0.0; }});
    cs.dirichlet.push_back({"v", s, [](double, double, double) { return 0.0; }});
  }
  cs.pins.push_back({"p", 0, 0.0});
  KernelSet ks = ins_kernels(0, 1, 2, cfg);
  DiscreteSystem sys(mesh, vars, cfg, ks, cs);
  SystemState st;
  st.y.assign(sys.dofs().n_dofs, 0.0);
  return sys.jacobian(st, {});
}

Checker criterion_solvers(std::ostream* log) {
  Checker c;
  const SparseMatrixCSR B = pinned_stokes_matrix(false);

  std::vector<double> rhs(B.nrows);
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : rhs) v = u(rng);

  auto solve_with = [&](SchurFactType fact, SchurPrecondition schur) {
    FieldSplitOptions opts;
    opts.fact = fact;
    opts.schur = schur;
    const FieldSplitSchur fs(B, opts);
    std::vector<double> x(B.nrows, 0.0);
    KrylovOptions ko;
    ko.l_tol = 1e-10;
    ko.l_max_its = 100;
    ko.restart = 50;
    auto op = [&B](const double* a, double* b) { spmv(B, a, b); };
    auto pr = [&fs](const double* a, double* b) { fs.apply(a, b); };
    return gmres(B.nrows, op, rhs, x, pr, ko);
  };

  try {
    const GmresResult full = solve_with(SchurFactType::Full, SchurPrecondition::Full);
    c.check(full.converged && full.iterations == 1,
            "field-split full/full solves pinned Stokes in " + std::to_string(full.iterations) +
                " outer iteration(s) to 1e-10");
    const GmresResult lower = solve_with(SchurFactType::Lower, SchurPrecondition::Full);
    c.check(lower.converged && lower.iterations <= 3,
            "fact=lower with exact Schur converges in " + std::to_string(lower.iterations) +
                " <= 3 iterations");
    const GmresResult upper = solve_with(SchurFactType::Upper, SchurPrecondition::Full);
    c.check(upper.converged && upper.iterations <= 3,
            "fact=upper with exact Schur converges in " + std::to_string(upper.iterations) +
                " <= 3 iterations");
  } catch (const std::exception& e) {
    c.check(false, std::string("field-split factorization checks threw: ") + e.what());
  }

  // selfp hand example, computed exactly.
  try {
    SparseMatrixCSR S = csr_from_triplets(
        3, 3,
        {{0, 0, 2.0}, {0, 2, 1.0}, {1, 1, 4.0}, {1, 2, 1.0}, {2, 0, 1.0}, {2, 1, 1.0}, {2, 2, 0.1}});
    S.split = 2;
    FieldSplitOptions opts;
    opts.schur = SchurPrecondition::SelfP;
    const FieldSplitSchur fs(S, opts);
    const auto shat = fs.shat_dense();
    c.check(shat.size() == 1 && shat[0] == 0.1 - (1.0 / 2.0 + 1.0 / 4.0),
            "selfp Schur approximation equals the hand value -0.65 exactly");
  } catch (const std::exception& e) {
    c.check(false, std::string("selfp example threw: ") + e.what());
  }

  // a11 without PSPG (zero pressure block) is a configuration error.
  {
    bool threw = false;
    try {
      FieldSplitOptions opts;
      opts.schur = SchurPrecondition::A11;
      FieldSplitSchur fs(B, opts);
    } catch (const ConfigError&) {
      threw = true;
    } catch (const std::exception& e) {
      c.note(std::string("a11 check threw unexpected exception: ") + e.what());
    }
    c.check(threw, "a11 Schur option without PSPG raises configuration-error");
  }

  // PJFNK and NEWTON agree on the diffusion-dominated MMS problem.
  try {
    const ManufacturedCase mc = ins_mms_case(MmsRegime::Diffusion);
    std::vector<double> solutions[2];
    for (int mode = 0; mode < 2; ++mode) {
      const Mesh mesh = build_structured_quad_mesh(8, 8, mc.domain, 1);
      const std::vector<Variable> vars{{"u", 1, VarRole::VelocityComponent},
                                       {"v", 1, VarRole::VelocityComponent},
                                       {"p", 1, VarRole::Pressure}};
      WeakFormConfig cfg;
      cfg.convective = true;
      cfg.supg = true;
      cfg.pspg = true;
      cfg.mu = mc.mu;
      cfg.rho = mc.rho;
      const ExactFn f1 = mc.f1, f2 = mc.f2;
      cfg.body_force = [f1, f2](double x, double y, double t) {
        return Vec2{f1(x, y, t), f2(x, y, t)};
      };
      ConstraintSet cs;
      auto bind = [](const ExactFn& f) {
        return [f](double x, double y, double t) { return f(x, y, t); };
      };
      for (const char* s : {"left", "right", "bottom", "top"}) {
        cs.dirichlet.push_back({"u", s, bind(mc.u1)});
        cs.dirichlet.push_back({"v", s, bind(mc.u2)});
        cs.dirichlet.push_back({"p", s, bind(mc.p)});
      }
      KernelSet ks = ins_kernels(0, 1, 2, cfg);
      const ExactFn gm = mc.f_mass;
      ks.volume.push_back(std::make_shared<BodyForceKernel>(
          2, [gm](double x, double y, double t) { return -gm(x, y, t); }));
      DiscreteSystem sys(mesh, vars, cfg, ks, cs);
      SystemState st;
      st.y.assign(sys.dofs().n_dofs, 0.0);
      NewtonOptions no;
      no.nl_rel_tol = 1e-10;
      no.nl_abs_tol = 1e-12;
      no.nl_max_its = 30;
      no.solve_type = mode == 0 ? SolveType::Newton : SolveType::Pjfnk;
      KrylovOptions ko;
      ko.l_tol = 1e-10;
      ko.l_max_its = 500;
      PrecSpec ps;
      ps.type = PcType::Lu;
      const NewtonResult nr = newton_solve(
          [&](const std::vector<double>& z) {
            SystemState s2;
            s2.y = z;
            return sys.residual(s2, {});
          },
          [&](const std::vector<double>& z) {
            SystemState s2;
            s2.y = z;
            return sys.jacobian(s2, {});
          },
          st.y, no, ko, ps);
      if (log)
        (*log) << "  " << (mode == 0 ? "NEWTON" : "PJFNK") << ": its=" << nr.iterations
               << " |F|=" << nr.residual_norms.back() << "\n";
      solutions[mode] = st.y;
    }
    double num = 0, den = 0;
    for (size_t i = 0; i < solutions[0].size(); ++i) {
      num += (solutions[0][i] - solutions[1][i]) * (solutions[0][i] - solutions[1][i]);
      den += solutions[0][i] * solutions[0][i];
    }
    c.at_most("|y_NEWTON - y_PJFNK| / |y|", std::sqrt(num / den), 1e-8);
  } catch (const std::exception& e) {
    c.check(false, std::string("PJFNK/NEWTON comparison threw: ") + e.what());
  }
  return c;
}

// ---- criterion 7: temporal orders -------------------------------------------

Checker criterion_temporal() {
  Checker c;
  const std::vector<double> dts{0.4, 0.2, 0.1, 0.05};
  const TemporalStudy be = run_temporal_order_study(1.0, dts, 0.8, 16);
  c.in_window("theta=1 slope", be.slope, 1.0, 0.1);
  const TemporalStudy mid = run_temporal_order_study(0.5, dts, 0.8, 16);
  c.in_window("theta=1/2 slope", mid.slope, 2.0, 0.1);

  const AdaptiveDtOptions opts{5, 1.2, 0.4};
  c.check(std::abs(adapt_dt(0.5, 3, opts) - 0.6) < 1e-15, "adapt_dt(0.5, 3 its) -> 0.6");
  c.check(std::abs(adapt_dt(0.5, 7, opts) - 0.2) < 1e-15, "adapt_dt(0.5, 7 its) -> 0.2");

  bool aborted = false;
  try {
    retry_on_failure(8e-4, 5e-4);
  } catch (const TimestepUnderflow&) {
    aborted = true;
  }
  c.check(aborted, "retry below dtmin aborts (8e-4 -> 4e-4 < 5e-4)");
  return c;
}

// ---- criterion 8: parser -----------------------------------------------------

const char* kListingGlobalParams = R"(# Automatic substitution variables
mu=4e-3
rho=1

[GlobalParams]
  # Variable coupling and naming
  u = vel_x
  v = vel_y
  w = vel_z
  p = p

  # Stabilization parameters
  supg = true
  pspg = true
  alpha = 1e0

  # Problem coefficients
  gravity = '0 0 0'

  # Weak form customization
  convective_term = true
  integrate_p_by_parts = true
  transient_term = true
  laplace = true
[]
)";

const char* kListingKernels = R"([Kernels]
  # continuity equation
  [./mass]
    type = INSMass
    variable = p
  [../]

  # x1-momentum equation
  [./x_time]
    type = INSMomentumTimeDerivative
    variable = vel_x
  [../]
  [./x_momentum_space]
    type = INSMomentumLaplaceForm
    variable = vel_x
    component = 0
  [../]

  # additional kernels...
[]
)";

const char* kListingFunctionsBcsMaterials = R"([Functions]
  [./inlet_func]
    type = ParsedFunction
    value = 'sqrt((x-2)^2 * (x+2)^2 * (y-2)^2 * (y+2)^2) / 16'
  [../]
[]

[BCs]
  [./vel_z_inlet]
    type = FunctionDirichletBC
    function = inlet_func
    variable = vel_z
    boundary = inlet
  [../]

  # additional bcs...
[]

[Materials]
  [./const]
    type = GenericConstantMaterial
    prop_names = 'rho mu'
    prop_values = '${rho}  ${mu}'
  [../]
[]
)";

const char* kListingExecutioner = R"([Executioner]
  # TimeIntegrator and TimeStepper customization
  type = Transient
  num_steps = 100
  trans_ss_check = true
  ss_check_tol = 1e-10
  dtmin = 5e-4
  dt = .5
  [./TimeStepper]
    dt = .5
    type = IterationAdaptiveDT
    cutback_factor = 0.4
    growth_factor = 1.2
    optimal_iterations = 5
  [../]

  # Solver tolerances and iteration limits
  nl_rel_tol = 1e-8
  nl_abs_tol = 1e-12
  nl_max_its = 10
  l_tol = 1e-6
  l_max_its = 10
  line_search = 'none'

  # Options passed directly to PETSc
  petsc_options = '-snes_converged_reason -ksp_converged_reason'
  petsc_options_iname = '-pc_type -pc_factor_shift_type -pc_factor_mat_solver_package'
  petsc_options_value = 'lu NONZERO superlu_dist'
[]
)";

// Mesh/variable skeleton completing the published fragments into a buildable
// simulation (those blocks are not printed in the article).
const char* kSkeleton = R"([Mesh]
  type = GeneratedMesh
  dim = 2
  nx = 4
  ny = 4
  rename_boundary = 'bottom=inlet top=outlet'
[]

[Variables]
  [./vel_x]
  [../]
  [./vel_y]
  [../]
  [./vel_z]
  [../]
  [./p]
  [../]
[]
)";

Checker criterion_parser() {
  Checker c;

  // Each published input listing parses standalone (the GlobalParams listing
  // carries the substitution definitions used by the materials listing).
  try {
    parse_hit(substitute_dbe(kListingGlobalParams));
    parse_hit(kListingKernels);
    parse_hit(substitute_dbe(std::string("mu=4e-3\nrho=1\n") + kListingFunctionsBcsMaterials));
    parse_hit(kListingExecutioner);
    c.check(true, "all four published input listings parse verbatim");
  } catch (const std::exception& e) {
    c.check(false, std::string("listing parse failed: ") + e.what());
  }

  // Substitution: the materials block receives mu=4e-3.
  {
    const std::string all = std::string(kListingGlobalParams) + kListingKernels +
                            kListingFunctionsBcsMaterials + kListingExecutioner;
    const std::string sub = substitute_dbe(all);
    c.check(sub.find("'1  4e-3'") != std::string::npos,
            "dollar-bracket substitution produces prop_values = '1  4e-3'");

    try {
      const ParamTree tree = parse_hit(std::string(kSkeleton) + sub);
      SimulationSpec spec = build_simulation(tree);
      c.check(spec.config.mu == 4e-3 && spec.config.rho == 1.0,
              "materials carry mu = 4e-3, rho = 1");
      const bool ad = spec.executioner.adaptive.has_value();
      c.check(ad && spec.executioner.adaptive->growth_factor == 1.2 &&
                  spec.executioner.adaptive->cutback_factor == 0.4 &&
                  spec.executioner.adaptive->optimal_iterations == 5,
              "executioner listing carries growth_factor=1.2 cutback_factor=0.4 "
              "optimal_iterations=5");
      const Expression& inlet = spec.functions.at("inlet_func");
      c.check(std::abs(inlet.eval(0, 0) - 1.0) < 1e-15, "inlet_func(0,0) = 1");
      c.check(inlet.eval(2, 0.3) == 0.0 && inlet.eval(0.4, -2) == 0.0,
              "inlet_func vanishes on the channel wall");
    } catch (const std::exception& e) {
      c.check(false, std::string("building the concatenated listings failed: ") + e.what());
    }
  }

  // Round-trip property on fuzzed trees.
  {
    std::mt19937 rng(31337);
    std::uniform_int_distribution<int> nkeys(0, 4), nchil(0, 3), len(1, 10), chr(0, 25),
        spaced(0, 3);
    auto value = [&]() {
      std::string v;
      const int n = len(rng);
      for (int i = 0; i < n; ++i) v += static_cast<char>('a' + chr(rng));
      if (spaced(rng) == 0) v += " tail";
      return v;
    };
    bool all_ok = true;
    for (int trial = 0; trial < 200 && all_ok; ++trial) {
      ParamTree t;
      for (int k = 0; k < nkeys(rng); ++k) t.toplevel.emplace_back("v" + std::to_string(k), value());
      const int ntop = 1 + nchil(rng);
      for (int s = 0; s < ntop; ++s) {
        ParamNode sec{"S" + std::to_string(s), {}, {}};
        for (int k = 0; k < nkeys(rng); ++k) sec.params.emplace_back("k" + std::to_string(k), value());
        for (int ch = 0; ch < nchil(rng); ++ch) {
          ParamNode child{"c" + std::to_string(ch), {}, {}};
          for (int k = 0; k < nkeys(rng); ++k)
            child.params.emplace_back("p" + std::to_string(k), value());
          sec.children.push_back(child);
        }
        t.sections.push_back(sec);
      }
      all_ok = parse_hit(render_hit(t)) == t;
    }
    c.check(all_ok, "parse(render(tree)) == tree on 200 fuzzed trees");
  }
  return c;
}

// ---- criterion 9: cavity properties ------------------------------------------

Checker criterion_cavity(std::ostream* log) {
  Checker c;
  const BuiltinCaseResult cav = run_case_lid_cavity(1e3, 64, log);
  c.check(cav.ok, "Re=1000 cavity run completed");
  c.check(cav.steady_state, "steady state detected by the rate check (tol 1e-10) after " +
                                std::to_string(cav.steps) + " steps");
  if (cav.ok) {
    const auto& dm = cav.system->dofs();
    double vmax = 0.0, vmax_interior = 0.0;
    for (int n = 0; n < cav.mesh->n_nodes(); ++n) {
      const double u1 = cav.state.y[dm.node_dof[0][n]];
      const double u2 = cav.state.y[dm.node_dof[1][n]];
      const double mag = std::hypot(u1, u2);
      vmax = std::max(vmax, mag);
      const Vec2 p = cav.mesh->nodes[n];
      if (p.x > 1e-12 && p.x < 1 - 1e-12 && p.y > 1e-12 && p.y < 1 - 1e-12)
        vmax_interior = std::max(vmax_interior, mag);
    }
    c.at_most("max |u|", vmax, 1.0 + 1e-6);
    c.check(vmax_interior < 1.0, "interior |u| < 1");
  }

  const BuiltinCaseResult stokes = run_case_lid_cavity_stokes(64, log);
  c.check(stokes.ok, "Stokes-limit cavity solve converged");
  if (stokes.ok) {
    // Mirror symmetry of the symmetric lid: u1 even, u2 odd about x = 1/2.
    const auto& dm = stokes.system->dofs();
    const Mesh& mesh = *stokes.mesh;
    double worst = 0.0;
    for (int n = 0; n < mesh.n_nodes(); ++n) {
      const Vec2 p = mesh.nodes[n];
      const int m = nearest_node(mesh, {1.0 - p.x, p.y});
      worst = std::max(worst, std::abs(stokes.state.y[dm.node_dof[0][n]] -
                                       stokes.state.y[dm.node_dof[0][m]]));
      worst = std::max(worst, std::abs(stokes.state.y[dm.node_dof[1][n]] +
                                       stokes.state.y[dm.node_dof[1][m]]));
    }
    c.at_most("Stokes lid-flow mirror asymmetry", worst, 1e-6);
  }
  return c;
}

struct Suite {
  const char* name;
  std::function<Checker(std::ostream*)> run;
};

const std::vector<Suite>& suites() {
  static const std::vector<Suite> s{
      {"advection", [](std::ostream*) { return criterion_advection(); }},
      {"ins_mms", [](std::ostream* log) { return criterion_ins_mms(log); }},
      {"jeffery_hamel", [](std::ostream* log) { return criterion_jeffery_hamel(log); }},
      {"mass_conservation", [](std::ostream* log) { return criterion_mass_conservation(log); }},
      {"jacobians", [](std::ostream*) { return criterion_jacobians(); }},
      {"solvers", [](std::ostream* log) { return criterion_solvers(log); }},
      {"temporal", [](std::ostream*) { return criterion_temporal(); }},
      {"parser", [](std::ostream*) { return criterion_parser(); }},
      {"cavity", [](std::ostream* log) { return criterion_cavity(log); }},
  };
  return s;
}

}  // namespace

std::vector<std::string> acceptance_suite_names() {
  std::vector<std::string> names;
  for (const auto& s : suites()) names.push_back(s.name);
  return names;
}

std::vector<CriterionResult> run_acceptance(const std::vector<std::string>& which,
                                            std::ostream* log) {
  std::vector<CriterionResult> results;
  const bool all =
      which.empty() || (which.size() == 1 && which[0] == "all");
  for (const auto& s : suites()) {
    if (!all && std::find(which.begin(), which.end(), s.name) == which.end()) continue;
    CriterionResult r;
    r.name = s.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Checker c = s.run(log);
      r.pass = c.pass;
      r.details = c.details.str();
    } catch (const std::exception& e) {
      r.pass = false;
      r.details = std::string("    exception: ") + e.what() + "\n";
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(std::move(r));
  }
  if (!all) {
    for (const auto& name : which) {
      if (name == "all") continue;
      bool found = false;
      for (const auto& s : suites()) found = found || name == s.name;
      if (!found) throw InvalidArgument("unknown verification suite '" + name + "'");
    }
  }
  return results;
}

}  // namespace insfem
