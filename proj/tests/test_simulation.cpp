#include <fstream>
#include <sstream>

#include "doctest.h"
#include "insfem/simulation.hpp"

using namespace insfem;

namespace {

// Transient decaying diffusion-like INS setup small enough for tests.
const char* kMiniCavity = R"(mu=1e-1
rho=1

[GlobalParams]
  u = vel_x
  v = vel_y
  p = p
  supg = true
  pspg = true
  alpha = 1e0
  convective_term = true
  integrate_p_by_parts = true
  laplace = true
[]

[Mesh]
  type = GeneratedMesh
  dim = 2
  nx = 8
  ny = 8
[]

[Variables]
  [./vel_x]
  [../]
  [./vel_y]
  [../]
  [./p]
  [../]
[]

[Kernels]
  [./mass]
    type = INSMass
    variable = p
  [../]
  [./x_time]
    type = INSMomentumTimeDerivative
    variable = vel_x
  [../]
  [./y_time]
    type = INSMomentumTimeDerivative
    variable = vel_y
  [../]
  [./x_momentum]
    type = INSMomentumLaplaceForm
    variable = vel_x
    component = 0
  [../]
  [./y_momentum]
    type = INSMomentumLaplaceForm
    variable = vel_y
    component = 1
  [../]
[]

[Functions]
  [./lid]
    type = ParsedFunction
    value = '4*x*(1-x)'
  [../]
[]

[BCs]
  [./walls_x]
    type = DirichletBC
    variable = vel_x
    boundary = 'left right bottom'
    value = 0
  [../]
  [./walls_y]
    type = DirichletBC
    variable = vel_y
    boundary = 'left right bottom top'
    value = 0
  [../]
  [./lid_x]
    type = FunctionDirichletBC
    variable = vel_x
    boundary = top
    function = lid
  [../]
  [./pin]
    type = PointDirichletBC
    variable = p
    point = '0 0'
    value = 0
  [../]
[]

[Materials]
  [./const]
    type = GenericConstantMaterial
    prop_names = 'rho mu'
    prop_values = '${rho} ${mu}'
  [../]
[]

[Executioner]
  type = Transient
  num_steps = 40
  trans_ss_check = true
  ss_check_tol = 1e-8
  dt = 0.05
  dtmin = 1e-3
  nl_rel_tol = 1e-8
  nl_abs_tol = 1e-12
  nl_max_its = 25
  l_tol = 1e-8
  line_search = 'none'
  petsc_options_iname = '-pc_type'
  petsc_options_value = 'lu'
  [./TimeStepper]
    type = IterationAdaptiveDT
    dt = 0.05
    cutback_factor = 0.5
    growth_factor = 1.2
    optimal_iterations = 8
  [../]
[]

[Postprocessors]
  [./center_u]
    type = PointValue
    variable = vel_x
    point = '0.5 0.5'
  [../]
  [./res]
    type = ResidualNorm
  [../]
[]

[Outputs]
  csv = true
  vtk = true
[]
)";

}  // namespace

TEST_CASE("mini cavity input runs to steady state and writes outputs") {
  const RunResult r = run_input_text(kMiniCavity, "mini_cavity", "sim_out");
  CHECK(r.solved);
  CHECK(r.steady_state);
  REQUIRE(!r.pp_rows.empty());
  // lid drives a positive x-velocity at the center-ish region eventually
  const double center_u = r.pp_rows.back()[1];
  CHECK(center_u != 0.0);

  std::ifstream csv("sim_out/mini_cavity.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "time,center_u,res");

  std::ifstream vtk("sim_out/mini_cavity_final.vtk");
  CHECK(vtk.good());
}

TEST_CASE("serial reruns produce bitwise identical CSV") {
  run_input_text(kMiniCavity, "repro_a", "sim_out");
  run_input_text(kMiniCavity, "repro_b", "sim_out");
  std::ifstream a("sim_out/repro_a.csv"), b("sim_out/repro_b.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
}

TEST_CASE("build_simulation error reporting") {
  auto build = [](const std::string& text) {
    return build_simulation(parse_hit(substitute_dbe(text)));
  };

  // unknown kernel type names valid types
  try {
    build("[Variables]\n[./u]\n[../]\n[]\n[Kernels]\n[./k]\ntype = Bogus\nvariable = u\n[../]\n[]\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("Bogus") != std::string::npos);
    CHECK(msg.find("INSMass") != std::string::npos);  // lists valid types
  }

  // missing required parameter names the object and parameter
  try {
    build("[Variables]\n[./u]\n[../]\n[]\n[Kernels]\n[./mass]\ntype = INSMass\n[../]\n[]\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mass") != std::string::npos);
    CHECK(msg.find("variable") != std::string::npos);
  }

  // kernel referencing an undeclared variable
  CHECK_THROWS_AS(
      build("[Kernels]\n[./k]\ntype = INSMomentumTimeDerivative\nvariable = ghost\n[../]\n[]\n"),
      ConfigError);

  // BC with an unknown side set
  CHECK_THROWS_AS(build("[Mesh]\ntype = GeneratedMesh\ndim = 2\nnx = 2\nny = 2\n[]\n"
                        "[Variables]\n[./u]\n[../]\n[]\n"
                        "[BCs]\n[./b]\ntype = DirichletBC\nvariable = u\nboundary = inlet\n"
                        "value = 0\n[../]\n[]\n"),
                  ConfigError);

  // unknown section
  CHECK_THROWS_AS(build("[Bogus]\n[]\n"), ConfigError);

  // mixing viscous forms
  CHECK_THROWS_AS(build("[GlobalParams]\nu = u\nv = v\np = p\n[]\n"
                        "[Variables]\n[./u]\n[../]\n[./v]\n[../]\n[./p]\n[../]\n[]\n"
                        "[Kernels]\n"
                        "[./a]\ntype = INSMomentumLaplaceForm\nvariable = u\ncomponent = 0\n[../]\n"
                        "[./b]\ntype = INSMomentumTractionForm\nvariable = v\ncomponent = 1\n[../]\n"
                        "[]\n"),
                  ConfigError);
}

TEST_CASE("global params merge with local override") {
  const char* text = R"([GlobalParams]
  value = 2
[]
[Variables]
  [./u]
  [../]
[]
[Kernels]
  [./inherits]
    type = BodyForce
    variable = u
  [../]
  [./overrides]
    type = BodyForce
    variable = u
    value = 5
  [../]
[]
)";
  const SimulationSpec spec = build_simulation(parse_hit(text));
  REQUIRE(spec.kernels.volume.size() == 2);
  // probe the kernels through a tiny assembly
  Mesh mesh = build_interval_mesh(1, 0, 1, 1);
  WeakFormConfig cfg;
  DiscreteSystem sys(mesh, {{"u", 1, VarRole::Scalar}},
                     cfg, spec.kernels, {});
  std::vector<double> y(2, 0.0);
  const auto r = sys.residual_raw(y, {}, {});
  // -(2 + 5) * int(phi) = -7/2 each
  CHECK(r[0] == doctest::Approx(-3.5));
  CHECK(r[1] == doctest::Approx(-3.5));
}

TEST_CASE("petsc option mapping and warnings") {
  const char* text = R"([Executioner]
  type = Steady
  petsc_options = '-snes_converged_reason'
  petsc_options_iname = '-pc_type -pc_factor_shift_type -pc_factor_mat_solver_package'
  petsc_options_value = 'ilu NONZERO superlu_dist'
[]
)";
  const SimulationSpec spec = build_simulation(parse_hit(text));
  CHECK(spec.executioner.prec.type == PcType::Ilu);
  CHECK(spec.executioner.prec.ilu_shift);
  bool warned_pkg = false, warned_flag = false;
  for (const auto& w : spec.warnings) {
    warned_pkg = warned_pkg || w.find("superlu_dist") != std::string::npos;
    warned_flag = warned_flag || w.find("-snes_converged_reason") != std::string::npos;
  }
  CHECK(warned_pkg);
  CHECK(warned_flag);
}

TEST_CASE("rz input with INSMassRZ requires the coordinate system") {
  const char* wrong = R"([GlobalParams]
  u = u
  v = v
  p = p
[]
[Variables]
  [./u]
  [../]
  [./v]
  [../]
  [./p]
  [../]
[]
[Kernels]
  [./mass]
    type = INSMassRZ
    variable = p
  [../]
[]
)";
  CHECK_THROWS_AS(build_simulation(parse_hit(wrong)), ConfigError);

  const std::string right = std::string("[Problem]\ncoord_type = RZ\n[]\n") + wrong;
  const SimulationSpec spec = build_simulation(parse_hit(right));
  CHECK(spec.config.coord == Coord::RZ);
}
