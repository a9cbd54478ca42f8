#include "insfem/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>

#include "insfem/kernels.hpp"

namespace insfem {

namespace {

// Parameter lookup with GlobalParams fallback; object-local keys win.
class ParamScope {
 public:
  ParamScope(const ParamNode* object, const ParamNode* globals, std::string owner)
      : obj_(object), glob_(globals), owner_(std::move(owner)) {}

  const std::string* find(const std::string& key) const {
    if (obj_) {
      if (const std::string* v = obj_->find(key)) return v;
    }
    if (glob_) {
      if (const std::string* v = glob_->find(key)) return v;
    }
    return nullptr;
  }
  std::string require(const std::string& key) const {
    const std::string* v = find(key);
    if (!v)
      throw ConfigError("object '" + owner_ + "' is missing required parameter '" + key + "'");
    return *v;
  }
  std::string get(const std::string& key, const std::string& dflt) const {
    const std::string* v = find(key);
    return v ? *v : dflt;
  }
  double get_num(const std::string& key, double dflt) const {
    const std::string* v = find(key);
    return v ? to_num(key, *v) : dflt;
  }
  double require_num(const std::string& key) const { return to_num(key, require(key)); }
  bool get_bool(const std::string& key, bool dflt) const {
    const std::string* v = find(key);
    if (!v) return dflt;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("object '" + owner_ + "': parameter '" + key + "' is not a boolean: '" +
                      *v + "'");
  }
  const std::string& owner() const { return owner_; }

 private:
  double to_num(const std::string& key, const std::string& v) const {
    try {
      size_t pos = 0;
      const double d = std::stod(v, &pos);
      while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return d;
    } catch (...) {
      throw ConfigError("object '" + owner_ + "': parameter '" + key + "' is not a number: '" +
                        v + "'");
    }
  }
  const ParamNode* obj_;
  const ParamNode* glob_;
  std::string owner_;
};

Mesh build_mesh(const ParamScope& p) {
  const std::string type = p.get("type", "GeneratedMesh");
  if (type != "GeneratedMesh")
    throw ConfigError("mesh type '" + type + "' unknown; valid types: GeneratedMesh");
  const int dim = static_cast<int>(p.get_num("dim", 2));
  if (dim == 3) throw ConfigError("3D meshes parse but cannot be solved; use dim = 1 or 2");
  if (dim == 1) {
    const int nx = static_cast<int>(p.get_num("nx", 1));
    const int order =
        p.get("elem_type", "EDGE2") == "EDGE3" || p.get_bool("second_order", false) ? 2 : 1;
    return build_interval_mesh(nx, p.get_num("xmin", 0.0), p.get_num("xmax", 1.0), order);
  }
  const int nx = static_cast<int>(p.get_num("nx", 1));
  const int ny = static_cast<int>(p.get_num("ny", 1));
  const Rect rect{p.get_num("xmin", 0.0), p.get_num("xmax", 1.0), p.get_num("ymin", 0.0),
                  p.get_num("ymax", 1.0)};
  const std::string et = p.get("elem_type", p.get_bool("second_order", false) ? "QUAD9" : "QUAD4");
  Mesh mesh;
  if (et == "QUAD4")
    mesh = build_structured_quad_mesh(nx, ny, rect, 1);
  else if (et == "QUAD9")
    mesh = build_structured_quad_mesh(nx, ny, rect, 2);
  else if (et == "TRI3")
    mesh = build_structured_tri_mesh(nx, ny, rect, 1);
  else if (et == "TRI6")
    mesh = build_structured_tri_mesh(nx, ny, rect, 2);
  else
    throw ConfigError("elem_type '" + et +
                      "' unknown; valid types: EDGE2 EDGE3 TRI3 TRI6 QUAD4 QUAD9");
  // rename_boundary = 'old=new ...' lets inputs use application side-set names.
  if (const std::string* ren = p.find("rename_boundary")) {
    for (const auto& pair : split_list(*ren)) {
      const size_t eq = pair.find('=');
      if (eq == std::string::npos)
        throw ConfigError("Mesh: rename_boundary entries must look like old=new");
      const std::string oldn = pair.substr(0, eq), newn = pair.substr(eq + 1);
      auto it = mesh.side_sets.find(oldn);
      if (it == mesh.side_sets.end())
        throw ConfigError("Mesh: rename_boundary: no side set named '" + oldn + "'");
      auto sides = it->second;
      mesh.side_sets.erase(it);
      mesh.side_sets[newn] = std::move(sides);
    }
  }
  return mesh;
}

Vec2 parse_vec(const ParamScope& p, const std::string& key, Vec2 dflt) {
  const std::string* v = p.find(key);
  if (!v) return dflt;
  const auto parts = split_list(*v);
  Vec2 out{0, 0};
  if (parts.size() > 0) out.x = std::stod(parts[0]);
  if (parts.size() > 1) out.y = std::stod(parts[1]);
  return out;
}

struct CouplingNames {
  std::string u = "vel_x", v = "vel_y", p = "p";
};

const char* kKernelTypes =
    "INSMass INSMassRZ INSMomentumTimeDerivative INSMomentumLaplaceForm "
    "INSMomentumTractionForm INSMomentumLaplaceFormRZ INSMomentumTractionFormRZ "
    "Advection AdvectionSUPG BodyForce BodyForceSUPG";
const char* kBcTypes =
    "DirichletBC FunctionDirichletBC PointDirichletBC INSMomentumNoBCBCLaplaceForm "
    "INSMomentumNoBCBCTractionForm";
const char* kPpTypes = "VolumetricFlowRate PointValue L2Error H1Error ResidualNorm";

SpaceTimeFn function_fn(const SimulationSpec& spec, const std::string& name,
                        const std::string& owner) {
  auto it = spec.functions.find(name);
  if (it == spec.functions.end())
    throw ConfigError("object '" + owner + "' references unknown function '" + name + "'");
  const Expression e = it->second;
  return [e](double x, double y, double t) { return e.eval(x, y, 0.0, t); };
}

}  // namespace

SimulationSpec build_simulation(const ParamTree& tree) {
  SimulationSpec spec;
  const ParamNode* globals = tree.section("GlobalParams");

  for (const auto& s : tree.sections) {
    static const std::vector<std::string> known{
        "GlobalParams", "Mesh",    "Variables",   "Kernels", "BCs",
        "Functions",    "Materials", "Problem",   "Executioner",
        "Outputs",      "Postprocessors", "ICs"};
    if (std::find(known.begin(), known.end(), s.name) == known.end())
      throw ConfigError("unknown section '[" + s.name + "]'");
  }

  CouplingNames names;
  {
    ParamScope g(nullptr, globals, "GlobalParams");
    names.u = g.get("u", names.u);
    names.v = g.get("v", names.v);
    names.p = g.get("p", names.p);
    spec.config.supg = g.get_bool("supg", false);
    spec.config.pspg = g.get_bool("pspg", false);
    spec.config.lsic = g.get_bool("lsic", false);
    spec.config.alpha = g.get_num("alpha", 1.0);
    spec.config.convective = g.get_bool("convective_term", true);
    spec.config.transient = g.get_bool("transient_term", false);
    spec.config.integrate_p_by_parts = g.get_bool("integrate_p_by_parts", true);
    spec.config.laplace = g.get_bool("laplace", true);
    spec.config.tau_lsic = g.get_num("tau_lsic", -1.0);
    const Vec2 gravity = parse_vec(g, "gravity", {0, 0});
    if (gravity.x != 0 || gravity.y != 0)
      spec.config.body_force = [gravity](double, double, double) { return gravity; };
  }

  if (const ParamNode* prob = tree.section("Problem")) {
    ParamScope p(prob, globals, "Problem");
    const std::string ct = p.get("coord_type", "XYZ");
    if (ct == "RZ")
      spec.config.coord = Coord::RZ;
    else if (ct != "XYZ" && ct != "XY")
      throw ConfigError("Problem: coord_type '" + ct + "' unknown; valid types: XYZ RZ");
  }

  if (const ParamNode* mesh = tree.section("Mesh")) {
    spec.mesh = build_mesh(ParamScope(mesh, globals, "Mesh"));
    spec.has_mesh = true;
  }

  if (const ParamNode* vars = tree.section("Variables")) {
    for (const ParamNode& v : vars->children) {
      ParamScope p(&v, globals, v.name);
      const std::string fam = p.get("family", "LAGRANGE");
      if (fam != "LAGRANGE")
        throw ConfigError("variable '" + v.name + "': family '" + fam +
                          "' unsupported; only LAGRANGE");
      const std::string ord = p.get("order", "FIRST");
      int order = 1;
      if (ord == "SECOND")
        order = 2;
      else if (ord != "FIRST")
        throw ConfigError("variable '" + v.name + "': order '" + ord +
                          "' unsupported; FIRST or SECOND");
      VarRole role = VarRole::Scalar;
      if (v.name == names.u || v.name == names.v) role = VarRole::VelocityComponent;
      if (v.name == names.p) role = VarRole::Pressure;
      spec.variables.push_back({v.name, order, role});
      if (const std::string* ic = v.find("initial_condition"))
        spec.initial_values[v.name] = std::stod(*ic);
    }
    // Field splitting wants velocity blocks first, pressure last.
    std::stable_sort(spec.variables.begin(), spec.variables.end(),
                     [](const Variable& a, const Variable& b) {
                       return (a.role == VarRole::Pressure) < (b.role == VarRole::Pressure);
                     });
  }

  auto var_index = [&](const std::string& name, const std::string& owner) {
    for (size_t i = 0; i < spec.variables.size(); ++i)
      if (spec.variables[i].name == name) return static_cast<int>(i);
    throw ConfigError("object '" + owner + "': variable '" + name + "' is not declared");
  };

  if (const ParamNode* fns = tree.section("Functions")) {
    for (const ParamNode& f : fns->children) {
      ParamScope p(&f, globals, f.name);
      const std::string type = p.get("type", "ParsedFunction");
      if (type != "ParsedFunction")
        throw ConfigError("function '" + f.name + "': type '" + type +
                          "' unknown; valid types: ParsedFunction");
      const std::string* src = f.find("value");
      if (!src) src = f.find("expression");
      if (!src)
        throw ConfigError("function '" + f.name + "' is missing required parameter 'value'");
      spec.functions.emplace(f.name, Expression::parse(*src));
    }
  }

  if (const ParamNode* mats = tree.section("Materials")) {
    for (const ParamNode& m : mats->children) {
      ParamScope p(&m, globals, m.name);
      const std::string type = p.require("type");
      if (type != "GenericConstantMaterial")
        throw ConfigError("material '" + m.name + "': type '" + type +
                          "' unknown; valid types: GenericConstantMaterial");
      const auto pnames = split_list(p.require("prop_names"));
      const auto pvals = split_list(p.require("prop_values"));
      if (pnames.size() != pvals.size())
        throw ConfigError("material '" + m.name + "': prop_names/prop_values length mismatch");
      for (size_t i = 0; i < pnames.size(); ++i) {
        if (pnames[i] == "rho")
          spec.config.rho = std::stod(pvals[i]);
        else if (pnames[i] == "mu")
          spec.config.mu = std::stod(pvals[i]);
        else
          spec.warnings.push_back("material property '" + pnames[i] + "' ignored");
      }
    }
  }

  int laplace_votes = 0, traction_votes = 0;
  if (const ParamNode* kerns = tree.section("Kernels")) {
    for (const ParamNode& k : kerns->children) {
      ParamScope p(&k, globals, k.name);
      const std::string type = p.require("type");
      const std::string vname = p.require("variable");
      const int var = var_index(vname, k.name);

      auto ins_ids = [&]() {
        var_index(names.u, k.name);
        var_index(names.v, k.name);
        var_index(names.p, k.name);
      };
      auto rz_check = [&](bool wants_rz) {
        const bool is_rz = spec.config.coord == Coord::RZ;
        if (wants_rz != is_rz)
          throw ConfigError("kernel '" + k.name + "' (" + type + ") requires coord_type " +
                            std::string(wants_rz ? "RZ" : "XYZ"));
      };
      auto momentum_component = [&]() {
        const int c = static_cast<int>(p.require_num("component"));
        if (c < 0 || c > 1)
          throw ConfigError("kernel '" + k.name + "': component " + std::to_string(c) +
                            " out of range for 2D/RZ solves");
        return c;
      };

      if (type == "INSMass" || type == "INSMassRZ") {
        rz_check(type == "INSMassRZ");
        ins_ids();
        spec.kernels.volume.push_back(std::make_shared<MassKernel>(var));
      } else if (type == "INSMomentumTimeDerivative") {
        spec.kernels.volume.push_back(std::make_shared<MomentumTimeKernel>(var));
        spec.config.transient = true;
      } else if (type == "INSMomentumLaplaceForm" || type == "INSMomentumLaplaceFormRZ" ||
                 type == "INSMomentumTractionForm" || type == "INSMomentumTractionFormRZ") {
        const bool laplace = type.find("Laplace") != std::string::npos;
        rz_check(type.find("RZ") != std::string::npos);
        ins_ids();
        (laplace ? laplace_votes : traction_votes)++;
        spec.kernels.volume.push_back(
            std::make_shared<MomentumKernel>(var, momentum_component()));
      } else if (type == "Advection" || type == "AdvectionSUPG") {
        const Vec2 a = parse_vec(p, "velocity", {1, 0});
        if (type == "Advection")
          spec.kernels.volume.push_back(std::make_shared<AdvectionKernel>(var, a));
        else
          spec.kernels.volume.push_back(std::make_shared<AdvectionSupgKernel>(var, a));
      } else if (type == "BodyForce" || type == "BodyForceSUPG") {
        SpaceTimeFn f;
        if (const std::string* fn = p.find("function"))
          f = function_fn(spec, *fn, k.name);
        else {
          const double value = p.get_num("value", 1.0);
          f = [value](double, double, double) { return value; };
        }
        if (type == "BodyForce")
          spec.kernels.volume.push_back(std::make_shared<BodyForceKernel>(var, std::move(f)));
        else
          spec.kernels.volume.push_back(std::make_shared<BodyForceSupgKernel>(
              var, parse_vec(p, "velocity", {1, 0}), std::move(f)));
      } else {
        throw ConfigError("kernel '" + k.name + "': unknown type '" + type +
                          "'; valid types: " + kKernelTypes);
      }
    }
  }
  if (laplace_votes && traction_votes)
    throw ConfigError("momentum kernels mix Laplace and traction forms");
  if (laplace_votes) spec.config.laplace = true;
  if (traction_votes) spec.config.laplace = false;

  if (const ParamNode* bcs = tree.section("BCs")) {
    for (const ParamNode& b : bcs->children) {
      ParamScope p(&b, globals, b.name);
      const std::string type = p.require("type");
      const std::string vname = p.require("variable");
      var_index(vname, b.name);
      std::vector<std::string> boundaries;
      if (type != "PointDirichletBC") {
        boundaries = split_list(p.require("boundary"));
        if (spec.has_mesh)
          for (const auto& side : boundaries)
            if (!spec.mesh.side_sets.count(side))
              throw ConfigError("boundary condition '" + b.name + "': boundary '" + side +
                                "' is not a mesh side set");
      }
      if (type == "DirichletBC") {
        const double value = p.require_num("value");
        for (const auto& side : boundaries)
          spec.constraints.dirichlet.push_back(
              {vname, side, [value](double, double, double) { return value; }});
      } else if (type == "PointDirichletBC") {
        // Single-dof constraint (pressure pinning); snaps to the nearest node.
        if (!spec.has_mesh)
          throw ConfigError("boundary condition '" + b.name +
                            "': PointDirichletBC needs a [Mesh] section");
        const auto pt = split_list(p.require("point"));
        const Vec2 x{std::stod(pt[0]), pt.size() > 1 ? std::stod(pt[1]) : 0.0};
        spec.constraints.pins.push_back(
            {vname, nearest_node(spec.mesh, x), p.require_num("value")});
      } else if (type == "FunctionDirichletBC") {
        SpaceTimeFn f = function_fn(spec, p.require("function"), b.name);
        for (const auto& side : boundaries)
          spec.constraints.dirichlet.push_back({vname, side, f});
      } else if (type == "INSMomentumNoBCBCLaplaceForm" ||
                 type == "INSMomentumNoBCBCTractionForm") {
        const bool laplace = type.find("Laplace") != std::string::npos;
        const int comp = static_cast<int>(p.require_num("component"));
        const int var = var_index(vname, b.name);
        for (const auto& side : boundaries)
          spec.kernels.boundary.push_back(
              std::make_shared<NoBcBoundaryKernel>(var, side, comp, laplace));
      } else {
        throw ConfigError("boundary condition '" + b.name + "': unknown type '" + type +
                          "'; valid types: " + kBcTypes);
      }
    }
  }

  if (const ParamNode* ics = tree.section("ICs")) {
    for (const ParamNode& ic : ics->children) {
      ParamScope p(&ic, globals, ic.name);
      const std::string vname = p.require("variable");
      var_index(vname, ic.name);
      if (const std::string* fn = p.find("function"))
        spec.initial_functions[vname] = *fn;
      else
        spec.initial_values[vname] = p.require_num("value");
    }
  }

  if (const ParamNode* ex = tree.section("Executioner")) {
    ParamScope p(ex, globals, "Executioner");
    const std::string type = p.get("type", "Steady");
    spec.executioner.transient = type == "Transient";
    if (type != "Steady" && type != "Transient")
      throw ConfigError("Executioner: type '" + type +
                        "' unknown; valid types: Steady Transient");
    const std::string scheme = p.get("scheme", "implicit-euler");
    if (scheme == "implicit-euler")
      spec.executioner.theta = 1.0;
    else if (scheme == "crank-nicolson")
      spec.executioner.theta = 0.5;
    else if (scheme == "explicit-euler") {
      spec.executioner.theta = 0.0;
      spec.warnings.push_back("explicit-euler accepted; expect severe timestep restrictions");
    } else
      throw ConfigError("Executioner: scheme '" + scheme +
                        "' unknown; valid: implicit-euler crank-nicolson explicit-euler");
    spec.executioner.theta = p.get_num("theta", spec.executioner.theta);
    spec.executioner.dt0 = p.get_num("dt", 0.1);
    spec.executioner.dtmin = p.get_num("dtmin", 1e-6);
    spec.executioner.num_steps = static_cast<int>(p.get_num("num_steps", 100));
    spec.executioner.ss_check = p.get_bool("trans_ss_check", false);
    spec.executioner.ss_check_tol = p.get_num("ss_check_tol", 1e-10);

    NewtonOptions& no = spec.executioner.newton;
    no.nl_rel_tol = p.get_num("nl_rel_tol", 1e-8);
    no.nl_abs_tol = p.get_num("nl_abs_tol", 1e-12);
    no.nl_max_its = static_cast<int>(p.get_num("nl_max_its", 20));
    const std::string ls = p.get("line_search", "basic");
    if (ls == "none")
      no.line_search = LineSearchKind::None;
    else if (ls == "basic")
      no.line_search = LineSearchKind::Basic;
    else
      throw ConfigError("Executioner: line_search '" + ls + "' unsupported; none or basic");
    const std::string st = p.get("solve_type", "NEWTON");
    if (st == "PJFNK")
      no.solve_type = SolveType::Pjfnk;
    else if (st == "NEWTON")
      no.solve_type = SolveType::Newton;
    else
      throw ConfigError("Executioner: solve_type '" + st + "' unsupported; NEWTON or PJFNK");

    KrylovOptions& ko = spec.executioner.krylov;
    ko.l_tol = p.get_num("l_tol", 1e-6);
    ko.l_max_its = std::max(200, static_cast<int>(p.get_num("l_max_its", 10)) * 30);
    ko.restart = 30;

    if (const ParamNode* ts = ex->child("TimeStepper")) {
      ParamScope tp(ts, globals, "TimeStepper");
      const std::string tst = tp.get("type", "IterationAdaptiveDT");
      if (tst != "IterationAdaptiveDT" && tst != "ConstantDT")
        throw ConfigError("TimeStepper: type '" + tst +
                          "' unknown; valid: IterationAdaptiveDT ConstantDT");
      spec.executioner.dt0 = tp.get_num("dt", spec.executioner.dt0);
      if (tst == "IterationAdaptiveDT") {
        AdaptiveDtOptions ad;
        ad.optimal_iterations = static_cast<int>(tp.get_num("optimal_iterations", 5));
        ad.growth_factor = tp.get_num("growth_factor", 1.2);
        ad.cutback_factor = tp.get_num("cutback_factor", 0.4);
        spec.executioner.adaptive = ad;
      }
    }

    // PETSc-style options mapped onto native settings where an equivalent
    // exists; the rest are retained as warnings.
    PrecSpec& prec = spec.executioner.prec;
    prec.type = PcType::Lu;
    if (const std::string* flags = p.find("petsc_options"))
      for (const auto& f : split_list(*flags))
        spec.warnings.push_back("petsc option '" + f + "' retained but unmapped");
    const std::string* iname = p.find("petsc_options_iname");
    const std::string* value = p.find("petsc_options_value");
    if (iname && value) {
      const auto keys = split_list(*iname);
      const auto vals = split_list(*value);
      if (keys.size() != vals.size())
        throw ConfigError("Executioner: petsc_options_iname/value length mismatch");
      for (size_t i = 0; i < keys.size(); ++i) {
        const std::string& k = keys[i];
        const std::string& v = vals[i];
        if (k == "-pc_type") {
          if (v == "lu")
            prec.type = PcType::Lu;
          else if (v == "ilu")
            prec.type = PcType::Ilu;
          else if (v == "none")
            prec.type = PcType::None;
          else if (v == "jacobi" || v == "bjacobi")
            prec.type = PcType::Jacobi;
          else if (v == "fieldsplit")
            prec.type = PcType::FieldSplit;
          else
            spec.warnings.push_back("petsc option -pc_type " + v + " retained but unmapped");
        } else if (k == "-pc_factor_shift_type") {
          prec.ilu_shift = v == "NONZERO";
        } else if (k == "-pc_fieldsplit_schur_precondition") {
          if (v == "a11")
            prec.fieldsplit.schur = SchurPrecondition::A11;
          else if (v == "selfp")
            prec.fieldsplit.schur = SchurPrecondition::SelfP;
          else if (v == "full")
            prec.fieldsplit.schur = SchurPrecondition::Full;
          else
            spec.warnings.push_back("petsc option " + k + " " + v + " retained but unmapped");
        } else if (k == "-pc_fieldsplit_schur_fact_type") {
          if (v == "diag")
            prec.fieldsplit.fact = SchurFactType::Diag;
          else if (v == "lower")
            prec.fieldsplit.fact = SchurFactType::Lower;
          else if (v == "upper")
            prec.fieldsplit.fact = SchurFactType::Upper;
          else if (v == "full")
            prec.fieldsplit.fact = SchurFactType::Full;
          else
            spec.warnings.push_back("petsc option " + k + " " + v + " retained but unmapped");
        } else if (k == "-ksp_gmres_restart") {
          ko.restart = std::stoi(v);
        } else {
          spec.warnings.push_back("petsc option '" + k + " " + v + "' retained but unmapped");
        }
      }
    }
  }

  if (const ParamNode* pps = tree.section("Postprocessors")) {
    for (const ParamNode& n : pps->children) {
      ParamScope p(&n, globals, n.name);
      const std::string type = p.require("type");
      Postprocessor pp;
      pp.name = n.name;
      if (type == "VolumetricFlowRate") {
        pp.kind = Postprocessor::Kind::VolumetricFlowRate;
        pp.side_set = p.require("boundary");
        if (spec.has_mesh && !spec.mesh.side_sets.count(pp.side_set))
          throw ConfigError("postprocessor '" + n.name + "': boundary '" + pp.side_set +
                            "' is not a mesh side set");
      } else if (type == "PointValue") {
        pp.kind = Postprocessor::Kind::PointValue;
        pp.variable = p.require("variable");
        var_index(pp.variable, n.name);
        const auto pt = split_list(p.require("point"));
        pp.point = {std::stod(pt[0]), pt.size() > 1 ? std::stod(pt[1]) : 0.0};
      } else if (type == "L2Error" || type == "H1Error") {
        pp.kind =
            type == "L2Error" ? Postprocessor::Kind::L2Error : Postprocessor::Kind::H1Error;
        pp.variable = p.require("variable");
        var_index(pp.variable, n.name);
        const std::string fname = p.require("function");
        auto f = function_fn(spec, fname, n.name);
        pp.exact = [f](double x, double y, double t) { return f(x, y, t); };
        if (pp.kind == Postprocessor::Kind::H1Error) {
          pp.exact_grad = [f](double x, double y, double t) {
            const double h = 1e-6;
            return Vec2{(f(x + h, y, t) - f(x - h, y, t)) / (2 * h),
                        (f(x, y + h, t) - f(x, y - h, t)) / (2 * h)};
          };
        }
      } else if (type == "ResidualNorm") {
        pp.kind = Postprocessor::Kind::ResidualNorm;
      } else {
        throw ConfigError("postprocessor '" + n.name + "': unknown type '" + type +
                          "'; valid types: " + kPpTypes);
      }
      spec.postprocessors.push_back(std::move(pp));
    }
  }

  if (const ParamNode* outs = tree.section("Outputs")) {
    ParamScope p(outs, globals, "Outputs");
    spec.output.vtk = p.get_bool("vtk", false);
    if (p.get_bool("exodus", false)) {
      spec.output.vtk = true;
      spec.warnings.push_back("exodus output mapped onto legacy VTK");
    }
    spec.output.csv = p.get_bool("csv", false);
    spec.output.interval = std::max(1, static_cast<int>(p.get_num("interval", 1)));
    spec.output.basename = p.get("file_base", spec.output.basename);
  }

  return spec;
}

namespace {

std::vector<double> evaluate_pps(const SimulationSpec& spec, const DiscreteSystem& sys,
                                 const SystemState& state, double last_rnorm) {
  std::vector<double> row;
  row.push_back(state.t);
  for (const auto& pp : spec.postprocessors) {
    switch (pp.kind) {
      case Postprocessor::Kind::VolumetricFlowRate: {
        int iu1 = -1, iu2 = -1;
        for (size_t v = 0; v < sys.dofs().vars.size(); ++v)
          if (sys.dofs().vars[v].role == VarRole::VelocityComponent)
            (iu1 < 0 ? iu1 : iu2) = static_cast<int>(v);
        if (iu1 < 0 || iu2 < 0) throw ConfigError("VolumetricFlowRate requires velocity variables");
        row.push_back(
            volumetric_flow_rate(sys.dofs(), state.y, pp.side_set, sys.config().coord, iu1, iu2));
        break;
      }
      case Postprocessor::Kind::PointValue:
        row.push_back(
            point_value(sys.dofs(), state.y, sys.dofs().var_index(pp.variable), pp.point));
        break;
      case Postprocessor::Kind::L2Error:
        row.push_back(l2_error(sys.dofs(), state.y, {sys.dofs().var_index(pp.variable)},
                               {pp.exact}, state.t, sys.config().coord));
        break;
      case Postprocessor::Kind::H1Error:
        row.push_back(h1_seminorm_error(sys.dofs(), state.y, {sys.dofs().var_index(pp.variable)},
                                        {pp.exact_grad}, state.t, sys.config().coord));
        break;
      case Postprocessor::Kind::ResidualNorm:
        row.push_back(last_rnorm);
        break;
    }
  }
  return row;
}

}  // namespace

RunResult run_simulation(SimulationSpec& spec, const std::string& output_dir, std::ostream* log) {
  if (!spec.has_mesh) throw ConfigError("input file declares no [Mesh] section to solve on");
  if (spec.variables.empty()) throw ConfigError("input file declares no [Variables]");
  if (spec.executioner.transient) spec.config.transient = true;

  DiscreteSystem sys(spec.mesh, spec.variables, spec.config, spec.kernels, spec.constraints);

  RunResult out;
  SystemState& st = out.state;
  st.y.assign(sys.dofs().n_dofs, 0.0);
  for (const auto& [vn, val] : spec.initial_values) {
    const int v = sys.dofs().var_index(vn);
    for (int n = 0; n < spec.mesh.n_nodes(); ++n)
      if (sys.dofs().node_dof[v][n] >= 0) st.y[sys.dofs().node_dof[v][n]] = val;
  }
  for (const auto& [vn, fname] : spec.initial_functions) {
    const int v = sys.dofs().var_index(vn);
    auto it = spec.functions.find(fname);
    if (it == spec.functions.end())
      throw ConfigError("initial condition references unknown function '" + fname + "'");
    for (int n = 0; n < spec.mesh.n_nodes(); ++n) {
      const int d = sys.dofs().node_dof[v][n];
      if (d >= 0) st.y[d] = it->second.eval(spec.mesh.nodes[n].x, spec.mesh.nodes[n].y, 0, 0);
    }
  }
  st.y_old = st.y;

  for (const auto& pp : spec.postprocessors) out.pp_names.push_back(pp.name);

  const std::filesystem::path dir(output_dir);
  std::filesystem::create_directories(dir);
  const auto vtk_path = [&](int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%04d.vtk", step);
    return (dir / (spec.output.basename + buf)).string();
  };

  if (!spec.executioner.transient) {
    const NewtonResult nr = solve_steady(sys, st, spec.executioner.newton,
                                         spec.executioner.krylov, spec.executioner.prec);
    out.solved = nr.converged;
    if (!nr.converged) out.message = "steady solve diverged: " + nr.message;
    if (log)
      (*log) << "steady solve: " << (nr.converged ? "converged" : "DIVERGED") << " in "
             << nr.iterations << " iterations, |F| = " << nr.residual_norms.back() << "\n";
    out.pp_rows.push_back(evaluate_pps(spec, sys, st, nr.residual_norms.back()));
  } else {
    int output_count = 0;
    TransientResult tr = run_transient(
        sys, st, spec.executioner,
        [&](const StepRecord& rec, const SystemState& s) {
          if (rec.step % spec.output.interval == 0) {
            out.pp_rows.push_back(evaluate_pps(spec, sys, s, rec.rfinal));
            if (spec.output.vtk) write_vtk(sys.dofs(), s.y, vtk_path(++output_count));
          }
        },
        log);
    out.solved = tr.ok;
    out.steady_state = tr.steady_state;
    out.message = tr.message;
  }

  if (spec.output.vtk && out.solved)
    write_vtk(sys.dofs(), st.y, (dir / (spec.output.basename + "_final.vtk")).string());
  if (spec.output.csv)
    write_csv(out.pp_names, out.pp_rows, (dir / (spec.output.basename + ".csv")).string());
  return out;
}

RunResult run_input_text(const std::string& text, const std::string& basename,
                         const std::string& output_dir, std::ostream* log) {
  const ParamTree tree = parse_hit(substitute_dbe(text));
  SimulationSpec spec = build_simulation(tree);
  if (spec.output.basename == "out") spec.output.basename = basename;
  if (log)
    for (const auto& w : spec.warnings) (*log) << "warning: " << w << "\n";
  return run_simulation(spec, output_dir, log);
}

}  // namespace insfem
