#include "insfem/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "insfem/element.hpp"

namespace insfem {

double coord_weight(Vec2 x, Coord cs) {
  if (cs == Coord::XY) return 1.0;
  if (x.x < 0) throw InvalidArgument("coord_weight: negative radius in RZ");
  return x.x;
}

int DofMap::var_index(const std::string& name) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name) return static_cast<int>(i);
  throw InvalidArgument("unknown variable '" + name + "'");
}

int DofMap::n_local(int var) const {
  const ElemFamily fam = family_of(mesh->elem_type);
  return ref_element(fam, vars[var].order).n_nodes;
}

std::vector<int> DofMap::element_dofs(int var, int elem) const {
  const auto& conn = mesh->elements[elem];
  const int nl = n_local(var);
  std::vector<int> out(nl);
  for (int i = 0; i < nl; ++i) out[i] = node_dof[var][conn[i]];
  return out;
}

DofMap distribute_dofs(const Mesh& mesh, const std::vector<Variable>& vars) {
  DofMap dm;
  dm.mesh = &mesh;
  dm.vars = vars;
  {
    std::set<std::string> names;
    for (const auto& v : vars)
      if (!names.insert(v.name).second)
        throw InvalidArgument("duplicate variable name '" + v.name + "'");
  }

  const int mesh_order = mesh.order();
  dm.node_dof.assign(vars.size(), std::vector<int>(mesh.n_nodes(), -1));
  int next = 0;
  for (size_t v = 0; v < vars.size(); ++v) {
    if (vars[v].order > mesh_order)
      throw InvalidArgument("variable '" + vars[v].name + "' order exceeds mesh order");
    const int nl = (vars[v].order == mesh_order) ? nodes_of(mesh.elem_type)
                                                 : vertices_of(mesh.elem_type);
    std::vector<char> used(mesh.n_nodes(), 0);
    for (const auto& conn : mesh.elements)
      for (int i = 0; i < nl; ++i) used[conn[i]] = 1;
    const int begin = next;
    for (int n = 0; n < mesh.n_nodes(); ++n)
      if (used[n]) dm.node_dof[v][n] = next++;
    dm.blocks.emplace_back(begin, next);
  }
  dm.n_dofs = next;
  return dm;
}

std::vector<ResolvedConstraint> resolve_constraints(const ConstraintSet& cs, const DofMap& dofs) {
  const Mesh& mesh = *dofs.mesh;
  std::vector<ResolvedConstraint> out;

  for (const auto& d : cs.dirichlet) {
    const int v = dofs.var_index(d.var);
    const int var_order = dofs.vars[v].order;
    std::set<int> nodes;
    for (const SideRef& s : mesh.side_set(d.side_set)) {
      for (int local : side_nodes(mesh.elem_type, s.side)) {
        // Mid-side nodes belong only to second-order variables.
        if (var_order < mesh.order() && local >= vertices_of(mesh.elem_type)) continue;
        nodes.insert(mesh.elements[s.elem][local]);
      }
    }
    for (int n : nodes) {
      const int dof = dofs.node_dof[v][n];
      if (dof < 0) continue;
      out.push_back({dof, mesh.nodes[n], d.g});
    }
  }
  for (const auto& p : cs.pins) {
    const int v = dofs.var_index(p.var);
    if (p.node < 0 || p.node >= mesh.n_nodes())
      throw InvalidArgument("pin: node id out of range");
    const int dof = dofs.node_dof[v][p.node];
    if (dof < 0) throw InvalidArgument("pin: variable '" + p.var + "' has no dof at node");
    const double val = p.value;
    out.push_back({dof, mesh.nodes[p.node], [val](double, double, double) { return val; }});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ResolvedConstraint& a, const ResolvedConstraint& b) { return a.dof < b.dof; });
  return out;
}

void apply_constraints_residual(const std::vector<ResolvedConstraint>& rc,
                                const std::vector<double>& y, double t,
                                std::vector<double>& residual) {
  for (size_t i = 0; i < rc.size(); ++i) {
    const auto& c = rc[i];
    const double g = c.g(c.x.x, c.x.y, t);
    if (i > 0 && rc[i - 1].dof == c.dof) {
      const double prev = y[c.dof] - residual[c.dof];  // previous g on this dof
      if (std::abs(prev - g) > 1e-12 * (1.0 + std::abs(g)))
        throw ConfigError("conflicting constraints on dof " + std::to_string(c.dof));
      continue;
    }
    residual[c.dof] = y[c.dof] - g;
  }
}

}  // namespace insfem
