#include "insfem/postprocess.hpp"

#include <cmath>

namespace insfem {

double volumetric_flow_rate(const DofMap& dofs, const std::vector<double>& y,
                            const std::string& side_set, Coord cs, int u1_var, int u2_var) {
  const Mesh& mesh = *dofs.mesh;
  if (mesh.dim != 2) throw InvalidArgument("volumetric_flow_rate: 2D meshes only");
  const int max_order = std::max(dofs.vars[u1_var].order, dofs.vars[u2_var].order);
  const QuadratureRule rule = quadrature_for(ElemFamily::EDGE, 2 * max_order + 3);

  double total = 0.0;
  for (const SideRef& s : mesh.side_set(side_set)) {
    const MappedSide ms = map_side(mesh, s.elem, s.side, rule);
    const MappedBasis b1 = side_element_basis(mesh, s.elem, ms, dofs.vars[u1_var].order);
    const MappedBasis b2 = side_element_basis(mesh, s.elem, ms, dofs.vars[u2_var].order);
    const auto e1 = dofs.element_dofs(u1_var, s.elem);
    const auto e2 = dofs.element_dofs(u2_var, s.elem);
    for (int q = 0; q < static_cast<int>(ms.jxw.size()); ++q) {
      double u1 = 0, u2 = 0;
      for (size_t i = 0; i < e1.size(); ++i) u1 += y[e1[i]] * b1.phi(q, static_cast<int>(i));
      for (size_t i = 0; i < e2.size(); ++i) u2 += y[e2[i]] * b2.phi(q, static_cast<int>(i));
      double w = ms.jxw[q];
      if (cs == Coord::RZ) w *= 2.0 * 3.14159265358979323846 * coord_weight(ms.points[q], cs);
      total += w * (u1 * ms.normals[q].x + u2 * ms.normals[q].y);
    }
  }
  return total;
}

namespace {

// Newton inversion of the isoparametric map; returns reference coordinates
// when pt lies inside (with tolerance), nullopt otherwise.
std::optional<Vec2> invert_map(const Mesh& mesh, int elem, Vec2 pt) {
  const RefElement ref = ref_element(mesh.elem_type);
  const auto& conn = mesh.elements[elem];
  Vec2 xi{0, 0};
  if (ref.family == ElemFamily::TRI) xi = {1.0 / 3.0, 1.0 / 3.0};
  for (int it = 0; it < 30; ++it) {
    const ShapeEval se = shape_eval(ref, xi);
    Vec2 x{0, 0};
    double J[2][2] = {{0, 0}, {0, 0}};
    for (size_t i = 0; i < conn.size(); ++i) {
      const Vec2& xn = mesh.nodes[conn[i]];
      x += se.values[i] * xn;
      J[0][0] += xn.x * se.grads[i].x;
      J[0][1] += xn.x * se.grads[i].y;
      J[1][0] += xn.y * se.grads[i].x;
      J[1][1] += xn.y * se.grads[i].y;
    }
    const Vec2 r = pt - x;
    if (r.norm() < 1e-12) break;
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == 0) return std::nullopt;
    xi.x += (J[1][1] * r.x - J[0][1] * r.y) / det;
    xi.y += (-J[1][0] * r.x + J[0][0] * r.y) / det;
  }
  const double tol = 1e-9;
  if (ref.family == ElemFamily::TRI) {
    if (xi.x < -tol || xi.y < -tol || xi.x + xi.y > 1 + tol) return std::nullopt;
  } else {
    if (std::abs(xi.x) > 1 + tol || std::abs(xi.y) > 1 + tol) return std::nullopt;
  }
  return xi;
}

}  // namespace

double point_value(const DofMap& dofs, const std::vector<double>& y, int var, Vec2 pt) {
  const Mesh& mesh = *dofs.mesh;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    // Cheap bounding-box cull before the Newton inversion.
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int n : mesh.elements[e]) {
      xmin = std::min(xmin, mesh.nodes[n].x);
      xmax = std::max(xmax, mesh.nodes[n].x);
      ymin = std::min(ymin, mesh.nodes[n].y);
      ymax = std::max(ymax, mesh.nodes[n].y);
    }
    const double pad = 1e-9 + 0.1 * (xmax - xmin);
    if (pt.x < xmin - pad || pt.x > xmax + pad) continue;
    if (mesh.dim == 2 && (pt.y < ymin - pad || pt.y > ymax + pad)) continue;
    if (mesh.dim == 1) {
      if (pt.x < xmin - 1e-12 || pt.x > xmax + 1e-12) continue;
      const double xi = 2.0 * (pt.x - xmin) / (xmax - xmin) - 1.0;
      return interpolate(dofs, y, {}, var, e, {xi, 0}).value;
    }
    const auto xi = invert_map(mesh, e, pt);
    if (xi) return interpolate(dofs, y, {}, var, e, *xi).value;
  }
  throw InvalidArgument("point_value: point outside mesh");
}

std::vector<double> node_values(const DofMap& dofs, const std::vector<double>& y, int var) {
  const Mesh& mesh = *dofs.mesh;
  std::vector<double> out(mesh.n_nodes(), 0.0);
  if (dofs.vars[var].order == mesh.order()) {
    for (int n = 0; n < mesh.n_nodes(); ++n) {
      const int d = dofs.node_dof[var][n];
      if (d >= 0) out[n] = y[d];
    }
    return out;
  }
  const RefElement geom = ref_element(mesh.elem_type);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& conn = mesh.elements[e];
    for (size_t local = 0; local < conn.size(); ++local)
      out[conn[local]] = interpolate(dofs, y, {}, var, e, geom.ref_nodes[local]).value;
  }
  return out;
}

int nearest_node(const Mesh& mesh, Vec2 pt) {
  int best = 0;
  double bd = 1e300;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const double d = (mesh.nodes[n] - pt).norm();
    if (d < bd) {
      bd = d;
      best = n;
    }
  }
  return best;
}

}  // namespace insfem
