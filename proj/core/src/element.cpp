#include "insfem/element.hpp"

#include <array>
#include <cmath>

namespace insfem {

RefElement ref_element(ElemFamily family, int order) {
  if (order != 1 && order != 2) throw UnsupportedElement("unsupported element order");
  RefElement r;
  r.family = family;
  r.order = order;
  switch (family) {
    case ElemFamily::EDGE:
      r.ref_nodes = {{-1, 0}, {1, 0}};
      if (order == 2) r.ref_nodes.push_back({0, 0});
      break;
    case ElemFamily::TRI:
      r.ref_nodes = {{0, 0}, {1, 0}, {0, 1}};
      if (order == 2) {
        r.ref_nodes.push_back({0.5, 0});
        r.ref_nodes.push_back({0.5, 0.5});
        r.ref_nodes.push_back({0, 0.5});
      }
      break;
    case ElemFamily::QUAD:
      r.ref_nodes = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
      if (order == 2) {
        r.ref_nodes.push_back({0, -1});
        r.ref_nodes.push_back({1, 0});
        r.ref_nodes.push_back({0, 1});
        r.ref_nodes.push_back({-1, 0});
        r.ref_nodes.push_back({0, 0});
      }
      break;
  }
  r.n_nodes = static_cast<int>(r.ref_nodes.size());
  return r;
}

RefElement ref_element(ElemType t) { return ref_element(family_of(t), order_of(t)); }

namespace {

// 1D quadratic Lagrange factor at node coordinate c in {-1, +1, 0}.
void quad1d(double c, double s, double& v, double& d, double& dd) {
  if (c < -0.5) {
    v = 0.5 * s * (s - 1.0);
    d = s - 0.5;
    dd = 1.0;
  } else if (c > 0.5) {
    v = 0.5 * s * (s + 1.0);
    d = s + 0.5;
    dd = 1.0;
  } else {
    v = 1.0 - s * s;
    d = -2.0 * s;
    dd = -2.0;
  }
}

}  // namespace

ShapeEval shape_eval(const RefElement& ref, Vec2 pt) {
  ShapeEval out;
  const int n = ref.n_nodes;
  out.values.resize(n);
  out.grads.resize(n);
  out.seconds.resize(n);
  const double x = pt.x, y = pt.y;

  if (ref.family == ElemFamily::EDGE) {
    if (ref.order == 1) {
      out.values = {0.5 * (1 - x), 0.5 * (1 + x)};
      out.grads = {{-0.5, 0}, {0.5, 0}};
    } else {
      out.values = {0.5 * x * (x - 1), 0.5 * x * (x + 1), 1 - x * x};
      out.grads = {{x - 0.5, 0}, {x + 0.5, 0}, {-2 * x, 0}};
      out.seconds[0].xx = 1;
      out.seconds[1].xx = 1;
      out.seconds[2].xx = -2;
    }
    return out;
  }

  if (ref.family == ElemFamily::TRI) {
    const double l0 = 1 - x - y, l1 = x, l2 = y;
    const Vec2 g0{-1, -1}, g1{1, 0}, g2{0, 1};
    if (ref.order == 1) {
      out.values = {l0, l1, l2};
      out.grads = {g0, g1, g2};
    } else {
      const std::array<double, 3> l{l0, l1, l2};
      const std::array<Vec2, 3> g{g0, g1, g2};
      for (int i = 0; i < 3; ++i) {
        out.values[i] = l[i] * (2 * l[i] - 1);
        out.grads[i] = (4 * l[i] - 1) * g[i];
        out.seconds[i] = {4 * g[i].x * g[i].x, 4 * g[i].x * g[i].y, 4 * g[i].y * g[i].y};
      }
      const std::array<std::pair<int, int>, 3> edges{{{0, 1}, {1, 2}, {2, 0}}};
      for (int e = 0; e < 3; ++e) {
        const auto [a, b] = edges[e];
        out.values[3 + e] = 4 * l[a] * l[b];
        out.grads[3 + e] = 4 * (l[a] * g[b] + l[b] * g[a]);
        out.seconds[3 + e] = {8 * g[a].x * g[b].x, 4 * (g[a].x * g[b].y + g[a].y * g[b].x),
                              8 * g[a].y * g[b].y};
      }
    }
    return out;
  }

  // QUAD
  if (ref.order == 1) {
    for (int i = 0; i < 4; ++i) {
      const double xi = ref.ref_nodes[i].x, eta = ref.ref_nodes[i].y;
      out.values[i] = 0.25 * (1 + xi * x) * (1 + eta * y);
      out.grads[i] = {0.25 * xi * (1 + eta * y), 0.25 * eta * (1 + xi * x)};
      out.seconds[i] = {0, 0.25 * xi * eta, 0};
    }
  } else {
    for (int i = 0; i < 9; ++i) {
      double nx, dnx, ddnx, ny, dny, ddny;
      quad1d(ref.ref_nodes[i].x, x, nx, dnx, ddnx);
      quad1d(ref.ref_nodes[i].y, y, ny, dny, ddny);
      out.values[i] = nx * ny;
      out.grads[i] = {dnx * ny, nx * dny};
      out.seconds[i] = {ddnx * ny, dnx * dny, nx * ddny};
    }
  }
  return out;
}

QuadratureRule gauss_legendre(int npts) {
  QuadratureRule r;
  switch (npts) {
    case 1:
      r.points = {{0, 0}};
      r.weights = {2.0};
      break;
    case 2: {
      const double a = 0.57735026918962576451;
      r.points = {{-a, 0}, {a, 0}};
      r.weights = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = 0.77459666924148337704;
      r.points = {{-a, 0}, {0, 0}, {a, 0}};
      r.weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double a = 0.33998104358485626480, b = 0.86113631159405257522;
      const double wa = 0.65214515486254614263, wb = 0.34785484513745385737;
      r.points = {{-b, 0}, {-a, 0}, {a, 0}, {b, 0}};
      r.weights = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double a = 0.53846931010568309104, b = 0.90617984593866399280;
      const double w0 = 0.56888888888888888889, wa = 0.47862867049936646804,
                   wb = 0.23692688505618908751;
      r.points = {{-b, 0}, {-a, 0}, {0, 0}, {a, 0}, {b, 0}};
      r.weights = {wb, wa, w0, wa, wb};
      break;
    }
    default:
      throw InvalidArgument("gauss_legendre: unsupported point count");
  }
  return r;
}

QuadratureRule quadrature_for(ElemFamily family, int degree) {
  if (degree < 0 || degree > 7)
    throw InvalidArgument("quadrature_for: unsupported degree " + std::to_string(degree));
  const int n1 = (degree + 2) / 2;  // ceil((degree+1)/2)

  if (family == ElemFamily::EDGE) return gauss_legendre(std::max(1, n1));

  if (family == ElemFamily::QUAD) {
    const QuadratureRule g = gauss_legendre(std::max(1, n1));
    QuadratureRule r;
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        r.points.push_back({g.points[i].x, g.points[j].x});
        r.weights.push_back(g.weights[i] * g.weights[j]);
      }
    return r;
  }

  // TRI: classical symmetric rules for low degree, a Duffy-transformed tensor
  // rule (all weights positive) otherwise.
  if (degree <= 1) {
    QuadratureRule r;
    r.points = {{1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {0.5};
    return r;
  }
  if (degree == 2) {
    QuadratureRule r;
    r.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
    r.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return r;
  }
  // x = s(1-t), y = t maps [0,1]^2 onto the triangle with area factor (1-t).
  const QuadratureRule gs = gauss_legendre((degree + 2) / 2);
  const QuadratureRule gt = gauss_legendre((degree + 3) / 2);
  QuadratureRule r;
  for (int j = 0; j < gt.n(); ++j) {
    const double t = 0.5 * (gt.points[j].x + 1.0);
    const double wt = 0.5 * gt.weights[j];
    for (int i = 0; i < gs.n(); ++i) {
      const double s = 0.5 * (gs.points[i].x + 1.0);
      const double ws = 0.5 * gs.weights[i];
      r.points.push_back({s * (1.0 - t), t});
      r.weights.push_back(ws * wt * (1.0 - t));
    }
  }
  return r;
}

namespace {

struct Geometry {
  double det;
  double inv[2][2];  // J^{-1}
  bool one_d;
};

Geometry element_geometry(const Mesh& mesh, const std::vector<int>& conn, const ShapeEval& geom,
                          int elem) {
  Geometry g{};
  g.one_d = mesh.dim == 1;
  if (g.one_d) {
    double j = 0;
    for (size_t i = 0; i < conn.size(); ++i) j += mesh.nodes[conn[i]].x * geom.grads[i].x;
    if (j <= 0) throw InvertedElement("inverted element " + std::to_string(elem));
    g.det = j;
    g.inv[0][0] = 1.0 / j;
    return g;
  }
  double J[2][2] = {{0, 0}, {0, 0}};
  for (size_t i = 0; i < conn.size(); ++i) {
    const Vec2& x = mesh.nodes[conn[i]];
    const Vec2& d = geom.grads[i];
    J[0][0] += x.x * d.x;
    J[0][1] += x.x * d.y;
    J[1][0] += x.y * d.x;
    J[1][1] += x.y * d.y;
  }
  g.det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  if (g.det <= 0) throw InvertedElement("inverted element " + std::to_string(elem));
  const double id = 1.0 / g.det;
  g.inv[0][0] = J[1][1] * id;
  g.inv[0][1] = -J[0][1] * id;
  g.inv[1][0] = -J[1][0] * id;
  g.inv[1][1] = J[0][0] * id;
  return g;
}

// Physical derivatives from reference ones. Second derivatives use the
// affine chain rule: mapping curvature of mildly distorted elements is
// ignored.
void push_forward(const ShapeEval& se, const Geometry& g, int qp, MappedBasis& out) {
  const int n = static_cast<int>(se.values.size());
  for (int i = 0; i < n; ++i) {
    out.values[qp * n + i] = se.values[i];
    if (g.one_d) {
      out.grads[qp * n + i] = {se.grads[i].x * g.inv[0][0], 0.0};
      out.seconds[qp * n + i] = {se.seconds[i].xx * g.inv[0][0] * g.inv[0][0], 0.0, 0.0};
      continue;
    }
    const Vec2 rg = se.grads[i];
    out.grads[qp * n + i] = {g.inv[0][0] * rg.x + g.inv[1][0] * rg.y,
                             g.inv[0][1] * rg.x + g.inv[1][1] * rg.y};
    const double r[2][2] = {{se.seconds[i].xx, se.seconds[i].xy},
                            {se.seconds[i].xy, se.seconds[i].yy}};
    double p[2][2] = {{0, 0}, {0, 0}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double s = 0;
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) s += g.inv[c][a] * r[c][d] * g.inv[d][b];
        p[a][b] = s;
      }
    out.seconds[qp * n + i] = {p[0][0], p[0][1], p[1][1]};
  }
}

}  // namespace

MappedBasis map_element_basis(const Mesh& mesh, int elem, const QuadratureRule& rule, int order) {
  if (elem < 0 || elem >= mesh.n_elements()) throw InvalidArgument("map_element_basis: bad element id");
  const auto& conn = mesh.elements[elem];
  const RefElement geom_ref = ref_element(mesh.elem_type);
  const RefElement var_ref = ref_element(family_of(mesh.elem_type), order);

  MappedBasis out;
  out.n_funcs = var_ref.n_nodes;
  out.n_qp = rule.n();
  out.values.resize(static_cast<size_t>(out.n_funcs) * out.n_qp);
  out.grads.resize(out.values.size());
  out.seconds.resize(out.values.size());

  for (int q = 0; q < rule.n(); ++q) {
    const ShapeEval ge = shape_eval(geom_ref, rule.points[q]);
    const Geometry g = element_geometry(mesh, conn, ge, elem);
    const ShapeEval ve = (order == geom_ref.order) ? ge : shape_eval(var_ref, rule.points[q]);
    push_forward(ve, g, q, out);
  }
  return out;
}

MappedElement map_element(const Mesh& mesh, int elem, const QuadratureRule& rule) {
  if (elem < 0 || elem >= mesh.n_elements()) throw InvalidArgument("map_element: bad element id");
  const auto& conn = mesh.elements[elem];
  const RefElement geom_ref = ref_element(mesh.elem_type);

  MappedElement me;
  me.points.resize(rule.n());
  me.jxw.resize(rule.n());
  me.basis.n_funcs = geom_ref.n_nodes;
  me.basis.n_qp = rule.n();
  me.basis.values.resize(static_cast<size_t>(geom_ref.n_nodes) * rule.n());
  me.basis.grads.resize(me.basis.values.size());
  me.basis.seconds.resize(me.basis.values.size());

  for (int q = 0; q < rule.n(); ++q) {
    const ShapeEval ge = shape_eval(geom_ref, rule.points[q]);
    const Geometry g = element_geometry(mesh, conn, ge, elem);
    Vec2 xq{0, 0};
    for (size_t i = 0; i < conn.size(); ++i) xq += ge.values[i] * mesh.nodes[conn[i]];
    me.points[q] = xq;
    me.jxw[q] = g.det * rule.weights[q];
    push_forward(ge, g, q, me.basis);
  }
  return me;
}

MappedSide map_side(const Mesh& mesh, int elem, int side, const QuadratureRule& rule1d) {
  if (elem < 0 || elem >= mesh.n_elements()) throw InvalidArgument("map_side: bad element id");
  const auto& conn = mesh.elements[elem];
  const RefElement geom_ref = ref_element(mesh.elem_type);
  MappedSide out;

  if (mesh.dim == 1) {
    // Boundary of an interval element is a point; "integration" is evaluation.
    const int local = side == 0 ? 0 : 1;
    out.points = {mesh.nodes[conn[local]]};
    out.jxw = {1.0};
    out.normals = {{side == 0 ? -1.0 : 1.0, 0.0}};
    out.ref_pts = {geom_ref.ref_nodes[local]};
    return out;
  }

  const std::vector<int> sn = side_nodes(mesh.elem_type, side);
  const RefElement edge = ref_element(ElemFamily::EDGE, mesh.order());
  out.points.resize(rule1d.n());
  out.jxw.resize(rule1d.n());
  out.normals.resize(rule1d.n());
  out.ref_pts.resize(rule1d.n());
  for (int q = 0; q < rule1d.n(); ++q) {
    const ShapeEval es = shape_eval(edge, rule1d.points[q]);
    Vec2 x{0, 0}, tx{0, 0}, ref{0, 0}, tref{0, 0};
    for (size_t i = 0; i < sn.size(); ++i) {
      const Vec2& xn = mesh.nodes[conn[sn[i]]];
      const Vec2& rn = geom_ref.ref_nodes[sn[i]];
      x += es.values[i] * xn;
      tx += es.grads[i].x * xn;
      ref += es.values[i] * rn;
      tref += es.grads[i].x * rn;
    }
    (void)tref;
    const double len = tx.norm();
    if (len <= 0) throw InvertedElement("degenerate side");
    out.points[q] = x;
    out.jxw[q] = len * rule1d.weights[q];
    out.normals[q] = {tx.y / len, -tx.x / len};
    out.ref_pts[q] = ref;
  }
  return out;
}

MappedBasis side_element_basis(const Mesh& mesh, int elem, const MappedSide& side, int order) {
  const auto& conn = mesh.elements[elem];
  const RefElement geom_ref = ref_element(mesh.elem_type);
  const RefElement var_ref = ref_element(family_of(mesh.elem_type), order);

  MappedBasis out;
  out.n_funcs = var_ref.n_nodes;
  out.n_qp = static_cast<int>(side.ref_pts.size());
  out.values.resize(static_cast<size_t>(out.n_funcs) * out.n_qp);
  out.grads.resize(out.values.size());
  out.seconds.resize(out.values.size());

  for (int q = 0; q < out.n_qp; ++q) {
    const ShapeEval ge = shape_eval(geom_ref, side.ref_pts[q]);
    const Geometry g = element_geometry(mesh, conn, ge, elem);
    const ShapeEval ve =
        (order == geom_ref.order) ? ge : shape_eval(var_ref, side.ref_pts[q]);
    push_forward(ve, g, q, out);
  }
  return out;
}

}  // namespace insfem
