#include "insfem/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace insfem {

ElemFamily family_of(ElemType t) {
  switch (t) {
    case ElemType::EDGE2:
    case ElemType::EDGE3:
      return ElemFamily::EDGE;
    case ElemType::TRI3:
    case ElemType::TRI6:
      return ElemFamily::TRI;
    default:
      return ElemFamily::QUAD;
  }
}

int order_of(ElemType t) {
  switch (t) {
    case ElemType::EDGE2:
    case ElemType::TRI3:
    case ElemType::QUAD4:
      return 1;
    default:
      return 2;
  }
}

int nodes_of(ElemType t) {
  switch (t) {
    case ElemType::EDGE2:
      return 2;
    case ElemType::EDGE3:
      return 3;
    case ElemType::TRI3:
      return 3;
    case ElemType::TRI6:
      return 6;
    case ElemType::QUAD4:
      return 4;
    case ElemType::QUAD9:
      return 9;
  }
  return 0;
}

int vertices_of(ElemType t) {
  switch (family_of(t)) {
    case ElemFamily::EDGE:
      return 2;
    case ElemFamily::TRI:
      return 3;
    case ElemFamily::QUAD:
      return 4;
  }
  return 0;
}

int sides_of(ElemType t) {
  switch (family_of(t)) {
    case ElemFamily::EDGE:
      return 2;
    case ElemFamily::TRI:
      return 3;
    case ElemFamily::QUAD:
      return 4;
  }
  return 0;
}

std::vector<int> side_nodes(ElemType t, int side) {
  const int ns = sides_of(t);
  if (side < 0 || side >= ns) throw InvalidArgument("side_nodes: side out of range");
  switch (t) {
    case ElemType::EDGE2:
    case ElemType::EDGE3:
      return {side};  // side 0 = left vertex, side 1 = right vertex
    case ElemType::TRI3:
      return {side, (side + 1) % 3};
    case ElemType::TRI6:
      return {side, (side + 1) % 3, 3 + side};
    case ElemType::QUAD4:
      return {side, (side + 1) % 4};
    case ElemType::QUAD9:
      return {side, (side + 1) % 4, 4 + side};
  }
  return {};
}

const std::vector<SideRef>& Mesh::side_set(const std::string& name) const {
  auto it = side_sets.find(name);
  if (it == side_sets.end()) throw InvalidArgument("unknown side set '" + name + "'");
  return it->second;
}

double Mesh::element_diameter(int elem) const {
  const auto& conn = elements[elem];
  const int nv = vertices_of(elem_type);
  double h = 0.0;
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j) {
      const Vec2 d = nodes[conn[i]] - nodes[conn[j]];
      h = std::max(h, d.norm());
    }
  return h;
}

void Mesh::transform(const std::function<Vec2(Vec2)>& f) {
  for (auto& p : nodes) p = f(p);
}

Mesh build_interval_mesh(int n, double a, double b, int order) {
  if (n < 1) throw InvalidArgument("build_interval_mesh: need n >= 1");
  if (!(a < b)) throw InvalidArgument("build_interval_mesh: need a < b");
  if (order != 1 && order != 2) throw InvalidArgument("build_interval_mesh: order must be 1 or 2");

  Mesh m;
  m.dim = 1;
  m.elem_type = order == 1 ? ElemType::EDGE2 : ElemType::EDGE3;
  const int nn = n * order + 1;
  m.nodes.resize(nn);
  for (int i = 0; i < nn; ++i) m.nodes[i] = {a + (b - a) * i / (nn - 1), 0.0};
  for (int e = 0; e < n; ++e) {
    if (order == 1)
      m.elements.push_back({e, e + 1});
    else
      m.elements.push_back({2 * e, 2 * e + 2, 2 * e + 1});
  }
  m.side_sets["left"] = {{0, 0}};
  m.side_sets["right"] = {{n - 1, 1}};
  return m;
}

namespace {

// (order*nx+1) x (order*ny+1) lattice shared by the quad and tri builders.
struct Lattice {
  int nxl, nyl;
  int at(int i, int j) const { return j * nxl + i; }
};

Lattice fill_lattice(Mesh& m, int nx, int ny, const Rect& d, int order) {
  const int nxl = order * nx + 1;
  const int nyl = order * ny + 1;
  m.nodes.resize(static_cast<size_t>(nxl) * nyl);
  for (int j = 0; j < nyl; ++j)
    for (int i = 0; i < nxl; ++i)
      m.nodes[static_cast<size_t>(j) * nxl + i] = {d.x0 + (d.x1 - d.x0) * i / (nxl - 1),
                                                   d.y0 + (d.y1 - d.y0) * j / (nyl - 1)};
  return {nxl, nyl};
}

void check_domain(int nx, int ny, const Rect& d) {
  if (nx < 1 || ny < 1) throw InvalidArgument("structured mesh: need nx, ny >= 1");
  if (!(d.x0 < d.x1) || !(d.y0 < d.y1))
    throw InvalidArgument("structured mesh: degenerate rectangle");
}

}  // namespace

Mesh build_structured_quad_mesh(int nx, int ny, const Rect& domain, int order) {
  check_domain(nx, ny, domain);
  if (order != 1 && order != 2) throw InvalidArgument("quad mesh: order must be 1 or 2");

  Mesh m;
  m.dim = 2;
  m.elem_type = order == 1 ? ElemType::QUAD4 : ElemType::QUAD9;
  const Lattice L = fill_lattice(m, nx, ny, domain, order);

  for (int ey = 0; ey < ny; ++ey)
    for (int ex = 0; ex < nx; ++ex) {
      const int i0 = order * ex, j0 = order * ey;
      if (order == 1) {
        m.elements.push_back({L.at(i0, j0), L.at(i0 + 1, j0), L.at(i0 + 1, j0 + 1), L.at(i0, j0 + 1)});
      } else {
        m.elements.push_back({L.at(i0, j0), L.at(i0 + 2, j0), L.at(i0 + 2, j0 + 2), L.at(i0, j0 + 2),
                              L.at(i0 + 1, j0), L.at(i0 + 2, j0 + 1), L.at(i0 + 1, j0 + 2),
                              L.at(i0, j0 + 1), L.at(i0 + 1, j0 + 1)});
      }
    }

  const auto eid = [nx](int ex, int ey) { return ey * nx + ex; };
  auto& ss = m.side_sets;
  for (int ex = 0; ex < nx; ++ex) {
    ss["bottom"].push_back({eid(ex, 0), 0});
    ss["top"].push_back({eid(ex, ny - 1), 2});
  }
  for (int ey = 0; ey < ny; ++ey) {
    ss["right"].push_back({eid(nx - 1, ey), 1});
    ss["left"].push_back({eid(0, ey), 3});
  }
  return m;
}

Mesh build_structured_tri_mesh(int nx, int ny, const Rect& domain, int order) {
  check_domain(nx, ny, domain);
  if (order != 1 && order != 2) throw InvalidArgument("tri mesh: order must be 1 or 2");

  Mesh m;
  m.dim = 2;
  m.elem_type = order == 1 ? ElemType::TRI3 : ElemType::TRI6;
  const Lattice L = fill_lattice(m, nx, ny, domain, order);

  // Quad cell corners a,b,c,d (CCW from lower left) split into (a,b,c) and
  // (a,c,d). First tri carries the bottom/right cell edges, second the
  // top/left ones.
  for (int ey = 0; ey < ny; ++ey)
    for (int ex = 0; ex < nx; ++ex) {
      const int i0 = order * ex, j0 = order * ey;
      if (order == 1) {
        const int a = L.at(i0, j0), b = L.at(i0 + 1, j0), c = L.at(i0 + 1, j0 + 1),
                  d = L.at(i0, j0 + 1);
        m.elements.push_back({a, b, c});
        m.elements.push_back({a, c, d});
      } else {
        const int a = L.at(i0, j0), b = L.at(i0 + 2, j0), c = L.at(i0 + 2, j0 + 2),
                  d = L.at(i0, j0 + 2);
        const int ab = L.at(i0 + 1, j0), bc = L.at(i0 + 2, j0 + 1), ac = L.at(i0 + 1, j0 + 1),
                  cd = L.at(i0 + 1, j0 + 2), ad = L.at(i0, j0 + 1);
        m.elements.push_back({a, b, c, ab, bc, ac});
        m.elements.push_back({a, c, d, ac, cd, ad});
      }
    }

  const auto first_tri = [nx](int ex, int ey) { return 2 * (ey * nx + ex); };
  auto& ss = m.side_sets;
  for (int ex = 0; ex < nx; ++ex) {
    ss["bottom"].push_back({first_tri(ex, 0), 0});
    ss["top"].push_back({first_tri(ex, ny - 1) + 1, 1});
  }
  for (int ey = 0; ey < ny; ++ey) {
    ss["right"].push_back({first_tri(nx - 1, ey), 1});
    ss["left"].push_back({first_tri(0, ey) + 1, 2});
  }
  return m;
}

}  // namespace insfem
