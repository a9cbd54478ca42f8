#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "insfem/types.hpp"

namespace insfem {

enum class ElemFamily { EDGE, TRI, QUAD };

enum class ElemType { EDGE2, EDGE3, TRI3, TRI6, QUAD4, QUAD9 };

ElemFamily family_of(ElemType t);
int order_of(ElemType t);
int nodes_of(ElemType t);
int vertices_of(ElemType t);
int sides_of(ElemType t);

// Local node ids of side `s`, vertices first then the mid-side node for
// second-order types. EDGE sides are single vertices.
std::vector<int> side_nodes(ElemType t, int side);

struct SideRef {
  int elem;
  int side;
};

struct Mesh {
  int dim = 2;
  std::vector<Vec2> nodes;  // 1D meshes use x only
  ElemType elem_type = ElemType::QUAD4;
  std::vector<std::vector<int>> elements;  // vertices first, per-type ordering
  std::map<std::string, std::vector<SideRef>> side_sets;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int order() const { return order_of(elem_type); }

  const std::vector<SideRef>& side_set(const std::string& name) const;

  // Largest vertex-pair distance; the h used by stabilization parameters.
  double element_diameter(int elem) const;

  // Applies f to every node coordinate (used for wedge/cone geometries).
  void transform(const std::function<Vec2(Vec2)>& f);
};

Mesh build_interval_mesh(int n, double a, double b, int order);

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

Mesh build_structured_quad_mesh(int nx, int ny, const Rect& domain, int order);

// Each quad cell split into two triangles along the (lower-left, upper-right)
// diagonal.
Mesh build_structured_tri_mesh(int nx, int ny, const Rect& domain, int order);

}  // namespace insfem
