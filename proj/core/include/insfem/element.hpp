#pragma once

#include <vector>

#include "insfem/mesh.hpp"
#include "insfem/types.hpp"

namespace insfem {

struct RefElement {
  ElemFamily family;
  int order;
  int n_nodes;
  std::vector<Vec2> ref_nodes;
};

RefElement ref_element(ElemFamily family, int order);
RefElement ref_element(ElemType t);

struct ShapeEval {
  std::vector<double> values;
  std::vector<Vec2> grads;    // reference-coordinate gradients
  std::vector<Sym2> seconds;  // reference-coordinate second derivatives
};

ShapeEval shape_eval(const RefElement& ref, Vec2 pt);

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int n() const { return static_cast<int>(points.size()); }
};

// Rule exact for polynomials of total degree <= degree on the reference
// domain. EDGE/QUAD live on [-1,1]^n, TRI on the unit right triangle.
QuadratureRule quadrature_for(ElemFamily family, int degree);

// 1D Gauss-Legendre on [-1,1] with npts points.
QuadratureRule gauss_legendre(int npts);

// Per-quadrature-point basis data in physical coordinates for one
// polynomial order on a mapped element.
struct MappedBasis {
  int n_funcs = 0;
  int n_qp = 0;
  std::vector<double> values;  // [qp * n_funcs + i]
  std::vector<Vec2> grads;
  std::vector<Sym2> seconds;

  double phi(int qp, int i) const { return values[qp * n_funcs + i]; }
  const Vec2& dphi(int qp, int i) const { return grads[qp * n_funcs + i]; }
  const Sym2& d2phi(int qp, int i) const { return seconds[qp * n_funcs + i]; }
};

struct MappedElement {
  std::vector<Vec2> points;   // physical quadrature points
  std::vector<double> jxw;    // |J_e| * w_q
  MappedBasis basis;          // geometric-order basis
};

MappedElement map_element(const Mesh& mesh, int elem, const QuadratureRule& rule);

// Basis of a (possibly lower) polynomial order evaluated on the same mapped
// element; order 1 on a second-order element attaches to the vertex nodes.
MappedBasis map_element_basis(const Mesh& mesh, int elem, const QuadratureRule& rule, int order);

struct MappedSide {
  std::vector<Vec2> points;
  std::vector<double> jxw;     // surface measure * weight
  std::vector<Vec2> normals;   // outward unit normals
  std::vector<Vec2> ref_pts;   // side qps in the element reference domain
};

// Maps a 1D rule onto side `side` of a 2D element. Normal orientation assumes
// counterclockwise element connectivity.
MappedSide map_side(const Mesh& mesh, int elem, int side, const QuadratureRule& rule1d);

// Element-interior basis evaluated at the side quadrature points.
MappedBasis side_element_basis(const Mesh& mesh, int elem, const MappedSide& side, int order);

}  // namespace insfem
