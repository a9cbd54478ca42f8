#pragma once

#include <optional>
#include <string>
#include <vector>

#include "insfem/assembly.hpp"
#include "insfem/norms.hpp"

namespace insfem {

// Integral of u.n over a side set; RZ surfaces carry the full 2*pi*r weight
// so axisymmetric flow rates are volumetric.
double volumetric_flow_rate(const DofMap& dofs, const std::vector<double>& y,
                            const std::string& side_set, Coord cs, int u1_var, int u2_var);

// Locates the element containing `pt` (Newton inverse mapping) and samples
// the variable there.
double point_value(const DofMap& dofs, const std::vector<double>& y, int var, Vec2 pt);

// Variable sampled at every mesh node (lower-order variables interpolated at
// mid-side nodes).
std::vector<double> node_values(const DofMap& dofs, const std::vector<double>& y, int var);

struct Postprocessor {
  enum class Kind { VolumetricFlowRate, L2Error, H1Error, PointValue, ResidualNorm };
  Kind kind;
  std::string name;
  // kind-specific bindings
  std::string side_set;
  std::string variable;
  Vec2 point{};
  ExactFn exact;          // L2Error / H1Error value
  ExactGradFn exact_grad; // H1Error
};

int nearest_node(const Mesh& mesh, Vec2 pt);

}  // namespace insfem
