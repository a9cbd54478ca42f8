#pragma once

#include <functional>
#include <string>
#include <vector>

#include "insfem/mesh.hpp"
#include "insfem/types.hpp"

namespace insfem {

enum class Coord { XY, RZ };

// Weight of the volume measure at a physical point: 1 in XY, r in RZ.
double coord_weight(Vec2 x, Coord cs);

enum class VarRole { VelocityComponent, Pressure, Scalar };

struct Variable {
  std::string name;
  int order = 1;
  VarRole role = VarRole::Scalar;
};

struct DofMap {
  const Mesh* mesh = nullptr;
  std::vector<Variable> vars;
  // Per variable: node id -> global dof (-1 where the variable has no dof).
  std::vector<std::vector<int>> node_dof;
  std::vector<std::pair<int, int>> blocks;  // per-variable [begin, end)
  int n_dofs = 0;

  int var_index(const std::string& name) const;
  // Global dofs of `var` on element `elem`, ordered like the variable's
  // element-local basis functions.
  std::vector<int> element_dofs(int var, int elem) const;
  int n_local(int var) const;
};

DofMap distribute_dofs(const Mesh& mesh, const std::vector<Variable>& vars);

struct SystemState {
  std::vector<double> y;
  std::vector<double> y_old;
  double t = 0.0;
  double dt = kSteadyDt;
};

using SpaceTimeFn = std::function<double(double x, double y, double t)>;

struct DirichletRecord {
  std::string var;
  std::string side_set;
  SpaceTimeFn g;
};

struct PinRecord {
  std::string var;
  int node = 0;
  double value = 0.0;
};

struct ConstraintSet {
  std::vector<DirichletRecord> dirichlet;
  std::vector<PinRecord> pins;
};

// One constrained dof with the function giving its value.
struct ResolvedConstraint {
  int dof;
  Vec2 x;
  SpaceTimeFn g;
};

// Expands side-set records into per-dof constraints (sorted by dof,
// duplicates kept for the conflict check at application time).
std::vector<ResolvedConstraint> resolve_constraints(const ConstraintSet& cs, const DofMap& dofs);

// Residual row i -> y_i - g_i for every constrained dof. Conflicting repeated
// constraints raise ConfigError.
void apply_constraints_residual(const std::vector<ResolvedConstraint>& rc,
                                const std::vector<double>& y, double t,
                                std::vector<double>& residual);

}  // namespace insfem
