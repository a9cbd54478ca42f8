#pragma once

#include <memory>

#include "insfem/timeloop.hpp"

namespace insfem {

struct BuiltinCaseResult {
  std::shared_ptr<Mesh> mesh;
  std::shared_ptr<DiscreteSystem> system;  // references *mesh
  SystemState state;
  bool ok = false;
  bool steady_state = false;
  int steps = 0;
  std::string message;
  double q_in = 0.0;   // cone only
  double q_out = 0.0;  // cone only
};

// Non-leaky lid-driven cavity on the unit square: Q1Q1 SUPG+PSPG, lid
// velocity 4x(1-x) on top, no slip elsewhere, pressure pinned to zero in the
// bottom-left corner. Transient with iteration-adaptive dt until the steady
// detector fires; `mu` follows from Re with unit lid speed and box size.
BuiltinCaseResult run_case_lid_cavity(double Re, int n, std::ostream* log = nullptr);

// Steady Stokes-limit variant of the same cavity (large mu), solved directly.
BuiltinCaseResult run_case_lid_cavity_stokes(int n, std::ostream* log = nullptr);

// Axisymmetric conical diffuser: inlet radius 1/2 at z=0 expanding to 1 at
// z=1, straight to z=4; inlet u_z = 1-4r^2, no slip on the wall, u_r=0 on the
// axis, natural outflow. Re=0.5 runs a creeping P2P1 steady solve; larger Re
// runs P1P1 SUPG+PSPG transient to steady state.
BuiltinCaseResult run_case_axisymmetric_cone(double Re, int nr = 8, int nz = 48,
                                             std::ostream* log = nullptr);

}  // namespace insfem
