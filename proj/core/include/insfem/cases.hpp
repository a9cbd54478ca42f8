#pragma once

#include <optional>

#include "insfem/expression.hpp"
#include "insfem/norms.hpp"
#include "insfem/timeloop.hpp"

namespace insfem {

// Exact fields + forcing for one verification problem. Scalar cases use the
// u1 slot only.
struct ManufacturedCase {
  std::string name;
  bool ins = true;
  Rect domain;
  double mu = 1.0;
  double rho = 1.0;
  Vec2 advect{0, 0};  // scalar advection velocity

  ExactFn u1, u2, p;
  ExactGradFn grad_u1, grad_u2;
  ExactFn f1, f2;  // forcing components (scalar: f1 only)
  // Continuity-equation source div(u_exact); the manufactured velocity is
  // not solenoidal, so mass conservation needs its own forcing.
  ExactFn f_mass;
  bool time_dependent = false;
};

enum class MmsRegime { Advection, Diffusion };

ManufacturedCase scalar_advection_case(int dim);
ManufacturedCase ins_mms_case(MmsRegime regime);
// Steady fields modulated by a smooth g(t), for temporal-order studies.
ManufacturedCase ins_transient_mms_case(double mu);

// Anti-typo gate: the forcing must satisfy the strong PDE at `npoints`
// random interior points, derivatives taken by fourth-order finite
// differences of the exact fields.
double forcing_gate_residual(const ManufacturedCase& c, int npoints = 100, unsigned seed = 12345);

enum class InsElement { Q1Q1, Q2Q1, P1P1, P2P1 };
enum class ScalarElement { P1, P2, Q1, Q2 };

struct SolverChoice {
  NewtonOptions newton;
  KrylovOptions krylov;
  PrecSpec prec;
};

// Heuristic solver selection by size and pressure-block structure.
SolverChoice choose_solver(const DiscreteSystem& sys);

ConvergenceStudy run_scalar_advection_study(int dim, ScalarElement elem,
                                            const std::vector<int>& ns);

ConvergenceStudy run_ins_mms_study(MmsRegime regime, InsElement elem, const std::vector<int>& ns,
                                   std::ostream* log = nullptr);

// Wedge benchmark on mapped structured quads over (r, theta) in
// [1,2]x[-alpha,alpha].
ConvergenceStudy run_jeffery_hamel_study(InsElement elem, const std::vector<int>& ns,
                                         std::ostream* log = nullptr);

// L2(u) error at final time against the exact transient solution, one entry
// per timestep size.
struct TemporalStudy {
  std::vector<double> dts;
  std::vector<double> errors;
  double slope = 0.0;
};
TemporalStudy run_temporal_order_study(double theta, const std::vector<double>& dts,
                                       double t_final, int n = 16);

// Nodal interpolant of the exact fields (initial guess / initial condition).
void set_state_from_case(const DofMap& dofs, const ManufacturedCase& c, double t,
                         std::vector<double>& y);

}  // namespace insfem
