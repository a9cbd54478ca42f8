#pragma once

#include <functional>

#include "insfem/system.hpp"
#include "insfem/types.hpp"

namespace insfem {

using BodyForceFn = std::function<Vec2(double x, double y, double t)>;

struct WeakFormConfig {
  bool laplace = true;  // false selects the traction form
  bool integrate_p_by_parts = true;
  bool convective = true;
  bool transient = false;
  bool supg = false;
  bool pspg = false;
  bool lsic = false;
  double alpha = 1.0;
  double rho = 1.0;
  double mu = 1.0;
  // Negative means the 2*nu/3 default.
  double tau_lsic = -1.0;
  BodyForceFn body_force;  // null -> zero
  Coord coord = Coord::XY;
  // Negative means 2*max(variable order)+1.
  int quadrature_degree = -1;

  void validate() const {
    if (rho <= 0 || mu <= 0) throw InvalidArgument("WeakFormConfig: rho and mu must be positive");
    if (alpha < 0 || alpha > 1) throw InvalidArgument("WeakFormConfig: alpha must be in [0,1]");
  }
};

struct TauInputs {
  double dt = kSteadyDt;  // kSteadyDt drops the temporal term
  double speed = 0.0;
  double h = 0.0;
  double nu = 0.0;
};

// tau = alpha * [(2/dt)^2 + (2|u|/h)^2 + 9 (4 nu/h^2)^2]^{-1/2}
double tau(const TauInputs& in, double alpha);

struct TimeDerivativeCoeffs {
  double sigma1 = 0.0;  // 1/(theta*dt) for the theta scheme
  double sigma2 = 0.0;  // per-qp value, -sigma1 * u_old at the point
};

}  // namespace insfem
