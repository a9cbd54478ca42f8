#pragma once

#include <vector>

#include "insfem/types.hpp"

namespace insfem {

// Semi-analytic radial wedge-flow profile: f''' + 2 Re alpha f f' + 4 alpha^2 f' = 0
// with f(0)=1, f'(0)=0, f(1)=0, solved by RK4 shooting on f''(0).
struct JefferyHamelSolution {
  double alpha = 0.0;  // wedge half-angle (rad)
  double Re = 0.0;     // lambda*alpha/nu, signed
  double fpp0 = 0.0;   // converged f''(0)
  double fp1 = 0.0;    // f'(1)
  double K = 0.0;      // pressure constant
  std::vector<double> f, fp, fpp;  // uniform eta grid on [0,1]

  double f_at(double eta) const;
  double fp_at(double eta) const;
};

JefferyHamelSolution jeffery_hamel_solve(double alpha, double Re, double tol, int steps = 4096);

// Exact velocity/pressure in the wedge, Cartesian components; p_star is
// chosen so p = 0 at the inlet centerline (r=1, theta=0).
struct JhExactFields {
  JefferyHamelSolution sol;
  double lambda = 1.0;
  double mu = 1.0;
  double p_star = 0.0;

  double u1(double x, double y) const;
  double u2(double x, double y) const;
  double p(double x, double y) const;
  Vec2 grad_u1(double x, double y) const;
  Vec2 grad_u2(double x, double y) const;
};

JhExactFields jh_exact_fields(const JefferyHamelSolution& sol, double lambda, double mu);

}  // namespace insfem
