#include "insfem/jeffery_hamel.hpp"

#include <cmath>
#include <string>

namespace insfem {

namespace {

struct OdeState {
  double f, fp, fpp;
};

OdeState rhs(const OdeState& s, double two_re_alpha, double four_alpha2) {
  return {s.fp, s.fpp, -two_re_alpha * s.f * s.fp - four_alpha2 * s.fp};
}

// RK4 over [0,1]; fills the grid arrays when out != nullptr.
OdeState integrate(double fpp0, double alpha, double Re, int steps, JefferyHamelSolution* out) {
  const double a2 = 2.0 * Re * alpha;
  const double a4 = 4.0 * alpha * alpha;
  const double h = 1.0 / steps;
  OdeState s{1.0, 0.0, fpp0};
  if (out) {
    out->f.assign(steps + 1, 0.0);
    out->fp.assign(steps + 1, 0.0);
    out->fpp.assign(steps + 1, 0.0);
    out->f[0] = s.f;
    out->fp[0] = s.fp;
    out->fpp[0] = s.fpp;
  }
  for (int i = 0; i < steps; ++i) {
    const OdeState k1 = rhs(s, a2, a4);
    const OdeState s2{s.f + 0.5 * h * k1.f, s.fp + 0.5 * h * k1.fp, s.fpp + 0.5 * h * k1.fpp};
    const OdeState k2 = rhs(s2, a2, a4);
    const OdeState s3{s.f + 0.5 * h * k2.f, s.fp + 0.5 * h * k2.fp, s.fpp + 0.5 * h * k2.fpp};
    const OdeState k3 = rhs(s3, a2, a4);
    const OdeState s4{s.f + h * k3.f, s.fp + h * k3.fp, s.fpp + h * k3.fpp};
    const OdeState k4 = rhs(s4, a2, a4);
    s.f += h / 6.0 * (k1.f + 2 * k2.f + 2 * k3.f + k4.f);
    s.fp += h / 6.0 * (k1.fp + 2 * k2.fp + 2 * k3.fp + k4.fp);
    s.fpp += h / 6.0 * (k1.fpp + 2 * k2.fpp + 2 * k3.fpp + k4.fpp);
    if (out) {
      out->f[i + 1] = s.f;
      out->fp[i + 1] = s.fp;
      out->fpp[i + 1] = s.fpp;
    }
  }
  return s;
}

double hermite(double x0, double h, const std::vector<double>& v, const std::vector<double>& d,
               double x) {
  const int n = static_cast<int>(v.size()) - 1;
  double s = (x - x0) / h;
  int i = static_cast<int>(std::floor(s));
  if (i < 0) i = 0;
  if (i >= n) i = n - 1;
  const double u = s - i;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  return h00 * v[i] + h10 * h * d[i] + h01 * v[i + 1] + h11 * h * d[i + 1];
}

}  // namespace

double JefferyHamelSolution::f_at(double eta) const {
  return hermite(0.0, 1.0 / (static_cast<int>(f.size()) - 1), f, fp, eta);
}

double JefferyHamelSolution::fp_at(double eta) const {
  return hermite(0.0, 1.0 / (static_cast<int>(fp.size()) - 1), fp, fpp, eta);
}

JefferyHamelSolution jeffery_hamel_solve(double alpha, double Re, double tol, int steps) {
  if (alpha <= 0 || alpha >= 1.5707963267948966)
    throw InvalidArgument("jeffery_hamel_solve: half-angle must lie in (0, pi/2)");
  if (steps < 2000) steps = 2000;

  double g0 = -2.0, g1 = -6.0;
  double r0 = integrate(g0, alpha, Re, steps, nullptr).f;
  double r1 = integrate(g1, alpha, Re, steps, nullptr).f;
  int it = 0;
  for (; it < 50; ++it) {
    if (std::abs(r1) < tol) break;
    if (r1 == r0)
      throw Error("jeffery_hamel_solve: stalled secant, f(1) = " + std::to_string(r1));
    const double g2 = g1 - r1 * (g1 - g0) / (r1 - r0);
    g0 = g1;
    r0 = r1;
    g1 = g2;
    r1 = integrate(g1, alpha, Re, steps, nullptr).f;
  }
  if (std::abs(r1) >= tol)
    throw Error("jeffery_hamel_solve: no convergence in 50 iterations; bracket f''(0) in [" +
                std::to_string(std::min(g0, g1)) + ", " + std::to_string(std::max(g0, g1)) +
                "], residual " + std::to_string(r1));

  JefferyHamelSolution sol;
  sol.alpha = alpha;
  sol.Re = Re;
  sol.fpp0 = g1;
  const OdeState end = integrate(g1, alpha, Re, steps, &sol);
  sol.fp1 = end.fp;
  sol.K = (0.5 * end.fp * end.fp - alpha * Re / 3.0 - 2.0 * alpha * alpha) /
          (4.0 * alpha * alpha);
  return sol;
}

namespace {
struct Polar {
  double r, theta, c, s;
};
Polar polar(double x, double y) {
  const double r = std::hypot(x, y);
  if (r == 0) throw InvalidArgument("jh fields: singular origin");
  return {r, std::atan2(y, x), x / r, y / r};
}

// f is even and f' odd in the angular coordinate; the solution is stored on
// eta in [0, 1].
double f_even(const JefferyHamelSolution& sol, double eta) { return sol.f_at(std::abs(eta)); }
double fp_odd(const JefferyHamelSolution& sol, double eta) {
  const double v = sol.fp_at(std::abs(eta));
  return eta < 0 ? -v : v;
}
}  // namespace

JhExactFields jh_exact_fields(const JefferyHamelSolution& sol, double lambda, double mu) {
  JhExactFields f;
  f.sol = sol;
  f.lambda = lambda;
  f.mu = mu;
  // p(r=1, theta=0) = p_star + 2 mu lambda (f(0) + K) = 0
  f.p_star = -2.0 * mu * lambda * (1.0 + sol.K);
  return f;
}

double JhExactFields::u1(double x, double y) const {
  const Polar p = polar(x, y);
  return lambda / p.r * f_even(sol, p.theta / sol.alpha) * p.c;
}

double JhExactFields::u2(double x, double y) const {
  const Polar p = polar(x, y);
  return lambda / p.r * f_even(sol, p.theta / sol.alpha) * p.s;
}

double JhExactFields::p(double x, double y) const {
  const Polar pl = polar(x, y);
  return p_star + 2.0 * mu * lambda / (pl.r * pl.r) * (f_even(sol, pl.theta / sol.alpha) + sol.K);
}

Vec2 JhExactFields::grad_u1(double x, double y) const {
  const Polar p = polar(x, y);
  const double eta = p.theta / sol.alpha;
  const double fv = f_even(sol, eta);
  const double fpa = fp_odd(sol, eta) / sol.alpha;  // df/dtheta
  const double k = lambda / (p.r * p.r);
  return {k * (-fv * p.c * p.c - fpa * p.s * p.c + fv * p.s * p.s),
          k * (fpa * p.c * p.c - 2.0 * fv * p.s * p.c)};
}

Vec2 JhExactFields::grad_u2(double x, double y) const {
  const Polar p = polar(x, y);
  const double eta = p.theta / sol.alpha;
  const double fv = f_even(sol, eta);
  const double fpa = fp_odd(sol, eta) / sol.alpha;
  const double k = lambda / (p.r * p.r);
  return {k * (-2.0 * fv * p.s * p.c - fpa * p.s * p.s),
          k * (-fv * p.s * p.s + fpa * p.s * p.c + fv * p.c * p.c)};
}

}  // namespace insfem
