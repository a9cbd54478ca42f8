#include "insfem/timeloop.hpp"

#include <cmath>
#include <iomanip>

namespace insfem {

double adapt_dt(double dt, int newton_iterations, const AdaptiveDtOptions& opts) {
  if (newton_iterations <= opts.optimal_iterations) return dt * opts.growth_factor;
  return dt * opts.cutback_factor;
}

double retry_on_failure(double dt, double dtmin) {
  const double next = 0.5 * dt;
  if (next < dtmin)
    throw TimestepUnderflow("timestep below dtmin (" + std::to_string(next) + " < " +
                            std::to_string(dtmin) + ")");
  return next;
}

bool steady_state_check(const std::vector<double>& y_new, const std::vector<double>& y_old,
                        double dt, double tol) {
  double dn = 0, yn = 0;
  for (size_t i = 0; i < y_new.size(); ++i) {
    const double d = y_new[i] - y_old[i];
    dn += d * d;
    yn += y_new[i] * y_new[i];
  }
  if (dn == 0.0) return true;
  if (yn == 0.0) return false;
  return std::sqrt(dn) / (dt * std::sqrt(yn)) < tol;
}

namespace {

// theta = 0 (explicit Euler) keeps the spatial operator frozen at y_old; the
// remaining problem in y_{n+1} is linear in the time term alone.
NewtonResult explicit_euler_step(SystemState& state, double dt, const DiscreteSystem& sys,
                                 const NewtonOptions& nopts, const KrylovOptions& kopts,
                                 const PrecSpec& prec) {
  KernelSet time_only;
  for (const auto& k : sys.kernels().volume)
    if (k->is_time_kernel()) time_only.volume.push_back(k);
  DiscreteSystem tsys(sys.mesh(), sys.dofs().vars, sys.config(), time_only, ConstraintSet{});

  AssemblyOptions aopt;
  aopt.time = state.t;
  aopt.sigma1 = 1.0 / dt;
  aopt.dt_tau = dt;
  // Evaluated at y_old the time terms vanish, leaving the spatial residual.
  const std::vector<double> rspace = sys.residual_raw(state.y, state.y, aopt);

  const std::vector<double> y_old = state.y;
  const double t_new = state.t + dt;
  ResidualFn F = [&](const std::vector<double>& z) {
    AssemblyOptions o;
    o.time = state.t;
    o.sigma1 = 1.0 / dt;
    o.dt_tau = dt;
    o.tau_state = &y_old;
    std::vector<double> r = tsys.residual_raw(z, y_old, o);
    for (size_t i = 0; i < r.size(); ++i) r[i] += rspace[i];
    apply_constraints_residual(sys.constraints(), z, t_new, r);
    return r;
  };
  JacobianFn J = [&](const std::vector<double>& z) {
    AssemblyOptions o;
    o.time = state.t;
    o.sigma1 = 1.0 / dt;
    o.dt_tau = dt;
    o.tau_state = &y_old;
    SparseMatrixCSR m = tsys.jacobian_raw(z, y_old, o);
    sys.apply_constraint_rows_jacobian(m);
    return m;
  };
  std::vector<double> z = state.y;
  NewtonResult res = newton_solve(F, J, z, nopts, kopts, prec);
  if (res.converged) {
    state.y_old = state.y;
    state.y = z;
    state.t = t_new;
    state.dt = dt;
  }
  return res;
}

}  // namespace

NewtonResult theta_step(SystemState& state, double theta, double dt, const DiscreteSystem& sys,
                        const NewtonOptions& nopts, const KrylovOptions& kopts,
                        const PrecSpec& prec) {
  if (dt <= 0) throw InvalidArgument("theta_step: dt must be positive");
  if (theta < 0 || theta > 1) throw InvalidArgument("theta_step: theta must lie in [0,1]");
  if (theta == 0.0) return explicit_euler_step(state, dt, sys, nopts, kopts, prec);

  const std::vector<double> y_old = state.y;
  const double t_eval = state.t + theta * dt;  // spatial terms and tau at t_{n+theta}
  const double t_new = state.t + dt;
  const double sigma1 = 1.0 / (theta * dt);
  const int n = static_cast<int>(y_old.size());

  auto eval_state = [&](const std::vector<double>& z) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = theta * z[i] + (1.0 - theta) * y_old[i];
    return w;
  };

  // tau is evaluated from the previous time level: within the step the
  // stabilization coefficients are fixed fields, so the analytic Jacobian is
  // exact in tau and the steady state is unchanged (tau(y_old) = tau(y) once
  // the iteration converges in time).
  ResidualFn F = [&](const std::vector<double>& z) {
    AssemblyOptions o;
    o.time = t_eval;
    o.sigma1 = sigma1;
    o.dt_tau = dt;
    o.tau_state = &y_old;
    std::vector<double> r = sys.residual_raw(eval_state(z), y_old, o);
    apply_constraints_residual(sys.constraints(), z, t_new, r);
    return r;
  };
  JacobianFn J = [&](const std::vector<double>& z) {
    AssemblyOptions o;
    o.time = t_eval;
    o.sigma1 = sigma1;
    o.dt_tau = dt;
    o.tau_state = &y_old;
    SparseMatrixCSR m = sys.jacobian_raw(eval_state(z), y_old, o);
    for (double& v : m.vals) v *= theta;
    sys.apply_constraint_rows_jacobian(m);
    return m;
  };

  std::vector<double> z = state.y;
  NewtonResult res = newton_solve(F, J, z, nopts, kopts, prec);
  if (res.converged) {
    state.y_old = y_old;
    state.y = z;
    state.t = t_new;
    state.dt = dt;
  }
  return res;
}

NewtonResult solve_steady(const DiscreteSystem& sys, SystemState& state,
                          const NewtonOptions& nopts, const KrylovOptions& kopts,
                          const PrecSpec& prec) {
  ResidualFn F = [&](const std::vector<double>& z) {
    AssemblyOptions o;
    o.time = state.t;
    std::vector<double> r = sys.residual_raw(z, {}, o);
    apply_constraints_residual(sys.constraints(), z, state.t, r);
    return r;
  };
  JacobianFn J = [&](const std::vector<double>& z) {
    AssemblyOptions o;
    o.time = state.t;
    SparseMatrixCSR m = sys.jacobian_raw(z, {}, o);
    sys.apply_constraint_rows_jacobian(m);
    return m;
  };
  return newton_solve(F, J, state.y, nopts, kopts, prec);
}

TransientResult run_transient(const DiscreteSystem& sys, SystemState& state,
                              const ExecutionerOptions& opts, const StepCallback& on_step,
                              std::ostream* log) {
  TransientResult out;
  double dt = opts.dt0;
  for (int step = 1; step <= opts.num_steps; ++step) {
    NewtonResult nr;
    for (;;) {
      nr = theta_step(state, opts.theta, dt, sys, opts.newton, opts.krylov, opts.prec);
      if (nr.converged) break;
      try {
        dt = retry_on_failure(dt, opts.dtmin);
      } catch (const TimestepUnderflow& e) {
        out.ok = false;
        out.message = e.what();
        return out;
      }
      if (log)
        (*log) << "step " << step << " failed, retrying with dt = " << dt << "\n";
    }
    out.steps_taken = step;
    StepRecord rec{step, state.t, dt, nr.iterations, nr.residual_norms.front(),
                   nr.residual_norms.back()};
    if (log) {
      (*log) << "step " << step << "  t = " << std::setprecision(6) << state.t
             << "  dt = " << dt << "  nl its = " << nr.iterations << "  |F0| = " << std::scientific
             << rec.r0 << "  |F| = " << rec.rfinal << std::defaultfloat << "\n";
    }
    if (on_step) on_step(rec, state);

    if (opts.ss_check &&
        steady_state_check(state.y, state.y_old, dt, opts.ss_check_tol)) {
      out.steady_state = true;
      if (log) (*log) << "steady state reached after " << step << " steps\n";
      return out;
    }
    if (opts.adaptive) dt = adapt_dt(dt, nr.iterations, *opts.adaptive);
  }
  return out;
}

}  // namespace insfem
