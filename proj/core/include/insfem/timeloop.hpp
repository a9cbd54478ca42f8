#pragma once

#include <functional>
#include <optional>
#include <ostream>

#include "insfem/assembly.hpp"
#include "insfem/newton.hpp"

namespace insfem {

struct AdaptiveDtOptions {
  int optimal_iterations = 5;
  double growth_factor = 1.2;
  double cutback_factor = 0.4;
};

struct ExecutionerOptions {
  bool transient = false;
  double theta = 1.0;  // 1 = implicit Euler, 0.5 = implicit midpoint
  double dt0 = 0.1;
  double dtmin = 1e-6;
  int num_steps = 100;
  bool ss_check = false;
  double ss_check_tol = 1e-10;
  std::optional<AdaptiveDtOptions> adaptive;
  NewtonOptions newton;
  KrylovOptions krylov;
  PrecSpec prec;
};

// Grow the step below the iteration target, cut it above.
double adapt_dt(double dt, int newton_iterations, const AdaptiveDtOptions& opts);

// Halve after a failed solve; below dtmin the run aborts (TimestepUnderflow).
double retry_on_failure(double dt, double dtmin);

// Rate-normalized relative change: |y_new - y_old| / (dt |y_new|) < tol.
bool steady_state_check(const std::vector<double>& y_new, const std::vector<double>& y_old,
                        double dt, double tol);

// Advances state by one theta step (state.y updated in place on success;
// previous solution moves to state.y_old).
NewtonResult theta_step(SystemState& state, double theta, double dt, const DiscreteSystem& sys,
                        const NewtonOptions& nopts, const KrylovOptions& kopts,
                        const PrecSpec& prec);

NewtonResult solve_steady(const DiscreteSystem& sys, SystemState& state,
                          const NewtonOptions& nopts, const KrylovOptions& kopts,
                          const PrecSpec& prec);

struct StepRecord {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  int nl_iterations = 0;
  double r0 = 0.0;
  double rfinal = 0.0;
};

struct TransientResult {
  bool ok = true;
  bool steady_state = false;
  int steps_taken = 0;
  std::string message;
};

using StepCallback = std::function<void(const StepRecord&, const SystemState&)>;

TransientResult run_transient(const DiscreteSystem& sys, SystemState& state,
                              const ExecutionerOptions& opts, const StepCallback& on_step = {},
                              std::ostream* log = nullptr);

}  // namespace insfem
