#pragma once

#include <functional>
#include <string>
#include <vector>

#include "insfem/assembly.hpp"

namespace insfem {

using ExactFn = std::function<double(double x, double y, double t)>;
using ExactGradFn = std::function<Vec2(double x, double y, double t)>;

// L2 norm of (u_h - exact); vector variables sum component contributions
// under the root. RZ weights the measure by r. Quadrature degree 2*order+3.
double l2_error(const DofMap& dofs, const std::vector<double>& y, const std::vector<int>& vars,
                const std::vector<ExactFn>& exact, double t, Coord cs);

double h1_seminorm_error(const DofMap& dofs, const std::vector<double>& y,
                         const std::vector<int>& vars, const std::vector<ExactGradFn>& exact_grad,
                         double t, Coord cs);

struct ConvergenceStudy {
  std::vector<double> h;
  std::vector<std::string> norm_names;
  std::vector<std::vector<double>> errors;  // [level][norm]
  std::vector<double> slopes;               // per norm, filled by fit_rates
};

// Least-squares slope of log(error) against log(h).
double fit_rate(const std::vector<double>& h, const std::vector<double>& errors);

void fit_rates(ConvergenceStudy& study);

// CSV with one row per level and a trailing `slope` footer row.
void write_study_csv(const ConvergenceStudy& study, const std::string& path);

std::string format_study(const ConvergenceStudy& study);

}  // namespace insfem
