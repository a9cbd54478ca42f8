#include "insfem/norms.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace insfem {

namespace {

double quadrature_sum(const DofMap& dofs, const std::vector<double>& y,
                      const std::vector<int>& vars, double t, Coord cs,
                      const std::function<double(const InterpValue&, Vec2, int slot)>& term) {
  const Mesh& mesh = *dofs.mesh;
  int max_order = 1;
  for (int v : vars) max_order = std::max(max_order, dofs.vars[v].order);
  const QuadratureRule rule = quadrature_for(family_of(mesh.elem_type), 2 * max_order + 3);

  double total = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const MappedElement me = map_element(mesh, e, rule);
    std::vector<MappedBasis> bases;
    for (int v : vars) bases.push_back(map_element_basis(mesh, e, rule, dofs.vars[v].order));
    for (int q = 0; q < rule.n(); ++q) {
      const double w = me.jxw[q] * coord_weight(me.points[q], cs);
      for (size_t s = 0; s < vars.size(); ++s) {
        const auto ed = dofs.element_dofs(vars[s], e);
        InterpValue iv;
        for (size_t i = 0; i < ed.size(); ++i) {
          const double c = y[ed[i]];
          iv.value += c * bases[s].phi(q, static_cast<int>(i));
          iv.grad += c * bases[s].dphi(q, static_cast<int>(i));
        }
        total += w * term(iv, me.points[q], static_cast<int>(s));
      }
    }
  }
  (void)t;
  return total;
}

}  // namespace

double l2_error(const DofMap& dofs, const std::vector<double>& y, const std::vector<int>& vars,
                const std::vector<ExactFn>& exact, double t, Coord cs) {
  const double sq = quadrature_sum(dofs, y, vars, t, cs,
                                   [&](const InterpValue& iv, Vec2 x, int s) {
                                     const double d = iv.value - exact[s](x.x, x.y, t);
                                     return d * d;
                                   });
  return std::sqrt(sq);
}

double h1_seminorm_error(const DofMap& dofs, const std::vector<double>& y,
                         const std::vector<int>& vars, const std::vector<ExactGradFn>& exact_grad,
                         double t, Coord cs) {
  const double sq = quadrature_sum(dofs, y, vars, t, cs,
                                   [&](const InterpValue& iv, Vec2 x, int s) {
                                     const Vec2 d = iv.grad - exact_grad[s](x.x, x.y, t);
                                     return d.dot(d);
                                   });
  return std::sqrt(sq);
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& errors) {
  if (h.size() != errors.size() || h.size() < 2)
    throw InvalidArgument("fit_rate: need at least two matching levels");
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double yv = std::log(errors[i]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void fit_rates(ConvergenceStudy& study) {
  study.slopes.assign(study.norm_names.size(), 0.0);
  for (size_t k = 0; k < study.norm_names.size(); ++k) {
    std::vector<double> col;
    for (const auto& row : study.errors) col.push_back(row[k]);
    study.slopes[k] = fit_rate(study.h, col);
  }
}

namespace {
std::string shortest(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}
}  // namespace

void write_study_csv(const ConvergenceStudy& study, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "h";
  for (const auto& n : study.norm_names) out << "," << n;
  out << "\n";
  for (size_t l = 0; l < study.h.size(); ++l) {
    out << shortest(study.h[l]);
    for (double e : study.errors[l]) out << "," << shortest(e);
    out << "\n";
  }
  out << "slope";
  for (double s : study.slopes) out << "," << shortest(s);
  out << "\n";
}

std::string format_study(const ConvergenceStudy& study) {
  std::ostringstream os;
  os << "      h";
  for (const auto& n : study.norm_names) os << "  " << n;
  os << "\n";
  char buf[128];
  for (size_t l = 0; l < study.h.size(); ++l) {
    std::snprintf(buf, sizeof buf, "%9.5f", study.h[l]);
    os << buf;
    for (double e : study.errors[l]) {
      std::snprintf(buf, sizeof buf, "  %.4e", e);
      os << buf;
    }
    os << "\n";
  }
  os << "  slope";
  for (double s : study.slopes) {
    std::snprintf(buf, sizeof buf, "  %8.3f", s);
    os << buf;
  }
  os << "\n";
  return os.str();
}

}  // namespace insfem
