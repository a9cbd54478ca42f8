#include "insfem/assembly.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <thread>

#include "insfem/kernels.hpp"

namespace insfem {

namespace {

int env_threads() {
  const char* s = std::getenv("INSFEM_THREADS");
  if (!s) return 1;
  const int t = std::atoi(s);
  return t < 1 ? 1 : t;
}

}  // namespace

DiscreteSystem::DiscreteSystem(const Mesh& mesh, std::vector<Variable> vars, WeakFormConfig cfg,
                               KernelSet kernels, ConstraintSet constraints)
    : mesh_(&mesh),
      cfg_(std::move(cfg)),
      kernels_(std::move(kernels)),
      constraint_set_(std::move(constraints)),
      dofs_(distribute_dofs(mesh, vars)),
      threads_(env_threads()) {
  cfg_.validate();
  if (static_cast<int>(vars.size()) > kMaxVars) throw InvalidArgument("too many variables");
  resolved_ = resolve_constraints(constraint_set_, dofs_);

  int max_order = 1;
  for (const auto& v : dofs_.vars) max_order = std::max(max_order, v.order);
  quad_degree_ = cfg_.quadrature_degree > 0 ? cfg_.quadrature_degree : 2 * max_order + 1;

  const QuadratureRule rule = quadrature_for(family_of(mesh.elem_type), quad_degree_);
  cache_.resize(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    ElemCache& ec = cache_[e];
    ec.mapped = map_element(mesh, e, rule);
    ec.h = mesh.element_diameter(e);
    for (const auto& v : dofs_.vars) {
      const int o = v.order;
      if (!ec.has_order[o - 1]) {
        if (o == mesh.order())
          ec.order_basis[o - 1] = ec.mapped.basis;
        else
          ec.order_basis[o - 1] = map_element_basis(mesh, e, rule, o);
        ec.has_order[o - 1] = true;
      }
    }
  }

  // Face data for boundary kernels.
  const QuadratureRule rule1d = quadrature_for(ElemFamily::EDGE, quad_degree_);
  face_cache_.resize(kernels_.boundary.size());
  for (size_t b = 0; b < kernels_.boundary.size(); ++b) {
    for (const SideRef& s : mesh.side_set(kernels_.boundary[b]->side_set)) {
      FaceCache fc;
      fc.elem = s.elem;
      fc.side = s.side;
      fc.mapped = map_side(mesh, s.elem, s.side, rule1d);
      for (const auto& v : dofs_.vars) {
        const int o = v.order;
        if (!fc.has_order[o - 1]) {
          fc.order_basis[o - 1] = side_element_basis(mesh, s.elem, fc.mapped, o);
          fc.has_order[o - 1] = true;
        }
      }
      face_cache_[b].push_back(std::move(fc));
    }
  }

  // Sparsity: all element-local dofs couple.
  std::vector<std::set<int>> rows(dofs_.n_dofs);
  const int nv = static_cast<int>(dofs_.vars.size());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    std::vector<int> all;
    for (int v = 0; v < nv; ++v) {
      const auto ed = dofs_.element_dofs(v, e);
      all.insert(all.end(), ed.begin(), ed.end());
    }
    for (int a : all)
      for (int b : all) rows[a].insert(b);
  }
  std::vector<std::vector<int>> rv(dofs_.n_dofs);
  for (int i = 0; i < dofs_.n_dofs; ++i) rv[i].assign(rows[i].begin(), rows[i].end());
  pattern_ = csr_from_pattern(dofs_.n_dofs, dofs_.n_dofs, rv);
  pattern_.split = pressure_split();
}

int DiscreteSystem::pressure_split() const {
  int split = -1;
  for (size_t v = 0; v < dofs_.vars.size(); ++v) {
    if (dofs_.vars[v].role == VarRole::Pressure) {
      if (split < 0) split = dofs_.blocks[v].first;
    } else if (split >= 0) {
      return -1;  // non-pressure block after a pressure block
    }
  }
  return split;
}

void DiscreteSystem::fill_qp(QpData& q, const ElemCache& ec,
                             const std::vector<std::vector<int>>& elem_dofs, int qp,
                             const std::vector<double>& y_eval, const std::vector<double>& y_old,
                             const AssemblyOptions& opt) const {
  const int nv = static_cast<int>(dofs_.vars.size());
  q.qp = qp;
  q.xq = ec.mapped.points[qp];
  q.coord_w = coord_weight(q.xq, cfg_.coord);
  q.elem_h = ec.h;
  for (int v = 0; v < nv; ++v) {
    const MappedBasis& mb = *q.bases[v];
    VarQp& val = q.v[v];
    val = VarQp{};
    const auto& ed = elem_dofs[v];
    for (int i = 0; i < mb.n_funcs; ++i) {
      const double c = y_eval[ed[i]];
      val.value += c * mb.phi(qp, i);
      val.grad += c * mb.dphi(qp, i);
      const Sym2& s = mb.d2phi(qp, i);
      val.second.xx += c * s.xx;
      val.second.xy += c * s.xy;
      val.second.yy += c * s.yy;
      if (!y_old.empty()) val.old_value += y_old[ed[i]] * mb.phi(qp, i);
    }
  }
  // Stabilization coefficients, frozen-tau state if requested.
  if ((cfg_.supg || cfg_.pspg || cfg_.lsic) && q.iu1 >= 0) {
    double speed;
    if (opt.tau_state) {
      double s1 = 0, s2 = 0;
      const MappedBasis& b1 = *q.bases[q.iu1];
      const MappedBasis& b2 = *q.bases[q.iu2];
      const auto& e1 = elem_dofs[q.iu1];
      const auto& e2 = elem_dofs[q.iu2];
      for (int i = 0; i < b1.n_funcs; ++i) s1 += (*opt.tau_state)[e1[i]] * b1.phi(qp, i);
      for (int i = 0; i < b2.n_funcs; ++i) s2 += (*opt.tau_state)[e2[i]] * b2.phi(qp, i);
      speed = std::sqrt(s1 * s1 + s2 * s2);
    } else {
      speed = q.velocity().norm();
    }
    const double nu = cfg_.mu / cfg_.rho;
    const double tv = tau({opt.dt_tau, speed, ec.h, nu}, cfg_.alpha);
    q.tau_supg = tv;
    q.tau_pspg = tv;
    q.tau_lsic = cfg_.tau_lsic >= 0 ? cfg_.tau_lsic : 2.0 * nu / 3.0;
  }
}

void DiscreteSystem::assemble_range(int e0, int e1, const std::vector<double>& y_eval,
                                    const std::vector<double>& y_old, const AssemblyOptions& opt,
                                    std::vector<double>* res, SparseMatrixCSR* jac) const {
  const int nv = static_cast<int>(dofs_.vars.size());
  QpData q;
  q.cfg = &cfg_;
  q.t = opt.time;
  q.sigma1 = opt.sigma1;
  q.dt_tau = opt.dt_tau;
  q.n_vars = nv;
  for (int v = 0; v < nv; ++v) {
    if (dofs_.vars[v].role == VarRole::Pressure) q.ip = v;
    if (dofs_.vars[v].role == VarRole::VelocityComponent) (q.iu1 < 0 ? q.iu1 : q.iu2) = v;
  }

  std::vector<std::vector<int>> elem_dofs(nv);
  std::vector<double> local;
  std::vector<QpData> qps;

  for (int e = e0; e < e1; ++e) {
    const ElemCache& ec = cache_[e];
    for (int v = 0; v < nv; ++v) {
      elem_dofs[v] = dofs_.element_dofs(v, e);
      q.bases[v] = &ec.order_basis[dofs_.vars[v].order - 1];
    }
    const int nqp = static_cast<int>(ec.mapped.jxw.size());
    qps.assign(nqp, q);
    for (int qp = 0; qp < nqp; ++qp) fill_qp(qps[qp], ec, elem_dofs, qp, y_eval, y_old, opt);

    for (const auto& kern : kernels_.volume) {
      const int tv = kern->var;
      const int ni = qps[0].n_funcs(tv);
      const auto& rows = elem_dofs[tv];
      if (res) {
        local.assign(ni, 0.0);
        for (int qp = 0; qp < nqp; ++qp)
          kern->residual_all(qps[qp], ec.mapped.jxw[qp] * qps[qp].coord_w, local.data());
        for (int i = 0; i < ni; ++i) (*res)[rows[i]] += local[i];
      }
      if (jac) {
        for (int jv = 0; jv < nv; ++jv) {
          if (!kern->couples(qps[0], jv)) continue;
          const int nj = qps[0].n_funcs(jv);
          const auto& cols = elem_dofs[jv];
          local.assign(static_cast<size_t>(ni) * nj, 0.0);
          for (int qp = 0; qp < nqp; ++qp)
            kern->jacobian_block(qps[qp], jv, ec.mapped.jxw[qp] * qps[qp].coord_w, local.data());
          for (int i = 0; i < ni; ++i) {
            const int ri = rows[i];
            for (int j = 0; j < nj; ++j)
              if (local[i * nj + j] != 0.0) jac->at(ri, cols[j]) += local[i * nj + j];
          }
        }
      }
    }
  }
}

void DiscreteSystem::assemble_faces(const std::vector<double>& y_eval,
                                    const std::vector<double>& y_old,
                                    const AssemblyOptions& opt, std::vector<double>* res,
                                    SparseMatrixCSR* jac) const {
  const int nv = static_cast<int>(dofs_.vars.size());
  QpData q;
  q.cfg = &cfg_;
  q.t = opt.time;
  q.sigma1 = opt.sigma1;
  q.dt_tau = opt.dt_tau;
  q.n_vars = nv;
  for (int v = 0; v < nv; ++v) {
    if (dofs_.vars[v].role == VarRole::Pressure) q.ip = v;
    if (dofs_.vars[v].role == VarRole::VelocityComponent) (q.iu1 < 0 ? q.iu1 : q.iu2) = v;
  }
  std::vector<std::vector<int>> elem_dofs(nv);

  for (size_t b = 0; b < kernels_.boundary.size(); ++b) {
    const auto& kern = *kernels_.boundary[b];
    for (const FaceCache& fc : face_cache_[b]) {
      for (int v = 0; v < nv; ++v) {
        elem_dofs[v] = dofs_.element_dofs(v, fc.elem);
        q.bases[v] = &fc.order_basis[dofs_.vars[v].order - 1];
      }
      const int nqp = static_cast<int>(fc.mapped.jxw.size());
      for (int qp = 0; qp < nqp; ++qp) {
        q.qp = qp;
        q.xq = fc.mapped.points[qp];
        q.coord_w = coord_weight(q.xq, cfg_.coord);
        q.elem_h = cache_[fc.elem].h;
        for (int v = 0; v < nv; ++v) {
          const MappedBasis& mb = *q.bases[v];
          VarQp& val = q.v[v];
          val = VarQp{};
          const auto& ed = elem_dofs[v];
          for (int i = 0; i < mb.n_funcs; ++i) {
            const double c = y_eval[ed[i]];
            val.value += c * mb.phi(qp, i);
            val.grad += c * mb.dphi(qp, i);
            if (!y_old.empty()) val.old_value += y_old[ed[i]] * mb.phi(qp, i);
          }
        }
        const double w = fc.mapped.jxw[qp] * q.coord_w;
        const Vec2& n = fc.mapped.normals[qp];
        const int tv = kern.var;
        const int ni = q.n_funcs(tv);
        const auto& rows = elem_dofs[tv];
        if (res)
          for (int i = 0; i < ni; ++i) (*res)[rows[i]] += w * kern.residual(q, n, i);
        if (jac) {
          for (int jv = 0; jv < nv; ++jv) {
            const int nj = q.n_funcs(jv);
            const auto& cols = elem_dofs[jv];
            for (int i = 0; i < ni; ++i)
              for (int j = 0; j < nj; ++j) {
                const double val = kern.jacobian(q, n, i, j, jv);
                if (val != 0.0) jac->at(rows[i], cols[j]) += w * val;
              }
          }
        }
      }
    }
  }
}

namespace {
void check_time_kernels(const KernelSet& ks, double sigma1) {
  if (sigma1 != 0.0) return;
  for (const auto& k : ks.volume)
    if (k->is_time_kernel())
      throw ConfigError("time-derivative kernel used with a steady executioner");
}
}  // namespace

std::vector<double> DiscreteSystem::residual_raw(const std::vector<double>& y_eval,
                                                 const std::vector<double>& y_old,
                                                 const AssemblyOptions& opt) const {
  if (static_cast<int>(y_eval.size()) != dofs_.n_dofs)
    throw InvalidArgument("residual_raw: state size mismatch");
  check_time_kernels(kernels_, opt.sigma1);
  const int ne = mesh_->n_elements();
  const int nt = std::min(threads_, std::max(1, ne));
  std::vector<double> out(dofs_.n_dofs, 0.0);
  if (nt == 1) {
    assemble_range(0, ne, y_eval, y_old, opt, &out, nullptr);
  } else {
    std::vector<std::vector<double>> partial(nt, std::vector<double>(dofs_.n_dofs, 0.0));
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) {
      const int e0 = ne * t / nt, e1 = ne * (t + 1) / nt;
      pool.emplace_back([&, t, e0, e1] { assemble_range(e0, e1, y_eval, y_old, opt, &partial[t], nullptr); });
    }
    for (auto& th : pool) th.join();
    for (int t = 0; t < nt; ++t)
      for (int i = 0; i < dofs_.n_dofs; ++i) out[i] += partial[t][i];
  }
  assemble_faces(y_eval, y_old, opt, &out, nullptr);
  return out;
}

SparseMatrixCSR DiscreteSystem::jacobian_raw(const std::vector<double>& y_eval,
                                             const std::vector<double>& y_old,
                                             const AssemblyOptions& opt) const {
  if (static_cast<int>(y_eval.size()) != dofs_.n_dofs)
    throw InvalidArgument("jacobian_raw: state size mismatch");
  check_time_kernels(kernels_, opt.sigma1);
  SparseMatrixCSR J = pattern_;
  J.zero_values();
  const int ne = mesh_->n_elements();
  const int nt = std::min(threads_, std::max(1, ne));
  if (nt == 1) {
    assemble_range(0, ne, y_eval, y_old, opt, nullptr, &J);
  } else {
    std::vector<SparseMatrixCSR> partial(nt, J);
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) {
      const int e0 = ne * t / nt, e1 = ne * (t + 1) / nt;
      pool.emplace_back([&, t, e0, e1] { assemble_range(e0, e1, y_eval, y_old, opt, nullptr, &partial[t]); });
    }
    for (auto& th : pool) th.join();
    for (int t = 0; t < nt; ++t)
      for (size_t k = 0; k < J.vals.size(); ++k) J.vals[k] += partial[t].vals[k];
  }
  assemble_faces(y_eval, y_old, opt, nullptr, &J);
  return J;
}

std::vector<double> DiscreteSystem::residual(const SystemState& state,
                                             const AssemblyOptions& opt) const {
  auto r = residual_raw(state.y, state.y_old, opt);
  apply_constraints_residual(resolved_, state.y, opt.time, r);
  return r;
}

SparseMatrixCSR DiscreteSystem::jacobian(const SystemState& state,
                                         const AssemblyOptions& opt) const {
  auto J = jacobian_raw(state.y, state.y_old, opt);
  apply_constraint_rows_jacobian(J);
  return J;
}

void DiscreteSystem::apply_constraint_rows_jacobian(SparseMatrixCSR& J) const {
  int last = -1;
  for (const auto& c : resolved_) {
    if (c.dof == last) continue;
    J.set_identity_row(c.dof);
    last = c.dof;
  }
}

InterpValue interpolate(const DofMap& dofs, const std::vector<double>& y,
                        const std::vector<double>& y_old, int var, int elem, Vec2 ref_pt) {
  const Mesh& mesh = *dofs.mesh;
  const RefElement ref = ref_element(family_of(mesh.elem_type), dofs.vars[var].order);
  const RefElement geom = ref_element(mesh.elem_type);
  const ShapeEval ge = shape_eval(geom, ref_pt);
  const ShapeEval ve = dofs.vars[var].order == geom.order ? ge : shape_eval(ref, ref_pt);

  // Jacobian of the geometric map at ref_pt.
  const auto& conn = mesh.elements[elem];
  double J[2][2] = {{0, 0}, {0, 0}};
  bool one_d = mesh.dim == 1;
  for (size_t i = 0; i < conn.size(); ++i) {
    const Vec2& x = mesh.nodes[conn[i]];
    J[0][0] += x.x * ge.grads[i].x;
    J[0][1] += x.x * ge.grads[i].y;
    J[1][0] += x.y * ge.grads[i].x;
    J[1][1] += x.y * ge.grads[i].y;
  }
  double inv[2][2];
  if (one_d) {
    inv[0][0] = 1.0 / J[0][0];
    inv[0][1] = inv[1][0] = inv[1][1] = 0.0;
  } else {
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det <= 0) throw InvertedElement("interpolate: inverted element");
    inv[0][0] = J[1][1] / det;
    inv[0][1] = -J[0][1] / det;
    inv[1][0] = -J[1][0] / det;
    inv[1][1] = J[0][0] / det;
  }

  InterpValue out;
  const auto ed = dofs.element_dofs(var, elem);
  for (size_t i = 0; i < ed.size(); ++i) {
    const double c = y[ed[i]];
    out.value += c * ve.values[i];
    const Vec2 g = ve.grads[i];
    Vec2 pg;
    if (one_d)
      pg = {g.x * inv[0][0], 0};
    else
      pg = {inv[0][0] * g.x + inv[1][0] * g.y, inv[0][1] * g.x + inv[1][1] * g.y};
    out.grad += c * pg;
    const double r[2][2] = {{ve.seconds[i].xx, ve.seconds[i].xy},
                            {ve.seconds[i].xy, ve.seconds[i].yy}};
    if (one_d) {
      out.second.xx += c * r[0][0] * inv[0][0] * inv[0][0];
    } else {
      double p[2][2] = {{0, 0}, {0, 0}};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int cc = 0; cc < 2; ++cc)
            for (int d = 0; d < 2; ++d) p[a][b] += inv[cc][a] * r[cc][d] * inv[d][b];
      out.second.xx += c * p[0][0];
      out.second.xy += c * p[0][1];
      out.second.yy += c * p[1][1];
    }
    if (!y_old.empty()) out.old_value += y_old[ed[i]] * ve.values[i];
  }
  return out;
}

}  // namespace insfem
