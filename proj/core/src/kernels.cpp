#include "insfem/kernels.hpp"

#include <cmath>

namespace insfem {

double tau(const TauInputs& in, double alpha) {
  if (in.h <= 0) throw InvalidArgument("tau: element size must be positive");
  double sum = 0.0;
  if (std::isfinite(in.dt)) {
    const double a = 2.0 / in.dt;
    sum += a * a;
  }
  const double b = 2.0 * in.speed / in.h;
  const double c = 4.0 * in.nu / (in.h * in.h);
  sum += b * b + 9.0 * c * c;
  if (sum <= 0.0) return 0.0;  // no advection, no diffusion, steady
  return alpha / std::sqrt(sum);
}

namespace {

// div(phi_i e_k) for the test/trial function of variable `var`; picks up the
// phi/r term for the radial component in RZ.
inline double div_basis(const QpData& q, int var, int i, int k) {
  double d = q.dphi(var, i)[k];
  if (k == 0 && q.rz()) d += q.phi(var, i) / q.radius();
  return d;
}

inline double div_velocity(const QpData& q) {
  double d = q.v[q.iu1].grad.x + q.v[q.iu2].grad.y;
  if (q.rz()) d += q.v[q.iu1].value / q.radius();
  return d;
}

inline int uvar(const QpData& q, int m) { return m == 0 ? q.iu1 : q.iu2; }

// Strong viscous term (negated divergence of the viscous stress) for
// component k.
double strong_viscous(const QpData& q, int k) {
  const WeakFormConfig& c = *q.cfg;
  const VarQp& uk = q.v[uvar(q, k)];
  if (c.laplace) {
    double lap = uk.second.xx + uk.second.yy;
    if (q.rz()) {
      const double r = q.radius();
      lap += uk.grad.x / r;
      if (k == 0) lap -= uk.value / (r * r);
    }
    return -c.mu * lap;
  }
  const VarQp& ur = q.v[q.iu1];
  const VarQp& uz = q.v[q.iu2];
  if (!q.rz()) {
    const VarQp& um = q.v[uvar(q, k)];
    const double lap = um.second.xx + um.second.yy;
    const double graddiv = k == 0 ? ur.second.xx + uz.second.xy : ur.second.xy + uz.second.yy;
    return -c.mu * (lap + graddiv);
  }
  const double r = q.radius();
  if (k == 0)
    return -c.mu * (2.0 * (ur.second.xx + ur.grad.x / r) + ur.second.yy + uz.second.xy -
                    2.0 * ur.value / (r * r));
  return -c.mu *
         (ur.second.xy + uz.second.xx + (ur.grad.y + uz.grad.x) / r + 2.0 * uz.second.yy);
}

double d_strong_viscous(const QpData& q, int k, int m, int j) {
  const WeakFormConfig& c = *q.cfg;
  const int vm = uvar(q, m);
  const Sym2& s = q.d2phi(vm, j);
  const Vec2& g = q.dphi(vm, j);
  const double ph = q.phi(vm, j);
  if (c.laplace) {
    if (m != k) return 0.0;
    double lap = s.xx + s.yy;
    if (q.rz()) {
      const double r = q.radius();
      lap += g.x / r;
      if (k == 0) lap -= ph / (r * r);
    }
    return -c.mu * lap;
  }
  if (!q.rz()) {
    const double kk = (k == 0) ? (m == 0 ? s.xx : s.xy) : (m == 0 ? s.xy : s.yy);
    const double lap = (m == k) ? s.xx + s.yy : 0.0;
    return -c.mu * (lap + kk);
  }
  const double r = q.radius();
  if (k == 0) {
    if (m == 0)
      return -c.mu * (2.0 * (s.xx + g.x / r) + s.yy - 2.0 * ph / (r * r));
    return -c.mu * s.xy;
  }
  if (m == 0) return -c.mu * (s.xy + g.y / r);
  return -c.mu * (s.xx + g.x / r + 2.0 * s.yy);
}

}  // namespace

Vec2 strong_momentum_residual(const QpData& q) {
  const WeakFormConfig& c = *q.cfg;
  const Vec2 u = q.velocity();
  Vec2 f{0, 0};
  if (c.body_force) f = c.body_force(q.xq.x, q.xq.y, q.t);
  Vec2 r;
  for (int k = 0; k < 2; ++k) {
    const VarQp& uk = q.v[uvar(q, k)];
    double val = 0.0;
    if (c.transient) val += c.rho * (q.sigma1 * uk.value - q.sigma1 * uk.old_value);
    if (c.convective) val += c.rho * u.dot(uk.grad);
    val += strong_viscous(q, k);
    val += q.v[q.ip].grad[k];
    val -= f[k];
    r[k] = val;
  }
  return r;
}

Vec2 d_strong_momentum_du(const QpData& q, int m, int j) {
  const WeakFormConfig& c = *q.cfg;
  const int vm = uvar(q, m);
  const double ph = q.phi(vm, j);
  const Vec2& g = q.dphi(vm, j);
  const Vec2 u = q.velocity();
  Vec2 r;
  for (int k = 0; k < 2; ++k) {
    double val = 0.0;
    if (c.transient && m == k) val += c.rho * q.sigma1 * ph;
    if (c.convective) {
      val += c.rho * ph * q.v[uvar(q, k)].grad[m];
      if (m == k) val += c.rho * u.dot(g);
    }
    val += d_strong_viscous(q, k, m, j);
    r[k] = val;
  }
  return r;
}

Vec2 d_strong_momentum_dp(const QpData& q, int j) {
  const Vec2& g = q.dphi(q.ip, j);
  return {g.x, g.y};
}

double MassKernel::residual(const QpData& q, int i) const {
  // The PSPG weight carries the same orientation as the (negative) divergence
  // term; the opposite sign is equally consistent but loses pressure
  // stability on transient problems.
  double r = -q.phi(var, i) * div_velocity(q);
  if (q.cfg->pspg) {
    const Vec2 R = strong_momentum_residual(q);
    r -= q.tau_pspg / q.cfg->rho * q.dphi(var, i).dot(R);
  }
  return r;
}

double MassKernel::jacobian(const QpData& q, int i, int j, int jvar) const {
  double r = 0.0;
  if (jvar == q.iu1 || jvar == q.iu2) {
    const int m = jvar == q.iu1 ? 0 : 1;
    r -= q.phi(var, i) * div_basis(q, jvar, j, m);
    if (q.cfg->pspg)
      r -= q.tau_pspg / q.cfg->rho * q.dphi(var, i).dot(d_strong_momentum_du(q, m, j));
  } else if (jvar == q.ip && q.cfg->pspg) {
    r -= q.tau_pspg / q.cfg->rho * q.dphi(var, i).dot(d_strong_momentum_dp(q, j));
  }
  return r;
}

void MassKernel::residual_all(const QpData& q, double w, double* out) const {
  const int ni = q.n_funcs(var);
  const double divu = div_velocity(q);
  Vec2 R{};
  if (q.cfg->pspg) R = strong_momentum_residual(q);
  const double c = q.tau_pspg / q.cfg->rho;
  for (int i = 0; i < ni; ++i) {
    double r = -q.phi(var, i) * divu;
    if (q.cfg->pspg) r -= c * q.dphi(var, i).dot(R);
    out[i] += w * r;
  }
}

void MassKernel::jacobian_block(const QpData& q, int jvar, double w, double* out) const {
  const int ni = q.n_funcs(var), nj = q.n_funcs(jvar);
  const bool pspg = q.cfg->pspg;
  const double c = q.tau_pspg / q.cfg->rho;
  if (jvar == q.iu1 || jvar == q.iu2) {
    const int m = jvar == q.iu1 ? 0 : 1;
    for (int j = 0; j < nj; ++j) {
      const double db = div_basis(q, jvar, j, m);
      Vec2 dR{};
      if (pspg) dR = d_strong_momentum_du(q, m, j);
      for (int i = 0; i < ni; ++i) {
        double r = -q.phi(var, i) * db;
        if (pspg) r -= c * q.dphi(var, i).dot(dR);
        out[i * nj + j] += w * r;
      }
    }
  } else if (jvar == q.ip && pspg) {
    for (int j = 0; j < nj; ++j) {
      const Vec2 dR = d_strong_momentum_dp(q, j);
      for (int i = 0; i < ni; ++i) out[i * nj + j] -= w * c * q.dphi(var, i).dot(dR);
    }
  }
}

double MomentumKernel::residual(const QpData& q, int i) const {
  const WeakFormConfig& c = *q.cfg;
  const int k = comp_;
  const VarQp& uk = q.v[uvar(q, k)];
  const double phi = q.phi(var, i);
  const Vec2& dphi = q.dphi(var, i);
  double r = 0.0;

  if (c.convective) r += c.rho * q.velocity().dot(uk.grad) * phi;

  if (c.laplace) {
    r += c.mu * uk.grad.dot(dphi);
    if (q.rz() && k == 0) r += c.mu * uk.value * phi / (q.radius() * q.radius());
  } else {
    const VarQp& u1 = q.v[q.iu1];
    const VarQp& u2 = q.v[q.iu2];
    // mu (d_a u_k + d_k u_a) d_a phi
    r += c.mu * ((uk.grad.x + (k == 0 ? u1.grad.x : u1.grad.y)) * dphi.x +
                 (uk.grad.y + (k == 0 ? u2.grad.x : u2.grad.y)) * dphi.y);
    if (q.rz() && k == 0) r += 2.0 * c.mu * u1.value * phi / (q.radius() * q.radius());
  }

  if (c.integrate_p_by_parts) {
    r -= q.v[q.ip].value * div_basis(q, var, i, k);
  } else {
    r += q.v[q.ip].grad[k] * phi;
  }

  if (c.body_force) r -= c.body_force(q.xq.x, q.xq.y, q.t)[k] * phi;

  if (c.supg) r += q.tau_supg * q.velocity().dot(dphi) * strong_momentum_residual(q)[k];
  if (c.lsic) r += c.rho * q.tau_lsic * div_basis(q, var, i, k) * div_velocity(q);
  return r;
}

double MomentumKernel::jacobian(const QpData& q, int i, int j, int jvar) const {
  const WeakFormConfig& c = *q.cfg;
  const int k = comp_;
  const double phi = q.phi(var, i);
  const Vec2& dphi = q.dphi(var, i);
  double r = 0.0;

  if (jvar == q.ip) {
    if (c.integrate_p_by_parts)
      r -= q.phi(q.ip, j) * div_basis(q, var, i, k);
    else
      r += q.dphi(q.ip, j)[k] * phi;
    if (c.supg) r += q.tau_supg * q.velocity().dot(dphi) * d_strong_momentum_dp(q, j)[k];
    return r;
  }
  if (jvar != q.iu1 && jvar != q.iu2) return 0.0;

  const int m = jvar == q.iu1 ? 0 : 1;
  const double phj = q.phi(jvar, j);
  const Vec2& gj = q.dphi(jvar, j);

  if (c.convective) {
    r += c.rho * phj * q.v[uvar(q, k)].grad[m] * phi;
    if (m == k) r += c.rho * q.velocity().dot(gj) * phi;
  }

  if (c.laplace) {
    if (m == k) {
      r += c.mu * gj.dot(dphi);
      if (q.rz() && k == 0) r += c.mu * phj * phi / (q.radius() * q.radius());
    }
  } else {
    if (m == k) r += c.mu * gj.dot(dphi);
    r += c.mu * gj[k] * dphi[m];
    if (q.rz() && k == 0 && m == 0) r += 2.0 * c.mu * phj * phi / (q.radius() * q.radius());
  }

  if (c.supg) {
    const Vec2 R = strong_momentum_residual(q);
    r += q.tau_supg * (phj * dphi[m]) * R[k];
    r += q.tau_supg * q.velocity().dot(dphi) * d_strong_momentum_du(q, m, j)[k];
  }
  if (c.lsic) r += c.rho * q.tau_lsic * div_basis(q, var, i, k) * div_basis(q, jvar, j, m);
  return r;
}

void MomentumKernel::residual_all(const QpData& q, double w, double* out) const {
  const int ni = q.n_funcs(var);
  for (int i = 0; i < ni; ++i) out[i] += w * residual(q, i);
}

void MomentumKernel::jacobian_block(const QpData& q, int jvar, double w, double* out) const {
  const WeakFormConfig& c = *q.cfg;
  const int k = comp_;
  const int ni = q.n_funcs(var), nj = q.n_funcs(jvar);
  const Vec2 u = c.supg || c.convective ? q.velocity() : Vec2{};

  if (jvar == q.ip) {
    for (int j = 0; j < nj; ++j) {
      const double phj = q.phi(q.ip, j);
      const Vec2 gj = q.dphi(q.ip, j);
      for (int i = 0; i < ni; ++i) {
        double r;
        if (c.integrate_p_by_parts)
          r = -phj * div_basis(q, var, i, k);
        else
          r = gj[k] * q.phi(var, i);
        if (c.supg) r += q.tau_supg * u.dot(q.dphi(var, i)) * gj[k];
        out[i * nj + j] += w * r;
      }
    }
    return;
  }
  if (jvar != q.iu1 && jvar != q.iu2) return;

  const int m = jvar == q.iu1 ? 0 : 1;
  Vec2 R{};
  if (c.supg) R = strong_momentum_residual(q);
  const double rr = q.radius();

  for (int j = 0; j < nj; ++j) {
    const double phj = q.phi(jvar, j);
    const Vec2 gj = q.dphi(jvar, j);
    const double conv_j = c.convective ? c.rho * u.dot(gj) : 0.0;
    const double gradm = c.convective ? c.rho * q.v[uvar(q, k)].grad[m] : 0.0;
    Vec2 dR{};
    if (c.supg) dR = d_strong_momentum_du(q, m, j);
    const double dbj = c.lsic ? div_basis(q, jvar, j, m) : 0.0;

    for (int i = 0; i < ni; ++i) {
      const double phi = q.phi(var, i);
      const Vec2& dphi = q.dphi(var, i);
      double r = 0.0;
      if (c.convective) {
        r += gradm * phj * phi;
        if (m == k) r += conv_j * phi;
      }
      if (c.laplace) {
        if (m == k) {
          r += c.mu * gj.dot(dphi);
          if (q.rz() && k == 0) r += c.mu * phj * phi / (rr * rr);
        }
      } else {
        if (m == k) r += c.mu * gj.dot(dphi);
        r += c.mu * gj[k] * dphi[m];
        if (q.rz() && k == 0 && m == 0) r += 2.0 * c.mu * phj * phi / (rr * rr);
      }
      if (c.supg) {
        const double udphi = u.dot(dphi);
        r += q.tau_supg * (phj * dphi[m]) * R[k];
        r += q.tau_supg * udphi * dR[k];
      }
      if (c.lsic) r += c.rho * q.tau_lsic * div_basis(q, var, i, k) * dbj;
      out[i * nj + j] += w * r;
    }
  }
}

double MomentumTimeKernel::residual(const QpData& q, int i) const {
  const VarQp& uk = q.v[var];
  const double sigma2 = -q.sigma1 * uk.old_value;
  return q.cfg->rho * (q.sigma1 * uk.value + sigma2) * q.phi(var, i);
}

double MomentumTimeKernel::jacobian(const QpData& q, int i, int j, int jvar) const {
  if (jvar != var) return 0.0;
  return q.cfg->rho * q.sigma1 * q.phi(var, j) * q.phi(var, i);
}

double NoBcBoundaryKernel::residual(const QpData& q, const Vec2& n, int i) const {
  const WeakFormConfig& c = *q.cfg;
  const int k = comp_;
  const VarQp& uk = q.v[uvar(q, k)];
  const double p = q.v[q.ip].value;
  double flux;
  if (laplace_) {
    flux = c.mu * uk.grad.dot(n) - p * n[k];
  } else {
    const VarQp& u1 = q.v[q.iu1];
    const VarQp& u2 = q.v[q.iu2];
    const double tk0 = c.mu * (uk.grad.x + (k == 0 ? u1.grad.x : u1.grad.y));
    const double tk1 = c.mu * (uk.grad.y + (k == 0 ? u2.grad.x : u2.grad.y));
    flux = tk0 * n.x + tk1 * n.y - p * n[k];
  }
  return -flux * q.phi(var, i);
}

double NoBcBoundaryKernel::jacobian(const QpData& q, const Vec2& n, int i, int j, int jvar) const {
  const WeakFormConfig& c = *q.cfg;
  const int k = comp_;
  const double phi = q.phi(var, i);
  if (jvar == q.ip) return q.phi(q.ip, j) * n[k] * phi;
  if (jvar != q.iu1 && jvar != q.iu2) return 0.0;
  const int m = jvar == q.iu1 ? 0 : 1;
  const Vec2& gj = q.dphi(jvar, j);
  double dflux = 0.0;
  if (laplace_) {
    if (m == k) dflux = c.mu * gj.dot(n);
  } else {
    if (m == k) dflux += c.mu * gj.dot(n);
    dflux += c.mu * gj[k] * n[m];
  }
  return -dflux * phi;
}

namespace {
inline double scalar_tau(const QpData& q, const Vec2& a) {
  return tau({q.dt_tau, a.norm(), q.elem_h, 0.0}, q.cfg->alpha);
}
}  // namespace

double AdvectionKernel::residual(const QpData& q, int i) const {
  return a_.dot(q.v[var].grad) * q.phi(var, i);
}

double AdvectionKernel::jacobian(const QpData& q, int i, int j, int jvar) const {
  if (jvar != var) return 0.0;
  return a_.dot(q.dphi(var, j)) * q.phi(var, i);
}

double AdvectionSupgKernel::residual(const QpData& q, int i) const {
  return scalar_tau(q, a_) * a_.dot(q.dphi(var, i)) * a_.dot(q.v[var].grad);
}

double AdvectionSupgKernel::jacobian(const QpData& q, int i, int j, int jvar) const {
  if (jvar != var) return 0.0;
  return scalar_tau(q, a_) * a_.dot(q.dphi(var, i)) * a_.dot(q.dphi(var, j));
}

double BodyForceKernel::residual(const QpData& q, int i) const {
  return -f_(q.xq.x, q.xq.y, q.t) * q.phi(var, i);
}

double BodyForceSupgKernel::residual(const QpData& q, int i) const {
  return -scalar_tau(q, a_) * a_.dot(q.dphi(var, i)) * f_(q.xq.x, q.xq.y, q.t);
}

KernelSet scalar_advection_kernels(int var, Vec2 a, SpaceTimeFn f, bool supg) {
  KernelSet ks;
  ks.volume.push_back(std::make_shared<AdvectionKernel>(var, a));
  ks.volume.push_back(std::make_shared<BodyForceKernel>(var, f));
  if (supg) {
    ks.volume.push_back(std::make_shared<AdvectionSupgKernel>(var, a));
    ks.volume.push_back(std::make_shared<BodyForceSupgKernel>(var, a, f));
  }
  return ks;
}

KernelSet ins_kernels(int iu1, int iu2, int ip, const WeakFormConfig& cfg) {
  KernelSet ks;
  ks.volume.push_back(std::make_shared<MassKernel>(ip));
  ks.volume.push_back(std::make_shared<MomentumKernel>(iu1, 0));
  ks.volume.push_back(std::make_shared<MomentumKernel>(iu2, 1));
  if (cfg.transient) {
    ks.volume.push_back(std::make_shared<MomentumTimeKernel>(iu1));
    ks.volume.push_back(std::make_shared<MomentumTimeKernel>(iu2));
  }
  return ks;
}

}  // namespace insfem
