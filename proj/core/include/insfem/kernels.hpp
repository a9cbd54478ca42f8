#pragma once

#include "insfem/assembly.hpp"

namespace insfem {

// Strong momentum residual rho(du/dt + u.grad u) - mu Lap u + grad p - f
// (Laplace form) or with div(sigma) viscous terms (traction form), including
// the axisymmetric corrections. Used by the SUPG and PSPG terms.
Vec2 strong_momentum_residual(const QpData& q);
// Derivative of the strong residual w.r.t. coefficient j of velocity
// component m, and of the pressure.
Vec2 d_strong_momentum_du(const QpData& q, int m, int j);
Vec2 d_strong_momentum_dp(const QpData& q, int j);

// Continuity test-function contribution: -psi_i div(u), plus the PSPG term
// when enabled.
class MassKernel : public Kernel {
 public:
  using Kernel::Kernel;
  double residual(const QpData& q, int i) const override;
  double jacobian(const QpData& q, int i, int j, int jvar) const override;
  bool couples(const QpData& q, int jvar) const override {
    return jvar != q.ip || q.cfg->pspg;
  }
  void residual_all(const QpData& q, double w, double* out) const override;
  void jacobian_block(const QpData& q, int jvar, double w, double* out) const override;
};

// Spatial momentum terms for component `comp`: convection, viscous (form per
// config), pressure, body force, SUPG and LSIC stabilization.
class MomentumKernel : public Kernel {
 public:
  MomentumKernel(int var, int comp) : Kernel(var), comp_(comp) {}
  double residual(const QpData& q, int i) const override;
  double jacobian(const QpData& q, int i, int j, int jvar) const override;
  void residual_all(const QpData& q, double w, double* out) const override;
  void jacobian_block(const QpData& q, int jvar, double w, double* out) const override;
  int component() const { return comp_; }

 private:
  int comp_;
};

// rho (sigma1 u + sigma2) phi_i on the kernel's own variable.
class MomentumTimeKernel : public Kernel {
 public:
  using Kernel::Kernel;
  double residual(const QpData& q, int i) const override;
  double jacobian(const QpData& q, int i, int j, int jvar) const override;
  bool is_time_kernel() const override { return true; }
  bool couples(const QpData&, int jvar) const override { return jvar == var; }
};

// Accumulates the integrated-by-parts boundary term instead of imposing
// data: -(mu grad(u_k).n - p n_k) phi_i (Laplace) or -(n.sigma)_k phi_i
// (traction).
class NoBcBoundaryKernel : public BoundaryKernel {
 public:
  NoBcBoundaryKernel(int var, std::string side_set, int comp, bool laplace_form)
      : BoundaryKernel(var, std::move(side_set)), comp_(comp), laplace_(laplace_form) {}
  double residual(const QpData& q, const Vec2& n, int i) const override;
  double jacobian(const QpData& q, const Vec2& n, int i, int j, int jvar) const override;

 private:
  int comp_;
  bool laplace_;
};

// Scalar advection pieces (a constant advecting velocity).
class AdvectionKernel : public Kernel {
 public:
  AdvectionKernel(int var, Vec2 a) : Kernel(var), a_(a) {}
  double residual(const QpData& q, int i) const override;
  double jacobian(const QpData& q, int i, int j, int jvar) const override;
  bool couples(const QpData&, int jvar) const override { return jvar == var; }

 private:
  Vec2 a_;
};

class AdvectionSupgKernel : public Kernel {
 public:
  AdvectionSupgKernel(int var, Vec2 a) : Kernel(var), a_(a) {}
  double residual(const QpData& q, int i) const override;
  double jacobian(const QpData& q, int i, int j, int jvar) const override;
  bool couples(const QpData&, int jvar) const override { return jvar == var; }

 private:
  Vec2 a_;
};

class BodyForceKernel : public Kernel {
 public:
  BodyForceKernel(int var, SpaceTimeFn f) : Kernel(var), f_(std::move(f)) {}
  double residual(const QpData& q, int i) const override;
  double jacobian(const QpData&, int, int, int) const override { return 0.0; }
  bool couples(const QpData&, int) const override { return false; }

 private:
  SpaceTimeFn f_;
};

class BodyForceSupgKernel : public Kernel {
 public:
  BodyForceSupgKernel(int var, Vec2 a, SpaceTimeFn f) : Kernel(var), a_(a), f_(std::move(f)) {}
  double residual(const QpData& q, int i) const override;
  double jacobian(const QpData&, int, int, int) const override { return 0.0; }
  bool couples(const QpData&, int) const override { return false; }

 private:
  Vec2 a_;
  SpaceTimeFn f_;
};

// Galerkin + SUPG kernel set for a.grad(u) = f.
KernelSet scalar_advection_kernels(int var, Vec2 a, SpaceTimeFn f, bool supg);

// Full INS kernel set for variables (u1, u2, p) per the config flags.
KernelSet ins_kernels(int iu1, int iu2, int ip, const WeakFormConfig& cfg);

}  // namespace insfem
