#pragma once

#include <array>
#include <memory>
#include <vector>

#include "insfem/csr.hpp"
#include "insfem/element.hpp"
#include "insfem/weakform.hpp"

namespace insfem {

// Interpolated solution data for one variable at a quadrature point.
struct VarQp {
  double value = 0.0;
  Vec2 grad{};
  Sym2 second{};
  double old_value = 0.0;
};

constexpr int kMaxVars = 8;

// Everything a kernel may touch at one quadrature point. Basis data is
// indexed per variable so mixed-order discretizations share one context.
struct QpData {
  Vec2 xq{};
  double t = 0.0;
  double coord_w = 1.0;
  double elem_h = 0.0;
  double dt_tau = kSteadyDt;
  double sigma1 = 0.0;
  double tau_supg = 0.0;
  double tau_pspg = 0.0;
  double tau_lsic = 0.0;
  const WeakFormConfig* cfg = nullptr;

  int n_vars = 0;
  int qp = 0;
  const MappedBasis* bases[kMaxVars] = {};
  VarQp v[kMaxVars];

  // Velocity-component and pressure variable ids, -1 when absent.
  int iu1 = -1, iu2 = -1, ip = -1;

  double phi(int var, int i) const { return bases[var]->phi(qp, i); }
  const Vec2& dphi(int var, int i) const { return bases[var]->dphi(qp, i); }
  const Sym2& d2phi(int var, int i) const { return bases[var]->d2phi(qp, i); }
  int n_funcs(int var) const { return bases[var]->n_funcs; }

  bool rz() const { return cfg->coord == Coord::RZ; }
  double radius() const { return xq.x; }
  Vec2 velocity() const { return {v[iu1].value, v[iu2].value}; }
};

class Kernel {
 public:
  explicit Kernel(int var) : var(var) {}
  virtual ~Kernel() = default;

  int var;  // equation (test-function) variable

  virtual double residual(const QpData& q, int i) const = 0;
  // d residual_i / d coeff_j of variable jvar; must cover jvar == var too.
  virtual double jacobian(const QpData& q, int i, int j, int jvar) const = 0;
  virtual bool is_time_kernel() const { return false; }
  // Whole blocks the kernel never touches can be skipped in assembly.
  virtual bool couples(const QpData&, int /*jvar*/) const { return true; }

  // Vectorized hot paths; defaults delegate to the scalar entries. out has
  // n_funcs(var) entries (residual) or n_funcs(var) x n_funcs(jvar) row-major
  // entries (jacobian) and is accumulated into, scaled by w.
  virtual void residual_all(const QpData& q, double w, double* out) const {
    const int ni = q.n_funcs(var);
    for (int i = 0; i < ni; ++i) out[i] += w * residual(q, i);
  }
  virtual void jacobian_block(const QpData& q, int jvar, double w, double* out) const {
    const int ni = q.n_funcs(var), nj = q.n_funcs(jvar);
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < nj; ++j) out[i * nj + j] += w * jacobian(q, i, j, jvar);
  }
};

class BoundaryKernel {
 public:
  BoundaryKernel(int var, std::string side_set) : var(var), side_set(std::move(side_set)) {}
  virtual ~BoundaryKernel() = default;

  int var;
  std::string side_set;

  virtual double residual(const QpData& q, const Vec2& n, int i) const = 0;
  virtual double jacobian(const QpData& q, const Vec2& n, int i, int j, int jvar) const = 0;
};

struct KernelSet {
  std::vector<std::shared_ptr<Kernel>> volume;
  std::vector<std::shared_ptr<BoundaryKernel>> boundary;
};

struct AssemblyOptions {
  double time = 0.0;
  // sigma1 > 0 enables time kernels (value 1/(theta*dt)); 0 means steady and
  // any time kernel in the set is a configuration error.
  double sigma1 = 0.0;
  double dt_tau = kSteadyDt;
  // State used for the velocity inside tau; null uses the evaluation state.
  // Jacobians never differentiate tau (frozen-tau convention), so finite
  // difference checks must pin this to the linearization state.
  const std::vector<double>* tau_state = nullptr;
};

// Mesh + variables + kernels with cached element data; assembles residuals
// and Jacobians. Element processing parallelizes over INSFEM_THREADS with a
// deterministic merge.
class DiscreteSystem {
 public:
  DiscreteSystem(const Mesh& mesh, std::vector<Variable> vars, WeakFormConfig cfg,
                 KernelSet kernels, ConstraintSet constraints);

  const DofMap& dofs() const { return dofs_; }
  const Mesh& mesh() const { return *mesh_; }
  const WeakFormConfig& config() const { return cfg_; }
  const std::vector<ResolvedConstraint>& constraints() const { return resolved_; }
  const KernelSet& kernels() const { return kernels_; }

  // First pressure dof when velocity blocks precede a trailing pressure
  // block; -1 otherwise.
  int pressure_split() const;

  // Raw assembly without constraint-row replacement.
  std::vector<double> residual_raw(const std::vector<double>& y_eval,
                                   const std::vector<double>& y_old,
                                   const AssemblyOptions& opt) const;
  SparseMatrixCSR jacobian_raw(const std::vector<double>& y_eval,
                               const std::vector<double>& y_old,
                               const AssemblyOptions& opt) const;

  // Spec-shaped entry points: constraint rows replaced using state.y.
  std::vector<double> residual(const SystemState& state, const AssemblyOptions& opt) const;
  SparseMatrixCSR jacobian(const SystemState& state, const AssemblyOptions& opt) const;

  void apply_constraint_rows_jacobian(SparseMatrixCSR& J) const;

  int quadrature_degree() const { return quad_degree_; }

 private:
  struct ElemCache {
    MappedElement mapped;
    // Per distinct variable order present (indexed by order-1).
    std::array<MappedBasis, 2> order_basis;
    bool has_order[2] = {false, false};
    double h = 0.0;
  };
  struct FaceCache {
    int elem, side;
    MappedSide mapped;
    std::array<MappedBasis, 2> order_basis;
    bool has_order[2] = {false, false};
  };

  void assemble_range(int e0, int e1, const std::vector<double>& y_eval,
                      const std::vector<double>& y_old, const AssemblyOptions& opt,
                      std::vector<double>* res, SparseMatrixCSR* jac) const;
  void assemble_faces(const std::vector<double>& y_eval, const std::vector<double>& y_old,
                      const AssemblyOptions& opt, std::vector<double>* res,
                      SparseMatrixCSR* jac) const;
  void fill_qp(QpData& q, const ElemCache& ec, const std::vector<std::vector<int>>& elem_dofs,
               int qp, const std::vector<double>& y_eval, const std::vector<double>& y_old,
               const AssemblyOptions& opt) const;

  const Mesh* mesh_;
  WeakFormConfig cfg_;
  KernelSet kernels_;
  ConstraintSet constraint_set_;
  DofMap dofs_;
  std::vector<ResolvedConstraint> resolved_;
  std::vector<ElemCache> cache_;
  std::vector<std::vector<FaceCache>> face_cache_;  // per boundary kernel
  SparseMatrixCSR pattern_;
  int quad_degree_ = 3;
  int threads_ = 1;
};

struct InterpValue {
  double value = 0.0;
  Vec2 grad{};
  Sym2 second{};
  double old_value = 0.0;
};

// Solution interpolation at a reference point of one element.
InterpValue interpolate(const DofMap& dofs, const std::vector<double>& y,
                        const std::vector<double>& y_old, int var, int elem, Vec2 ref_pt);

}  // namespace insfem
