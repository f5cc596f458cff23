#pragma once

#include <Eigen/SparseLU>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "liyau/manifold.hpp"

namespace liyau {

/// A scalar field sampled on a time grid. Column k of values is the field at
/// times[k]; the grid is strictly increasing and starts at 0.
struct ScalarTimeField {
  Eigen::VectorXd times;
  Eigen::MatrixXd values;  // num_vertices x n_times
  std::string origin;      // which equation produced it
  int n_times() const { return static_cast<int>(times.size()); }
  void validate() const;
};

/// Dirichlet heat kernel columns G0(., t; source, 0) on a ball. Values are
/// zero outside the domain; the t=0 column is the discrete delta.
struct HeatKernel {
  int source = -1;
  Ball domain;
  Eigen::VectorXd times;
  Eigen::MatrixXd values;  // num_vertices x n_times
  double mass(const DiscreteManifold& m, int k) const;
};

/// Convergence diagnostics for the Duhamel-Picard solver.
struct DuhamelDiag {
  int slabs = 0;
  int total_sweeps = 0;
  std::vector<double> sweep_sup_change;  // per sweep, sup |w_next - w|
  double min_pointwise_change = 0.0;     // most negative iterate change seen
};

/// Implicit Euler stepper for (d/dt - Laplacian - potential) on the whole
/// manifold or Dirichlet-restricted to a ball. Factorizations are cached per
/// distinct substep size and shared across repeated solves.
class ImplicitStepper {
 public:
  /// domain == nullptr steps on the closed manifold. potential (optional,
  /// active-set layout not required; global field) enters the matrix as
  /// -coef*V, treated implicitly.
  ImplicitStepper(const DiscreteManifold& m, const Ball* domain,
                  const Eigen::VectorXd* potential = nullptr,
                  double coef = 0.0);

  int active_count() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active() const { return active_; }

  /// One implicit step of size dt on an active-layout vector. boundary_value
  /// enters through the Dirichlet lift; source (active layout), if present,
  /// is added as dt * source to the right-hand side.
  Eigen::VectorXd step(const Eigen::VectorXd& current, double dt,
                       double boundary_value,
                       const Eigen::VectorXd* source = nullptr);

  Eigen::VectorXd restrict_field(const Eigen::VectorXd& global) const;
  Eigen::VectorXd prolong(const Eigen::VectorXd& active,
                          double boundary_value) const;

  double max_potential() const { return max_potential_; }

 private:
  struct Factor;
  const Factor& factor_for(double dt);

  const DiscreteManifold& m_;
  std::vector<int> active_;
  Eigen::SparseMatrix<double> l_active_;
  Eigen::VectorXd frontier_;  // per active row, coupling lost to the exterior
  Eigen::VectorXd potential_active_;
  double coef_ = 0.0;
  double max_potential_ = 0.0;
  std::map<double, std::unique_ptr<Factor>> cache_;
};

/// Heat solve (d/dt)u = Laplacian u, implicit Euler with substeps of size at
/// most dt between output nodes. domain == nullptr means the closed manifold;
/// otherwise Dirichlet data boundary_value is held on the ball complement.
/// times must be strictly increasing with times[0] == 0.
ScalarTimeField solve_heat(const DiscreteManifold& m, const Ball* domain,
                           const Eigen::VectorXd& init, double boundary_value,
                           const Eigen::VectorXd& times, double dt);

/// Dirichlet heat kernel from a normalized vertex delta at source.
HeatKernel dirichlet_heat_kernel(const DiscreteManifold& m, const Ball& ball,
                                 int source, const Eigen::VectorXd& times,
                                 double dt);

/// Direct implicit solve of dw/dt = Laplacian w + 2(a-1) V w on the ball with
/// w(.,0) = 1 and boundary value 1. The zeroth-order term is implicit; dt is
/// halved automatically while the system matrix is not strictly diagonally
/// dominant (error after 30 halvings).
ScalarTimeField solve_w_direct(const DiscreteManifold& m, const Ball& ball,
                               const Eigen::VectorXd& V, double a,
                               const Eigen::VectorXd& times, double dt);

/// Picard iteration on the Duhamel integral form w = 1 + 2(a-1) Int G0 V w,
/// slab-by-slab so each slab's integral operator is a contraction. times must
/// be uniformly spaced. Iterates increase monotonically from the free
/// evolution; non-convergence raises with a smaller-slab hint.
ScalarTimeField solve_w_duhamel(const DiscreteManifold& m, const Ball& ball,
                                const Eigen::VectorXd& V, double a,
                                const Eigen::VectorXd& times, double dt,
                                int max_sweeps = 200, double tol = 1e-11,
                                DuhamelDiag* diag = nullptr);

/// J = w^{-1/(a-1)}, clamped into (0, 1]. Rejects w < 1 - 1e-8 (a violated
/// maximum principle upstream).
ScalarTimeField j_from_w(const ScalarTimeField& w, double a);

}  // namespace liyau
