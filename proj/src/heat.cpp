#include "liyau/heat.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace liyau {

void ScalarTimeField::validate() const {
  if (times.size() == 0 || times[0] != 0.0)
    throw std::invalid_argument("ScalarTimeField: time grid must start at 0");
  for (int k = 1; k < n_times(); ++k)
    if (!(times[k] > times[k - 1]))
      throw std::invalid_argument(
          "ScalarTimeField: time grid must be strictly increasing");
  if (values.cols() != times.size())
    throw std::invalid_argument("ScalarTimeField: column/time size mismatch");
  if (!values.allFinite())
    throw std::invalid_argument("ScalarTimeField: non-finite values");
}

double HeatKernel::mass(const DiscreteManifold& m, int k) const {
  double s = 0.0;
  for (int v : domain.members) s += m.weight[v] * values(v, k);
  return s;
}

// ---------------------------------------------------------------------------
// ImplicitStepper
// ---------------------------------------------------------------------------

struct ImplicitStepper::Factor {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

ImplicitStepper::ImplicitStepper(const DiscreteManifold& m, const Ball* domain,
                                 const Eigen::VectorXd* potential, double coef)
    : m_(m), coef_(coef) {
  const int n = m.num_vertices();
  std::vector<int> local(n, -1);
  if (domain) {
    active_ = domain->members;
  } else {
    active_.resize(n);
    for (int v = 0; v < n; ++v) active_[v] = v;
  }
  const int na = active_count();
  for (int l = 0; l < na; ++l) local[active_[l]] = l;

  std::vector<Eigen::Triplet<double>> trip;
  frontier_ = Eigen::VectorXd::Zero(na);
  // Row-wise assembly from a row-major copy (the stored matrix is col-major).
  Eigen::SparseMatrix<double, Eigen::RowMajor> lr(m.laplacian);
  for (int l = 0; l < na; ++l) {
    const int v = active_[l];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(lr, v);
         it; ++it) {
      const int lj = local[it.col()];
      if (lj >= 0)
        trip.emplace_back(l, lj, it.value());
      else
        frontier_[l] += it.value();  // off-diagonal weight to the exterior
    }
  }
  l_active_.resize(na, na);
  l_active_.setFromTriplets(trip.begin(), trip.end());
  l_active_.makeCompressed();

  potential_active_ = Eigen::VectorXd::Zero(na);
  if (potential) {
    if (potential->size() != n)
      throw std::invalid_argument("ImplicitStepper: potential size mismatch");
    for (int l = 0; l < na; ++l) potential_active_[l] = (*potential)[active_[l]];
    if (potential_active_.minCoeff() < 0.0)
      throw std::invalid_argument("ImplicitStepper: potential must be >= 0");
    max_potential_ = potential_active_.maxCoeff();
  }
}

const ImplicitStepper::Factor& ImplicitStepper::factor_for(double dt) {
  auto it = cache_.find(dt);
  if (it != cache_.end()) return *it->second;
  const int na = active_count();
  Eigen::SparseMatrix<double> A(na, na);
  A = -dt * l_active_;
  if (coef_ != 0.0) {
    Eigen::SparseMatrix<double> P(na, na);
    P.setIdentity();
    for (int l = 0; l < na; ++l)
      P.coeffRef(l, l) = -dt * coef_ * potential_active_[l];
    A += P;
  }
  Eigen::SparseMatrix<double> I(na, na);
  I.setIdentity();
  A += I;
  A.makeCompressed();
  auto f = std::make_unique<Factor>();
  f->lu.compute(A);
  if (f->lu.info() != Eigen::Success)
    throw std::runtime_error(
        "ImplicitStepper: sparse LU factorization failed (dt = " +
        std::to_string(dt) + ")");
  return *cache_.emplace(dt, std::move(f)).first->second;
}

Eigen::VectorXd ImplicitStepper::step(const Eigen::VectorXd& current, double dt,
                                      double boundary_value,
                                      const Eigen::VectorXd* source) {
  if (current.size() != active_count())
    throw std::invalid_argument("ImplicitStepper::step: active layout expected");
  const Factor& f = factor_for(dt);
  Eigen::VectorXd rhs = current;
  if (boundary_value != 0.0) rhs += dt * boundary_value * frontier_;
  if (source) rhs += dt * (*source);
  Eigen::VectorXd out = f.lu.solve(rhs);
  if (f.lu.info() != Eigen::Success || !out.allFinite()) {
    std::ostringstream os;
    os << "ImplicitStepper: linear solve failed at dt = " << dt
       << ", rhs norm = " << rhs.norm();
    throw std::runtime_error(os.str());
  }
  return out;
}

Eigen::VectorXd ImplicitStepper::restrict_field(
    const Eigen::VectorXd& global) const {
  Eigen::VectorXd out(active_count());
  for (int l = 0; l < active_count(); ++l) out[l] = global[active_[l]];
  return out;
}

Eigen::VectorXd ImplicitStepper::prolong(const Eigen::VectorXd& active,
                                         double boundary_value) const {
  Eigen::VectorXd out =
      Eigen::VectorXd::Constant(m_.num_vertices(), boundary_value);
  for (int l = 0; l < active_count(); ++l) out[active_[l]] = active[l];
  return out;
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

namespace {

void check_times(const Eigen::VectorXd& times) {
  if (times.size() < 2 || times[0] != 0.0)
    throw std::invalid_argument("time grid must start at 0 and have >= 2 nodes");
  for (int k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
}

// March from output node to output node with substeps of size <= dt.
template <typename Record>
void march(ImplicitStepper& stepper, Eigen::VectorXd& state,
           const Eigen::VectorXd& times, double dt, double boundary_value,
           Record&& record) {
  for (int k = 1; k < times.size(); ++k) {
    const double span = times[k] - times[k - 1];
    const int nsub = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
    const double h = span / nsub;
    for (int s = 0; s < nsub; ++s) state = stepper.step(state, h, boundary_value);
    record(k, state);
  }
}

}  // namespace

ScalarTimeField solve_heat(const DiscreteManifold& m, const Ball* domain,
                           const Eigen::VectorXd& init, double boundary_value,
                           const Eigen::VectorXd& times, double dt) {
  check_times(times);
  if (!(dt > 0.0)) throw std::invalid_argument("solve_heat: dt must be > 0");
  if (init.size() != m.num_vertices() || !init.allFinite())
    throw std::invalid_argument("solve_heat: bad initial field");
  ImplicitStepper stepper(m, domain);
  ScalarTimeField out;
  out.times = times;
  out.origin = "heat";
  out.values.resize(m.num_vertices(), times.size());
  out.values.col(0) = stepper.prolong(stepper.restrict_field(init), boundary_value);
  Eigen::VectorXd state = stepper.restrict_field(init);
  march(stepper, state, times, dt, boundary_value,
        [&](int k, const Eigen::VectorXd& s) {
          out.values.col(k) = stepper.prolong(s, boundary_value);
        });
  out.validate();
  return out;
}

HeatKernel dirichlet_heat_kernel(const DiscreteManifold& m, const Ball& ball,
                                 int source, const Eigen::VectorXd& times,
                                 double dt) {
  check_times(times);
  if (source < 0 || source >= m.num_vertices() || !ball.contains[source])
    throw std::invalid_argument(
        "dirichlet_heat_kernel: source must lie inside the ball");
  Eigen::VectorXd init = Eigen::VectorXd::Zero(m.num_vertices());
  init[source] = 1.0 / m.weight[source];
  ScalarTimeField sol = solve_heat(m, &ball, init, 0.0, times, dt);
  HeatKernel k;
  k.source = source;
  k.domain = ball;
  k.times = times;
  k.values = std::move(sol.values);
  return k;
}

ScalarTimeField solve_w_direct(const DiscreteManifold& m, const Ball& ball,
                               const Eigen::VectorXd& V, double a,
                               const Eigen::VectorXd& times, double dt) {
  check_times(times);
  if (!(a > 1.0)) throw std::invalid_argument("solve_w_direct: requires a > 1");
  const double c = 2.0 * (a - 1.0);
  ImplicitStepper stepper(m, &ball, &V, c);
  // keep the implicit matrix strictly diagonally dominant: dt c maxV <= 1/2
  double h = dt;
  int halvings = 0;
  while (h * c * stepper.max_potential() > 0.5) {
    h *= 0.5;
    if (++halvings > 30)
      throw std::runtime_error(
          "solve_w_direct: step size underflow while restoring diagonal "
          "dominance; reduce the potential or dt");
  }
  ScalarTimeField out;
  out.times = times;
  out.origin = "w-direct";
  out.values.resize(m.num_vertices(), times.size());
  out.values.col(0) = Eigen::VectorXd::Ones(m.num_vertices());
  Eigen::VectorXd state = Eigen::VectorXd::Ones(stepper.active_count());
  march(stepper, state, times, h, 1.0, [&](int k, const Eigen::VectorXd& s) {
    out.values.col(k) = stepper.prolong(s, 1.0);
  });
  out.validate();
  return out;
}

ScalarTimeField solve_w_duhamel(const DiscreteManifold& m, const Ball& ball,
                                const Eigen::VectorXd& V, double a,
                                const Eigen::VectorXd& times, double dt,
                                int max_sweeps, double tol, DuhamelDiag* diag) {
  check_times(times);
  if (!(a > 1.0)) throw std::invalid_argument("solve_w_duhamel: requires a > 1");
  const double span0 = times[1] - times[0];
  for (int k = 1; k < times.size(); ++k)
    if (std::abs((times[k] - times[k - 1]) - span0) > 1e-9 * span0)
      throw std::invalid_argument(
          "solve_w_duhamel: output grid must be uniformly spaced");
  const int nsub = std::max(1, static_cast<int>(std::ceil(span0 / dt - 1e-9)));
  const double h = span0 / nsub;
  const int n_nodes = (static_cast<int>(times.size()) - 1) * nsub;  // past t=0

  ImplicitStepper free_step(m, &ball);  // no potential; used for base and I
  Eigen::VectorXd v_active = free_step.restrict_field(V);
  if (v_active.size() > 0 && v_active.minCoeff() < 0.0)
    throw std::invalid_argument("solve_w_duhamel: potential must be >= 0");
  const double c = 2.0 * (a - 1.0);
  const double vmax = v_active.size() ? v_active.maxCoeff() : 0.0;
  // slab short enough that the Volterra operator is a 1/2-contraction
  int slab_steps = n_nodes;
  if (c * vmax > 0.0)
    slab_steps = std::max(1, static_cast<int>(0.5 / (c * vmax * h)));
  slab_steps = std::min(slab_steps, n_nodes);

  const int na = free_step.active_count();
  ScalarTimeField out;
  out.times = times;
  out.origin = "w-duhamel";
  out.values.resize(m.num_vertices(), times.size());
  out.values.col(0) = Eigen::VectorXd::Ones(m.num_vertices());

  DuhamelDiag local_diag;
  Eigen::VectorXd w_start = Eigen::VectorXd::Ones(na);
  int node = 0;  // global index on the internal grid
  while (node < n_nodes) {
    const int len = std::min(slab_steps, n_nodes - node);
    // base: free evolution of the slab's initial data with boundary value 1
    std::vector<Eigen::VectorXd> base(len + 1);
    base[0] = w_start;
    for (int k = 0; k < len; ++k) base[k + 1] = free_step.step(base[k], h, 1.0);
    std::vector<Eigen::VectorXd> w = base;
    std::vector<Eigen::VectorXd> w_next(len + 1);
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      Eigen::VectorXd I = Eigen::VectorXd::Zero(na);
      w_next[0] = base[0];
      double sup_change = 0.0, min_change = 0.0;
      for (int k = 0; k < len; ++k) {
        // Explicit source propagated one implicit step: the convolution sees
        // kernel times >= h, one step back from the s -> t singularity.
        Eigen::VectorXd src = v_active.cwiseProduct(w[k]);
        I = free_step.step(I + h * src, h, 0.0);
        w_next[k + 1] = base[k + 1] + c * I;
        const Eigen::VectorXd d = w_next[k + 1] - w[k + 1];
        sup_change = std::max(sup_change, d.cwiseAbs().maxCoeff());
        min_change = std::min(min_change, d.minCoeff());
      }
      w.swap(w_next);
      ++local_diag.total_sweeps;
      local_diag.sweep_sup_change.push_back(sup_change);
      local_diag.min_pointwise_change =
          std::min(local_diag.min_pointwise_change, min_change);
      if (sup_change <= tol * std::max(1.0, w[len].cwiseAbs().maxCoeff())) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error(
          "solve_w_duhamel: Picard iteration did not converge; use a smaller "
          "time slab (reduce dt or the potential amplitude)");
    for (int k = 1; k <= len; ++k) {
      const int g = node + k;
      if (g % nsub == 0)
        out.values.col(g / nsub) = free_step.prolong(w[k], 1.0);
    }
    w_start = w[len];
    node += len;
    ++local_diag.slabs;
  }
  if (diag) *diag = local_diag;
  out.validate();
  return out;
}

ScalarTimeField j_from_w(const ScalarTimeField& w, double a) {
  if (!(a > 1.0)) throw std::invalid_argument("j_from_w: requires a > 1");
  w.validate();
  if (w.values.minCoeff() < 1.0 - 1e-8)
    throw std::invalid_argument(
        "j_from_w: w < 1 beyond tolerance; maximum principle violated "
        "upstream");
  ScalarTimeField J;
  J.times = w.times;
  J.origin = "J";
  const double expo = -1.0 / (a - 1.0);
  J.values = w.values.array().max(1.0).pow(expo).matrix();
  J.validate();
  return J;
}

}  // namespace liyau
