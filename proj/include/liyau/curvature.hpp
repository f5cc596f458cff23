#pragma once

#include <vector>

#include "liyau/manifold.hpp"

namespace liyau {

/// Pointwise norm convention for the negative part of the Ricci form. The
/// eigenvalue convention (largest negative eigenvalue clamped at zero) is the
/// default; the tensor Frobenius norm differs by a factor sqrt(dim) on
/// Einstein-like surfaces and is kept behind this switch.
enum class RicNormKind { Eigenvalue, Frobenius };

/// Integral curvature data for one (p, r) pair: the potential field V, the
/// per-center values k(x,p,r) = r^2 * p-mean of V over B(x,r), and their max.
struct CurvatureData {
  double p = 0.0;
  double r = 0.0;
  std::vector<int> centers;     // sample set realizing the sup
  std::vector<double> k_local;  // parallel to centers
  double k_global = 0.0;
};

/// V = |Ric^-| from the analytic model behind the discretization. Surfaces
/// carry Ric = K g, so V = max(0, -K) with K = -f''/f on warped products and
/// K = 0 on flat tori. Correct on rescaled manifolds (K scales by 1/s^2).
Eigen::VectorXd ric_minus_field(const DiscreteManifold& m,
                                RicNormKind norm = RicNormKind::Eigenvalue);

/// Deterministic sample set for the sup over centers: all vertices up to
/// max_count, beyond that a uniform stride over the index range.
std::vector<int> default_centers(const DiscreteManifold& m, int max_count = 64);

/// k(x,p,r) per center and k(p,r) = max over the sample set. Requires
/// p > n/2 (n = analytic dimension of the model) and r > 0; the theorem
/// hypotheses additionally want r <= 1, which callers enforce where needed so
/// that rescaled radii r > 1 remain evaluable.
CurvatureData k_norm(const DiscreteManifold& m, const Eigen::VectorXd& V,
                     double p, double r, const std::vector<int>& centers);

/// Convenience overload using default_centers.
CurvatureData k_norm(const DiscreteManifold& m, const Eigen::VectorXd& V,
                     double p, double r);

}  // namespace liyau
