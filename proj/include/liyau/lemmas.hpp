#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "liyau/heat.hpp"
#include "liyau/manifold.hpp"

namespace liyau {

/// One volume-doubling comparison |B(x,r2)|/r2^n <= 2 |B(x,r1)|/r1^n.
struct DoublingEntry {
  int center = -1;
  double r1 = 0.0, r2 = 0.0;
  double vol1 = 0.0, vol2 = 0.0;
  double ratio = 0.0;  // (vol2/r2^n) / (vol1/r1^n)
  bool within_factor_two = false;
};

struct DoublingReport {
  std::vector<DoublingEntry> entries;
  double worst_ratio = 0.0;
  bool all_within = true;
};

/// Per-test-function Sobolev ratios on a ball. ratio = LHS / RHS with
/// LHS = (avg_B |f|^{n/(n-1)})^{(n-1)/n} and RHS = r * avg_B |grad f|,
/// averages taken with respect to the volume weights.
struct SobolevReport {
  int center = -1;
  double r = 0.0;
  std::vector<double> ratios;
  double best_constant = 0.0;  // max ratio over the suite
};

/// Least-squares envelope for the kernel upper bound
/// G(x,t;y,0) <= C1 |B(x,sqrt t)|^{-1/2} |B(y,sqrt t)|^{-1/2} e^{-d^2/(C2 t)}.
/// The fit regresses z = log G + (1/2) log|B_x| + (1/2) log|B_y| on q = d^2/t;
/// C1 is then inflated so no sample exceeds the envelope.
struct GaussianFit {
  double C1 = 0.0;
  double C2 = 0.0;
  double c1_inflation = 0.0;  // log C1 lift above the least-squares intercept
  double rms_residual = 0.0;  // about the least-squares line
  int n_samples = 0;
  double t_min = 0.0, t_max = 0.0;
  double q_max = 0.0;
};

/// Radial plateau cutoff phi = eta(d/r): 1 on B(x,r/2), 0 outside B(x,r).
struct CutoffField {
  Eigen::VectorXd phi;
  int center = -1;
  double r = 0.0;
  int degree = 5;
  double c_star = 0.0;  // max over vertices of (|grad phi|^2 + |lap phi|) r^2
};

/// Check the doubling property for each (center, radius pair). Radii must
/// satisfy 0 < r1 <= r2 <= 1. Failing pairs are flagged, not fatal: models
/// outside the small-curvature regime are expected to break the factor 2.
DoublingReport check_volume_doubling(
    const DiscreteManifold& m, const std::vector<int>& centers,
    const std::vector<std::pair<double, double>>& radius_pairs);

/// Evaluate the Sobolev ratio for each supplied test function, which must be
/// supported strictly inside B(center, r): nonzero values outside the ball or
/// on its boundary layer are rejected.
SobolevReport check_sobolev(const DiscreteManifold& m, int center, double r,
                            const std::vector<Eigen::VectorXd>& test_functions);

/// Deterministic Sobolev test suite: radial polynomial bumps (1 - s^2)^q,
/// a steepening plateau family, and `n_random` seeded smooth bumps, all
/// supported on 0.85 r.
std::vector<Eigen::VectorXd> sobolev_test_suite(const DiscreteManifold& m,
                                                int center, double r,
                                                std::uint64_t seed,
                                                int n_random = 20);

/// Fit the Gaussian envelope over one or more kernels. Samples are taken at
/// kernel times in (0, 1] and at domain vertices with d^2/t <= q_max; fewer
/// than 10 usable samples is an error.
GaussianFit fit_gaussian_bound(const DiscreteManifold& m,
                               const std::vector<HeatKernel>& kernels,
                               double q_max = 10.0, int max_centers = 200);

/// Build the polynomial plateau cutoff of the given smoothstep degree
/// (3, 5, or 7; 5 keeps the discrete Laplacian bounded through C^2).
/// Requires 0 < r <= 1 and B(center, r) inside the chart.
CutoffField build_cutoff(const DiscreteManifold& m, int center, double r,
                         int degree = 5);

}  // namespace liyau
