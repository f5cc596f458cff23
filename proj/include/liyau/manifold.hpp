// Discretized model manifolds: analytic metrics on structured chart grids,
// metric-weighted finite-volume Laplacian, eikonal geodesic distances, balls
// and weighted integrals.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace liyau {

enum class ModelKind { FlatTorus, WarpedProduct };

enum class WarpForm { Linear, Sinh, Sin, Bump };

/// Warping function f(r) for metrics dr^2 + f(r)^2 dtheta^2, with closed-form
/// derivatives. Linear: f = r. Sinh/Sin: f = sinh(c r)/c, sin(c r)/c (Gauss
/// curvature -c^2 / +c^2). Bump: f = r (1 + A exp(-(r-r0)^2/sigma^2)).
struct WarpProfile {
  WarpForm form = WarpForm::Linear;
  double rate = 1.0;       // c for Sinh/Sin
  double amplitude = 0.0;  // A for Bump
  double center = 1.0;     // r0 for Bump
  double width = 0.1;      // sigma for Bump

  double value(double r) const;
  double deriv(double r) const;
  double second_deriv(double r) const;
  /// Gauss curvature K(r) = -f''/f.
  double gauss_curvature(double r) const;
  std::string describe() const;
};

struct ManifoldSpec {
  ModelKind kind = ModelKind::FlatTorus;
  // FlatTorus
  double length_x = 1.0;
  double length_y = 1.0;
  // WarpedProduct: chart [r_min, r_max] x [0, 2pi)
  WarpProfile warp;
  double r_min = 0.1;
  double r_max = 1.1;
  bool disk_cap = false;  // close the pole: cell-centered grid from r = 0
  // grid counts per axis (x/r first)
  int grid_x = 64;
  int grid_y = 64;
  // dimension carried symbolically into formulas (grids are 2-D)
  int dimension = 2;

  void validate() const;  // throws std::invalid_argument with field name
  /// Closed-form total volume; nullopt when no closed form exists (Bump).
  std::optional<double> analytic_volume() const;
};

struct Ball {
  int center = -1;
  double radius = 0.0;
  std::vector<int> members;    // sorted vertex indices with d(center,v) <= radius
  std::vector<char> contains;  // size n_vertices
  double volume = 0.0;         // sum of member weights
};

/// Immutable discrete manifold: chart vertices, volume weights, sparse
/// Laplace-Beltrami stencil, and on-demand geodesic distance fields computed
/// by a second-order fast-marching eikonal solver. Safe to share across
/// threads after construction.
class DiscreteManifold {
 public:
  ManifoldSpec spec;
  int nx = 0, ny = 0;
  bool periodic_x = false, periodic_y = false;
  double step_x = 0.0;                    // chart spacing along axis 0
  double metric_scale = 1.0;              // accumulated rescaling factor s
  Eigen::VectorXd step_y;                 // metric length of an axis-1 edge, per row i
  Eigen::VectorXd coord_x, coord_y;       // chart coordinates per vertex
  Eigen::VectorXd weight;                 // volume weight per vertex (> 0)
  Eigen::SparseMatrix<double> laplacian;  // row sums 0, off-diagonals >= 0

  int num_vertices() const { return nx * ny; }
  int index(int i, int j) const { return i * ny + j; }
  int row_of(int v) const { return v / ny; }
  int col_of(int v) const { return v % ny; }
  double total_volume() const { return weight.sum(); }

  /// Geodesic distance field from one vertex (cached, thread-safe).
  const Eigen::VectorXd& distance_field(int center) const;
  double geodesic_distance(int a, int b) const;

  Ball ball(int center, double radius) const;

  Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& field) const;

  /// Volume-weighted p-mean over a ball: (avg of field^p)^(1/p), p >= 1.
  double p_mean(const Ball& b, const Eigen::VectorXd& field, double p) const;

  /// Metric gradient squared |grad u|^2 by centered differences.
  Eigen::VectorXd grad_norm_sq(const Eigen::VectorXd& field) const;

  /// Parabolic rescaling of the metric, g -> s^2 g: lengths scale by s,
  /// weights by s^2, the Laplacian by 1/s^2. Exact in floating point when s
  /// is a power of two.
  DiscreteManifold rescaled(double s) const;

  /// Nearest vertex to a chart point.
  int nearest_vertex(double x, double y) const;

 private:
  Eigen::VectorXd compute_distance(int center) const;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<int, Eigen::VectorXd> dist_cache_;
  mutable std::deque<int> cache_order_;

 public:
  DiscreteManifold() = default;
  DiscreteManifold(const DiscreteManifold& o)
      : spec(o.spec), nx(o.nx), ny(o.ny), periodic_x(o.periodic_x),
        periodic_y(o.periodic_y), step_x(o.step_x), step_y(o.step_y),
        coord_x(o.coord_x), coord_y(o.coord_y), weight(o.weight),
        laplacian(o.laplacian) {}
  DiscreteManifold& operator=(const DiscreteManifold&) = delete;
  DiscreteManifold(DiscreteManifold&&) = default;
};

DiscreteManifold build_manifold(const ManifoldSpec& spec);

// Spec factories for the built-in model catalog.
ManifoldSpec flat_torus_spec(double lx, double ly, int n_x, int n_y);
ManifoldSpec warped_spec(WarpProfile warp, double r_min, double r_max,
                         int n_r, int n_theta, bool disk_cap = false);

}  // namespace liyau
