#include "liyau/curvature.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace liyau {

Eigen::VectorXd ric_minus_field(const DiscreteManifold& m, RicNormKind norm) {
  const int n = m.num_vertices();
  Eigen::VectorXd V = Eigen::VectorXd::Zero(n);
  if (m.spec.kind == ModelKind::FlatTorus) return V;
  const double s = m.metric_scale;
  const double s2 = s * s;
  for (int v = 0; v < n; ++v) {
    const double r_chart = m.coord_x[v] / s;  // undo accumulated rescaling
    const double K = m.spec.warp.gauss_curvature(r_chart) / s2;
    V[v] = std::max(0.0, -K);
  }
  if (norm == RicNormKind::Frobenius)
    V *= std::sqrt(static_cast<double>(m.spec.dimension));
  return V;
}

std::vector<int> default_centers(const DiscreteManifold& m, int max_count) {
  const int n = m.num_vertices();
  std::vector<int> out;
  if (n <= max_count) {
    out.resize(n);
    for (int v = 0; v < n; ++v) out[v] = v;
    return out;
  }
  const int stride = (n + max_count - 1) / max_count;
  for (int v = 0; v < n; v += stride) out.push_back(v);
  return out;
}

CurvatureData k_norm(const DiscreteManifold& m, const Eigen::VectorXd& V,
                     double p, double r, const std::vector<int>& centers) {
  const double half_n = 0.5 * m.spec.dimension;
  if (!(p > half_n)) {
    std::ostringstream os;
    os << "k_norm: requires p > n/2, got p = " << p << " with n = "
       << m.spec.dimension;
    throw std::invalid_argument(os.str());
  }
  if (!(r > 0.0)) throw std::invalid_argument("k_norm: radius must be > 0");
  if (V.size() != m.num_vertices() || V.minCoeff() < 0.0)
    throw std::invalid_argument("k_norm: V must be a nonnegative vertex field");
  if (centers.empty()) throw std::invalid_argument("k_norm: empty center set");
  CurvatureData data;
  data.p = p;
  data.r = r;
  data.centers = centers;
  data.k_local.resize(centers.size());
  for (size_t c = 0; c < centers.size(); ++c) {
    Ball b = m.ball(centers[c], r);
    data.k_local[c] = r * r * m.p_mean(b, V, p);
  }
  data.k_global = *std::max_element(data.k_local.begin(), data.k_local.end());
  return data;
}

CurvatureData k_norm(const DiscreteManifold& m, const Eigen::VectorXd& V,
                     double p, double r) {
  return k_norm(m, V, p, r, default_centers(m));
}

}  // namespace liyau
