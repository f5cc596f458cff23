#pragma once

#include <cmath>
#include <initializer_list>

#include "liyau/heat.hpp"
#include "liyau/manifold.hpp"

namespace liyau_test {

inline Eigen::VectorXd grid_times(std::initializer_list<double> ts) {
  Eigen::VectorXd t(static_cast<int>(ts.size()));
  int k = 0;
  for (double v : ts) t[k++] = v;
  return t;
}

/// Planar heat kernel (4 pi t)^{-1} e^{-d^2/4t} sampled at chart distance
/// from (cx, cy). Nodes with t = 0 receive a constant placeholder column so
/// the field stays positive; checks exclude t = 0.
inline liyau::ScalarTimeField planar_gaussian(const liyau::DiscreteManifold& m,
                                              double cx, double cy,
                                              const Eigen::VectorXd& times) {
  liyau::ScalarTimeField u;
  u.times = times;
  u.origin = "planar-gaussian";
  u.values.resize(m.num_vertices(), times.size());
  for (int k = 0; k < times.size(); ++k) {
    const double t = times[k];
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (t <= 0.0) {
        u.values(v, k) = 1.0;
        continue;
      }
      const double dx = m.coord_x[v] - cx, dy = m.coord_y[v] - cy;
      u.values(v, k) =
          std::exp(-(dx * dx + dy * dy) / (4.0 * t)) / (4.0 * M_PI * t);
    }
  }
  return u;
}

}  // namespace liyau_test
