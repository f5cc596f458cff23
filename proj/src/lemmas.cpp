#include "liyau/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace liyau {

namespace {

double smoothstep(int degree, double x) {
  x = std::clamp(x, 0.0, 1.0);
  switch (degree) {
    case 3:
      return x * x * (3.0 - 2.0 * x);
    case 5:
      return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    case 7:
      return x * x * x * x * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
    default:
      throw std::invalid_argument("smoothstep degree must be 3, 5 or 7");
  }
}

/// Plateau profile: 1 on [0, 1/2], smoothstep down to 0 at 1.
double plateau(int degree, double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  return 1.0 - smoothstep(degree, 2.0 * s - 1.0);
}

/// Ball members whose stencil reaches outside the ball.
std::vector<char> boundary_layer(const DiscreteManifold& m, const Ball& b) {
  std::vector<char> on_boundary(m.num_vertices(), 0);
  for (int c = 0; c < m.laplacian.outerSize(); ++c) {
    if (!b.contains[c]) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(m.laplacian, c); it;
         ++it)
      if (it.row() != c && !b.contains[it.row()]) on_boundary[c] = 1;
  }
  return on_boundary;
}

}  // namespace

DoublingReport check_volume_doubling(
    const DiscreteManifold& m, const std::vector<int>& centers,
    const std::vector<std::pair<double, double>>& radius_pairs) {
  const int n = m.spec.dimension;
  DoublingReport rep;
  for (auto [r1, r2] : radius_pairs)
    if (!(r1 > 0.0 && r1 <= r2 && r2 <= 1.0))
      throw std::invalid_argument(
          "check_volume_doubling: radius pairs must satisfy 0 < r1 <= r2 <= "
          "1");
  for (int c : centers) {
    if (c < 0 || c >= m.num_vertices())
      throw std::invalid_argument("check_volume_doubling: bad center index");
    for (auto [r1, r2] : radius_pairs) {
      DoublingEntry e;
      e.center = c;
      e.r1 = r1;
      e.r2 = r2;
      e.vol1 = m.ball(c, r1).volume;
      e.vol2 = m.ball(c, r2).volume;
      if (e.vol1 <= 0.0)
        throw std::runtime_error("check_volume_doubling: empty inner ball");
      e.ratio = (e.vol2 / std::pow(r2, n)) / (e.vol1 / std::pow(r1, n));
      e.within_factor_two = e.ratio <= 2.0;
      rep.worst_ratio = std::max(rep.worst_ratio, e.ratio);
      rep.all_within = rep.all_within && e.within_factor_two;
      rep.entries.push_back(e);
    }
  }
  return rep;
}

SobolevReport check_sobolev(
    const DiscreteManifold& m, int center, double r,
    const std::vector<Eigen::VectorXd>& test_functions) {
  if (!(r > 0.0))
    throw std::invalid_argument("check_sobolev: radius must be > 0");
  const Ball b = m.ball(center, r);
  const auto on_boundary = boundary_layer(m, b);
  const int n = m.spec.dimension;
  const double ex = double(n) / (n - 1);
  SobolevReport rep;
  rep.center = center;
  rep.r = r;
  for (std::size_t j = 0; j < test_functions.size(); ++j) {
    const Eigen::VectorXd& f = test_functions[j];
    if (f.size() != m.num_vertices())
      throw std::invalid_argument("check_sobolev: field size mismatch");
    const double scale = f.cwiseAbs().maxCoeff();
    if (scale == 0.0)
      throw std::invalid_argument("check_sobolev: zero test function");
    for (int v = 0; v < m.num_vertices(); ++v)
      if (std::abs(f[v]) > 1e-14 * scale && (!b.contains[v] || on_boundary[v])) {
        std::ostringstream os;
        os << "check_sobolev: test function " << j
           << " is not supported strictly inside the ball (vertex " << v
           << ")";
        throw std::invalid_argument(os.str());
      }
    const Eigen::VectorXd grad = m.grad_norm_sq(f).cwiseSqrt();
    double vol = 0.0, lhs_int = 0.0, rhs_int = 0.0;
    for (int v : b.members) {
      vol += m.weight[v];
      lhs_int += m.weight[v] * std::pow(std::abs(f[v]), ex);
      rhs_int += m.weight[v] * grad[v];
    }
    const double lhs = std::pow(lhs_int / vol, 1.0 / ex);
    const double rhs = r * rhs_int / vol;
    rep.ratios.push_back(lhs / rhs);
    rep.best_constant = std::max(rep.best_constant, lhs / rhs);
  }
  return rep;
}

std::vector<Eigen::VectorXd> sobolev_test_suite(const DiscreteManifold& m,
                                                int center, double r,
                                                std::uint64_t seed,
                                                int n_random) {
  const int nv = m.num_vertices();
  const Eigen::VectorXd d = m.distance_field(center);  // copy out of cache
  const double rho = 0.85 * r;
  std::vector<Eigen::VectorXd> suite;

  for (double q : {2.0, 3.0, 4.0, 6.0}) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(nv);
    for (int v = 0; v < nv; ++v) {
      const double s = d[v] / rho;
      if (s < 1.0) f[v] = std::pow(1.0 - s * s, q);
    }
    suite.push_back(std::move(f));
  }

  // plateau profiles steepening toward the indicator of the ball
  for (double eps : {0.8, 0.5, 0.3}) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(nv);
    for (int v = 0; v < nv; ++v) {
      const double s = d[v] / rho;
      if (s <= 1.0 - eps)
        f[v] = 1.0;
      else if (s < 1.0)
        f[v] = smoothstep(5, (1.0 - s) / eps);
    }
    suite.push_back(std::move(f));
  }

  // seeded smooth modulations of a fixed plateau envelope
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.4, 0.4);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_int_distribution<int> mode(-4, 4);
  const double xc = m.coord_x[center], yc = m.coord_y[center];
  const double lx = m.spec.length_x, ly = m.spec.length_y;
  for (int j = 0; j < n_random; ++j) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(nv);
    double a[4], px[4], py[4];
    int kx[4], ky[4];
    for (int i = 0; i < 4; ++i) {
      a[i] = amp(rng);
      kx[i] = mode(rng);
      ky[i] = mode(rng);
      px[i] = phase(rng);
      py[i] = phase(rng);
    }
    for (int v = 0; v < nv; ++v) {
      const double s = d[v] / rho;
      if (s >= 1.0) continue;
      double dx = m.coord_x[v] - xc, dy = m.coord_y[v] - yc;
      if (m.periodic_x) dx -= lx * std::round(dx / lx);
      if (m.periodic_y) dy -= ly * std::round(dy / ly);
      double g = 1.0;
      for (int i = 0; i < 4; ++i)
        g += a[i] * std::sin(kx[i] * dx / r + px[i]) *
             std::cos(ky[i] * dy / r + py[i]);
      f[v] = plateau(5, s) * g;
    }
    suite.push_back(std::move(f));
  }
  return suite;
}

GaussianFit fit_gaussian_bound(const DiscreteManifold& m,
                               const std::vector<HeatKernel>& kernels,
                               double q_max, int max_centers) {
  std::vector<double> qs, zs;
  GaussianFit fit;
  fit.t_min = std::numeric_limits<double>::infinity();
  for (const HeatKernel& ker : kernels) {
    if (ker.values.rows() != m.num_vertices())
      throw std::invalid_argument("fit_gaussian_bound: kernel size mismatch");
    const Eigen::VectorXd dsrc = m.distance_field(ker.source);  // copy
    std::vector<int> time_cols;
    for (int k = 0; k < ker.times.size(); ++k)
      if (ker.times[k] > 0.0 && ker.times[k] <= 1.0 + 1e-12)
        time_cols.push_back(k);
    const int stride =
        std::max<int>(1, static_cast<int>(ker.domain.members.size()) /
                             std::max(1, max_centers));
    // source-side ball volumes, one per retained time
    std::vector<double> vol_src;
    for (int k : time_cols)
      vol_src.push_back(m.ball(ker.source, std::sqrt(ker.times[k])).volume);
    for (std::size_t iy = 0; iy < ker.domain.members.size(); iy += stride) {
      const int y = ker.domain.members[iy];
      bool need_y = false;
      for (std::size_t c = 0; c < time_cols.size(); ++c) {
        const double t = ker.times[time_cols[c]];
        if (dsrc[y] * dsrc[y] / t <= q_max &&
            ker.values(y, time_cols[c]) > 0.0)
          need_y = true;
      }
      if (!need_y) continue;
      for (std::size_t c = 0; c < time_cols.size(); ++c) {
        const int k = time_cols[c];
        const double t = ker.times[k];
        const double q = dsrc[y] * dsrc[y] / t;
        const double g = ker.values(y, k);
        if (q > q_max || !(g > 0.0)) continue;
        const double vol_y = m.ball(y, std::sqrt(t)).volume;
        qs.push_back(q);
        zs.push_back(std::log(g) + 0.5 * std::log(vol_src[c]) +
                     0.5 * std::log(vol_y));
        fit.t_min = std::min(fit.t_min, t);
        fit.t_max = std::max(fit.t_max, t);
        fit.q_max = std::max(fit.q_max, q);
      }
    }
  }
  fit.n_samples = static_cast<int>(qs.size());
  if (fit.n_samples < 10)
    throw std::invalid_argument(
        "fit_gaussian_bound: needs at least 10 usable samples");
  double sq = 0.0, sz = 0.0, sqq = 0.0, sqz = 0.0;
  for (int i = 0; i < fit.n_samples; ++i) {
    sq += qs[i];
    sz += zs[i];
    sqq += qs[i] * qs[i];
    sqz += qs[i] * zs[i];
  }
  const double nn = fit.n_samples;
  const double slope = (nn * sqz - sq * sz) / (nn * sqq - sq * sq);
  const double intercept = (sz - slope * sq) / nn;
  if (!(slope < 0.0))
    throw std::runtime_error(
        "fit_gaussian_bound: fit slope is not negative; samples do not decay "
        "in d^2/t");
  fit.C2 = -1.0 / slope;
  double ss = 0.0, lift = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < fit.n_samples; ++i) {
    const double res = zs[i] - (intercept + slope * qs[i]);
    ss += res * res;
    lift = std::max(lift, res);
  }
  fit.rms_residual = std::sqrt(ss / nn);
  fit.c1_inflation = lift;
  fit.C1 = std::exp(intercept + lift);
  return fit;
}

CutoffField build_cutoff(const DiscreteManifold& m, int center, double r,
                         int degree) {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("build_cutoff: requires 0 < r <= 1");
  if (degree != 3 && degree != 5 && degree != 7)
    throw std::invalid_argument("build_cutoff: degree must be 3, 5 or 7");
  if (center < 0 || center >= m.num_vertices())
    throw std::invalid_argument("build_cutoff: bad center index");
  if (m.periodic_x && m.periodic_y) {
    if (r > 0.5 * std::min(m.spec.length_x, m.spec.length_y) + 1e-12)
      throw std::invalid_argument(
          "build_cutoff: ball exceeds half the torus period");
  } else {
    // warped chart: radial coordinate must keep B(center, r) off the rim
    const double rc = m.coord_x[center];
    const double margin = 0.5 * m.step_x;
    if (rc + r > m.spec.r_max - margin ||
        (!m.spec.disk_cap && rc - r < m.spec.r_min + margin))
      throw std::invalid_argument(
          "build_cutoff: ball clipped by the chart boundary");
  }
  CutoffField out;
  out.center = center;
  out.r = r;
  out.degree = degree;
  const Eigen::VectorXd d = m.distance_field(center);
  out.phi.resize(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v)
    out.phi[v] = plateau(degree, d[v] / r);
  const Eigen::VectorXd grad2 = m.grad_norm_sq(out.phi);
  const Eigen::VectorXd lap = m.apply_laplacian(out.phi);
  double worst = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v)
    worst = std::max(worst, grad2[v] + std::abs(lap[v]));
  out.c_star = worst * r * r;
  return out;
}

}  // namespace liyau
