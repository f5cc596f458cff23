#include "liyau/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace liyau {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

// ---------------------------------------------------------------------------
// WarpProfile
// ---------------------------------------------------------------------------

double WarpProfile::value(double r) const {
  switch (form) {
    case WarpForm::Linear: return r;
    case WarpForm::Sinh: return std::sinh(rate * r) / rate;
    case WarpForm::Sin: return std::sin(rate * r) / rate;
    case WarpForm::Bump: {
      const double e = std::exp(-(r - center) * (r - center) / (width * width));
      return r * (1.0 + amplitude * e);
    }
  }
  return r;
}

double WarpProfile::deriv(double r) const {
  switch (form) {
    case WarpForm::Linear: return 1.0;
    case WarpForm::Sinh: return std::cosh(rate * r);
    case WarpForm::Sin: return std::cos(rate * r);
    case WarpForm::Bump: {
      const double s2 = width * width;
      const double e = std::exp(-(r - center) * (r - center) / s2);
      const double g = 1.0 + amplitude * e;
      const double gp = amplitude * e * (-2.0 * (r - center) / s2);
      return g + r * gp;
    }
  }
  return 1.0;
}

double WarpProfile::second_deriv(double r) const {
  switch (form) {
    case WarpForm::Linear: return 0.0;
    case WarpForm::Sinh: return rate * std::sinh(rate * r);
    case WarpForm::Sin: return -rate * std::sin(rate * r);
    case WarpForm::Bump: {
      const double s2 = width * width;
      const double d = r - center;
      const double e = std::exp(-d * d / s2);
      const double gp = amplitude * e * (-2.0 * d / s2);
      const double gpp = amplitude * e * (4.0 * d * d / (s2 * s2) - 2.0 / s2);
      return 2.0 * gp + r * gpp;
    }
  }
  return 0.0;
}

double WarpProfile::gauss_curvature(double r) const {
  return -second_deriv(r) / value(r);
}

std::string WarpProfile::describe() const {
  std::ostringstream os;
  switch (form) {
    case WarpForm::Linear: os << "f(r)=r"; break;
    case WarpForm::Sinh: os << "f(r)=sinh(" << rate << " r)/" << rate; break;
    case WarpForm::Sin: os << "f(r)=sin(" << rate << " r)/" << rate; break;
    case WarpForm::Bump:
      os << "f(r)=r(1+" << amplitude << " exp(-(r-" << center << ")^2/"
         << width * width << "))";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// ManifoldSpec
// ---------------------------------------------------------------------------

void ManifoldSpec::validate() const {
  if (grid_x < 8 || grid_y < 8)
    throw std::invalid_argument("ManifoldSpec.grid: counts must be >= 8 per axis");
  if (dimension < 2)
    throw std::invalid_argument("ManifoldSpec.dimension: must be >= 2");
  if (kind == ModelKind::FlatTorus) {
    if (length_x <= 0.0 || length_y <= 0.0)
      throw std::invalid_argument("ManifoldSpec.lengths: side lengths must be > 0");
  } else {
    const double lo = disk_cap ? 0.0 : r_min;
    if (!disk_cap && r_min <= 0.0)
      throw std::invalid_argument(
          "ManifoldSpec.r_min: must be > 0 unless disk_cap closes the pole");
    if (r_max <= lo)
      throw std::invalid_argument("ManifoldSpec.r_max: must exceed r_min");
  }
}

std::optional<double> ManifoldSpec::analytic_volume() const {
  if (kind == ModelKind::FlatTorus) return length_x * length_y;
  const double lo = disk_cap ? 0.0 : r_min;
  const double c = warp.rate;
  switch (warp.form) {
    case WarpForm::Linear:
      return kTwoPi * 0.5 * (r_max * r_max - lo * lo);
    case WarpForm::Sinh:
      return kTwoPi * (std::cosh(c * r_max) - std::cosh(c * lo)) / (c * c);
    case WarpForm::Sin:
      return kTwoPi * (std::cos(c * lo) - std::cos(c * r_max)) / (c * c);
    case WarpForm::Bump:
      return std::nullopt;
  }
  return std::nullopt;
}

ManifoldSpec flat_torus_spec(double lx, double ly, int n_x, int n_y) {
  ManifoldSpec s;
  s.kind = ModelKind::FlatTorus;
  s.length_x = lx;
  s.length_y = ly;
  s.grid_x = n_x;
  s.grid_y = n_y;
  return s;
}

ManifoldSpec warped_spec(WarpProfile warp, double r_min, double r_max,
                         int n_r, int n_theta, bool disk_cap) {
  ManifoldSpec s;
  s.kind = ModelKind::WarpedProduct;
  s.warp = warp;
  s.r_min = r_min;
  s.r_max = r_max;
  s.grid_x = n_r;
  s.grid_y = n_theta;
  s.disk_cap = disk_cap;
  return s;
}

// ---------------------------------------------------------------------------
// build_manifold
// ---------------------------------------------------------------------------

DiscreteManifold build_manifold(const ManifoldSpec& spec) {
  spec.validate();
  DiscreteManifold m;
  m.spec = spec;
  m.nx = spec.grid_x;
  m.ny = spec.grid_y;
  const int n = m.nx * m.ny;
  m.coord_x.resize(n);
  m.coord_y.resize(n);
  m.weight.resize(n);
  m.step_y.resize(m.nx);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * static_cast<size_t>(n));

  if (spec.kind == ModelKind::FlatTorus) {
    m.periodic_x = m.periodic_y = true;
    const double hx = spec.length_x / m.nx;
    const double hy = spec.length_y / m.ny;
    m.step_x = hx;
    m.step_y.setConstant(hy);
    const double cx = 1.0 / (hx * hx), cy = 1.0 / (hy * hy);
    for (int i = 0; i < m.nx; ++i) {
      for (int j = 0; j < m.ny; ++j) {
        const int v = m.index(i, j);
        m.coord_x[v] = i * hx;
        m.coord_y[v] = j * hy;
        m.weight[v] = hx * hy;
        trip.emplace_back(v, m.index((i + 1) % m.nx, j), cx);
        trip.emplace_back(v, m.index((i + m.nx - 1) % m.nx, j), cx);
        trip.emplace_back(v, m.index(i, (j + 1) % m.ny), cy);
        trip.emplace_back(v, m.index(i, (j + m.ny - 1) % m.ny), cy);
        trip.emplace_back(v, v, -2.0 * cx - 2.0 * cy);
      }
    }
  } else {
    m.periodic_x = false;
    m.periodic_y = true;
    const double lo = spec.disk_cap ? 0.0 : spec.r_min;
    const double hr = (spec.r_max - lo) / m.nx;
    const double ht = kTwoPi / m.ny;
    m.step_x = hr;
    for (int i = 0; i < m.nx; ++i) {
      const double r = lo + (i + 0.5) * hr;  // cell-centered radial grid
      const double f = spec.warp.value(r);
      if (!(f > 0.0)) {
        std::ostringstream os;
        os << "warping function non-positive on grid: f(" << r << ") = " << f
           << " for " << spec.warp.describe();
        throw std::invalid_argument(os.str());
      }
      m.step_y[i] = f * ht;
      const double w = f * hr * ht;
      // radial faces, dropped at the chart boundary (f(0)=0 closes the pole)
      const double f_up = (i + 1 < m.nx) ? spec.warp.value(r + 0.5 * hr) : 0.0;
      const double f_dn = (i > 0) ? spec.warp.value(r - 0.5 * hr) : 0.0;
      const double a_up = f_up / (f * hr * hr);
      const double a_dn = f_dn / (f * hr * hr);
      const double ct = 1.0 / (f * ht * f * ht);
      for (int j = 0; j < m.ny; ++j) {
        const int v = m.index(i, j);
        m.coord_x[v] = r;
        m.coord_y[v] = j * ht;
        m.weight[v] = w;
        if (i + 1 < m.nx) trip.emplace_back(v, m.index(i + 1, j), a_up);
        if (i > 0) trip.emplace_back(v, m.index(i - 1, j), a_dn);
        trip.emplace_back(v, m.index(i, (j + 1) % m.ny), ct);
        trip.emplace_back(v, m.index(i, (j + m.ny - 1) % m.ny), ct);
        trip.emplace_back(v, v, -a_up - a_dn - 2.0 * ct);
      }
    }
  }

  m.laplacian.resize(n, n);
  m.laplacian.setFromTriplets(trip.begin(), trip.end());
  m.laplacian.makeCompressed();
  return m;
}

// ---------------------------------------------------------------------------
// Geodesic distances: second-order fast marching for the eikonal equation
// |grad d|_g = 1 with diagonal chart metric (axis spacings step_x, step_y[i]).
// ---------------------------------------------------------------------------

namespace {

struct FmmWorkspace {
  const DiscreteManifold& m;
  Eigen::VectorXd d;
  std::vector<uint8_t> state;  // 0 far, 1 trial, 2 accepted
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;

  explicit FmmWorkspace(const DiscreteManifold& man)
      : m(man),
        d(Eigen::VectorXd::Constant(man.num_vertices(),
                                    std::numeric_limits<double>::infinity())),
        state(man.num_vertices(), 0) {}

  int shift(int v, int di, int dj) const {
    int i = m.row_of(v) + di, j = m.col_of(v) + dj;
    if (m.periodic_x) i = (i % m.nx + m.nx) % m.nx;
    else if (i < 0 || i >= m.nx) return -1;
    if (m.periodic_y) j = (j % m.ny + m.ny) % m.ny;
    else if (j < 0 || j >= m.ny) return -1;
    return m.index(i, j);
  }

  // Upwind data along one axis: first- or second-order one-sided difference.
  // Returns {alpha, k} encoding alpha*(d - k) as the difference, or alpha<0.
  std::pair<double, double> upwind(int v, int axis, double h) const {
    double best = std::numeric_limits<double>::infinity();
    double best2 = std::numeric_limits<double>::quiet_NaN();
    for (int s : {1, -1}) {
      const int di = axis == 0 ? s : 0, dj = axis == 0 ? 0 : s;
      const int n1 = shift(v, di, dj);
      if (n1 < 0 || state[n1] != 2 || d[n1] >= best) continue;
      best = d[n1];
      best2 = std::numeric_limits<double>::quiet_NaN();
      const int n2 = shift(v, 2 * di, 2 * dj);
      if (n2 >= 0 && state[n2] == 2 && d[n2] <= d[n1]) best2 = d[n2];
    }
    if (!std::isfinite(best)) return {-1.0, 0.0};
    if (std::isfinite(best2))
      return {1.5 / h, (4.0 * best - best2) / 3.0};
    return {1.0 / h, best};
  }

  double update_value(int v) {
    const double hx = m.step_x;
    const double hy = m.step_y[m.row_of(v)];
    std::pair<double, double> terms[2] = {upwind(v, 0, hx), upwind(v, 1, hy)};
    // sort usable terms by k ascending
    std::vector<std::pair<double, double>> use;
    for (auto& t : terms)
      if (t.first > 0.0) use.push_back(t);
    if (use.empty()) return std::numeric_limits<double>::infinity();
    std::sort(use.begin(), use.end(),
              [](auto& a, auto& b) { return a.second < b.second; });
    for (size_t cnt = use.size(); cnt >= 1; --cnt) {
      double A = 0.0, B = 0.0, C = -1.0;
      for (size_t q = 0; q < cnt; ++q) {
        const double al = use[q].first, k = use[q].second;
        A += al * al;
        B += -2.0 * al * al * k;
        C += al * al * k * k;
      }
      const double disc = B * B - 4.0 * A * C;
      if (disc < 0.0) continue;
      const double val = (-B + std::sqrt(disc)) / (2.0 * A);
      bool causal = true;
      for (size_t q = 0; q < cnt; ++q)
        if (val < use[q].second) causal = false;
      if (causal) return val;
    }
    return use[0].second + 1.0 / use[0].first;
  }

  void push(int v) {
    const double nd = update_value(v);
    if (nd < d[v]) {
      d[v] = nd;
      state[v] = 1;
      heap.emplace(nd, v);
    }
  }

  void run() {
    while (!heap.empty()) {
      auto [dv, v] = heap.top();
      heap.pop();
      if (state[v] == 2 || dv > d[v]) continue;
      state[v] = 2;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int nb = shift(v, di, dj);
        if (nb >= 0 && state[nb] != 2) push(nb);
      }
    }
  }
};

}  // namespace

Eigen::VectorXd DiscreteManifold::compute_distance(int center) const {
  FmmWorkspace fm(*this);
  // Seed a small neighborhood with local-metric exact distances; this removes
  // the source-singularity error of first-arrival updates.
  const double hy_c = step_y[row_of(center)];
  const double r_init = 1.5 * std::max(step_x, hy_c);
  const int span_i = static_cast<int>(r_init / step_x) + 1;
  const int span_j = static_cast<int>(r_init / step_y.minCoeff()) + 1;
  for (int di = -span_i; di <= span_i; ++di) {
    for (int dj = -span_j; dj <= span_j; ++dj) {
      const int v = fm.shift(center, di, dj);
      if (v < 0) continue;
      const double hy_mid = 0.5 * (hy_c + step_y[row_of(v)]);
      const double dist = std::hypot(di * step_x, dj * hy_mid);
      if (dist <= r_init && dist < fm.d[v]) {
        fm.d[v] = dist;
        fm.state[v] = 2;
      }
    }
  }
  for (int v = 0; v < num_vertices(); ++v) {
    if (fm.state[v] != 2) continue;
    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const int nb = fm.shift(v, di, dj);
      if (nb >= 0 && fm.state[nb] != 2) fm.push(nb);
    }
  }
  fm.run();
  return std::move(fm.d);
}

const Eigen::VectorXd& DiscreteManifold::distance_field(int center) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = dist_cache_.find(center);
  if (it != dist_cache_.end()) return it->second;
  if (cache_order_.size() >= 128) {
    dist_cache_.erase(cache_order_.front());
    cache_order_.pop_front();
  }
  cache_order_.push_back(center);
  return dist_cache_.emplace(center, compute_distance(center)).first->second;
}

double DiscreteManifold::geodesic_distance(int a, int b) const {
  return distance_field(a)[b];
}

Ball DiscreteManifold::ball(int center, double radius) const {
  if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be > 0");
  const Eigen::VectorXd& d = distance_field(center);
  Ball b;
  b.center = center;
  b.radius = radius;
  b.contains.assign(num_vertices(), 0);
  for (int v = 0; v < num_vertices(); ++v) {
    if (d[v] <= radius) {
      b.members.push_back(v);
      b.contains[v] = 1;
      b.volume += weight[v];
    }
  }
  return b;
}

Eigen::VectorXd DiscreteManifold::apply_laplacian(const Eigen::VectorXd& field) const {
  return laplacian * field;
}

double DiscreteManifold::p_mean(const Ball& b, const Eigen::VectorXd& field,
                                double p) const {
  if (b.members.empty()) throw std::invalid_argument("p_mean: empty ball");
  if (p < 1.0) throw std::invalid_argument("p_mean: requires p >= 1");
  double num = 0.0;
  for (int v : b.members) {
    const double x = field[v];
    if (x < -1e-9)
      throw std::invalid_argument("p_mean: field must be nonnegative");
    num += weight[v] * std::pow(std::max(x, 0.0), p);
  }
  return std::pow(num / b.volume, 1.0 / p);
}

Eigen::VectorXd DiscreteManifold::grad_norm_sq(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g(num_vertices());
  for (int i = 0; i < nx; ++i) {
    const double hy = step_y[i];
    for (int j = 0; j < ny; ++j) {
      const int v = index(i, j);
      double gx;
      if (periodic_x) {
        gx = (u[index((i + 1) % nx, j)] - u[index((i + nx - 1) % nx, j)]) /
             (2.0 * step_x);
      } else if (i == 0) {
        gx = (u[index(1, j)] - u[v]) / step_x;
      } else if (i == nx - 1) {
        gx = (u[v] - u[index(nx - 2, j)]) / step_x;
      } else {
        gx = (u[index(i + 1, j)] - u[index(i - 1, j)]) / (2.0 * step_x);
      }
      const double gy =
          (u[index(i, (j + 1) % ny)] - u[index(i, (j + ny - 1) % ny)]) /
          (2.0 * hy);
      g[v] = gx * gx + gy * gy;
    }
  }
  return g;
}

DiscreteManifold DiscreteManifold::rescaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("rescaled: factor must be > 0");
  DiscreteManifold r(*this);
  r.metric_scale *= s;
  r.step_x *= s;
  r.step_y *= s;
  r.weight *= s * s;
  r.laplacian = laplacian * (1.0 / (s * s));
  r.coord_x *= s;
  if (spec.kind == ModelKind::FlatTorus) {
    r.coord_y *= s;
    r.spec.length_x *= s;
    r.spec.length_y *= s;
  } else {
    r.spec.r_min *= s;
    r.spec.r_max *= s;
  }
  return r;
}

int DiscreteManifold::nearest_vertex(double x, double y) const {
  int bi, bj;
  if (spec.kind == ModelKind::FlatTorus) {
    const double hx = spec.length_x / nx, hy = spec.length_y / ny;
    bi = static_cast<int>(std::lround(x / hx)) % nx;
    bj = static_cast<int>(std::lround(y / hy)) % ny;
    if (bi < 0) bi += nx;
    if (bj < 0) bj += ny;
  } else {
    const double lo = spec.disk_cap ? 0.0 : spec.r_min;
    const double hr = (spec.r_max - lo) / nx;
    const double ht = kTwoPi / ny;
    bi = std::clamp(static_cast<int>(std::lround((x - lo) / hr - 0.5)), 0, nx - 1);
    bj = static_cast<int>(std::lround(y / ht)) % ny;
    if (bj < 0) bj += ny;
  }
  return index(bi, bj);
}

}  // namespace liyau
