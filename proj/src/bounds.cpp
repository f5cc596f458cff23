#include "liyau/bounds.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace liyau {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double one_minus_sq(double alpha) {
  const double u = 1.0 - alpha;
  return u * u;
}
}  // namespace

std::pair<double, double> li_yau_constants(double alpha, int n) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("li_yau_constants: requires 0 < alpha < 1");
  if (n < 2) throw std::invalid_argument("li_yau_constants: requires n >= 2");
  const double u2 = one_minus_sq(alpha);
  const double delta = 2.0 * u2 / (n + u2);
  const double a = 5.0 * (n + u2) / (2.0 * u2);
  return {delta, a};
}

double conddelta_residual(double alpha, int n) {
  auto [delta, a] = li_yau_constants(alpha, n);
  (void)a;
  return (2.0 - delta) * one_minus_sq(alpha) / n - delta;
}

LiYauParams LiYauParams::make(int n, double p, double alpha, double kappa,
                              double C, double r) {
  LiYauParams out;
  out.n = n;
  out.p = p;
  out.alpha = alpha;
  out.kappa = kappa;
  out.C = C;
  out.r = r;
  std::tie(out.delta, out.a) = li_yau_constants(alpha, n);
  out.validate();
  return out;
}

void LiYauParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("LiYauParams.alpha: requires 0 < alpha < 1");
  if (n < 2) throw std::invalid_argument("LiYauParams.n: requires n >= 2");
  if (!(p > 0.5 * n))
    throw std::invalid_argument("LiYauParams.p: requires p > n/2");
  if (kappa < 0.0) throw std::invalid_argument("LiYauParams.kappa: requires >= 0");
  if (!(C > 0.0)) throw std::invalid_argument("LiYauParams.C: requires > 0");
  if (!(r > 0.0)) throw std::invalid_argument("LiYauParams.r: requires > 0");
  if (!(a > 1.0)) throw std::invalid_argument("LiYauParams.a: derived a must be > 1");
}

double j_lower_bound(double t, const LiYauParams& params) {
  params.validate();
  if (t < 0.0) throw std::invalid_argument("j_lower_bound: requires t >= 0");
  const double lead = std::pow(2.0, -1.0 / (params.a - 1.0));
  if (params.kappa == 0.0) return lead;
  const double expo = params.n / (2.0 * params.p - params.n);
  const double inner = 2.0 * params.C * (params.a - 1.0) * params.kappa;
  const double rate = 2.0 * params.C * params.kappa / (params.r * params.r) *
                      (1.0 + std::pow(inner, expo));
  return lead * std::exp(-rate * t);
}

double gronwall_envelope(double t, double k_val, const LiYauParams& params) {
  params.validate();
  if (k_val < 0.0)
    throw std::invalid_argument("gronwall_envelope: requires k >= 0");
  if (t < 0.0) throw std::invalid_argument("gronwall_envelope: requires t >= 0");
  if (k_val == 0.0) return 2.0;
  const double expo = params.n / (2.0 * params.p - params.n);
  const double inner = 2.0 * params.C * (params.a - 1.0) * k_val;
  const double rate =
      inner / (params.r * params.r) * (1.0 + std::pow(inner, expo));
  return 2.0 * std::exp(rate * t);
}

namespace {
double rhs_impl(double t, const LiYauParams& params, bool remark_bracket) {
  params.validate();
  if (!(t > 0.0)) throw std::invalid_argument("li_yau_rhs: requires t > 0");
  const double jbar = j_lower_bound(t, params);
  const double A = params.alpha * (2.0 - params.delta) * jbar;
  const double slot =
      remark_bracket ? (1.0 - params.alpha * jbar) : (1.0 - params.alpha);
  if (!(A * slot > 0.0))
    throw std::invalid_argument("li_yau_rhs: degenerate denominator");
  return params.n / (A * t) + (params.C / A) * (1.0 / (A * slot) + 1.0);
}
}  // namespace

double li_yau_rhs(double t, const LiYauParams& params) {
  return rhs_impl(t, params, false);
}

double li_yau_rhs_remark(double t, const LiYauParams& params) {
  return rhs_impl(t, params, true);
}

// ---------------------------------------------------------------------------
// Q field
// ---------------------------------------------------------------------------

namespace {

QField compute_q_core(const DiscreteManifold& m, const ScalarTimeField& u,
                      double alpha, const Ball* region,
                      const std::function<double(int v, int k)>& j_at) {
  const int nv = m.num_vertices();
  if (u.values.rows() != nv)
    throw std::invalid_argument("compute_Q: field/manifold size mismatch");
  QField q;
  q.times = u.times;
  q.values.resize(nv, u.n_times());
  for (int k = 0; k < u.n_times(); ++k) {
    const Eigen::VectorXd uk = u.values.col(k);
    if (region) {
      for (int v : region->members)
        if (!(uk[v] > 0.0)) {
          std::ostringstream os;
          os << "compute_Q: u not positive at vertex " << v << ", t = "
             << u.times[k];
          throw std::invalid_argument(os.str());
        }
    }
    const Eigen::VectorXd grad2 = m.grad_norm_sq(uk);
    const Eigen::VectorXd lap = m.apply_laplacian(uk);
    for (int v = 0; v < nv; ++v) {
      if (uk[v] > 0.0)
        q.values(v, k) = alpha * j_at(v, k) * grad2[v] / (uk[v] * uk[v]) -
                         lap[v] / uk[v];
      else
        q.values(v, k) = kNaN;
    }
  }
  return q;
}

}  // namespace

QField compute_Q(const DiscreteManifold& m, const ScalarTimeField& u,
                 const ScalarTimeField& J, double alpha, const Ball* region) {
  if (J.values.rows() != u.values.rows() || J.n_times() != u.n_times())
    throw std::invalid_argument("compute_Q: J layout must match u");
  QField q = compute_q_core(m, u, alpha, region,
                            [&](int v, int k) { return J.values(v, k); });
  q.closed_form_J = false;
  return q;
}

QField compute_Q(const DiscreteManifold& m, const ScalarTimeField& u,
                 const Eigen::VectorXd& j_of_t, double alpha,
                 const Ball* region) {
  if (j_of_t.size() != u.n_times())
    throw std::invalid_argument("compute_Q: one J value per time node needed");
  QField q = compute_q_core(m, u, alpha, region,
                            [&](int, int k) { return j_of_t[k]; });
  q.closed_form_J = true;
  return q;
}

QField compute_Q(const DiscreteManifold& m, const ScalarTimeField& u,
                 double alpha, const Ball* region) {
  QField q =
      compute_q_core(m, u, alpha, region, [](int, int) { return 1.0; });
  q.closed_form_J = true;
  return q;
}

// ---------------------------------------------------------------------------
// Bound checks
// ---------------------------------------------------------------------------

namespace {

std::vector<int> window_indices(const Eigen::VectorXd& times, double t_min,
                                double t_max) {
  std::vector<int> idx;
  for (int k = 0; k < times.size(); ++k)
    if (times[k] >= t_min - 1e-12 && times[k] <= t_max + 1e-12)
      idx.push_back(k);
  if (idx.empty())
    throw std::invalid_argument("bound check: empty time window");
  return idx;
}

}  // namespace

BoundReport check_li_yau(const DiscreteManifold& m, const ScalarTimeField& u,
                         const LiYauParams& params, const Ball& region,
                         double t_min, double t_max, double k_p1,
                         double tol_rel, double tol_abs,
                         const ScalarTimeField* solved_J) {
  if (!(t_min > 0.0))
    throw std::invalid_argument("check_li_yau: requires t_min > 0");
  BoundReport rep;
  rep.check = "li_yau";
  rep.tolerance_rel = tol_rel;
  rep.tolerance_abs = tol_abs;
  rep.hypothesis_satisfied = k_p1 <= params.kappa + 1e-12;
  const auto idx = window_indices(u.times, t_min, t_max);
  Eigen::VectorXd jbar(u.n_times());
  for (int k = 0; k < u.n_times(); ++k)
    jbar[k] = j_lower_bound(std::max(u.times[k], 0.0), params);
  QField q = compute_Q(m, u, jbar, params.alpha, &region);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (int k : idx) {
    const double t = u.times[k];
    const double rhs = li_yau_rhs(t, params);
    const double tol = tol_rel * rhs + tol_abs;
    for (int v : region.members) {
      CheckPoint pt;
      pt.vertex = v;
      pt.t = t;
      pt.lhs = q.values(v, k);
      pt.rhs = rhs;
      pt.margin = rhs - pt.lhs;
      pt.violated = pt.margin < -tol;
      rep.worst_margin = std::min(rep.worst_margin, pt.margin);
      rep.violation_count += pt.violated ? 1 : 0;
      rep.points.push_back(pt);
    }
  }
  if (solved_J) {
    QField qs = compute_Q(m, u, *solved_J, params.alpha, &region);
    double worst = std::numeric_limits<double>::infinity();
    for (int k : idx) {
      const double rhs = li_yau_rhs(u.times[k], params);
      for (int v : region.members)
        worst = std::min(worst, rhs - qs.values(v, k));
    }
    rep.solved_variant_worst_margin = worst;
  }
  return rep;
}

BoundReport check_classical(const DiscreteManifold& m,
                            const ScalarTimeField& u, int n, double K,
                            double alpha, const Ball& region, double t_min,
                            double t_max, double tol_rel, double tol_abs) {
  if (!(t_min > 0.0))
    throw std::invalid_argument("check_classical: requires t_min > 0");
  if (K < 0.0)
    throw std::invalid_argument("check_classical: K must be >= 0 (Ric >= -K)");
  if (alpha < 1.0)
    throw std::invalid_argument("check_classical: requires alpha >= 1");
  if (alpha == 1.0 && K != 0.0)
    throw std::invalid_argument(
        "check_classical: alpha = 1 form needs nonnegative curvature (K = 0)");
  BoundReport rep;
  rep.check = alpha == 1.0 ? "classical_optimal" : "classical";
  rep.tolerance_rel = tol_rel;
  rep.tolerance_abs = tol_abs;
  const auto idx = window_indices(u.times, t_min, t_max);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (int k : idx) {
    const double t = u.times[k];
    const double rhs =
        alpha == 1.0
            ? 0.5 * n / t
            : 0.5 * n * alpha * alpha * (K / (alpha - 1.0) + 1.0 / t);
    const double tol = tol_rel * std::abs(rhs) + tol_abs;
    const Eigen::VectorXd uk = u.values.col(k);
    const Eigen::VectorXd grad2 = m.grad_norm_sq(uk);
    const Eigen::VectorXd lap = m.apply_laplacian(uk);
    for (int v : region.members) {
      if (!(uk[v] > 0.0)) {
        std::ostringstream os;
        os << "check_classical: u not positive at vertex " << v << ", t = "
           << t;
        throw std::invalid_argument(os.str());
      }
      CheckPoint pt;
      pt.vertex = v;
      pt.t = t;
      // classical normalisation: alpha multiplies the u_t term
      pt.lhs = grad2[v] / (uk[v] * uk[v]) - alpha * lap[v] / uk[v];
      pt.rhs = rhs;
      pt.margin = rhs - pt.lhs;
      pt.violated = pt.margin < -tol;
      rep.worst_margin = std::min(rep.worst_margin, pt.margin);
      rep.violation_count += pt.violated ? 1 : 0;
      rep.points.push_back(pt);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Parabolic rescaling
// ---------------------------------------------------------------------------

RescaledData parabolic_rescale(const DiscreteManifold& m,
                               const ScalarTimeField& u, double s) {
  if (!(s > 0.0))
    throw std::invalid_argument("parabolic_rescale: factor must be > 0");
  RescaledData out{m.rescaled(s), u, s};
  out.field.times = (s * s) * u.times;
  return out;
}

RescaleInvariance verify_rescale_invariance(const DiscreteManifold& m,
                                            const ScalarTimeField& u,
                                            const Eigen::VectorXd& V,
                                            const LiYauParams& params,
                                            double s,
                                            const std::vector<int>& centers) {
  RescaleInvariance out;
  RescaledData rs = parabolic_rescale(m, u, s);

  if (V.size() == m.num_vertices() && !centers.empty()) {
    auto base = k_norm(m, V, params.p, params.r, centers);
    Eigen::VectorXd vs = V / (s * s);
    auto scaled = k_norm(rs.manifold, vs, params.p, s * params.r, centers);
    for (size_t c = 0; c < centers.size(); ++c)
      out.k_residual = std::max(
          out.k_residual, std::abs(scaled.k_local[c] - base.k_local[c]));
  }

  LiYauParams ps = params;
  ps.r = s * params.r;
  Eigen::VectorXd jb(u.n_times()), jbs(u.n_times());
  for (int k = 0; k < u.n_times(); ++k) {
    jb[k] = j_lower_bound(std::max(u.times[k], 0.0), params);
    jbs[k] = j_lower_bound(std::max(rs.field.times[k], 0.0), ps);
  }
  QField q = compute_Q(m, u, jb, params.alpha);
  QField qs = compute_Q(rs.manifold, rs.field, jbs, params.alpha);
  for (int k = 0; k < u.n_times(); ++k)
    for (int v = 0; v < m.num_vertices(); ++v) {
      const double a = q.values(v, k), b = qs.values(v, k) * (s * s);
      if (std::isfinite(a) && std::isfinite(b))
        out.q_residual = std::max(out.q_residual, std::abs(a - b));
    }
  return out;
}

}  // namespace liyau
