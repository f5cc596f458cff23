#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liyau/curvature.hpp"
#include "liyau/heat.hpp"
#include "liyau/manifold.hpp"

namespace liyau {

/// Parameter block for the gradient bound. delta and a are derived from
/// (alpha, n); kappa and C are the calibrated structural constants; r is the
/// hypothesis ball scale (1 after normalization).
struct LiYauParams {
  int n = 2;
  double p = 2.0;
  double alpha = 0.5;
  double delta = 0.0;
  double a = 0.0;
  double kappa = 0.0;
  double C = 1.0;
  double r = 1.0;

  static LiYauParams make(int n, double p, double alpha, double kappa,
                          double C, double r = 1.0);
  void validate() const;
};

/// delta = 2(1-alpha)^2 / (n + (1-alpha)^2) and a = 5/delta, returned as the
/// pair (delta, a). The defining identity (2-delta)(1-alpha)^2/n - delta = 0
/// holds to machine precision.
std::pair<double, double> li_yau_constants(double alpha, int n);

/// Residual of the defining identity; used by the calibration self-checks.
double conddelta_residual(double alpha, int n);

/// Closed-form lower bound for J:
///   2^{-1/(a-1)} exp{-2 C kappa r^{-2} (1 + [2C(a-1)kappa]^{n/(2p-n)}) t}.
double j_lower_bound(double t, const LiYauParams& params);

/// Gronwall envelope for h(t) = sup w:
///   2 exp{2 C (a-1) k r^{-2} (1 + [2C(a-1)k]^{n/(2p-n)}) t}.
double gronwall_envelope(double t, double k_val, const LiYauParams& params);

/// Right-hand side of the main bound,
///   n/(A t) + (C/A) [1/(A(1-alpha)) + 1]  with  A = alpha (2-delta) Jbar(t).
double li_yau_rhs(double t, const LiYauParams& params);

/// Alternate right-hand side with (1 - alpha Jbar) in the bracket slot, kept
/// as a recorded variant alongside the primary form.
double li_yau_rhs_remark(double t, const LiYauParams& params);

/// Q = alpha J |grad u|^2 / u^2 - u_t / u with u_t evaluated through the
/// discrete Laplacian. Entries where u is not strictly positive are NaN.
struct QField {
  Eigen::VectorXd times;
  Eigen::MatrixXd values;
  bool closed_form_J = false;
};

/// J supplied as a solved space-time field.
QField compute_Q(const DiscreteManifold& m, const ScalarTimeField& u,
                 const ScalarTimeField& J, double alpha,
                 const Ball* region = nullptr);
/// J supplied as one scalar per time node (e.g. the closed-form lower bound).
QField compute_Q(const DiscreteManifold& m, const ScalarTimeField& u,
                 const Eigen::VectorXd& j_of_t, double alpha,
                 const Ball* region = nullptr);
/// J == 1 (classical quotient).
QField compute_Q(const DiscreteManifold& m, const ScalarTimeField& u,
                 double alpha, const Ball* region = nullptr);

struct CheckPoint {
  int vertex = -1;
  double t = 0.0;
  double lhs = 0.0, rhs = 0.0, margin = 0.0;
  bool violated = false;
};

struct BoundReport {
  std::string check;
  std::vector<CheckPoint> points;
  double worst_margin = 0.0;
  int violation_count = 0;
  bool hypothesis_satisfied = true;
  double tolerance_rel = 0.0, tolerance_abs = 0.0;
  /// worst margin of the solved-J diagnostic variant, when available
  std::optional<double> solved_variant_worst_margin;
  /// running-sup envelope h(t), populated by the Gronwall check
  std::vector<double> envelope_times, envelope_values;
};

/// Main bound with the closed-form Jbar on the left-hand side, checked on
/// region x [t_min, t_max]. k_p1 = k(p,1) decides hypothesis_satisfied
/// (checks still run when it fails). A point is violated when
/// margin < -(tol_rel * rhs + tol_abs). solved_J, when given, adds the
/// diagnostic variant's worst margin.
BoundReport check_li_yau(const DiscreteManifold& m, const ScalarTimeField& u,
                         const LiYauParams& params, const Ball& region,
                         double t_min, double t_max, double k_p1,
                         double tol_rel = 1e-3, double tol_abs = 0.0,
                         const ScalarTimeField* solved_J = nullptr);

/// Classical bounds: alpha > 1 against n alpha^2 K / (2(alpha-1)) +
/// n alpha^2 / (2t) under Ric >= -K, or alpha = 1, K = 0 against n/(2t).
BoundReport check_classical(const DiscreteManifold& m,
                            const ScalarTimeField& u, int n, double K,
                            double alpha, const Ball& region, double t_min,
                            double t_max, double tol_rel = 1e-3,
                            double tol_abs = 0.0);

/// Parabolic rescaling g -> s^2 g, t -> s^2 t applied to stored data.
struct RescaledData {
  DiscreteManifold manifold;
  ScalarTimeField field;
  double factor = 1.0;
};
RescaledData parabolic_rescale(const DiscreteManifold& m,
                               const ScalarTimeField& u, double s);

/// Discrete form of the scaling remark: k and Q recomputed on the rescaled
/// data must reproduce the originals exactly. Returns sup residuals
/// (absolute, after undoing the scale factors).
struct RescaleInvariance {
  double k_residual = 0.0;
  double q_residual = 0.0;
};
RescaleInvariance verify_rescale_invariance(const DiscreteManifold& m,
                                            const ScalarTimeField& u,
                                            const Eigen::VectorXd& V,
                                            const LiYauParams& params,
                                            double s,
                                            const std::vector<int>& centers);

}  // namespace liyau
