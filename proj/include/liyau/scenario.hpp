#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liyau/manifold.hpp"

namespace liyau {

/// Time-stepping and evaluation-window settings. Field names carry units in
/// the config schema: *_time is simulation time, *_length chart length.
struct SolverSettings {
  double dt_time = 1e-3;
  double t_min_time = 0.05;
  double t_max_time = 1.0;
  double ball_radius_length = 1.0;  // Dirichlet domain B(O, R)
  double eval_radius_length = 0.5;  // bound-check region B(O, R/2)
  int n_times = 8;                  // log-spaced output nodes in the window
  double tolerance_rel = 1e-3;
};

/// A fully described verification scenario, loadable from JSON.
struct Scenario {
  std::string id;
  ManifoldSpec manifold;
  int n_dimension = 2;
  double p_exponent = 2.0;
  double alpha = 0.5;
  std::optional<double> C_override;      // constant C; default is calibrated
  std::optional<double> kappa_override;  // curvature budget; default calibrated
  SolverSettings solver;
  std::vector<std::string> checks;
  std::uint64_t seed = 0;
  bool negative_control = false;

  /// Chart coordinates of the scenario origin O (ball centers); defaults to
  /// the chart midpoint when not set in the config.
  double origin_x = 0.0, origin_y = 0.0;
  bool origin_set = false;

  void validate() const;  // throws std::invalid_argument naming the field
};

/// Check names accepted in Scenario::checks.
const std::vector<std::string>& known_checks();

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);  // round-trippable echo

/// Suite files hold {"id": ..., "scenarios": [...]}.
std::vector<Scenario> load_suite(const std::string& path);

}  // namespace liyau
