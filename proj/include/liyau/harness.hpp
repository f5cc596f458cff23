#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "liyau/bounds.hpp"
#include "liyau/lemmas.hpp"
#include "liyau/scenario.hpp"

namespace liyau {

/// One flat-table row. For bound checks (x, y) are chart coordinates of the
/// checked vertex and t the time node; sup-style checks store the argmax
/// location; rescale rows store the scale factor in t. margin is oriented so
/// that nonnegative means satisfied.
struct CheckRow {
  std::string check;
  double x = 0.0, y = 0.0, t = 0.0;
  double lhs = 0.0, rhs = 0.0, margin = 0.0;
  bool violated = false;
};

struct CheckOutcome {
  std::string name;
  bool passed = true;
  long violations = 0;
  double worst_margin = 0.0;
  std::map<std::string, double> metrics;
  std::vector<CheckRow> rows;
  double elapsed_ms = 0.0;
};

struct RunReport {
  Scenario scenario;
  double C = 0.0, kappa = 0.0, delta = 0.0, a = 0.0;
  double measured_k = 0.0;  // k(p,1) over the default center set
  bool hypothesis_satisfied = true;
  std::vector<CheckOutcome> checks;
  bool ok = true;  // all checks passed, or scenario is a negative control
};

struct RunOptions {
  std::string out_dir;  // empty: no files written
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool deterministic = false;  // forces serial scenario execution
};

/// Calibrated defaults used when a scenario does not override C or kappa.
double default_constant_C();
double default_kappa();

RunReport run_scenario(const Scenario& s, const RunOptions& opts = {});
std::vector<RunReport> run_suite(const std::vector<Scenario>& suite,
                                 const RunOptions& opts = {});

/// report.json (schema-versioned) and table.csv with the fixed header
/// scenario,check,x,y,t,lhs,rhs,margin,violated. The table is byte-stable
/// for fixed (config, seed).
std::string report_to_json(const RunReport& r);
std::string table_to_csv(const std::vector<RunReport>& reports);
void write_reports(const std::vector<RunReport>& reports,
                   const std::string& out_dir);

struct StudyLevel {
  int grid = 0;
  double h = 0.0;
  double eigen_error = 0.0;  // vs continuum mode decay
  double ball_error = 0.0;   // vs pi r^2
  double const_error = 0.0;  // vs invariant constant solution
};

struct StudyReport {
  std::vector<StudyLevel> levels;
  std::vector<double> eigen_orders;  // successive log-ratio estimates
  // Ball-area error is first order with cell-quantization jitter, so the
  // robust contract is coarsest-to-finest improvement, not per-level decay.
  bool ball_improves = true;
};

/// Flat-torus refinement study over >= 3 ascending grid sizes.
StudyReport refinement_study(const std::vector<int>& grids);
std::string study_to_json(const StudyReport& r);

struct CalibrationAttempt {
  double C = 0.0;
  bool passed = false;
  std::string worst_offender;  // "scenario/check" of the worst failure
  double worst_margin = 0.0;
};

struct CalibrationResult {
  double C = 0.0;
  double kappa = 0.0;
  std::vector<double> suite_k;  // per-scenario k(p,1)
  std::vector<CalibrationAttempt> attempts;
};

/// Smallest C on an ascending grid such that the Gronwall envelope, the
/// closed-form J lower bound, and the main bound pass on every suite member;
/// kappa is the largest suite k(p,1). Throws when no grid value passes.
CalibrationResult calibrate_constants(const std::vector<Scenario>& suite,
                                      std::vector<double> c_grid = {});
std::string calibration_to_json(const CalibrationResult& r);

}  // namespace liyau
