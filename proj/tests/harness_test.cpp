#include "liyau/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "liyau/scenario.hpp"

namespace {

// Small flat scenario sized so the full check set runs in a few seconds.
liyau::Scenario small_flat() {
  return liyau::parse_scenario(R"({
    "id": "flat_small",
    "manifold": {
      "kind": "flat_torus",
      "length_x_length": 2.0, "length_y_length": 2.0,
      "grid_x": 48, "grid_y": 48
    },
    "params": {"n_dimension": 2, "p_exponent": 2.0, "alpha": 0.5},
    "solver": {
      "dt_time": 0.002, "t_min_time": 0.05, "t_max_time": 0.4,
      "ball_radius_length": 1.0, "eval_radius_length": 0.5,
      "n_times": 4, "tolerance_rel": 0.001
    },
    "checks": ["li_yau", "classical_optimal", "w_cross", "max_principle",
               "gronwall", "j_bound", "rescale"],
    "seed": 11
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const liyau::CheckOutcome& find_check(const liyau::RunReport& r,
                                      const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  REQUIRE_MESSAGE(false, "check not found: " << name);
  return r.checks.front();
}

}  // namespace

TEST_CASE("flat scenario run passes every requested check") {
  liyau::RunReport rep = liyau::run_scenario(small_flat(), {});
  CHECK(rep.ok);
  CHECK(rep.C == doctest::Approx(liyau::default_constant_C()));
  CHECK(rep.kappa == doctest::Approx(liyau::default_kappa()));
  CHECK(rep.measured_k == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.hypothesis_satisfied);
  CHECK(rep.delta == doctest::Approx(2.0 / 9.0));
  CHECK(rep.a == doctest::Approx(22.5));
  REQUIRE(rep.checks.size() == 7);
  for (const auto& c : rep.checks) {
    CAPTURE(c.name);
    CHECK(c.passed);
    CHECK(c.violations == 0);
    CHECK(!c.rows.empty());
  }

  // flat torus: w solves to the constant 1, so both J diagnostics are exact
  const auto& mp = find_check(rep, "max_principle");
  CHECK(mp.metrics.at("j_min") == doctest::Approx(1.0).epsilon(1e-9));
  const auto& gw = find_check(rep, "gronwall");
  CHECK(gw.metrics.at("k_p1") == doctest::Approx(0.0).epsilon(1e-12));
  // the k = 0 envelope is the constant 2 while sup w stays 1
  for (const auto& row : gw.rows) {
    CHECK(row.rhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(row.lhs == doctest::Approx(1.0).epsilon(1e-9));
  }

  // every evaluation vertex appears once per time node in the main table
  const auto& ly = find_check(rep, "li_yau");
  CHECK(ly.rows.size() % 4 == 0);
  CHECK(ly.metrics.at("hypothesis_satisfied") == doctest::Approx(1.0));
}

TEST_CASE("check overrides flow through to the resolved constants") {
  liyau::Scenario s = small_flat();
  s.C_override = 3.0;
  s.kappa_override = 0.01;
  s.checks = {"gronwall", "j_bound"};
  liyau::RunReport rep = liyau::run_scenario(s, {});
  CHECK(rep.C == doctest::Approx(3.0));
  CHECK(rep.kappa == doctest::Approx(0.01));
  CHECK(rep.ok);
  REQUIRE(rep.checks.size() == 2);
}

TEST_CASE("reports and table are written and the table is byte-stable") {
  namespace fs = std::filesystem;
  const fs::path dir1 = fs::temp_directory_path() / "liyau_harness_a";
  const fs::path dir2 = fs::temp_directory_path() / "liyau_harness_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  liyau::Scenario s = small_flat();
  s.checks = {"li_yau", "gronwall", "j_bound", "rescale"};
  liyau::RunOptions opts;
  opts.out_dir = dir1.string();
  liyau::RunReport r1 = liyau::run_scenario(s, opts);
  opts.out_dir = dir2.string();
  liyau::RunReport r2 = liyau::run_scenario(s, opts);

  REQUIRE(fs::exists(dir1 / "report_flat_small.json"));
  REQUIRE(fs::exists(dir1 / "table.csv"));
  const std::string t1 = slurp(dir1 / "table.csv");
  const std::string t2 = slurp(dir2 / "table.csv");
  CHECK(t1 == t2);
  CHECK(t1.rfind("scenario,check,x,y,t,lhs,rhs,margin,violated\n", 0) == 0);

  // JSON report carries the resolved constants and scenario echo
  const std::string j = slurp(dir1 / "report_flat_small.json");
  CHECK(j.find("\"schema_version\"") != std::string::npos);
  CHECK(j.find("\"resolved_constants\"") != std::string::npos);
  CHECK(j.find("\"flat_small\"") != std::string::npos);
  CHECK(r1.ok);
  CHECK(r2.ok);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("suite runner is deterministic across thread counts") {
  liyau::Scenario a = small_flat();
  a.checks = {"gronwall", "j_bound", "rescale"};
  liyau::Scenario b = a;
  b.id = "flat_small_2";
  b.solver.t_max_time = 0.2;
  std::vector<liyau::Scenario> suite = {a, b};

  liyau::RunOptions serial;
  serial.threads = 1;
  auto r1 = liyau::run_suite(suite, serial);
  liyau::RunOptions parallel;
  parallel.threads = 4;
  auto r2 = liyau::run_suite(suite, parallel);
  REQUIRE(r1.size() == 2);
  REQUIRE(r2.size() == 2);
  CHECK(liyau::table_to_csv(r1) == liyau::table_to_csv(r2));
  CHECK(r1[0].scenario.id == "flat_small");
  CHECK(r1[1].scenario.id == "flat_small_2");
}

TEST_CASE("negative control scenarios fail checks but keep ok true") {
  // small hyperbolic cap, curvature far above the default kappa
  liyau::Scenario s = liyau::parse_scenario(R"({
    "id": "cap_control",
    "manifold": {
      "kind": "warped",
      "warp": {"form": "sinh", "rate": 5.0, "amplitude": 0.0,
               "center_length": 1.0, "width_length": 0.1},
      "r_min_length": 0.0, "r_max_length": 1.2,
      "disk_cap": true, "grid_x": 96, "grid_y": 48
    },
    "params": {"n_dimension": 2, "p_exponent": 2.0, "alpha": 0.5},
    "solver": {
      "dt_time": 0.0002, "t_min_time": 0.01, "t_max_time": 0.2,
      "ball_radius_length": 0.85, "eval_radius_length": 0.5,
      "n_times": 3, "tolerance_rel": 0.001
    },
    "checks": ["j_bound"],
    "seed": 3,
    "negative_control": true
  })");
  liyau::RunReport rep = liyau::run_scenario(s, {});
  CHECK(rep.measured_k == doctest::Approx(25.0).epsilon(1e-3));
  CHECK(!rep.hypothesis_satisfied);
  const auto& jb = find_check(rep, "j_bound");
  CHECK(!jb.passed);
  CHECK(jb.violations > 0);
  CHECK(rep.ok);  // declared control: failures are the expected outcome

  // without the control flag the same run must report not-ok
  liyau::Scenario hard = s;
  hard.negative_control = false;
  CHECK(!liyau::run_scenario(hard, {}).ok);
}

TEST_CASE("refinement study shows second order decay and shrinking errors") {
  liyau::StudyReport rep = liyau::refinement_study({32, 64, 128});
  REQUIRE(rep.levels.size() == 3);
  REQUIRE(rep.eigen_orders.size() == 2);
  for (double order : rep.eigen_orders) {
    CHECK(order > 1.5);
    CHECK(order < 2.6);
  }
  CHECK(rep.ball_improves);
  for (const auto& lvl : rep.levels) CHECK(lvl.const_error < 1e-10);
  for (std::size_t i = 1; i < rep.levels.size(); ++i)
    CHECK(rep.levels[i].eigen_error < rep.levels[i - 1].eigen_error);
  CHECK_THROWS_AS(liyau::refinement_study({32, 64}), std::invalid_argument);
  CHECK_THROWS_AS(liyau::refinement_study({64, 48, 96}),
                  std::invalid_argument);
}

TEST_CASE("calibration picks the smallest admissible constant") {
  // flat suite: every candidate C passes, so the first grid point wins
  liyau::Scenario s = small_flat();
  s.checks = {"li_yau", "gronwall", "j_bound"};
  auto res = liyau::calibrate_constants({s}, {0.5, 1.0, 2.0});
  CHECK(res.C == doctest::Approx(0.5));
  CHECK(res.kappa == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(res.attempts.size() == 1);
  CHECK(res.attempts[0].passed);
  CHECK(res.suite_k.size() == 1);

  // an unsatisfiable grid reports the worst offending scenario/check
  CHECK_THROWS_WITH_AS(liyau::calibrate_constants({s}, {1e-9}),
                       doctest::Contains("flat_small"), std::runtime_error);
  CHECK_THROWS_AS(liyau::calibrate_constants({}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(liyau::calibrate_constants({s}, {2.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("calibrated constant grows when a curved scenario joins the suite") {
  liyau::Scenario flat = small_flat();
  flat.checks = {"li_yau", "gronwall", "j_bound"};
  flat.solver.t_max_time = 1.0;

  liyau::Scenario bump = liyau::parse_scenario(R"({
    "id": "bump_cal",
    "manifold": {
      "kind": "warped",
      "warp": {"form": "bump", "rate": 1.0, "amplitude": 0.004,
               "center_length": 0.9, "width_length": 0.25},
      "r_min_length": 0.05, "r_max_length": 2.05,
      "disk_cap": false, "grid_x": 96, "grid_y": 96
    },
    "params": {"n_dimension": 2, "p_exponent": 2.0, "alpha": 0.5},
    "solver": {
      "dt_time": 0.002, "t_min_time": 0.01, "t_max_time": 1.0,
      "ball_radius_length": 0.85, "eval_radius_length": 0.45,
      "n_times": 4, "tolerance_rel": 0.001
    },
    "checks": ["li_yau", "gronwall", "j_bound"],
    "seed": 5
  })");

  const std::vector<double> grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  auto flat_only = liyau::calibrate_constants({flat}, grid);
  auto with_bump = liyau::calibrate_constants({flat, bump}, grid);
  CHECK(with_bump.C >= flat_only.C);
  CHECK(with_bump.kappa >= flat_only.kappa);
  CHECK(with_bump.kappa == doctest::Approx(0.0426).epsilon(0.1));
  CHECK(with_bump.attempts.size() >= flat_only.attempts.size());
}
