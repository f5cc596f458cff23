#include "liyau/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

const char* kFlatConfig = R"({
  "id": "demo",
  "manifold": {
    "kind": "flat_torus",
    "length_x_length": 2.0, "length_y_length": 2.0,
    "grid_x": 32, "grid_y": 32
  },
  "params": {"n_dimension": 2, "p_exponent": 2.0, "alpha": 0.5},
  "solver": {
    "dt_time": 0.002, "t_min_time": 0.05, "t_max_time": 0.4,
    "ball_radius_length": 1.0, "eval_radius_length": 0.5,
    "n_times": 4, "tolerance_rel": 0.001
  },
  "checks": ["li_yau", "gronwall"],
  "seed": 7
})";

std::string patched(const std::string& from, const std::string& to) {
  std::string s = kFlatConfig;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("flat scenario parses with expected fields") {
  liyau::Scenario s = liyau::parse_scenario(kFlatConfig);
  CHECK(s.id == "demo");
  CHECK(s.manifold.kind == liyau::ModelKind::FlatTorus);
  CHECK(s.manifold.grid_x == 32);
  CHECK(s.n_dimension == 2);
  CHECK(s.p_exponent == doctest::Approx(2.0));
  CHECK(s.alpha == doctest::Approx(0.5));
  CHECK(!s.C_override.has_value());
  CHECK(!s.kappa_override.has_value());
  CHECK(s.solver.n_times == 4);
  CHECK(s.checks.size() == 2);
  CHECK(s.seed == 7);
  CHECK(!s.negative_control);
  CHECK(!s.origin_set);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("warped scenario parses warp profile and origin") {
  liyau::Scenario s = liyau::parse_scenario(R"({
    "id": "warp-demo",
    "manifold": {
      "kind": "warped",
      "warp": {"form": "bump", "rate": 1.0, "amplitude": 0.01,
               "center_length": 0.9, "width_length": 0.25},
      "r_min_length": 0.05, "r_max_length": 2.05,
      "disk_cap": false, "grid_x": 64, "grid_y": 48
    },
    "params": {"n_dimension": 2, "p_exponent": 2.0, "alpha": 0.5},
    "solver": {
      "dt_time": 0.002, "t_min_time": 0.05, "t_max_time": 0.4,
      "ball_radius_length": 0.8, "eval_radius_length": 0.4,
      "n_times": 4, "tolerance_rel": 0.001
    },
    "checks": ["li_yau"],
    "origin": {"x_length": 1.05, "y_length": 3.14},
    "seed": 1
  })");
  CHECK(s.manifold.kind == liyau::ModelKind::WarpedProduct);
  CHECK(s.manifold.warp.form == liyau::WarpForm::Bump);
  CHECK(s.manifold.warp.amplitude == doctest::Approx(0.01));
  CHECK(s.manifold.r_max == doctest::Approx(2.05));
  CHECK(!s.manifold.disk_cap);
  CHECK(s.origin_set);
  CHECK(s.origin_x == doctest::Approx(1.05));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("json round-trip preserves every field") {
  liyau::Scenario s = liyau::parse_scenario(kFlatConfig);
  s.C_override = 2.5;
  s.kappa_override = 0.01;
  liyau::Scenario t = liyau::parse_scenario(liyau::scenario_to_json(s));
  CHECK(t.id == s.id);
  CHECK(t.manifold.length_x == doctest::Approx(s.manifold.length_x));
  CHECK(t.manifold.grid_y == s.manifold.grid_y);
  CHECK(t.p_exponent == doctest::Approx(s.p_exponent));
  CHECK(t.C_override.value() == doctest::Approx(2.5));
  CHECK(t.kappa_override.value() == doctest::Approx(0.01));
  CHECK(t.solver.dt_time == doctest::Approx(s.solver.dt_time));
  CHECK(t.solver.eval_radius_length ==
        doctest::Approx(s.solver.eval_radius_length));
  CHECK(t.checks == s.checks);
  CHECK(t.seed == s.seed);
}

TEST_CASE("validation errors name the offending field") {
  using liyau::parse_scenario;

  // p must strictly exceed n/2 for the integral curvature norms
  auto bad_p = patched("\"p_exponent\": 2.0", "\"p_exponent\": 1.0");
  CHECK_THROWS_WITH_AS(parse_scenario(bad_p).validate(),
                       doctest::Contains("params.p_exponent"),
                       std::invalid_argument);

  auto bad_alpha = patched("\"alpha\": 0.5", "\"alpha\": 1.0");
  CHECK_THROWS_WITH_AS(parse_scenario(bad_alpha).validate(),
                       doctest::Contains("params.alpha"),
                       std::invalid_argument);

  auto bad_eval =
      patched("\"eval_radius_length\": 0.5", "\"eval_radius_length\": 1.5");
  CHECK_THROWS_WITH_AS(parse_scenario(bad_eval).validate(),
                       doctest::Contains("eval_radius_length"),
                       std::invalid_argument);

  auto bad_times = patched("\"n_times\": 4", "\"n_times\": 1");
  CHECK_THROWS_WITH_AS(parse_scenario(bad_times).validate(),
                       doctest::Contains("n_times"), std::invalid_argument);

  auto bad_check = patched("\"gronwall\"", "\"gronwall_typo\"");
  CHECK_THROWS_WITH_AS(parse_scenario(bad_check).validate(),
                       doctest::Contains("gronwall_typo"),
                       std::invalid_argument);

  auto bad_dt = patched("\"dt_time\": 0.002", "\"dt_time\": 0.0");
  CHECK_THROWS_WITH_AS(parse_scenario(bad_dt).validate(),
                       doctest::Contains("solver.dt_time"),
                       std::invalid_argument);
}

TEST_CASE("unknown keys and malformed documents are rejected") {
  using liyau::parse_scenario;
  CHECK_THROWS_WITH_AS(parse_scenario(patched("\"seed\": 7",
                                              "\"sead\": 7")),
                       doctest::Contains("sead"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_scenario(patched("\"grid_x\": 32",
                                              "\"gridx\": 32")),
                       doctest::Contains("gridx"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario("{ not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario("[1,2,3]"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({
    "id": "w",
    "manifold": {
      "kind": "warped",
      "warp": {"form": "tanh"},
      "r_min_length": 0.1, "r_max_length": 1.0,
      "grid_x": 16, "grid_y": 16
    },
    "params": {"n_dimension": 2, "p_exponent": 2.0, "alpha": 0.5},
    "solver": {
      "dt_time": 0.002, "t_min_time": 0.05, "t_max_time": 0.4,
      "ball_radius_length": 0.4, "eval_radius_length": 0.2,
      "n_times": 4, "tolerance_rel": 0.001
    },
    "checks": ["li_yau"]
  })"),
                       doctest::Contains("tanh"), std::invalid_argument);
}

TEST_CASE("suite loader requires a non-empty scenarios array") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "liyau_scenario_test";
  fs::create_directories(dir);

  {
    std::ofstream out(dir / "good.json");
    out << "{\"scenarios\": [" << kFlatConfig << "]}";
  }
  auto suite = liyau::load_suite((dir / "good.json").string());
  REQUIRE(suite.size() == 1);
  CHECK(suite[0].id == "demo");

  {
    std::ofstream out(dir / "empty.json");
    out << "{\"scenarios\": []}";
  }
  CHECK_THROWS_AS(liyau::load_suite((dir / "empty.json").string()),
                  std::invalid_argument);
  {
    std::ofstream out(dir / "nokey.json");
    out << kFlatConfig;
  }
  CHECK_THROWS_AS(liyau::load_suite((dir / "nokey.json").string()),
                  std::invalid_argument);
  CHECK_THROWS_AS(liyau::load_suite((dir / "missing.json").string()),
                  std::invalid_argument);
}
