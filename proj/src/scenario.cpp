#include "liyau/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace liyau {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("scenario config: " + field + " " + why);
}

WarpForm warp_form_from(const std::string& s) {
  if (s == "linear") return WarpForm::Linear;
  if (s == "sinh") return WarpForm::Sinh;
  if (s == "sin") return WarpForm::Sin;
  if (s == "bump") return WarpForm::Bump;
  fail("manifold.warp.form", "must be linear, sinh, sin or bump (got '" + s +
                                 "')");
}

std::string warp_form_name(WarpForm f) {
  switch (f) {
    case WarpForm::Linear: return "linear";
    case WarpForm::Sinh: return "sinh";
    case WarpForm::Sin: return "sin";
    case WarpForm::Bump: return "bump";
  }
  return "linear";
}

double need_number(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    fail(field, "must be a number");
  return j[field].get<double>();
}

double number_or(const json& j, const std::string& field, double dflt) {
  if (!j.contains(field)) return dflt;
  if (!j[field].is_number()) fail(field, "must be a number");
  return j[field].get<double>();
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(where + "." + it.key(), "is not a recognized field");
  }
}

ManifoldSpec parse_manifold(const json& j) {
  if (!j.is_object()) fail("manifold", "must be an object");
  reject_unknown(j, "manifold",
                 {"kind", "length_x_length", "length_y_length", "warp",
                  "r_min_length", "r_max_length", "disk_cap", "grid_x",
                  "grid_y", "n_dimension"});
  ManifoldSpec spec;
  const std::string kind = j.value("kind", "flat_torus");
  if (kind == "flat_torus") {
    spec.kind = ModelKind::FlatTorus;
    spec.length_x = need_number(j, "length_x_length");
    spec.length_y = need_number(j, "length_y_length");
  } else if (kind == "warped") {
    spec.kind = ModelKind::WarpedProduct;
    if (!j.contains("warp") || !j["warp"].is_object())
      fail("manifold.warp", "is required for warped models");
    const json& w = j["warp"];
    reject_unknown(w, "manifold.warp",
                   {"form", "rate", "amplitude", "center_length",
                    "width_length"});
    if (!w.contains("form") || !w["form"].is_string())
      fail("manifold.warp.form", "must be a string");
    spec.warp.form = warp_form_from(w["form"].get<std::string>());
    spec.warp.rate = number_or(w, "rate", 1.0);
    spec.warp.amplitude = number_or(w, "amplitude", 0.0);
    spec.warp.center = number_or(w, "center_length", 1.0);
    spec.warp.width = number_or(w, "width_length", 0.1);
    spec.r_min = need_number(j, "r_min_length");
    spec.r_max = need_number(j, "r_max_length");
    spec.disk_cap = j.value("disk_cap", false);
  } else {
    fail("manifold.kind", "must be flat_torus or warped (got '" + kind + "')");
  }
  if (!j.contains("grid_x") || !j["grid_x"].is_number_integer())
    fail("manifold.grid_x", "must be an integer");
  if (!j.contains("grid_y") || !j["grid_y"].is_number_integer())
    fail("manifold.grid_y", "must be an integer");
  spec.grid_x = j["grid_x"].get<int>();
  spec.grid_y = j["grid_y"].get<int>();
  return spec;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "li_yau",    "classical_optimal", "w_cross", "max_principle",
      "gronwall",  "j_bound",           "lemmas",  "rescale"};
  return names;
}

void Scenario::validate() const {
  if (id.empty()) fail("id", "must be a non-empty string");
  manifold.validate();
  if (n_dimension < 2) fail("params.n_dimension", "must be at least 2");
  if (!(p_exponent > 0.5 * n_dimension))
    fail("params.p_exponent",
         "must exceed n_dimension/2 (integral curvature norms need p > n/2)");
  const bool wants_li_yau =
      std::find(checks.begin(), checks.end(), "li_yau") != checks.end() ||
      std::find(checks.begin(), checks.end(), "j_bound") != checks.end() ||
      std::find(checks.begin(), checks.end(), "gronwall") != checks.end();
  if (wants_li_yau && !(alpha > 0.0 && alpha < 1.0))
    fail("params.alpha", "must lie in (0,1) for the requested checks");
  if (C_override && !(*C_override > 0.0)) fail("params.C", "must be > 0");
  if (kappa_override && *kappa_override < 0.0)
    fail("params.kappa", "must be >= 0");
  if (!(solver.dt_time > 0.0)) fail("solver.dt_time", "must be > 0");
  if (!(solver.t_min_time > 0.0)) fail("solver.t_min_time", "must be > 0");
  if (!(solver.t_max_time >= solver.t_min_time))
    fail("solver.t_max_time", "must be >= t_min_time");
  if (!(solver.ball_radius_length > 0.0))
    fail("solver.ball_radius_length", "must be > 0");
  if (!(solver.eval_radius_length > 0.0 &&
        solver.eval_radius_length <= solver.ball_radius_length))
    fail("solver.eval_radius_length", "must be in (0, ball_radius_length]");
  if (solver.n_times < 2) fail("solver.n_times", "must be at least 2");
  if (!(solver.tolerance_rel >= 0.0))
    fail("solver.tolerance_rel", "must be >= 0");
  if (checks.empty()) fail("checks", "must list at least one check");
  for (const std::string& c : checks)
    if (std::find(known_checks().begin(), known_checks().end(), c) ==
        known_checks().end())
      fail("checks", "contains unknown check '" + c + "'");
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario config: ") + e.what());
  }
  if (!j.is_object()) fail("(root)", "must be a JSON object");
  reject_unknown(j, "(root)",
                 {"id", "manifold", "params", "solver", "checks", "seed",
                  "negative_control", "origin"});
  Scenario s;
  if (!j.contains("id") || !j["id"].is_string())
    fail("id", "must be a string");
  s.id = j["id"].get<std::string>();
  if (!j.contains("manifold")) fail("manifold", "is required");
  s.manifold = parse_manifold(j["manifold"]);

  if (j.contains("params")) {
    const json& p = j["params"];
    reject_unknown(p, "params",
                   {"n_dimension", "p_exponent", "alpha", "C", "kappa"});
    s.n_dimension = static_cast<int>(number_or(p, "n_dimension", 2));
    s.p_exponent = number_or(p, "p_exponent", 2.0);
    s.alpha = number_or(p, "alpha", 0.5);
    if (p.contains("C")) s.C_override = need_number(p, "C");
    if (p.contains("kappa")) s.kappa_override = need_number(p, "kappa");
  }
  s.manifold.dimension = s.n_dimension;

  if (j.contains("solver")) {
    const json& v = j["solver"];
    reject_unknown(v, "solver",
                   {"dt_time", "t_min_time", "t_max_time",
                    "ball_radius_length", "eval_radius_length", "n_times",
                    "tolerance_rel"});
    s.solver.dt_time = number_or(v, "dt_time", s.solver.dt_time);
    s.solver.t_min_time = number_or(v, "t_min_time", s.solver.t_min_time);
    s.solver.t_max_time = number_or(v, "t_max_time", s.solver.t_max_time);
    s.solver.ball_radius_length =
        number_or(v, "ball_radius_length", s.solver.ball_radius_length);
    s.solver.eval_radius_length =
        number_or(v, "eval_radius_length", s.solver.eval_radius_length);
    s.solver.n_times =
        static_cast<int>(number_or(v, "n_times", s.solver.n_times));
    s.solver.tolerance_rel =
        number_or(v, "tolerance_rel", s.solver.tolerance_rel);
  }

  if (j.contains("checks")) {
    if (!j["checks"].is_array()) fail("checks", "must be an array of strings");
    for (const auto& c : j["checks"]) {
      if (!c.is_string()) fail("checks", "must be an array of strings");
      s.checks.push_back(c.get<std::string>());
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      fail("seed", "must be an integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  s.negative_control = j.value("negative_control", false);
  if (j.contains("origin")) {
    const json& o = j["origin"];
    reject_unknown(o, "origin", {"x_length", "y_length"});
    s.origin_x = need_number(o, "x_length");
    s.origin_y = need_number(o, "y_length");
    s.origin_set = true;
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("scenario config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["id"] = s.id;
  json m;
  if (s.manifold.kind == ModelKind::FlatTorus) {
    m["kind"] = "flat_torus";
    m["length_x_length"] = s.manifold.length_x;
    m["length_y_length"] = s.manifold.length_y;
  } else {
    m["kind"] = "warped";
    m["warp"] = {{"form", warp_form_name(s.manifold.warp.form)},
                 {"rate", s.manifold.warp.rate},
                 {"amplitude", s.manifold.warp.amplitude},
                 {"center_length", s.manifold.warp.center},
                 {"width_length", s.manifold.warp.width}};
    m["r_min_length"] = s.manifold.r_min;
    m["r_max_length"] = s.manifold.r_max;
    m["disk_cap"] = s.manifold.disk_cap;
  }
  m["grid_x"] = s.manifold.grid_x;
  m["grid_y"] = s.manifold.grid_y;
  j["manifold"] = std::move(m);
  j["params"] = {{"n_dimension", s.n_dimension},
                 {"p_exponent", s.p_exponent},
                 {"alpha", s.alpha}};
  if (s.C_override) j["params"]["C"] = *s.C_override;
  if (s.kappa_override) j["params"]["kappa"] = *s.kappa_override;
  j["solver"] = {{"dt_time", s.solver.dt_time},
                 {"t_min_time", s.solver.t_min_time},
                 {"t_max_time", s.solver.t_max_time},
                 {"ball_radius_length", s.solver.ball_radius_length},
                 {"eval_radius_length", s.solver.eval_radius_length},
                 {"n_times", s.solver.n_times},
                 {"tolerance_rel", s.solver.tolerance_rel}};
  j["checks"] = s.checks;
  j["seed"] = s.seed;
  j["negative_control"] = s.negative_control;
  if (s.origin_set)
    j["origin"] = {{"x_length", s.origin_x}, {"y_length", s.origin_y}};
  return j.dump(2);
}

std::vector<Scenario> load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("suite config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("suite config: ") + e.what());
  }
  if (!j.is_object() || !j.contains("scenarios") ||
      !j["scenarios"].is_array() || j["scenarios"].empty())
    throw std::invalid_argument(
        "suite config: requires a non-empty scenarios array");
  std::vector<Scenario> out;
  for (const auto& sj : j["scenarios"]) out.push_back(parse_scenario(sj.dump()));
  return out;
}

}  // namespace liyau
