#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liyau/curvature.hpp"
#include "liyau/harness.hpp"
#include "liyau/scenario.hpp"

namespace {

std::vector<liyau::Scenario> load_any(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find("\"scenarios\"") != std::string::npos)
    return liyau::load_suite(path);
  return {liyau::parse_scenario(text)};
}

void print_report(const liyau::RunReport& r) {
  std::printf("scenario %-22s C=%-6g kappa=%-8g k(p,1)=%-10.4g %s\n",
              r.scenario.id.c_str(), r.C, r.kappa, r.measured_k,
              r.hypothesis_satisfied ? "[hypothesis ok]" : "[k > kappa]");
  for (const liyau::CheckOutcome& c : r.checks)
    std::printf("  %-18s %-4s violations=%-6ld worst_margin=%-12.5g %.0f ms\n",
                c.name.c_str(), c.passed ? "pass" : "FAIL", c.violations,
                c.worst_margin, c.elapsed_ms);
  if (r.scenario.negative_control)
    std::printf("  (negative control: failures above are expected)\n");
}

int cmd_build(const std::string& config) {
  for (const liyau::Scenario& s : load_any(config)) {
    auto m = liyau::build_manifold(s.manifold);
    const auto V = liyau::ric_minus_field(m);
    const auto k = liyau::k_norm(m, V, s.p_exponent, 1.0,
                                 liyau::default_centers(m));
    int arg = k.centers.empty() ? 0 : k.centers.front();
    for (std::size_t i = 0; i < k.centers.size(); ++i)
      if (k.k_local[i] == k.k_global) arg = k.centers[i];
    std::printf("scenario %-22s vertices=%d  k(%g,1)=%.6g at (%.3g, %.3g)\n",
                s.id.c_str(), m.num_vertices(), s.p_exponent, k.k_global,
                m.coord_x[arg], m.coord_y[arg]);
  }
  return 0;
}

int cmd_verify(const std::string& config, const liyau::RunOptions& opts) {
  auto suite = load_any(config);
  auto reports = liyau::run_suite(suite, opts);
  bool ok = true;
  for (const auto& r : reports) {
    print_report(r);
    ok = ok && r.ok;
  }
  if (!opts.out_dir.empty())
    std::printf("reports written to %s\n", opts.out_dir.c_str());
  return ok ? 0 : 1;
}

int cmd_lemmas(const std::string& config, liyau::RunOptions opts) {
  auto suite = load_any(config);
  for (auto& s : suite) s.checks = {"lemmas"};
  auto reports = liyau::run_suite(suite, opts);
  bool ok = true;
  for (const auto& r : reports) {
    print_report(r);
    ok = ok && r.ok;
  }
  return ok ? 0 : 1;
}

int cmd_calibrate(const std::string& config, const std::string& out_dir) {
  auto suite = liyau::load_suite(config);
  auto res = liyau::calibrate_constants(suite);
  std::printf("calibrated C=%g kappa=%.6g after %zu attempt(s)\n", res.C,
              res.kappa, res.attempts.size());
  for (const auto& a : res.attempts)
    std::printf("  C=%-6g %-4s worst %s margin=%.5g\n", a.C,
                a.passed ? "pass" : "fail", a.worst_offender.c_str(),
                a.worst_margin);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(std::filesystem::path(out_dir) / "calibration.json");
    out << liyau::calibration_to_json(res) << '\n';
  }
  return 0;
}

int cmd_study(const std::string& grids_csv, const std::string& out_dir) {
  std::vector<int> grids;
  std::stringstream ss(grids_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) grids.push_back(std::stoi(tok));
  auto rep = liyau::refinement_study(grids);
  for (const auto& l : rep.levels)
    std::printf("grid %-5d eigen_err=%-12.5g ball_err=%-12.5g const_err=%g\n",
                l.grid, l.eigen_error, l.ball_error, l.const_error);
  for (std::size_t i = 0; i < rep.eigen_orders.size(); ++i)
    std::printf("order %zu->%zu: %.3f\n", i, i + 1, rep.eigen_orders[i]);
  std::printf("ball volumes improve with refinement: %s\n",
              rep.ball_improves ? "yes" : "no");
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(std::filesystem::path(out_dir) / "study.json");
    out << liyau::study_to_json(rep) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of gradient bounds for the heat "
               "equation under integral curvature assumptions"};
  app.require_subcommand(1);

  std::string config, out_dir, grids = "64,128,256";
  std::optional<unsigned long long> seed;
  int threads = 1;
  bool deterministic = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config, "scenario or suite JSON file")
          ->required();
    sub->add_option("--out", out_dir, "output directory for reports");
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--threads", threads, "worker threads for suites");
    sub->add_flag("--deterministic", deterministic,
                  "force single-threaded, byte-stable output");
  };

  CLI::App* build = app.add_subcommand("build", "build a model and print "
                                                "curvature statistics");
  add_common(build, true);
  CLI::App* verify = app.add_subcommand("verify", "run all requested checks "
                                                  "for a scenario or suite");
  add_common(verify, true);
  CLI::App* lemmas = app.add_subcommand("lemmas", "run only the supporting "
                                                  "lemma checks");
  add_common(lemmas, true);
  CLI::App* calibrate = app.add_subcommand("calibrate", "find the smallest "
                                                        "passing constant C");
  add_common(calibrate, true);
  CLI::App* study = app.add_subcommand("study", "grid refinement study");
  study->add_option("--grids", grids, "comma-separated grid sizes");
  study->add_option("--out", out_dir, "output directory for study.json");

  CLI11_PARSE(app, argc, argv);

  liyau::RunOptions opts;
  opts.out_dir = out_dir;
  opts.seed = seed;
  opts.threads = threads;
  opts.deterministic = deterministic;

  try {
    if (app.got_subcommand(build)) return cmd_build(config);
    if (app.got_subcommand(verify)) return cmd_verify(config, opts);
    if (app.got_subcommand(lemmas)) return cmd_lemmas(config, opts);
    if (app.got_subcommand(calibrate)) return cmd_calibrate(config, out_dir);
    if (app.got_subcommand(study)) return cmd_study(grids, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
