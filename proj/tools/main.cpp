#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hflow/config.hpp"
#include "hflow/diagnostics.hpp"
#include "hflow/errors.hpp"
#include "hflow/experiment.hpp"
#include "hflow/io.hpp"

namespace {

using hflow::RunConfig;
using nlohmann::json;

std::filesystem::path default_out_dir(const std::filesystem::path& config_path) {
  return config_path.parent_path() / config_path.stem();
}

int cmd_run(const std::string& config_path, std::string out_dir) {
  const RunConfig cfg = hflow::load_config(config_path);
  if (out_dir.empty()) out_dir = default_out_dir(config_path).string();
  const int rc = hflow::run_experiment(cfg, out_dir);
  std::printf("%s: %s\n", cfg.name.c_str(),
              rc == 0 ? "ok" : rc == 1 ? "violation" : "error");
  std::printf("outputs in %s\n", out_dir.c_str());
  return rc;
}

// Discrepancy between the expanded operator and its curvature form on the
// configured grid and on one halving; second order means the ratio is ~4.
int cmd_check_identity(const std::string& config_path) {
  RunConfig cfg = hflow::load_config(config_path);
  if (cfg.flow != hflow::FlowKind::HFlow)
    throw hflow::ConfigError("check-identity: 'flow' must be hflow");

  double sup[2];
  for (int l = 0; l < 2; ++l) {
    RunConfig lvl = cfg;
    for (int& s : lvl.shape) s <<= l;
    lvl.spacing = cfg.spacing / (1 << l);
    const hflow::Grid grid = hflow::grid_from_config(lvl);
    sup[l] = hflow::identity_discrepancy(hflow::initial_from_config(lvl, grid));
  }
  const double order = std::log2(sup[0] / sup[1]);
  json out{{"coarse_sup", sup[0]}, {"fine_sup", sup[1]}, {"order", order}};
  std::printf("%s\n", out.dump(2).c_str());
  return order >= 1.9 ? 0 : 1;
}

int cmd_fit_decay(const std::string& csv_path, double lo, double hi, int n, int p) {
  const auto series = hflow::read_diagnostics_csv(csv_path);
  std::vector<std::pair<double, double>> decay;
  for (const auto& r : series) decay.emplace_back(r.t, r.sup_dev);
  const hflow::FitResult fit = hflow::fit_decay(decay, lo, hi, n, p);
  json out{{"exponent", fit.exponent},
           {"window", {fit.window_lo, fit.window_hi}},
           {"residual_rms", fit.residual_rms},
           {"samples", fit.samples},
           {"reference",
            {{"base", fit.ref_exponent_base}, {"improved", fit.ref_exponent_improved}}}};
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

int cmd_study(const std::string& config_path, int levels) {
  const RunConfig cfg = hflow::load_config(config_path);
  const hflow::StudyReport rep = hflow::convergence_study(cfg, levels);
  json jlevels = json::array();
  for (const auto& l : rep.levels) {
    json jl{{"dx", l.dx},
            {"identity_sup", l.identity_sup},
            {"final_sup_dev", l.final_sup_dev}};
    if (l.rf_residual) jl["rf_residual"] = *l.rf_residual;
    jlevels.push_back(jl);
  }
  json out{{"levels", jlevels},
           {"identity_orders", rep.identity_orders},
           {"rf_orders", rep.rf_orders},
           {"self_orders", rep.self_orders}};
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

int cmd_conformal(const std::string& config_path, std::string out_dir) {
  const RunConfig cfg = hflow::load_config(config_path);
  if (cfg.flow != hflow::FlowKind::Conformal2D)
    throw hflow::ConfigError("conformal2d: 'flow' must be conformal2d");
  if (out_dir.empty()) out_dir = default_out_dir(config_path).string();
  const int rc = hflow::run_experiment(cfg, out_dir);
  std::printf("%s: %s\n", cfg.name.c_str(),
              rc == 0 ? "ok" : rc == 1 ? "violation" : "error");
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-difference flow driver for near-flat metrics"};
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_path;
  double win_lo = 0, win_hi = 0;
  int fit_n = 3, fit_p = 1, levels = 2;

  auto* run = app.add_subcommand("run", "advance a configured flow and validate it");
  run->add_option("config", config_path, "JSON configuration")->required();
  run->add_option("--out", out_dir, "output directory (default: config stem)");

  auto* ident = app.add_subcommand(
      "check-identity", "compare the expanded operator against its curvature form");
  ident->add_option("config", config_path, "JSON configuration")->required();

  auto* fit = app.add_subcommand("fit-decay", "fit a decay exponent to a recorded run");
  fit->add_option("csv", csv_path, "diagnostics CSV")->required();
  fit->add_option("--window", win_lo, "fit window start")->required();
  fit->add_option("--window-end", win_hi, "fit window end")->required();
  fit->add_option("--n", fit_n, "dimension for reference exponents");
  fit->add_option("--p", fit_p, "integral power for reference exponents");

  auto* study = app.add_subcommand("study", "rerun across halved spacings");
  study->add_option("config", config_path, "JSON configuration")->required();
  study->add_option("--levels", levels, "number of refinement levels")
      ->check(CLI::Range(2, 6));

  auto* conf = app.add_subcommand("conformal2d", "advance a 2d log-conformal flow");
  conf->add_option("config", config_path, "JSON configuration")->required();
  conf->add_option("--out", out_dir, "output directory (default: config stem)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (ident->parsed()) return cmd_check_identity(config_path);
    if (fit->parsed()) return cmd_fit_decay(csv_path, win_lo, win_hi, fit_n, fit_p);
    if (study->parsed()) return cmd_study(config_path, levels);
    if (conf->parsed()) return cmd_conformal(config_path, out_dir);
  } catch (const hflow::FlowError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
