#include "hflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "hflow/errors.hpp"
#include "hflow/geometry.hpp"
#include "hflow/io.hpp"

namespace hflow {

double identity_discrepancy(const MetricField& g) {
  const Grid& gr = g.grid();
  double sup = 0;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    if (!gr.interior(idx, 2)) continue;
    const SymMatrix d = hflow_rhs(g, idx) - rhs_ricci_deturck(g, idx);
    sup = std::max(sup, d.max_abs());
  }
  return sup;
}

std::vector<Violation> validate_hflow_series(
    std::span<const DiagnosticsRecord> series) {
  std::vector<Violation> out;
  if (series.empty()) return out;
  const double tol_i = 1e-8 * (1.0 + series.front().integral_i);
  const double tol_phi = 1e-8 * (1.0 + series.front().max_phi);
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    const double di = series[k + 1].integral_i - series[k].integral_i;
    if (di > tol_i)
      out.push_back({"integral_I monotonicity", series[k + 1].t, di});
    const double dp = series[k + 1].max_phi - series[k].max_phi;
    if (dp > tol_phi)
      out.push_back({"max_phi monotonicity", series[k + 1].t, dp});
  }
  for (const auto& r : series)
    if (r.max_phi < 0) out.push_back({"phi nonnegative", r.t, -r.max_phi});
  return out;
}

std::vector<Violation> validate_conformal_series(
    std::span<const ConformalRecord> series, int p) {
  std::vector<Violation> out;
  if (series.empty()) return out;
  const bool check_integrals = p >= series.front().sup_u + 1.0;
  const double tol_pos = 1e-12 * (1.0 + series.front().int_pos);
  const double tol_neg = 1e-12 * (1.0 + series.front().int_neg);
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    const double du = series[k + 1].sup_u - series[k].sup_u;
    if (du > 1e-12) out.push_back({"sup_u monotonicity", series[k + 1].t, du});
    if (!check_integrals) continue;
    const double dp = series[k + 1].int_pos - series[k].int_pos;
    if (dp > tol_pos)
      out.push_back({"conformal integral monotonicity", series[k + 1].t, dp});
    const double dn = series[k + 1].int_neg - series[k].int_neg;
    if (dn > tol_neg)
      out.push_back({"conformal integral monotonicity", series[k + 1].t, dn});
  }
  return out;
}

MetricField initial_from_config(const RunConfig& cfg, const Grid& grid) {
  MetricField g0 = generate_metric_initial(cfg.initial, grid);
  if (cfg.cutoff_radius > 0) g0 = cutoff_initial(g0, cfg.cutoff_radius);
  return g0;
}

HFlowRunOutput drive_hflow(const RunConfig& cfg, const MetricField& g0,
                           const std::filesystem::path* snapshot_dir) {
  const Grid& grid = g0.grid();
  const InitialData init = make_initial_data(g0);

  HFlowRunOutput out;
  out.tracked_gauge = cfg.deturck;
  out.min_jac_det = std::numeric_limits<double>::infinity();
  out.final_state = FlowState{init.g0, 0.0, 0};

  DiffeoField diffeo;
  if (cfg.deturck) diffeo = identity_diffeo(grid);

  std::vector<double> snap_times = cfg.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  auto maybe_snapshot = [&](const FlowState& s) {
    while (next_snap < snap_times.size() && s.t >= snap_times[next_snap] - 1e-12) {
      if (snapshot_dir)
        write_metric_snapshot(
            *snapshot_dir / ("snapshot_" + std::to_string(next_snap) + ".rrlx"), s.g,
            s.t);
      ++next_snap;
    }
  };

  auto record = [&](const FlowState& s, std::optional<double> drift,
                    std::optional<double> rf) {
    DiagnosticsRecord rec = compute_record(s.g, s.t, cfg.m, cfg.p, cfg.delta);
    rec.sup_drift = drift;
    rec.rf_residual = rf;
    if (rec.eps > cfg.eps_ceiling)
      throw ClosenessCeilingExceeded("run: closeness ceiling exceeded", s.t, rec.eps);
    out.series.push_back(rec);
  };

  record(out.final_state,
         cfg.deturck ? std::optional<double>(0.0) : std::optional<double>{}, {});
  maybe_snapshot(out.final_state);

  bool done = cfg.t_end <= 0;
  while (!done) {
    double dt = cfl_dt(out.final_state, cfg.safety);
    const double remaining = cfg.t_end - out.final_state.t;
    if (dt >= remaining) {
      dt = remaining;
      done = true;
    }
    FlowState prev = std::move(out.final_state);
    const bool will_record = done || (prev.step + 1) % cfg.record_every == 0;

    FlowState next;
    try {
      next = step(prev, dt);
    } catch (const NonPositiveDefinite& e) {
      throw Blowup(std::string("run: ") + e.what(), prev.t, prev.step);
    }

    std::optional<double> drift, rf;
    if (cfg.deturck) {
      MetricField pb_prev;
      if (will_record) pb_prev = pullback(diffeo, prev.g);
      diffeo = advect(diffeo, prev, next);
      if (will_record) {
        const MetricField pb_next = pullback(diffeo, next.g);
        rf = rf_residual(pb_prev, pb_next, dt);
        out.final_rf_residual = rf;
        out.min_jac_det = std::min(out.min_jac_det, min_jacobian_det(diffeo));
        drift = drift_stats(diffeo, 0.0).sup_drift;
      }
    }

    out.final_state = std::move(next);
    maybe_snapshot(out.final_state);
    if (will_record) record(out.final_state, drift, rf);
  }
  return out;
}

namespace {

using nlohmann::json;

json fit_to_json(const FitResult& fit) {
  return json{{"exponent", fit.exponent},
              {"window", {fit.window_lo, fit.window_hi}},
              {"residual_rms", fit.residual_rms},
              {"samples", fit.samples},
              {"reference",
               {{"base", fit.ref_exponent_base},
                {"improved", fit.ref_exponent_improved}}}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FlowError("write_json: cannot open " + path.string());
  out << j.dump(2) << '\n';
}

int run_hflow_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                         const SeriesHook& hook) {
  json report;
  try {
    const Grid grid = grid_from_config(cfg);
    const MetricField g0 = initial_from_config(cfg, grid);
    HFlowRunOutput out = drive_hflow(cfg, g0, &out_dir);

    if (hook) hook(out.series);
    write_diagnostics_csv(out_dir / "diagnostics.csv", out.series);

    const std::vector<Violation> violations = validate_hflow_series(out.series);

    report["status"] = violations.empty() ? "ok" : "violation";
    report["final_t"] = out.final_state.t;
    report["steps"] = out.final_state.step;
    report["final_eps"] = out.series.back().eps;
    if (out.tracked_gauge) {
      report["min_jacobian_det"] = out.min_jac_det;
      if (out.min_jac_det <= 0)
        report["status"] = "violation";
    }
    json jv = json::array();
    for (const auto& v : violations)
      jv.push_back({{"invariant", v.invariant}, {"t", v.t}, {"excess", v.excess}});
    report["violations"] = jv;

    std::vector<std::pair<double, double>> decay;
    for (const auto& r : out.series) decay.emplace_back(r.t, r.sup_dev);
    const double win_lo = cfg.fit_window_lo >= 0 ? cfg.fit_window_lo : 0.1 * cfg.t_end;
    const double win_hi = cfg.fit_window_hi >= 0 ? cfg.fit_window_hi : cfg.t_end;
    try {
      const FitResult fit = fit_decay(decay, win_lo, win_hi, cfg.dim, cfg.p);
      write_json(out_dir / "fit.json", fit_to_json(fit));
      report["fit"] = "fit.json";
    } catch (const InsufficientData& e) {
      report["fit"] = std::string("skipped: ") + e.what();
    }

    write_json(out_dir / "report.json", report);
    return report["status"] == "ok" ? 0 : 1;
  } catch (const FlowError& e) {
    report["status"] = "error";
    report["error"] = e.what();
    write_json(out_dir / "report.json", report);
    return 2;
  }
}

int run_conformal_experiment(const RunConfig& cfg,
                             const std::filesystem::path& out_dir) {
  json report;
  try {
    const Grid grid = grid_from_config(cfg);
    ConformalField c = generate_conformal_initial(cfg.initial, grid);

    std::vector<ConformalRecord> series;
    auto record = [&](const ConformalField& s) {
      ConformalRecord r;
      r.t = s.t;
      for (std::size_t f = 0; f < grid.node_count(); ++f)
        r.sup_u = std::max(r.sup_u, std::abs(s.u[f]));
      r.int_pos = conformal_monotone(s, cfg.p, cfg.delta, false);
      r.int_neg = conformal_monotone(s, cfg.p, cfg.delta, true);
      series.push_back(r);
    };
    record(c);

    bool done = cfg.t_end <= 0;
    while (!done) {
      double dt = conformal_cfl_dt(c, cfg.safety);
      const double remaining = cfg.t_end - c.t;
      if (dt >= remaining) {
        dt = remaining;
        done = true;
      }
      c = step_conformal(c, dt);
      if (done || c.step % cfg.record_every == 0) record(c);
    }

    std::ofstream csv(out_dir / "conformal.csv", std::ios::trunc);
    if (!csv) throw FlowError("run_experiment: cannot open conformal.csv");
    csv << "t,sup_u,int_pos,int_neg\n";
    for (const auto& r : series)
      csv << format_double(r.t) << ',' << format_double(r.sup_u) << ','
          << format_double(r.int_pos) << ',' << format_double(r.int_neg) << '\n';
    csv.close();

    const std::vector<Violation> violations = validate_conformal_series(series, cfg.p);
    report["status"] = violations.empty() ? "ok" : "violation";
    report["final_t"] = c.t;
    report["steps"] = c.step;
    report["final_sup_u"] = series.back().sup_u;
    json jv = json::array();
    for (const auto& v : violations)
      jv.push_back({{"invariant", v.invariant}, {"t", v.t}, {"excess", v.excess}});
    report["violations"] = jv;
    write_json(out_dir / "report.json", report);
    return violations.empty() ? 0 : 1;
  } catch (const FlowError& e) {
    report["status"] = "error";
    report["error"] = e.what();
    write_json(out_dir / "report.json", report);
    return 2;
  }
}

}  // namespace

int run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                   const SeriesHook& hook) {
  std::filesystem::create_directories(out_dir);
  if (cfg.flow == FlowKind::Conformal2D) return run_conformal_experiment(cfg, out_dir);
  return run_hflow_experiment(cfg, out_dir, hook);
}

StudyReport convergence_study(const RunConfig& cfg, int levels) {
  if (levels < 2) throw ConfigError("study: 'levels' must be at least 2");
  if (cfg.flow != FlowKind::HFlow)
    throw ConfigError("study: 'flow' must be hflow");
  if (cfg.initial.generator == "rough")
    throw ConfigError("study: 'initial.gen' rough does not refine");

  StudyReport rep;
  for (int l = 0; l < levels; ++l) {
    RunConfig lvl = cfg;
    const int scale = 1 << l;
    for (int& s : lvl.shape) s *= scale;
    lvl.spacing = cfg.spacing / scale;
    lvl.snapshot_times.clear();

    const Grid grid = grid_from_config(lvl);
    const MetricField g0 = initial_from_config(lvl, grid);

    StudyLevel level;
    level.dx = lvl.spacing;
    level.identity_sup = identity_discrepancy(g0);
    HFlowRunOutput out = drive_hflow(lvl, g0, nullptr);
    level.final_sup_dev = out.series.back().sup_dev;
    level.rf_residual = out.final_rf_residual;
    rep.levels.push_back(level);
  }

  for (std::size_t i = 0; i + 1 < rep.levels.size(); ++i) {
    rep.identity_orders.push_back(
        std::log2(rep.levels[i].identity_sup / rep.levels[i + 1].identity_sup));
    if (rep.levels[i].rf_residual && rep.levels[i + 1].rf_residual)
      rep.rf_orders.push_back(
          std::log2(*rep.levels[i].rf_residual / *rep.levels[i + 1].rf_residual));
  }
  for (std::size_t i = 0; i + 2 < rep.levels.size(); ++i) {
    const double d0 =
        std::abs(rep.levels[i].final_sup_dev - rep.levels[i + 1].final_sup_dev);
    const double d1 =
        std::abs(rep.levels[i + 1].final_sup_dev - rep.levels[i + 2].final_sup_dev);
    rep.self_orders.push_back(std::log2(d0 / d1));
  }
  return rep;
}

}  // namespace hflow
