#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hflow/config.hpp"
#include "hflow/deturck.hpp"
#include "hflow/flow.hpp"

namespace hflow {

// Sup over stencil-safe nodes of the max-abs difference between the expanded
// evolution operator and its curvature-based form. Second order small.
double identity_discrepancy(const MetricField& g);

struct Violation {
  std::string invariant;
  double t = 0;
  double excess = 0;
};

// Monotonicity and sign checks on a recorded series; tolerances scale as
// 1e-8 * (1 + initial value).
std::vector<Violation> validate_hflow_series(std::span<const DiagnosticsRecord> series);

struct ConformalRecord {
  double t = 0;
  double sup_u = 0;
  double int_pos = 0;
  double int_neg = 0;
};

// sup|u| must never increase; the one-sided integrals must not increase when
// p is at least sup|u0| + 1.
std::vector<Violation> validate_conformal_series(std::span<const ConformalRecord> series,
                                                 int p);

// Mutates the recorded series before validation; used by tests to inject
// doctored data and exercise the failure path.
using SeriesHook = std::function<void(std::vector<DiagnosticsRecord>&)>;

// Runs one configured experiment, writing diagnostics.csv (or conformal.csv),
// fit.json when a decay fit is possible, snapshots, and report.json into
// out_dir. Returns 0 when every asserted invariant held, 1 on violations,
// 2 on errors (blow-up, ceiling, configuration).
int run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                   const SeriesHook& hook = {});

struct StudyLevel {
  double dx = 0;
  double identity_sup = 0;
  double final_sup_dev = 0;
  std::optional<double> rf_residual;
};

struct StudyReport {
  std::vector<StudyLevel> levels;
  std::vector<double> identity_orders;      // per adjacent pair
  std::vector<double> rf_orders;            // per adjacent pair, gauge runs
  std::vector<double> self_orders;          // needs three or more levels
};

// Reruns the configuration across halved spacings. Requires a smooth
// (refinable) generator and at least two levels.
StudyReport convergence_study(const RunConfig& cfg, int levels);

// Internal driver shared by run_experiment and convergence_study.
struct HFlowRunOutput {
  FlowState final_state;
  std::vector<DiagnosticsRecord> series;
  std::optional<double> final_rf_residual;
  double min_jac_det = 0;
  bool tracked_gauge = false;
};

HFlowRunOutput drive_hflow(const RunConfig& cfg, const MetricField& g0,
                           const std::filesystem::path* snapshot_dir = nullptr);

MetricField initial_from_config(const RunConfig& cfg, const Grid& grid);

}  // namespace hflow
