#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hflow/conformal.hpp"
#include "hflow/fields.hpp"

namespace hflow {

enum class FlowKind { HFlow, Conformal2D };

struct InitialSpec {
  std::string generator = "sinusoid";  // sinusoid | rough | bump
  double eps0 = 0;                     // target closeness for metric data
  double amp = 0;                      // target sup|u| for conformal data
  std::uint64_t seed = 1;
  std::string snapshot;  // when set, load the initial field from this file
};

struct RunConfig {
  int dim = 0;
  std::vector<int> shape;
  double spacing = 0;
  Boundary boundary = Boundary::Periodic;
  std::vector<double> origin;
  FlowKind flow = FlowKind::HFlow;
  InitialSpec initial;
  double t_end = 0;
  double safety = 0.25;
  int record_every = 10;
  int m = 6;
  int p = 1;
  double delta = 0;
  bool deturck = false;
  double eps_ceiling = 0.5;
  double fit_window_lo = -1;  // negative = default [0.1 t_end, t_end]
  double fit_window_hi = -1;
  double cutoff_radius = 0;  // > 0 blends the data into the background
  std::vector<double> snapshot_times;
  std::string name = "run";
};

// Parses and validates a flat JSON configuration. Validation failures raise
// ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

Grid grid_from_config(const RunConfig& cfg);

// Seed-deterministic initial data; smooth generators are closed-form in the
// coordinates so the same seed refines consistently across resolutions.
// Metric data is rescaled post hoc so the closeness lands on eps0 exactly.
MetricField generate_metric_initial(const InitialSpec& spec, const Grid& g);

// Conformal data rescaled so sup|u| lands on amp exactly.
ConformalField generate_conformal_initial(const InitialSpec& spec, const Grid& g);

}  // namespace hflow
