#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hflow/diagnostics.hpp"
#include "hflow/fields.hpp"

namespace hflow {

// Binary state snapshot: 64-byte fixed header (magic "RRLX", version 1,
// layout metadata, time), then the payload as little-endian doubles in
// row-major node order. Round-trips bit-exactly.
enum class SnapshotKind : std::uint32_t { Metric = 0, Scalar = 1 };

struct Snapshot {
  Grid grid;
  SnapshotKind kind = SnapshotKind::Metric;
  double t = 0;
  std::vector<double> payload;
};

void write_snapshot(const std::filesystem::path& path, const Grid& grid,
                    SnapshotKind kind, double t, std::span<const double> payload);
Snapshot read_snapshot(const std::filesystem::path& path);

void write_metric_snapshot(const std::filesystem::path& path, const MetricField& g,
                           double t);
MetricField metric_from_snapshot(const Snapshot& snap);

// Shortest exact decimal form; reparses to the identical double.
std::string format_double(double v);

// Fixed schema: t,eps,sup_dev,max_phi,integral_I,grad1,grad2,sup_drift,rf_residual
// Optional columns stay empty when the gauge-map tracking is disabled.
void write_diagnostics_csv(const std::filesystem::path& path,
                           std::span<const DiagnosticsRecord> series);
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path);

}  // namespace hflow
