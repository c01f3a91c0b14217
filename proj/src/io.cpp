#include "hflow/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hflow/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace hflow {

namespace {

constexpr std::size_t kHeaderSize = 64;
constexpr char kMagic[4] = {'R', 'R', 'L', 'X'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(unsigned char* buf, std::size_t off, T v) {
  std::memcpy(buf + off, &v, sizeof(T));
}

template <class T>
T get(const unsigned char* buf, std::size_t off) {
  T v;
  std::memcpy(&v, buf + off, sizeof(T));
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Grid& grid,
                    SnapshotKind kind, double t, std::span<const double> payload) {
  unsigned char header[kHeaderSize] = {};
  std::memcpy(header, kMagic, 4);
  put<std::uint32_t>(header, 4, kVersion);
  put<std::uint32_t>(header, 8, static_cast<std::uint32_t>(grid.dim()));
  put<std::uint32_t>(header, 12,
                     grid.boundary() == Boundary::Periodic ? 0u : 1u);
  put<std::uint32_t>(header, 16, static_cast<std::uint32_t>(kind));
  const std::uint32_t ncomp =
      kind == SnapshotKind::Metric ? sym_comp_count(grid.dim()) : 1u;
  put<std::uint32_t>(header, 20, ncomp);
  for (int d = 0; d < kMaxDim; ++d)
    put<std::uint32_t>(header, 24 + 4 * d,
                       d < grid.dim() ? static_cast<std::uint32_t>(grid.extent(d)) : 0u);
  put<double>(header, 40, grid.spacing());
  put<double>(header, 48, t);
  put<std::uint64_t>(header, 56, payload.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FlowError("write_snapshot: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(header), kHeaderSize);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw FlowError("write_snapshot: write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FlowError("read_snapshot: cannot open " + path.string());
  unsigned char header[kHeaderSize];
  in.read(reinterpret_cast<char*>(header), kHeaderSize);
  if (!in || std::memcmp(header, kMagic, 4) != 0)
    throw FlowError("read_snapshot: bad magic in " + path.string());
  if (get<std::uint32_t>(header, 4) != kVersion)
    throw FlowError("read_snapshot: unsupported version in " + path.string());

  const int dim = static_cast<int>(get<std::uint32_t>(header, 8));
  const Boundary boundary =
      get<std::uint32_t>(header, 12) == 0 ? Boundary::Periodic : Boundary::DirichletToH;
  const auto kind = static_cast<SnapshotKind>(get<std::uint32_t>(header, 16));
  const std::uint32_t ncomp = get<std::uint32_t>(header, 20);
  std::vector<int> shape(dim);
  for (int d = 0; d < dim; ++d)
    shape[d] = static_cast<int>(get<std::uint32_t>(header, 24 + 4 * d));
  const double spacing = get<double>(header, 40);
  const double t = get<double>(header, 48);
  const std::uint64_t count = get<std::uint64_t>(header, 56);

  Snapshot snap;
  snap.grid = Grid(dim, shape, spacing, boundary);
  snap.kind = kind;
  snap.t = t;
  const std::uint64_t expect =
      snap.grid.node_count() * static_cast<std::uint64_t>(ncomp);
  if (count != expect)
    throw FlowError("read_snapshot: payload size mismatch in " + path.string());
  snap.payload.resize(count);
  in.read(reinterpret_cast<char*>(snap.payload.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw FlowError("read_snapshot: truncated payload in " + path.string());
  return snap;
}

void write_metric_snapshot(const std::filesystem::path& path, const MetricField& g,
                           double t) {
  write_snapshot(path, g.grid(), SnapshotKind::Metric, t, g.data());
}

MetricField metric_from_snapshot(const Snapshot& snap) {
  if (snap.kind != SnapshotKind::Metric)
    throw FlowError("metric_from_snapshot: snapshot does not hold a metric");
  MetricField g = MetricField::identity(snap.grid);
  g.data() = snap.payload;
  return g;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_diagnostics_csv(const std::filesystem::path& path,
                           std::span<const DiagnosticsRecord> series) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FlowError("write_diagnostics_csv: cannot open " + path.string());
  out << "t,eps,sup_dev,max_phi,integral_I,grad1,grad2,sup_drift,rf_residual\n";
  for (const auto& r : series) {
    out << format_double(r.t) << ',' << format_double(r.eps) << ','
        << format_double(r.sup_dev) << ',' << format_double(r.max_phi) << ','
        << format_double(r.integral_i) << ',' << format_double(r.grad1) << ','
        << format_double(r.grad2) << ','
        << (r.sup_drift ? format_double(*r.sup_drift) : "") << ','
        << (r.rf_residual ? format_double(*r.rf_residual) : "") << '\n';
  }
  if (!out) throw FlowError("write_diagnostics_csv: write failed");
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FlowError("read_diagnostics_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw FlowError("read_diagnostics_csv: empty file " + path.string());

  std::vector<DiagnosticsRecord> series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(9);
    DiagnosticsRecord r;
    r.t = std::stod(cells[0]);
    r.eps = std::stod(cells[1]);
    r.sup_dev = std::stod(cells[2]);
    r.max_phi = std::stod(cells[3]);
    r.integral_i = std::stod(cells[4]);
    r.grad1 = std::stod(cells[5]);
    r.grad2 = std::stod(cells[6]);
    if (!cells[7].empty()) r.sup_drift = std::stod(cells[7]);
    if (!cells[8].empty()) r.rf_residual = std::stod(cells[8]);
    series.push_back(r);
  }
  return series;
}

}  // namespace hflow
