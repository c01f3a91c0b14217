#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hflow/config.hpp"
#include "hflow/diagnostics.hpp"
#include "hflow/errors.hpp"
#include "hflow/experiment.hpp"
#include "hflow/io.hpp"

using namespace hflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "hflow_tests" / leaf;
  fs::create_directories(p);
  return p;
}

// Expects parse_config to reject the text with a message naming `needle`.
void check_rejects(const std::string& json_text, const std::string& needle) {
  try {
    parse_config(json_text);
    FAIL_CHECK("config accepted: " << json_text);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK_MESSAGE(what.find(needle) != std::string::npos,
                  "message '" << what << "' does not name " << needle);
  }
}

const char* kTinyRun = R"({
  "dim": 2, "shape": [8, 8], "spacing": 0.1, "boundary": "periodic",
  "flow": "hflow", "initial": {"gen": "sinusoid", "eps0": 0.04, "seed": 5},
  "t_end": 0.002, "record_every": 2
})";

}  // namespace

TEST_CASE("config validation names the offending key") {
  check_rejects(R"({"shape": [8,8], "spacing": 0.1})", "dim");
  check_rejects(R"({"dim": 5, "shape": [8,8,8,8,8], "spacing": 0.1})", "dim");
  check_rejects(R"({"dim": 2, "shape": [8], "spacing": 0.1})", "shape");
  check_rejects(R"({"dim": 2, "shape": [8,4], "spacing": 0.1})", "shape");
  check_rejects(R"({"dim": 2, "shape": [8,8], "spacing": 0})", "spacing");
  check_rejects(R"({"dim": 2, "shape": [8,8], "spacing": 0.1, "boundary": "open"})",
                "boundary");
  check_rejects(R"({"dim": 3, "shape": [8,8,8], "spacing": 0.1, "flow": "conformal2d"})",
                "dim");
  check_rejects(
      R"({"dim": 2, "shape": [8,8], "spacing": 0.1, "t_end": 1, "flow": "conformal2d", "deturck": true})",
      "deturck");
  check_rejects(R"({"dim": 2, "shape": [8,8], "spacing": 0.1, "t_end": 1, "safety": 1.5})",
                "safety");
  check_rejects(
      R"({"dim": 2, "shape": [8,8], "spacing": 0.1, "t_end": 1, "initial": {"gen": "perlin"}})",
      "initial.gen");
  check_rejects(
      R"({"dim": 2, "shape": [8,8], "spacing": 0.1, "t_end": 1, "eps_ceiling": 0.1, "initial": {"eps0": 0.2}})",
      "eps0");
  check_rejects(R"({"dim": 2, "shape": [8,8], "spacing": 0.1})", "t_end");
  check_rejects(
      R"({"dim": 2, "shape": [8,8], "spacing": 0.1, "t_end": 1, "fit_window": [0.5, 0.1]})",
      "fit_window");
  check_rejects("not json at all", "json");
}

TEST_CASE("config parsing fills defaults and reads every knob") {
  const RunConfig cfg = parse_config(R"({
    "dim": 3, "shape": [8, 10, 12], "spacing": 0.25, "boundary": "dirichlet",
    "flow": "hflow", "initial": {"gen": "bump", "eps0": 0.07, "seed": 9},
    "t_end": 0.5, "safety": 0.5, "record_every": 4, "m": 4, "p": 2,
    "delta": 0.01, "deturck": true, "eps_ceiling": 0.3,
    "fit_window": [0.1, 0.4], "cutoff_radius": 0.9,
    "snapshot_times": [0.1, 0.2], "name": "box"
  })");
  CHECK(cfg.dim == 3);
  CHECK(cfg.shape == std::vector<int>{8, 10, 12});
  CHECK(cfg.boundary == Boundary::DirichletToH);
  CHECK(cfg.initial.generator == "bump");
  CHECK(cfg.initial.eps0 == 0.07);
  CHECK(cfg.initial.seed == 9);
  CHECK(cfg.safety == 0.5);
  CHECK(cfg.m == 4);
  CHECK(cfg.p == 2);
  CHECK(cfg.deturck);
  CHECK(cfg.fit_window_lo == 0.1);
  CHECK(cfg.fit_window_hi == 0.4);
  CHECK(cfg.cutoff_radius == 0.9);
  CHECK(cfg.snapshot_times == std::vector<double>{0.1, 0.2});
  CHECK(cfg.name == "box");

  const RunConfig tiny = parse_config(kTinyRun);
  CHECK(tiny.safety == 0.25);
  CHECK(tiny.m == 6);
  CHECK(tiny.p == 1);
  CHECK(tiny.delta == 0.0);
  CHECK(tiny.eps_ceiling == 0.5);
  CHECK_FALSE(tiny.deturck);

  const Grid grid = grid_from_config(cfg);
  CHECK(grid.dim() == 3);
  CHECK(grid.extent(1) == 10);
  CHECK(grid.spacing() == 0.25);
  CHECK(grid.boundary() == Boundary::DirichletToH);
}

TEST_CASE("config files inherit their stem as the run name") {
  const fs::path dir = scratch_dir("names");
  std::ofstream(dir / "alpha.json") << kTinyRun;
  CHECK(load_config(dir / "alpha.json").name == "alpha");

  std::ofstream(dir / "named.json")
      << R"({"dim": 2, "shape": [8,8], "spacing": 0.1, "t_end": 0.01, "name": "custom"})";
  CHECK(load_config(dir / "named.json").name == "custom");
  CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("generators are seed deterministic and land on the target exactly") {
  InitialSpec spec;
  spec.eps0 = 0.05;
  spec.seed = 123;
  for (const char* gen : {"sinusoid", "rough", "bump"}) {
    spec.generator = gen;
    for (const Boundary b : {Boundary::Periodic, Boundary::DirichletToH}) {
      const std::array<int, 2> shape{12, 12};
      const Grid g = make_grid(2, shape, 0.1, b);
      const MetricField m1 = generate_metric_initial(spec, g);
      const MetricField m2 = generate_metric_initial(spec, g);
      for (std::size_t i = 0; i < m1.data().size(); ++i)
        CHECK(m1.data()[i] == m2.data()[i]);

      CHECK(closeness_epsilon(m1) == doctest::Approx(spec.eps0).epsilon(1e-13));

      if (b == Boundary::DirichletToH) {
        for (std::size_t f = 0; f < g.node_count(); ++f)
          if (g.on_boundary_ring(g.unflat(f))) {
            CHECK(m1.comp(f, 0) == 1.0);
            CHECK(m1.comp(f, 1) == 0.0);
            CHECK(m1.comp(f, 2) == 1.0);
          }
      }

      InitialSpec other = spec;
      other.seed = 321;
      const MetricField m3 = generate_metric_initial(other, g);
      bool differs = false;
      for (std::size_t i = 0; i < m1.data().size() && !differs; ++i)
        differs = m1.data()[i] != m3.data()[i];
      if (spec.generator != std::string("bump")) CHECK(differs);
    }
  }
}

TEST_CASE("conformal generator hits the requested amplitude") {
  InitialSpec spec;
  spec.generator = "sinusoid";
  spec.amp = 0.8;
  spec.seed = 77;
  const std::array<int, 2> shape{16, 16};
  const Grid g = make_grid(2, shape, 0.1, Boundary::DirichletToH);
  const ConformalField c = generate_conformal_initial(spec, g);
  double sup = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    if (g.on_boundary_ring(g.unflat(f))) CHECK(c.u[f] == 0.0);
    sup = std::max(sup, std::abs(c.u[f]));
  }
  CHECK(sup == doctest::Approx(0.8).epsilon(1e-13));
}

TEST_CASE("snapshots round trip bit for bit and reject corruption") {
  const fs::path dir = scratch_dir("snaps");
  const std::array<int, 2> shape{8, 8};
  const Grid g = make_grid(2, shape, 0.1, Boundary::Periodic);
  InitialSpec spec;
  spec.eps0 = 0.06;
  spec.seed = 2;
  const MetricField m = generate_metric_initial(spec, g);

  const fs::path file = dir / "state.rrlx";
  write_metric_snapshot(file, m, 0.125);
  const Snapshot snap = read_snapshot(file);
  CHECK(snap.t == 0.125);
  CHECK(snap.kind == SnapshotKind::Metric);
  CHECK(snap.grid.same_layout(g));
  const MetricField back = metric_from_snapshot(snap);
  for (std::size_t i = 0; i < m.data().size(); ++i)
    CHECK(back.data()[i] == m.data()[i]);

  // Re-serializing the reload gives identical bytes.
  const fs::path file2 = dir / "state2.rrlx";
  write_metric_snapshot(file2, back, 0.125);
  std::ifstream a(file, std::ios::binary), b(file2, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
  CHECK(!bytes_a.empty());

  std::fstream corrupt(file, std::ios::binary | std::ios::in | std::ios::out);
  corrupt.put('X');
  corrupt.close();
  CHECK_THROWS_AS(read_snapshot(file), FlowError);
}

TEST_CASE("doubles survive the text format exactly") {
  for (const double v : {0.1, 1.0 / 3.0, 6.25e-4, 1e-300, -2.5e17, 0.0,
                         0.030834455400059024}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("diagnostics CSV keeps its schema and round trips") {
  const fs::path dir = scratch_dir("csv");
  std::vector<DiagnosticsRecord> series(3);
  series[0] = {0.0, 0.05, 0.048, 0.09, 0.068, 0.58, 8.3, {}, {}};
  series[1] = {0.1, 0.03, 0.029, 0.04, 0.028, 0.37, 5.2, 0.001, 5.7};
  series[2] = {0.2, 0.02, 0.019, 0.02, 0.012, 0.23, 3.2, 0.002, 2.9};

  const fs::path file = dir / "diag.csv";
  write_diagnostics_csv(file, series);

  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,eps,sup_dev,max_phi,integral_I,grad1,grad2,sup_drift,rf_residual");

  const auto back = read_diagnostics_csv(file);
  REQUIRE(back.size() == series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    CHECK(back[k].t == series[k].t);
    CHECK(back[k].eps == series[k].eps);
    CHECK(back[k].sup_dev == series[k].sup_dev);
    CHECK(back[k].max_phi == series[k].max_phi);
    CHECK(back[k].integral_i == series[k].integral_i);
    CHECK(back[k].grad1 == series[k].grad1);
    CHECK(back[k].grad2 == series[k].grad2);
    CHECK(back[k].sup_drift.has_value() == series[k].sup_drift.has_value());
    CHECK(back[k].rf_residual.has_value() == series[k].rf_residual.has_value());
    if (back[k].sup_drift) CHECK(*back[k].sup_drift == *series[k].sup_drift);
    if (back[k].rf_residual) CHECK(*back[k].rf_residual == *series[k].rf_residual);
  }
}

TEST_CASE("experiments succeed, write their outputs, and exit zero") {
  const fs::path dir = scratch_dir("run_ok");
  const RunConfig cfg = parse_config(kTinyRun);
  CHECK(run_experiment(cfg, dir) == 0);
  CHECK(fs::exists(dir / "diagnostics.csv"));
  CHECK(fs::exists(dir / "report.json"));

  std::ifstream in(dir / "report.json");
  const auto report = nlohmann::json::parse(in);
  CHECK(report["status"] == "ok");
  CHECK(report["violations"].empty());
  CHECK(report["final_t"] == 0.002);
}

TEST_CASE("doctored series fail the run and name the broken invariant") {
  const fs::path dir = scratch_dir("run_doctored");
  const RunConfig cfg = parse_config(kTinyRun);
  const int rc = run_experiment(cfg, dir, [](std::vector<DiagnosticsRecord>& s) {
    REQUIRE(s.size() >= 2);
    s.back().integral_i = s.front().integral_i + 1.0;
  });
  CHECK(rc == 1);

  std::ifstream in(dir / "report.json");
  const auto report = nlohmann::json::parse(in);
  CHECK(report["status"] == "violation");
  REQUIRE(!report["violations"].empty());
  CHECK(report["violations"][0]["invariant"] == "integral_I monotonicity");
}

TEST_CASE("runs that halt on the ceiling report an error exit") {
  const fs::path dir = scratch_dir("run_halt");
  RunConfig cfg = parse_config(kTinyRun);
  cfg.eps_ceiling = cfg.initial.eps0 * 0.5;  // below the data: trips at t = 0
  CHECK(run_experiment(cfg, dir) == 2);
  std::ifstream in(dir / "report.json");
  const auto report = nlohmann::json::parse(in);
  CHECK(report["status"] == "error");
  CHECK(!report["error"].empty());
}

TEST_CASE("snapshot requests land at the recorded times") {
  const fs::path dir = scratch_dir("run_snaps");
  RunConfig cfg = parse_config(kTinyRun);
  cfg.snapshot_times = {0.0, 0.001};
  CHECK(run_experiment(cfg, dir) == 0);
  CHECK(fs::exists(dir / "snapshot_0.rrlx"));
  CHECK(fs::exists(dir / "snapshot_1.rrlx"));
  const Snapshot s0 = read_snapshot(dir / "snapshot_0.rrlx");
  CHECK(s0.t == 0.0);
  const Snapshot s1 = read_snapshot(dir / "snapshot_1.rrlx");
  CHECK(s1.t >= 0.001);
}

TEST_CASE("snapshot initial data resumes bit-exactly") {
  const fs::path dir = scratch_dir("resume");
  const std::array<int, 2> shape{8, 8};
  const Grid g = make_grid(2, shape, 0.1, Boundary::Periodic);
  InitialSpec spec;
  spec.eps0 = 0.05;
  spec.seed = 31;
  const MetricField m = generate_metric_initial(spec, g);
  write_metric_snapshot(dir / "init.rrlx", m, 0.0);

  RunConfig cfg = parse_config(kTinyRun);
  cfg.initial.snapshot = (dir / "init.rrlx").string();
  const Grid cg = grid_from_config(cfg);
  const MetricField loaded = initial_from_config(cfg, cg);
  for (std::size_t i = 0; i < m.data().size(); ++i)
    CHECK(loaded.data()[i] == m.data()[i]);
}

TEST_CASE("convergence studies reject unusable setups") {
  RunConfig cfg = parse_config(kTinyRun);
  CHECK_THROWS_AS(convergence_study(cfg, 1), ConfigError);
  cfg.initial.generator = "rough";
  CHECK_THROWS_AS(convergence_study(cfg, 2), ConfigError);
}
