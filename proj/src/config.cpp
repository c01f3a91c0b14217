#include "hflow/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hflow/diagnostics.hpp"
#include "hflow/errors.hpp"
#include "hflow/io.hpp"
#include "hflow/rng.hpp"
#include "hflow/symmetric.hpp"

namespace hflow {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config: missing key '" + key + "'");
  if (!j[key].is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid json: ") + e.what());
  }

  RunConfig cfg;
  cfg.dim = static_cast<int>(require_number(j, "dim"));
  if (cfg.dim < 2 || cfg.dim > kMaxDim)
    throw ConfigError("config: 'dim' must be between 2 and 4");

  if (!j.contains("shape") || !j["shape"].is_array())
    throw ConfigError("config: 'shape' must be an array");
  for (const auto& v : j["shape"]) cfg.shape.push_back(v.get<int>());
  if (static_cast<int>(cfg.shape.size()) != cfg.dim)
    throw ConfigError("config: 'shape' length must equal 'dim'");
  for (int s : cfg.shape)
    if (s < 8) throw ConfigError("config: 'shape' entries must be at least 8");

  cfg.spacing = require_number(j, "spacing");
  if (!(cfg.spacing > 0)) throw ConfigError("config: 'spacing' must be positive");

  const std::string boundary = j.value("boundary", "periodic");
  if (boundary == "periodic")
    cfg.boundary = Boundary::Periodic;
  else if (boundary == "dirichlet")
    cfg.boundary = Boundary::DirichletToH;
  else
    throw ConfigError("config: 'boundary' must be 'periodic' or 'dirichlet'");

  if (j.contains("origin")) {
    if (!j["origin"].is_array()) throw ConfigError("config: 'origin' must be an array");
    for (const auto& v : j["origin"]) cfg.origin.push_back(v.get<double>());
    if (static_cast<int>(cfg.origin.size()) != cfg.dim)
      throw ConfigError("config: 'origin' length must equal 'dim'");
  }

  const std::string flow = j.value("flow", "hflow");
  if (flow == "hflow")
    cfg.flow = FlowKind::HFlow;
  else if (flow == "conformal2d")
    cfg.flow = FlowKind::Conformal2D;
  else
    throw ConfigError("config: 'flow' must be 'hflow' or 'conformal2d'");
  if (cfg.flow == FlowKind::Conformal2D && cfg.dim != 2)
    throw ConfigError("config: 'flow' conformal2d requires 'dim' 2");

  cfg.t_end = require_number(j, "t_end");
  if (!(cfg.t_end >= 0)) throw ConfigError("config: 't_end' must be nonnegative");

  cfg.safety = number_or(j, "safety", 0.25);
  if (!(cfg.safety > 0) || cfg.safety > 1.0)
    throw ConfigError("config: 'safety' must lie in (0, 1]");

  cfg.record_every = static_cast<int>(number_or(j, "record_every", 10));
  if (cfg.record_every < 1)
    throw ConfigError("config: 'record_every' must be at least 1");

  cfg.m = static_cast<int>(number_or(j, "m", 6));
  if (cfg.m < 1) throw ConfigError("config: 'm' must be at least 1");
  cfg.p = static_cast<int>(number_or(j, "p", 1));
  if (cfg.p < 1) throw ConfigError("config: 'p' must be at least 1");
  cfg.delta = number_or(j, "delta", 0.0);
  if (cfg.delta < 0) throw ConfigError("config: 'delta' must be nonnegative");

  cfg.eps_ceiling = number_or(j, "eps_ceiling", 0.5);
  if (!(cfg.eps_ceiling > 0))
    throw ConfigError("config: 'eps_ceiling' must be positive");

  if (j.contains("deturck")) {
    if (!j["deturck"].is_boolean())
      throw ConfigError("config: 'deturck' must be a boolean");
    cfg.deturck = j["deturck"].get<bool>();
  }
  if (cfg.deturck && cfg.flow != FlowKind::HFlow)
    throw ConfigError("config: 'deturck' requires 'flow' hflow");

  if (j.contains("initial")) {
    const json& init = j["initial"];
    if (!init.is_object()) throw ConfigError("config: 'initial' must be an object");
    cfg.initial.generator = init.value("gen", "sinusoid");
    if (cfg.initial.generator != "sinusoid" && cfg.initial.generator != "rough" &&
        cfg.initial.generator != "bump")
      throw ConfigError("config: 'initial.gen' must be sinusoid, rough or bump");
    cfg.initial.eps0 = number_or(init, "eps0", 0.0);
    cfg.initial.amp = number_or(init, "amp", cfg.initial.eps0);
    if (init.contains("seed")) cfg.initial.seed = init["seed"].get<std::uint64_t>();
    cfg.initial.snapshot = init.value("snapshot", "");
  }
  if (cfg.flow == FlowKind::HFlow) {
    if (cfg.initial.eps0 < 0) throw ConfigError("config: 'initial.eps0' must be >= 0");
    if (cfg.initial.eps0 > cfg.eps_ceiling)
      throw ConfigError("config: 'initial.eps0' exceeds 'eps_ceiling'");
  } else if (cfg.initial.amp < 0) {
    throw ConfigError("config: 'initial.amp' must be >= 0");
  }

  cfg.fit_window_lo = 0.1 * cfg.t_end;
  cfg.fit_window_hi = cfg.t_end;
  if (j.contains("fit_window")) {
    const json& w = j["fit_window"];
    if (!w.is_array() || w.size() != 2)
      throw ConfigError("config: 'fit_window' must be [t_lo, t_hi]");
    cfg.fit_window_lo = w[0].get<double>();
    cfg.fit_window_hi = w[1].get<double>();
    if (!(cfg.fit_window_lo < cfg.fit_window_hi))
      throw ConfigError("config: 'fit_window' must satisfy t_lo < t_hi");
  }

  cfg.cutoff_radius = number_or(j, "cutoff_radius", 0.0);
  if (cfg.cutoff_radius < 0)
    throw ConfigError("config: 'cutoff_radius' must be nonnegative");

  if (j.contains("snapshot_times")) {
    if (!j["snapshot_times"].is_array())
      throw ConfigError("config: 'snapshot_times' must be an array");
    for (const auto& v : j["snapshot_times"]) cfg.snapshot_times.push_back(v.get<double>());
  }

  cfg.name = j.value("name", "run");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str());
  if (cfg.name == "run") cfg.name = path.stem().string();
  return cfg;
}

Grid grid_from_config(const RunConfig& cfg) {
  return Grid(cfg.dim, cfg.shape, cfg.spacing, cfg.boundary, cfg.origin);
}

namespace {

struct WavePattern {
  double coeff = 0;
  int k[kMaxDim] = {};
  double phase = 0;
};

// Closed-form perturbation per component; periodic grids get full waves,
// bounded grids get a window vanishing to fourth order at the ring so the
// data joins the background smoothly.
double wave_value(const WavePattern& w, const Grid& g, const NodeIndex& idx) {
  const int n = g.dim();
  if (g.boundary() == Boundary::Periodic) {
    double arg = w.phase;
    for (int d = 0; d < n; ++d)
      arg += 2.0 * M_PI * w.k[d] * (g.coord(idx, d) - g.origin(d)) / g.axis_length(d);
    return w.coeff * std::sin(arg);
  }
  double arg = w.phase;
  double window = 1;
  for (int d = 0; d < n; ++d) {
    const double s = (g.coord(idx, d) - g.origin(d)) / g.axis_span(d);
    arg += M_PI * w.k[d] * s;
    const double sw = std::sin(M_PI * s);
    window *= sw * sw * sw * sw;
  }
  return w.coeff * std::sin(arg) * window;
}

double bump_value(const Grid& g, const NodeIndex& idx, double radius) {
  double r2 = 0;
  const auto center = g.center();
  for (int d = 0; d < g.dim(); ++d) {
    const double dd = g.coord(idx, d) - center[d];
    r2 += dd * dd;
  }
  const double q = 1.0 - r2 / (radius * radius);
  return q > 0 ? q * q * q : 0.0;
}

// Largest scale keeping the blended eigenvalues inside the closeness target:
// lambda = 1 + s*mu, so s is bound by mu_max above and mu_min below.
double closeness_scale(double eps0, double mu_min, double mu_max) {
  if (eps0 <= 0) return 0.0;
  double s = std::numeric_limits<double>::infinity();
  if (mu_max > 0) s = std::min(s, eps0 / mu_max);
  if (mu_min < 0) s = std::min(s, eps0 / ((1.0 + eps0) * (-mu_min)));
  return std::isinf(s) ? 0.0 : s;
}

void pin_boundary_ring(MetricField& g) {
  const Grid& gr = g.grid();
  if (gr.boundary() != Boundary::DirichletToH) return;
  const SymMatrix id = SymMatrix::identity(gr.dim());
  for (std::size_t f = 0; f < gr.node_count(); ++f)
    if (gr.on_boundary_ring(gr.unflat(f))) g.set(f, id);
}

}  // namespace

MetricField generate_metric_initial(const InitialSpec& spec, const Grid& g) {
  if (!spec.snapshot.empty()) {
    const Snapshot snap = read_snapshot(spec.snapshot);
    return metric_from_snapshot(snap);
  }

  const int n = g.dim();
  const int nc = sym_comp_count(n);
  SplitMix64 rng(spec.seed);

  // Perturbation field P, assembled before scaling.
  MetricField pert = MetricField::identity(g);
  for (std::size_t f = 0; f < g.node_count(); ++f)
    for (int c = 0; c < nc; ++c) pert.comp(f, c) = 0.0;

  if (spec.generator == "sinusoid") {
    std::vector<WavePattern> waves(nc);
    for (int c = 0; c < nc; ++c) {
      waves[c].coeff = rng.next_sym();
      for (int d = 0; d < n; ++d)
        waves[c].k[d] = 1 + static_cast<int>(rng.next_u64() % 2);
      waves[c].phase = 2.0 * M_PI * rng.next_unit();
    }
    for (std::size_t f = 0; f < g.node_count(); ++f) {
      const NodeIndex idx = g.unflat(f);
      for (int c = 0; c < nc; ++c) pert.comp(f, c) = wave_value(waves[c], g, idx);
    }
  } else if (spec.generator == "rough") {
    // Grid-scale noise on the diagonal; deliberately not refinable.
    for (std::size_t f = 0; f < g.node_count(); ++f)
      for (int d = 0; d < n; ++d) {
        const double v = rng.next_sym();
        pert.comp(f, sym_index(n, d, d)) = v;
      }
  } else if (spec.generator == "bump") {
    double min_span = std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d) min_span = std::min(min_span, g.axis_span(d));
    const double radius = 0.35 * min_span;
    static constexpr double diag_w[kMaxDim] = {1.0, -0.7, 0.5, -0.3};
    for (std::size_t f = 0; f < g.node_count(); ++f) {
      const double b = bump_value(g, g.unflat(f), radius);
      for (int d = 0; d < n; ++d) pert.comp(f, sym_index(n, d, d)) = diag_w[d] * b;
      pert.comp(f, sym_index(n, 0, 1)) = 0.4 * b;
    }
  } else {
    throw ConfigError("config: 'initial.gen' must be sinusoid, rough or bump");
  }

  // Zero the ring perturbation first so the closeness target binds at a
  // node that survives the Dirichlet pinning.
  if (g.boundary() == Boundary::DirichletToH) {
    for (std::size_t f = 0; f < g.node_count(); ++f)
      if (g.on_boundary_ring(g.unflat(f)))
        for (int c = 0; c < nc; ++c) pert.comp(f, c) = 0.0;
  }

  double mu_min = 0, mu_max = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    const EigenSpectrum e = sym_eigenvalues(pert.matrix(f));
    mu_min = std::min(mu_min, e.min());
    mu_max = std::max(mu_max, e.max());
  }
  const double s = closeness_scale(spec.eps0, mu_min, mu_max);

  MetricField out = MetricField::identity(g);
  for (std::size_t f = 0; f < g.node_count(); ++f)
    for (int c = 0; c < nc; ++c) out.comp(f, c) += s * pert.comp(f, c);
  pin_boundary_ring(out);
  return out;
}

ConformalField generate_conformal_initial(const InitialSpec& spec, const Grid& g) {
  if (g.dim() != 2)
    throw ConfigError("config: conformal data requires 'dim' 2");
  SplitMix64 rng(spec.seed);
  ConformalField c = make_conformal(g);

  if (spec.generator == "sinusoid") {
    WavePattern w[2];
    for (int k = 0; k < 2; ++k) {
      w[k].coeff = rng.next_sym();
      for (int d = 0; d < 2; ++d) w[k].k[d] = 1 + static_cast<int>(rng.next_u64() % 2);
      w[k].phase = 2.0 * M_PI * rng.next_unit();
    }
    for (std::size_t f = 0; f < g.node_count(); ++f) {
      const NodeIndex idx = g.unflat(f);
      c.u[f] = wave_value(w[0], g, idx) + wave_value(w[1], g, idx);
    }
  } else if (spec.generator == "rough") {
    for (std::size_t f = 0; f < g.node_count(); ++f) c.u[f] = rng.next_sym();
  } else if (spec.generator == "bump") {
    double min_span = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 2; ++d) min_span = std::min(min_span, g.axis_span(d));
    const double radius = 0.35 * min_span;
    for (std::size_t f = 0; f < g.node_count(); ++f)
      c.u[f] = bump_value(g, g.unflat(f), radius);
  } else {
    throw ConfigError("config: 'initial.gen' must be sinusoid, rough or bump");
  }

  if (g.boundary() == Boundary::DirichletToH) {
    for (std::size_t f = 0; f < g.node_count(); ++f)
      if (g.on_boundary_ring(g.unflat(f))) c.u[f] = 0.0;
  }
  double sup = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f) sup = std::max(sup, std::abs(c.u[f]));
  const double s = sup > 0 ? spec.amp / sup : 0.0;
  for (std::size_t f = 0; f < g.node_count(); ++f) c.u[f] *= s;
  return c;
}

}  // namespace hflow
