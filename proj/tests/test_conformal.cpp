#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "hflow/conformal.hpp"
#include "hflow/errors.hpp"
#include "hflow/experiment.hpp"
#include "hflow/rng.hpp"

using namespace hflow;

namespace {

Grid square(int n, double dx, Boundary b = Boundary::Periodic) {
  const std::array<int, 2> shape{n, n};
  return make_grid(2, shape, dx, b);
}

}  // namespace

TEST_CASE("conformal fields require two dimensions") {
  const std::array<int, 3> shape{8, 8, 8};
  const Grid g3 = make_grid(3, shape, 0.1, Boundary::Periodic);
  CHECK_THROWS_AS(make_conformal(g3), std::invalid_argument);
  CHECK_NOTHROW(make_conformal(square(8, 0.1)));
}

TEST_CASE("constant factors are periodic fixed points") {
  const Grid g = square(8, 0.1);
  ConformalField c = make_conformal(g);
  for (std::size_t f = 0; f < g.node_count(); ++f) c.u[f] = 0.37;
  const ConformalField next = step_conformal(c, conformal_cfl_dt(c, 0.25));
  for (std::size_t f = 0; f < g.node_count(); ++f) CHECK(next.u[f] == 0.37);
}

TEST_CASE("stable step bound scales with the largest inverse factor") {
  const Grid g = square(8, 0.1);
  ConformalField c = make_conformal(g);
  CHECK(conformal_cfl_dt(c, 0.25) == doctest::Approx(6.25e-4).epsilon(1e-14));
  c.u[5] = -std::log(2.0);  // e^{-u} = 2 at one node
  CHECK(conformal_cfl_dt(c, 0.25) == doctest::Approx(3.125e-4).epsilon(1e-13));
  CHECK_THROWS_AS(conformal_cfl_dt(c, 0.0), std::invalid_argument);
}

TEST_CASE("one small mode decays by the damped discrete symbol") {
  const int n = 16;
  const double dx = 0.1;
  const Grid g = square(n, dx);
  const double a = 1e-3;
  ConformalField c = make_conformal(g);
  for (std::size_t f = 0; f < g.node_count(); ++f)
    c.u[f] = a * std::sin(2.0 * M_PI * g.unflat(f)[0] / n);

  const double mu = 4.0 / (dx * dx) * std::pow(std::sin(M_PI / n), 2);
  const double dt = 5e-4;
  const int steps = 200;
  const double rho = 1.0 - dt * mu + 0.5 * dt * mu * dt * mu;
  REQUIRE(dt < conformal_cfl_dt(c, 1.0));
  for (int k = 0; k < steps; ++k) c = step_conformal(c, dt);

  double sup = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f)
    sup = std::max(sup, std::abs(c.u[f]));
  CHECK(sup == doctest::Approx(a * std::pow(rho, steps)).epsilon(1e-2));
}

TEST_CASE("the sup norm never increases across a stable step") {
  const Grid g = square(12, 0.1);
  ConformalField c = make_conformal(g);
  SplitMix64 rng(19);
  for (std::size_t f = 0; f < g.node_count(); ++f) c.u[f] = 0.5 * rng.next_sym();

  double prev = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f)
    prev = std::max(prev, std::abs(c.u[f]));
  for (int k = 0; k < 50; ++k) {
    c = step_conformal(c, conformal_cfl_dt(c, 0.25));
    double sup = 0;
    for (std::size_t f = 0; f < g.node_count(); ++f)
      sup = std::max(sup, std::abs(c.u[f]));
    CHECK(sup <= prev + 1e-12);
    prev = sup;
  }
}

TEST_CASE("one-sided integrals count the excess per node") {
  const Grid g = square(8, 0.25);
  ConformalField c = make_conformal(g);
  c.u[10] = 0.4;
  c.u[30] = -0.9;

  const double cell = 0.25 * 0.25;
  CHECK(conformal_monotone(c, 1, 0.0, false) == doctest::Approx(0.4 * cell));
  CHECK(conformal_monotone(c, 1, 0.0, true) == doctest::Approx(0.9 * cell));
  CHECK(conformal_monotone(c, 2, 0.1, false) ==
        doctest::Approx(0.5 * 0.3 * 0.3 * cell));
  CHECK(conformal_monotone(c, 1, 1.0, false) == 0.0);
}

TEST_CASE("bounded runs pin the ring and flatten out") {
  const Grid g = square(10, 0.1, Boundary::DirichletToH);
  ConformalField c = make_conformal(g);
  for (std::size_t f = 0; f < g.node_count(); ++f)
    if (!g.on_boundary_ring(g.unflat(f))) c.u[f] = 0.5;

  for (int k = 0; k < 400; ++k) c = step_conformal(c, conformal_cfl_dt(c, 0.25));
  double sup = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    if (g.on_boundary_ring(g.unflat(f))) CHECK(c.u[f] == 0.0);
    sup = std::max(sup, std::abs(c.u[f]));
  }
  CHECK(sup < 0.05);
}

TEST_CASE("mean-compensated periodic data relaxes to the flat factor") {
  // On a torus the conserved quantity is the integral of e^u, so data built
  // as log(1 + a sin) has the flat factor as its long-time limit.
  const int n = 16;
  const Grid g = square(n, 0.1);
  ConformalField c = make_conformal(g);
  const double a = 0.3;
  for (std::size_t f = 0; f < g.node_count(); ++f)
    c.u[f] = std::log(1.0 + a * std::sin(2.0 * M_PI * g.unflat(f)[0] / n));

  double sup0 = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f)
    sup0 = std::max(sup0, std::abs(c.u[f]));

  while (c.t < 0.2) c = step_conformal(c, conformal_cfl_dt(c, 0.25));
  double sup = 0;
  for (std::size_t f = 0; f < g.node_count(); ++f)
    sup = std::max(sup, std::abs(c.u[f]));
  CHECK(sup < 0.05 * sup0);
}

TEST_CASE("series validation flags doctored conformal records") {
  std::vector<ConformalRecord> clean;
  for (int k = 0; k < 5; ++k)
    clean.push_back({0.01 * k, 0.5 / (1 + k), 0.3 / (1 + k), 0.1 / (1 + k)});
  CHECK(validate_conformal_series(clean, 2).empty());

  std::vector<ConformalRecord> doctored = clean;
  doctored[3].sup_u = doctored[2].sup_u + 1e-3;
  const auto violations = validate_conformal_series(doctored, 2);
  REQUIRE(!violations.empty());
  CHECK(violations.front().invariant == "sup_u monotonicity");

  // Integral checks only engage once p dominates the initial sup.
  std::vector<ConformalRecord> bumped = clean;
  bumped[2].int_pos = bumped[1].int_pos + 1e-3;
  CHECK(!validate_conformal_series(bumped, 2).empty());
  CHECK(validate_conformal_series(bumped, 0).empty());
}
