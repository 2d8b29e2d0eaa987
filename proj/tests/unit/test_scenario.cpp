#include <doctest.h>

#include <cmath>

#include "mmf/scenario.hpp"

using namespace mmf;

namespace {

ErrorKind parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidGrid;
}

}  // namespace

TEST_CASE("parse a full config") {
  const ScenarioConfig c = parse_config(R"(# comment
[grid]
nx = 32
ny = 32
[manifold]
nm = 16
[model]
delta = 0.25   # trailing comment
b = 2
[initial]
preset = aligned-f
[run]
T = 0.5
dt = 0.005
seed = 9
window = elapsed
[diagnostics]
reports = energy, gronwall
r_values = 3, 4
)");
  CHECK(c.grid.nx == 32);
  CHECK(c.manifold.n_m == 16);
  CHECK(c.params.delta == 0.25);
  CHECK(c.params.b == 2.0);
  CHECK(c.initial.preset == "aligned-f");
  CHECK(c.run.seed == 9);
  CHECK(c.run.window == AverageWindow::Elapsed);
  CHECK(c.diagnostics.reports == std::vector<std::string>{"energy", "gronwall"});
  CHECK(c.diagnostics.enabled("energy"));
  CHECK_FALSE(c.diagnostics.enabled("vorticity"));
  CHECK(c.echo().at("model.delta") == "0.25");
}

TEST_CASE("typos and bad values are rejected") {
  CHECK(parse_error("[run]\ndtt = 0.1\n") == ErrorKind::ConfigInvalid);
  CHECK(parse_error("[runs]\ndt = 0.1\n") == ErrorKind::ConfigInvalid);
  CHECK(parse_error("[run]\ndt = fast\n") == ErrorKind::ConfigInvalid);
  CHECK(parse_error("[run]\ndt = 0.1\ndt = 0.2\n") == ErrorKind::ConfigInvalid);
  CHECK(parse_error("dt = 0.1\n") == ErrorKind::ConfigInvalid);
  CHECK(parse_error("[model]\ndelta = -1\n") == ErrorKind::ConfigInvalid);
  CHECK(parse_error("[initial]\npreset = vortex\n") == ErrorKind::ConfigInvalid);
  try {
    parse_config("[grid]\nnx = 32\nnxx = 3\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("physical units are rescaled") {
  const RescaleMap m = rescale_map(2.0, 3.0, 0.5);
  CHECK(m.lambda == doctest::Approx(std::sqrt(12.0)));
  CHECK(m.time_scale == doctest::Approx(6.0));
  CHECK(m.velocity_scale == doctest::Approx(0.5 * std::sqrt(12.0) / 3.0));
  CHECK(m.sigma_prefactor == doctest::Approx(3.0));
  CHECK_THROWS_AS(rescale_map(0.0, 1.0, 1.0), Error);

  const ScenarioConfig c = parse_config("[model]\nunits = physical\nnu = 2\ntau = 3\ndelta = 0.5\n[run]\nT = 6\ndt = 0.06\n");
  REQUIRE(c.conversion);
  CHECK(c.run.T == doctest::Approx(1.0));
  CHECK(c.run.dt == doctest::Approx(0.01));
}

TEST_CASE("presets") {
  ScenarioConfig c;
  c.grid = Grid2D::square(32);
  c.manifold = MicroManifold{16, 2.0};
  SUBCASE("taylor-green") {
    const SimulationState s = initial_state(c);
    CHECK(s.omega(8, 8) == doctest::Approx(2.0 * std::sin(c.grid.x(8)) * std::sin(c.grid.y(8))));
    CHECK(lp_norm(s.sigma.magnitude(), INFINITY) < 1e-15);
  }
  SUBCASE("aligned-f") {
    c.initial.preset = "aligned-f";
    const SimulationState s = initial_state(c);
    const DensityReport d = inspect_density(s.f);
    CHECK(d.admissible);
    CHECK(d.max_rho == doctest::Approx(0.75).epsilon(1e-3));
    CHECK(lp_norm(s.sigma.magnitude(), INFINITY) > 0.01);
  }
  SUBCASE("random-seeded depends on the seed") {
    c.initial.preset = "random-seeded";
    c.run.seed = 1;
    const SimulationState a = initial_state(c);
    c.run.seed = 2;
    const SimulationState b = initial_state(c);
    CHECK(lp_norm(a.omega - b.omega, 2.0) > 0.1);
  }
  SUBCASE("inadmissible density") {
    c.initial.preset = "aligned-f";
    c.initial.rho = 0.9;
    CHECK_THROWS_AS(initial_state(c), Error);
  }
}

TEST_CASE("coupled run and reports") {
  ScenarioConfig c;
  c.grid = Grid2D::square(32);
  c.manifold = MicroManifold{16, 2.0};
  c.params.b = 1.0;
  c.params.delta = 0.5;
  c.initial.preset = "aligned-f";
  c.run.T = 0.05;
  c.run.dt = 1e-3;
  c.run.snapshot_stride = 25;
  c.run.density_snapshots = true;
  c.diagnostics.r_values = {4.0};
  const SimulationResult r = run_simulation(c);
  CHECK(r.status == RunStatus::Completed);
  CHECK(r.steps == 50);
  CHECK(r.history.size() == 51);
  CHECK(r.history.snapshots().size() == 3);
  CHECK(r.history.snapshots().back().f.has_value());
  CHECK(r.n_evolution.size() == 3);
  CHECK(r.final_state.t == doctest::Approx(0.05));

  const ReportSet rep = generate_reports(r.history, c.diagnostics);
  REQUIRE(rep.energy);
  CHECK(rep.energy->margin >= -1e-4);
  CHECK(rep.gronwall);
  const auto rows = rep.inequality_rows();
  CHECK(std::any_of(rows.begin(), rows.end(), [](const InequalityRow& x) { return x.name == "vorticity_r4"; }));
  CHECK(std::any_of(rows.begin(), rows.end(), [](const InequalityRow& x) { return x.name == "closure_loglog"; }));
  CHECK(rep.constants().count("C2") == 1);
}

TEST_CASE("numerical abort keeps the partial history") {
  ScenarioConfig c;
  c.grid = Grid2D::square(32);
  c.manifold = MicroManifold{16, 2.0};
  c.initial.amplitude = 200.0;
  c.run.T = 1.0;
  c.run.dt = 0.05;
  const SimulationResult r = run_simulation(c);
  CHECK(r.status == RunStatus::CflViolation);
  CHECK(r.history.size() >= 1);
  CHECK(r.history.metadata().at("status") == "cfl-violation");
}
