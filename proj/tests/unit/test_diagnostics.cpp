#include <doctest.h>

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "mmf/diagnostics.hpp"
#include "mmf/random_fields.hpp"
#include "mmf/scenario.hpp"

using namespace mmf;

namespace {

ScenarioConfig small_run(const std::string& preset) {
  ScenarioConfig c;
  c.grid = Grid2D::square(32);
  c.manifold = MicroManifold{16, 2.0};
  c.params.delta = 0.5;
  c.params.b = 1.0;
  c.initial.preset = preset;
  c.run.T = 0.1;
  c.run.dt = 2e-3;
  c.run.seed = 3;
  c.run.snapshot_stride = 10;
  c.diagnostics.r_values = {4.0};
  return c;
}

const SimulationResult& coupled() {
  static const SimulationResult r = run_simulation(small_run("random-seeded"));
  return r;
}

}  // namespace

TEST_CASE("recorder columns") {
  const StepRecorder rec(Grid2D::square(32), RecorderOptions{{4.0}, true});
  const auto cols = rec.columns();
  for (const char* c : {"t", "u_L2", "grad_u_L2", "sigma_L2", "besov_grad", "omega_L4", "grad2_ubar_L4", "max_N", "mass"})
    CHECK(std::find(cols.begin(), cols.end(), c) != cols.end());
  const RunHistory& h = coupled().history;
  CHECK(h.columns().size() > cols.size());
  CHECK(coupled().status == RunStatus::Completed);
}

TEST_CASE("gradient magnitudes of a shear") {
  const Grid2D g = Grid2D::square(16);
  const VectorField2D u(ScalarField2D::from_function(g, [](double, double y) { return std::sin(y); }), ScalarField2D(g));
  CHECK(lp_norm(gradient_magnitude(u), INFINITY) == doctest::Approx(1.0));
  CHECK(lp_norm(hessian_magnitude(u), INFINITY) == doctest::Approx(1.0));
}

TEST_CASE("advection identity") {
  const Grid2D g = Grid2D::square(32);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const VectorField2D u = biot_savart(random_band_limited(g, {1, 8, 1.0, 1.0}, seed));
    CHECK(advection_identity_residual(u) <= 1e-10);
  }
}

TEST_CASE("Duhamel split reproduces grad u to second order in dt") {
  CHECK(coupled().history.has_column("duhamel_residual"));
  const auto worst = [](double dt) {
    ScenarioConfig c = small_run("random-seeded");
    c.run.dt = dt;
    const SimulationResult r = run_simulation(c);
    double w = 0.0;
    for (double v : r.history.column("duhamel_residual")) w = std::max(w, v);
    return w;
  };
  const double coarse = worst(4e-3), fine = worst(2e-3);
  CHECK(coarse < 1e-3);
  CHECK(coarse / fine > 3.0);
  // with u = 0 and sigma = 0 nothing is generated
  const Grid2D g = Grid2D::square(32);
  DuhamelTracker d(VectorField2D(g), DyadicPartition::build(g));
  d.advance_forcing(0.1, StressField(g));
  CHECK(d.F_sup() == 0.0);
  CHECK(d.time() == doctest::Approx(0.1));
}

TEST_CASE("forcing-only Duhamel term against the flow solver") {
  // Stokes flow from rest with a constant stress: F is the whole gradient
  const Grid2D g = Grid2D::square(32);
  StressField s(g);
  s.s12 = ScalarField2D::from_function(g, [](double x, double y) { return 0.01 * std::cos(2 * x + y); });
  DuhamelTracker d(VectorField2D(g), DyadicPartition::build(g));
  for (int n = 0; n < 10; ++n) d.advance_forcing(0.01, s);
  // grad u of the exact Stokes solution equals F; compare with the sum of blocks
  const auto blocks = d.F_block_sup();
  CHECK(blocks.size() == static_cast<std::size_t>(d.partition().block_count()));
  double total = 0.0;
  for (double b : blocks) total += b;
  CHECK(total >= d.F_sup() * (1.0 - 1e-12));
}

TEST_CASE("monochromatic sweep slope") {
  // high shells: 2^(2q) T >= 1 on every swept shell
  const ShellDecayFit fit = monochromatic_shell_sweep(Grid2D::square(64), 4.0, 0.5, 50, 2, 4);
  CHECK(fit.q.size() == 3);
  CHECK(fit.bound_slope == doctest::Approx(-0.5));
  CHECK(fit.slope <= fit.bound_slope);
  CHECK(fit.pass);
  CHECK_THROWS_AS(monochromatic_shell_sweep(Grid2D::square(64), 4.0, 0.05, 10, 1, 9), Error);
}

TEST_CASE("budgets") {
  const BudgetReport b = compute_budgets(coupled().history, 4.0);
  CHECK(b.t.size() == coupled().history.size());
  CHECK(b.K0 > 0.0);
  CHECK(std::isfinite(b.E1));
  CHECK(b.dB_consistency < 0.1);
  for (double v : b.B) CHECK(v >= 0.0);
  CHECK_THROWS_AS(compute_budgets(coupled().history, 2.0), Error);
  CHECK_THROWS_AS(compute_budgets(RunHistory(coupled().history.columns()), 4.0), Error);
}

TEST_CASE("log bounds and amplification reports") {
  const LogBoundsReport l = log_bounds_report(coupled().history, 4.0);
  CHECK_FALSE(l.rows.empty());
  for (const auto& r : l.rows) CHECK(r.finite());
  CHECK(l.identity_snapshots > 0);
  CHECK(l.identity_residual <= 1e-10);

  const AmplificationReport a = amplification_report(coupled().history, 4.0, 1.0);
  CHECK(a.lhs > 0.0);
  CHECK(std::isfinite(a.rhs));
  CHECK(a.rhs_opt <= a.rhs * (1.0 + 1e-9));
  CHECK(a.rhs_opt == doctest::Approx(amplification_rhs(compute_budgets(coupled().history, 4.0), a.epsilon_opt)));
  CHECK_FALSE(a.shells.empty());
  CHECK_THROWS_AS(amplification_report(coupled().history, 4.0, 0.0), Error);
}

TEST_CASE("N evolution identity") {
  const ScenarioConfig c = small_run("aligned-f");
  const SimulationState s = initial_state(c);
  const VectorField2D u = biot_savart(s.omega);
  const NEvolutionReport r = n_evolution_residual(s.f, u, c.params, 1.0 / c.params.delta);
  CHECK(r.finite);
  CHECK(r.identity_residual < 1e-3);
  CHECK(r.min_margin >= -1e-12);

  ModelParams still = c.params;
  still.b = 0.0;
  const NEvolutionReport z = n_evolution_residual(s.f, VectorField2D(c.grid), still, 1.0 / still.delta);
  CHECK(z.max_material_N <= 1e-8);
  CHECK(lp_norm(z.I, INFINITY) == 0.0);
}

TEST_CASE("comparison ODE against a tight dopri5 oracle") {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 1>;
  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(0.01 * k);
  const auto y = integrate_comparison_ode(1.0, 1.0, times, 8);
  State s{1.0};
  ode::integrate_const(ode::make_dense_output(1e-14, 1e-14, ode::runge_kutta_dopri5<State>()),
                       [](const State& x, State& dx, double) { dx[0] = comparison_rhs(1.0, x[0]); }, s, 0.0, 1.0,
                       1e-3);
  CHECK(std::abs(y.back() - s[0]) / s[0] <= 1e-8);
  CHECK(comparison_rhs(2.0, 0.0) == 2.0);
  CHECK(from_loglog(to_loglog(3.5)) == doctest::Approx(3.5).epsilon(1e-14));
  // w' against the chain rule applied to y'
  const double yy = 0.8, w = to_loglog(yy), z = std::exp(w);
  CHECK(comparison_rhs_loglog(1.5, w) == doctest::Approx(comparison_rhs(1.5, yy) / ((2.0 + yy) * z)).epsilon(1e-14));
  // a large constant overflows y but not w
  const auto big = integrate_comparison_loglog(130.0, 0.0, times);
  CHECK(std::isfinite(big.back()));
  CHECK(std::isinf(from_loglog(big.back())));
  CHECK(big.back() == doctest::Approx(std::log(std::log(2.0)) + 130.0).epsilon(1e-2));
}

TEST_CASE("Gronwall domination") {
  const GronwallReport g = gronwall_tracker(compute_budgets(coupled().history, 4.0));
  CHECK(g.finite);
  CHECK(g.dominated);
  CHECK(g.C2 > 0.0);
  CHECK(g.max_ratio <= 1.0 + 1e-9);
}
