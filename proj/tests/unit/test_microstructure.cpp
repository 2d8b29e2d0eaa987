#include <doctest.h>

#include <cmath>

#include "mmf/microstructure.hpp"

using namespace mmf;

namespace {

const Grid2D kGrid = Grid2D::square(8);
const MicroManifold kM{64, 2.0};

ParticleDensity isotropic_plus(double eps, int k) {
  return ParticleDensity(PhaseField::from_function(
      kGrid, kM, [=](double, double, double th) { return (1.0 + eps * std::cos(k * th)) / kTwoPi; }));
}

double theta_coefficient(std::span<const double> col, int k) {
  double a = 0.0;
  for (int m = 0; m < kM.n_m; ++m) a += col[m] * std::cos(k * kM.theta(m));
  return 2.0 * a / kM.n_m;
}

}  // namespace

TEST_CASE("manifold validation") {
  CHECK_THROWS_AS((MicroManifold{63, 2.0}).validate(), Error);
  CHECK_THROWS_AS((MicroManifold{64, 1.5}).validate(), Error);
  CHECK_NOTHROW(kM.validate());
  CHECK(kM.r_multiplier(3) == doctest::Approx(0.1));
}

TEST_CASE("R multiplier on monochromatic columns") {
  for (int k = 0; k < kM.n_m / 2; ++k) {
    std::vector<double> col(kM.n_m);
    for (int m = 0; m < kM.n_m; ++m) col[m] = std::sin(k * kM.theta(m) + 0.3);
    const auto out = apply_R(col, kM);
    double err = 0.0;
    for (int m = 0; m < kM.n_m; ++m) err = std::max(err, std::abs(out[m] - col[m] / (1.0 + k * k)));
    CHECK(err < 1e-14);
  }
  // R^-1 R = I
  const ParticleDensity f = isotropic_plus(0.4, 3);
  const PhaseField back = apply_R(apply_R(f), -1.0);
  double err = 0.0;
  for (std::size_t k = 0; k < back.values().size(); ++k) err = std::max(err, std::abs(back.values()[k] - f.values()[k]));
  CHECK(err < 1e-14);
}

TEST_CASE("density integrals") {
  const ParticleDensity f = isotropic_plus(0.5, 2);
  const ScalarField2D rho = f.theta_integral();
  CHECK(lp_norm(rho - ScalarField2D(kGrid, 1.0), INFINITY) < 1e-14);
  CHECK(f.total() == doctest::Approx(kTwoPi * kTwoPi));
  const DensityReport d = inspect_density(f);
  CHECK(d.admissible);
  CHECK(d.min_value == doctest::Approx(0.5 / kTwoPi));
  ParticleDensity bad = f;
  bad(0, 0) = -1.0;
  CHECK_FALSE(inspect_density(bad).admissible);
}

TEST_CASE("Maier-Saupe potential oracle") {
  ModelParams p;
  p.delta = 1.0;
  p.b = 1.0;
  const PhaseField U = mean_field_potential(isotropic_plus(1.0, 2), p);
  double err = 0.0;
  for (int m = 0; m < kM.n_m; ++m) err = std::max(err, std::abs(U(3, m) + 0.5 * std::cos(2.0 * kM.theta(m))));
  CHECK(err < 1e-13);
  p.b = 0.0;
  CHECK(mean_field_potential(isotropic_plus(1.0, 2), p).min_value() == 0.0);
}

TEST_CASE("kernels must be symmetric") {
  CHECK_THROWS_AS(InteractionKernel::general([](double a, double b) { return a - 2 * b; }).sample(kM), Error);
  const auto ms = InteractionKernel::maier_saupe().sample(kM);
  CHECK(ms[1] == ms[kM.n_m]);
  CHECK(InteractionKernel::maier_saupe()(0.3, 0.3) == doctest::Approx(-1.0));
}

TEST_CASE("micro drift oracles") {
  const ModelParams p;
  const double g = 0.7;
  // rigid rotation ubar = g (-y, x): grad = [[0, -g], [g, 0]]
  for (double th : {0.0, 0.4, 2.0}) CHECK(micro_drift({0.0, -g, g, 0.0}, th, p) == doctest::Approx(g));
  // shear ubar = (g y, 0): grad = [[0, g], [0, 0]]
  for (double th : {0.0, 0.4, 2.0})
    CHECK(micro_drift({0.0, g, 0.0, 0.0}, th, p) == doctest::Approx(-g * std::sin(th) * std::sin(th)));
}

TEST_CASE("circle heat decay and mass") {
  ModelParams p;
  p.delta = 0.5;
  FokkerPlanckSolver fp(kGrid, kM, p);
  ParticleDensity f = isotropic_plus(0.5, 2);
  const double m0 = f.total();
  const VectorField2D zero(kGrid);
  for (int n = 0; n < 100; ++n) f = fp.step(f, zero, 1e-3);
  const double expected = 0.5 / kTwoPi * std::exp(-4.0 * 0.1 / p.delta);
  CHECK(theta_coefficient(f.column(0), 2) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(std::abs(f.total() - m0) / m0 < 1e-12);
}

TEST_CASE("transport conserves mass and rho follows the flow") {
  const Grid2D g = Grid2D::square(32);
  const MicroManifold mm{32, 2.0};
  ModelParams p;
  p.delta = 0.5;
  p.b = 2.0;
  ParticleDensity f(PhaseField::from_function(g, mm, [](double x, double y, double th) {
    return 0.5 * (1.0 + 0.3 * std::sin(x)) * (1.0 + 0.5 * std::cos(2.0 * (th - 0.3 * std::cos(y)))) / kTwoPi;
  }));
  const VectorField2D u(ScalarField2D::from_function(g, [](double, double y) { return std::sin(y); }), ScalarField2D(g));
  FokkerPlanckSolver fp(g, mm, p);
  const double m0 = f.total();
  for (int n = 0; n < 20; ++n) {
    const double before = f.total();
    f = fp.step(f, u, 2e-3);
    CHECK(std::abs(f.total() - before) / m0 < 1e-12);
  }
  CHECK(inspect_density(f).admissible);
}

TEST_CASE("CFL guard") {
  const Grid2D g = Grid2D::square(16);
  const MicroManifold mm{16, 2.0};
  ModelParams p;
  FokkerPlanckSolver fp(g, mm, p);
  const ParticleDensity f(g, mm, 1.0 / kTwoPi);
  const VectorField2D u(ScalarField2D(g, 10.0), ScalarField2D(g));
  CHECK(fp.max_stable_dt(f, u) == doctest::Approx(0.5 * g.dx() / 10.0));
  try {
    fp.step(f, u, 1.0);
    FAIL("expected CflViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CflViolation);
  }
}

TEST_CASE("N oracle") {
  const Grid2D g = Grid2D::square(32);
  const double eps = 0.2;
  const PhaseField f = PhaseField::from_function(g, kM, [&](double x, double, double th) {
    return (1.0 + eps * std::cos(x) * std::cos(2.0 * th)) / kTwoPi;
  });
  const ScalarField2D N = compute_N(f);
  const ScalarField2D Nd = compute_N(f, NQuadrature::Direct);
  double err = 0.0, errd = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double expected = eps * std::abs(std::sin(g.x(i))) / kTwoPi * 0.2 * std::sqrt(kPi);
    err = std::max(err, std::abs(N(i, 3) - expected));
    errd = std::max(errd, std::abs(Nd(i, 3) - expected));
  }
  CHECK(err < 1e-14);
  CHECK(errd < 1e-14);
  CHECK(lp_norm(compute_N(PhaseField(g, kM, 0.3)), INFINITY) == 0.0);
}
