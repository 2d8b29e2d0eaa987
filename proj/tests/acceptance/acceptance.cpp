// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit when any fails.
// Usage: mmf_acceptance [criterion ...]   (no arguments runs all ten)

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "mmf/diagnostics.hpp"
#include "mmf/export.hpp"
#include "mmf/flow.hpp"
#include "mmf/littlewood_paley.hpp"
#include "mmf/random_fields.hpp"
#include "mmf/scenario.hpp"
#include "mmf/snapshot.hpp"
#include "mmf/stress.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using namespace mmf;

namespace {

// --- pinned tolerances ---------------------------------------------------------
constexpr double kTaylorGreenTol = 1e-8;
constexpr double kMinOrder = 1.9;
constexpr double kSpectralBudgetSeconds = 60.0;
constexpr double kPartitionTol = 1e-12;
constexpr double kDisjointTol = 1e-14;
constexpr double kReconstructionTol = 1e-12;
constexpr double kSpreadLimit = 10.0;
constexpr double kHeatDecaySlack = 1e-9;
constexpr double kMachineTol = 1e-14;
constexpr double kCircleHeatTol = 1e-8;
constexpr double kMassTol = 1e-10;
constexpr double kRhoGrowthTol = 1e-6;
constexpr double kStressOracleTol = 1e-12;
constexpr double kEquivarianceTol = 1e-10;
constexpr double kEnergyMarginTol = -1e-4;
constexpr double kDtStability = 2.0;
constexpr double kGridStability = 10.0;
constexpr double kMaterialNTol = 1e-8;
constexpr double kOracleTol = 1e-8;
constexpr double kClosureBudgetSeconds = 600.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double rel_l2(const ScalarField2D& a, const ScalarField2D& b) { return lp_norm(a - b, 2.0) / lp_norm(b, 2.0); }

// --- 1 ------------------------------------------------------------------------

ScalarField2D taylor_green(const Grid2D& g) {
  return ScalarField2D::from_function(g, [](double x, double y) { return 2.0 * std::sin(x) * std::sin(y); });
}

// omega* = a(t) sin x cos y + b(t) cos 2x with a, b chosen so that advection is active
struct Manufactured {
  Grid2D g;
  ScalarField2D p1, p2;

  explicit Manufactured(const Grid2D& grid)
      : g(grid),
        p1(ScalarField2D::from_function(g, [](double x, double y) { return std::sin(x) * std::cos(y); })),
        p2(ScalarField2D::from_function(g, [](double x, double) { return std::cos(2.0 * x); })) {}

  static double a(double t) { return std::exp(-t); }
  static double da(double t) { return -std::exp(-t); }
  static double b(double t) { return 0.5 * std::cos(t); }
  static double db(double t) { return -0.5 * std::sin(t); }

  ScalarField2D exact(double t) const { return a(t) * p1 + b(t) * p2; }

  StressField sigma(double t) const {
    const ScalarField2D w = exact(t);
    const VectorField2D u = biot_savart(w);
    // S = d_t w - Delta w + div(u w); Delta p1 = -2 p1, Delta p2 = -4 p2
    ScalarField2D s = (da(t) + 2.0 * a(t)) * p1 + (db(t) + 4.0 * b(t)) * p2;
    s += ScalarField2D::from_spectrum(advection_spectrum(w, u));
    return sigma_from_vorticity_source(s);
  }
};

double manufactured_error(const Manufactured& m, double dt, double T) {
  FlowState st = FlowState::from_vorticity(m.exact(0.0));
  const ForcingProvider forcing = [&](double t) { return m.sigma(t); };
  const auto steps = static_cast<int>(std::lround(T / dt));
  for (int n = 0; n < steps; ++n) st = nse_step(st, forcing, dt);
  return rel_l2(st.omega, m.exact(st.t));
}

Outcome spectral_core() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Grid2D g = Grid2D::square(64);
  const ScalarField2D w0 = taylor_green(g);
  FlowState st = FlowState::from_vorticity(w0);
  const StressField zero(g);
  for (int n = 0; n < 1000; ++n) st = nse_step(st, zero, 1e-3);
  const double err = rel_l2(st.omega, std::exp(-2.0 * st.t) * w0);
  o.require(err <= kTaylorGreenTol, "TG rel err " + num(err));

  const Manufactured m(g);
  std::array<double, 3> e{};
  const std::array<double, 3> dts{4e-3, 2e-3, 1e-3};
  for (int k = 0; k < 3; ++k) e[k] = manufactured_error(m, dts[k], 1.0);
  const double p1 = std::log2(e[0] / e[1]), p2 = std::log2(e[1] / e[2]);
  o.require(std::min(p1, p2) >= kMinOrder, "orders " + num(p1) + ", " + num(p2) + " (err " + num(e[2]) + ")");
  const double secs = seconds_since(t0);
  o.require(secs < kSpectralBudgetSeconds, "runtime " + num(secs) + " s");
  return o;
}

// --- 2 ------------------------------------------------------------------------

double max_abs(std::span<const Complex> v) {
  double m = 0.0;
  for (const Complex& c : v) m = std::max(m, std::abs(c));
  return m;
}

Outcome littlewood_paley() {
  Outcome o;
  const Grid2D g = Grid2D::square(64);
  const DyadicPartition lp = DyadicPartition::build(g);
  double part = 0.0;
  for (int n : {64, 128, 256}) part = std::max(part, DyadicPartition::build(Grid2D::square(n)).partition_residual());
  o.require(part <= kPartitionTol, "partition " + num(part));

  const auto corpus = random_corpus(g, BandSpec{1, 30, 1.0, 1.0}, 100, 1000);
  double disjoint = 0.0, recon = 0.0, worst_heat = 0.0;
  const int jlo = 2, jhi = lp.j_max();
  std::vector<double> bern(static_cast<std::size_t>(jhi - jlo + 1), 0.0);
  for (const auto& f : corpus) {
    const Spectrum2D fh = f.spectrum();
    const double scale = max_abs(fh.coeffs());
    for (int j = 0; j <= lp.last_shell(); ++j)
      for (int k = j + 2; k <= lp.last_shell(); ++k) {
        const Spectrum2D jk = shell_project(lp, shell_project(lp, fh, k), j);
        disjoint = std::max(disjoint, max_abs(jk.coeffs()) / scale);
      }
    ScalarField2D sum(g);
    for (int q = -1; q <= lp.last_shell(); ++q) sum += ScalarField2D::from_spectrum(block_project(lp, fh, q));
    recon = std::max(recon, lp_norm(sum - f, INFINITY) / lp_norm(f, INFINITY));
    for (int j = jlo; j <= jhi; ++j) {
      auto& b = bern[static_cast<std::size_t>(j - jlo)];
      b = std::max(b, bernstein_ratio(lp, f, j, INFINITY, 2.0, {0, 0}));
    }
    for (int j = 1; j <= lp.j_max(); ++j)
      for (double t : {1e-3, 1e-2, 1e-1}) {
        const double bound = std::exp(-t * std::pow(2.0, 2.0 * (j - 1)));
        worst_heat = std::max(worst_heat, heat_shell_decay(lp, f, j, t) / bound);
      }
  }
  o.require(disjoint <= kDisjointTol, "disjointness " + num(disjoint));
  o.require(recon <= kReconstructionTol, "reconstruction " + num(recon));
  const double s = spread(bern);
  o.require(all_finite(bern) && s < kSpreadLimit, "Bernstein spread " + num(s));
  o.require(worst_heat <= 1.0 + kHeatDecaySlack, "heat decay / bound " + num(worst_heat));
  return o;
}

// --- 3 ------------------------------------------------------------------------

double worst_log_ratio(int n, double r) {
  const Grid2D g = Grid2D::square(n);
  auto fields = random_corpus(g, BandSpec{1, n / 6, 1.0, 1.0}, 100, 2000);
  fields.push_back(taylor_green(g));
  double worst = 0.0;
  for (const auto& w : fields) {
    const double ratio = log_velocity_bound(w, biot_savart(w), r).ratio();
    if (!std::isfinite(ratio)) return ratio;
    worst = std::max(worst, ratio);
  }
  return worst;
}

Outcome log_inequality() {
  Outcome o;
  for (double r : {3.0, 4.0, 8.0}) {
    const double c64 = worst_log_ratio(64, r), c256 = worst_log_ratio(256, r);
    const bool ok = std::isfinite(c64) && std::isfinite(c256) && spread({c64, c256}) < kGridStability;
    o.require(ok, "r=" + num(r) + " ratio 64: " + num(c64) + ", 256: " + num(c256));
  }
  return o;
}

// --- 4 ------------------------------------------------------------------------

double cos2_coefficient(std::span<const double> col, const MicroManifold& mm) {
  double a = 0.0;
  for (int m = 0; m < mm.n_m; ++m) a += col[m] * std::cos(2.0 * mm.theta(m));
  return 2.0 * a / mm.n_m;
}

ScenarioConfig small_config(const std::string& preset, int n, int nm, double T, double dt) {
  ScenarioConfig c;
  c.grid = Grid2D::square(n);
  c.manifold = MicroManifold{nm, 2.0};
  c.params.delta = 0.5;
  c.params.b = 1.0;
  c.initial.preset = preset;
  c.run.T = T;
  c.run.dt = dt;
  c.run.snapshot_stride = 50;
  c.diagnostics.r_values = {4.0};
  c.diagnostics.r = 4.0;
  return c;
}

Outcome microstructure() {
  Outcome o;
  for (double s : {2.0, 3.0}) {
    const MicroManifold mm{64, s};
    double err = 0.0;
    for (int k = 0; k < mm.n_m / 2; ++k)
      for (int phase = 0; phase < 2; ++phase) {
        std::vector<double> col(mm.n_m);
        for (int m = 0; m < mm.n_m; ++m) col[m] = phase ? std::sin(k * mm.theta(m)) : std::cos(k * mm.theta(m));
        if (phase && k == 0) continue;
        const auto out = apply_R(col, mm);
        const double mult = std::pow(1.0 + k * k, -0.5 * s);
        for (int m = 0; m < mm.n_m; ++m) err = std::max(err, std::abs(out[m] - mult * col[m]));
      }
    o.require(err <= kMachineTol, "R s=" + num(s) + " err " + num(err));
  }

  {
    const Grid2D g = Grid2D::square(8);
    const MicroManifold mm{64, 2.0};
    ModelParams p;
    p.delta = 0.5;
    p.b = 0.0;
    const double eps = 0.5;
    ParticleDensity f(PhaseField::from_function(
        g, mm, [&](double, double, double th) { return (1.0 + eps * std::cos(2.0 * th)) / kTwoPi; }));
    FokkerPlanckSolver fp(g, mm, p);
    const VectorField2D zero(g);
    const double dt = 1e-3;
    for (int n = 0; n < 250; ++n) f = fp.step(f, zero, dt);
    const double t = 250 * dt;
    const double expected = eps / kTwoPi * std::exp(-4.0 * t / p.delta);
    double err = 0.0;
    for (std::size_t pt = 0; pt < f.point_count(); ++pt)
      err = std::max(err, std::abs(cos2_coefficient(f.column(pt), mm) - expected) / expected);
    o.require(err <= kCircleHeatTol, "circle heat rel err " + num(err));
  }

  ScenarioConfig c = small_config("aligned-f", 64, 32, 1.0, 2e-3);
  c.diagnostics.duhamel = false;
  c.diagnostics.reports = {"energy"};
  const SimulationResult res = run_simulation(c);
  o.require(res.status == RunStatus::Completed, "coupled run " + (res.message.empty() ? "completed" : res.message));
  const auto mass = res.history.column("mass");
  const auto max_rho = res.history.column("max_rho");
  double dm = 0.0, growth = 0.0;
  for (std::size_t k = 1; k < mass.size(); ++k) dm = std::max(dm, std::abs(mass[k] - mass[k - 1]) / mass[0]);
  for (double v : max_rho) growth = std::max(growth, (v - max_rho[0]) / max_rho[0]);
  o.require(dm <= kMassTol, "mass per step " + num(dm));
  o.require(growth <= kRhoGrowthTol, "max rho growth " + num(growth));
  return o;
}

// --- 5 ------------------------------------------------------------------------

double max_abs_dev(const ScalarField2D& f, double v) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x - v));
  return m;
}

Outcome stress() {
  Outcome o;
  const Grid2D g = Grid2D::square(8);
  const MicroManifold mm{64, 2.0};
  StressCoefficients rods = StressCoefficients::rods();
  rods.k_max = 1;
  const auto single = [&](auto profile) { return PhaseField::from_function(g, mm, [&](double, double, double th) {
                                             return profile(th) / kTwoPi;
                                           }); };
  const StressField tc = added_stress(single([](double th) { return 1.0 + std::cos(2.0 * th); }), rods);
  const StressField ts = added_stress(single([](double th) { return 1.0 + std::sin(2.0 * th); }), rods);
  const double oracle = std::max({max_abs_dev(tc.s11, 0.25), max_abs_dev(tc.s22, -0.25), max_abs_dev(tc.s12, 0.0),
                                  max_abs_dev(ts.s12, 0.25), max_abs_dev(ts.s11, 0.0)});
  o.require(oracle <= kStressOracleTol, "oracle err " + num(oracle));

  // pointwise |tau_p| <= c_gamma rho on preset densities
  bool exceeded = false;
  for (const char* preset : {"aligned-f", "random-seeded", "uniform-f"}) {
    ScenarioConfig c = small_config(preset, 32, 64, 0.1, 1e-3);
    c.run.seed = 11;
    const SimulationState s = initial_state(c);
    const StressCoefficients coeffs = c.stress_coefficients();
    const StressBoundReport r = check_stress_bounds(added_stress(s.f, coeffs), s.f.theta_integral(),
                                                    compute_N(s.f), coeffs, mm);
    exceeded = exceeded || r.exceeded;
  }
  o.require(!exceeded, "|tau_p| <= c_gamma rho");

  // tau(g(. - phi)) = Q tau(g) Q^T
  const auto g0 = [](double th) {
    return (1.0 + 0.3 * std::cos(2.0 * th) + 0.2 * std::sin(2.0 * th) + 0.1 * std::cos(4.0 * th)) / kTwoPi;
  };
  double equiv = 0.0;
  const StressField base = added_stress(PhaseField::from_function(g, mm, [&](double, double, double th) {
                                          return g0(th);
                                        }),
                                        rods);
  for (double phi : {0.37, 1.1, 2.9}) {
    const StressField rot = added_stress(PhaseField::from_function(g, mm, [&](double, double, double th) {
                                           return g0(th - phi);
                                         }),
                                         rods);
    const double c = std::cos(phi), s = std::sin(phi);
    const double a = base.s11(0, 0), b = base.s12(0, 0), d = base.s22(0, 0);
    const double r11 = c * c * a - 2 * c * s * b + s * s * d;
    const double r12 = c * s * (a - d) + (c * c - s * s) * b;
    const double r22 = s * s * a + 2 * c * s * b + c * c * d;
    equiv = std::max({equiv, max_abs_dev(rot.s11, r11), max_abs_dev(rot.s12, r12), max_abs_dev(rot.s22, r22)});
  }
  o.require(equiv <= kEquivarianceTol, "equivariance " + num(equiv));

  std::vector<double> ratios;
  for (int n : {64, 128}) {
    const ScenarioConfig c = small_config("aligned-f", n, 64, 0.1, 1e-3);
    const SimulationState s = initial_state(c);
    const StressCoefficients coeffs = c.stress_coefficients();
    ratios.push_back(
        check_stress_bounds(added_stress(s.f, coeffs), s.f.theta_integral(), compute_N(s.f), coeffs, mm).max_N_ratio);
  }
  o.require(all_finite(ratios) && spread(ratios) < kGridStability,
            "|grad tau|/N 64: " + num(ratios[0]) + ", 128: " + num(ratios[1]));
  return o;
}

// --- 6 - 8: the standard corpus --------------------------------------------------

struct CorpusRun {
  std::string name;
  SimulationResult result;
  ReportSet reports;
};

// 8 seeded random runs plus the Taylor-Green and aligned-f analytic runs
std::vector<CorpusRun> run_corpus(int n, double dt) {
  std::vector<CorpusRun> out;
  std::vector<std::pair<std::string, std::uint64_t>> members;
  for (std::uint64_t s = 1; s <= 8; ++s) members.emplace_back("random-seeded", s);
  members.emplace_back("taylor-green", 0);
  members.emplace_back("aligned-f", 0);
  for (const auto& [preset, seed] : members) {
    ScenarioConfig c = small_config(preset, n, 32, 0.25, dt);
    c.run.seed = seed;
    if (preset == "taylor-green") c.initial.rho = 0.5;
    c.run.snapshot_stride = static_cast<std::size_t>(std::lround(0.05 / dt));
    CorpusRun run{preset + "#" + std::to_string(seed), run_simulation(c), {}};
    run.reports = generate_reports(run.result.history, c.diagnostics);
    out.push_back(std::move(run));
  }
  return out;
}

const std::vector<CorpusRun>& corpus(int n, double dt) {
  static std::map<std::pair<int, double>, std::vector<CorpusRun>> cache;
  auto it = cache.find({n, dt});
  if (it == cache.end()) it = cache.emplace(std::make_pair(n, dt), run_corpus(n, dt)).first;
  return it->second;
}

bool completed(const std::vector<CorpusRun>& runs, Outcome& o) {
  bool ok = true;
  for (const auto& r : runs)
    if (r.result.status != RunStatus::Completed) {
      o.require(false, r.name + ": " + r.result.message);
      ok = false;
    }
  return ok;
}

double worst_vorticity_ratio(const std::vector<CorpusRun>& runs) {
  double worst = 0.0;
  for (const auto& r : runs)
    for (const auto& [rr, v] : r.reports.vorticity)
      if (rr == 4.0) worst = std::max(worst, v.ratio());
  return worst;
}

Outcome energy() {
  Outcome o;
  const auto& fine = corpus(64, 1e-3);
  const auto& coarse = corpus(64, 2e-3);
  if (!completed(fine, o) || !completed(coarse, o)) return o;
  double margin = INFINITY;
  for (const auto& r : fine) margin = std::min(margin, r.reports.energy->margin);
  o.require(margin >= kEnergyMarginTol, "min energy margin " + num(margin));
  const double c1 = worst_vorticity_ratio(fine), c2 = worst_vorticity_ratio(coarse);
  bool below = true;
  for (const auto& r : fine)
    for (const auto& [rr, v] : r.reports.vorticity)
      if (rr == 4.0) below = below && v.ratio() <= c1;
  o.require(below && std::isfinite(c1) && std::isfinite(c2) && spread({c1, c2}) < kDtStability,
            "vorticity constant dt=1e-3: " + num(c1) + ", dt=2e-3: " + num(c2));
  return o;
}

double worst_amplification(const std::vector<CorpusRun>& runs, bool& finite) {
  double worst = 0.0;
  for (const auto& r : runs)
    for (const auto& a : r.reports.amplification)
      if (a.r == 4.0) {
        finite = finite && std::isfinite(a.lhs) && std::isfinite(a.rhs);
        worst = std::max(worst, a.ratio());
      }
  return worst;
}

Outcome amplification() {
  Outcome o;
  const auto& fine = corpus(64, 1e-3);
  const auto& coarse = corpus(32, 2e-3);
  if (!completed(fine, o) || !completed(coarse, o)) return o;
  bool finite = true;
  const double cf = worst_amplification(fine, finite), cc = worst_amplification(coarse, finite);
  o.require(finite && spread({cf, cc}) < kGridStability,
            "fitted c (64, 1e-3): " + num(cf) + ", (32, 2e-3): " + num(cc));
  const ShellDecayFit fit = monochromatic_shell_sweep(Grid2D::square(128), 4.0, 0.1, 50, 2, 5);
  o.require(fit.slope <= fit.bound_slope, "shell slope " + num(fit.slope) + " vs " + num(fit.bound_slope));
  return o;
}

Outcome n_evolution() {
  Outcome o;
  {
    ScenarioConfig c = small_config("aligned-f", 32, 64, 0.1, 1e-3);
    c.params.b = 0.0;
    const SimulationState s = initial_state(c);
    ModelParams p = c.params;
    const NEvolutionReport r = n_evolution_residual(s.f, VectorField2D(c.grid), p, 1.0 / p.delta);
    o.require(r.finite && r.max_material_N <= kMaterialNTol, "max DN/Dt " + num(r.max_material_N));
  }
  {
    std::vector<double> cI;
    for (int nm : {32, 64, 128}) {
      ScenarioConfig c = small_config("aligned-f", 32, nm, 0.1, 1e-3);
      const SimulationState s = initial_state(c);
      const VectorField2D u = biot_savart(s.omega);
      cI.push_back(n_evolution_residual(s.f, u, c.params, 1.0 / c.params.delta).c_I);
    }
    o.require(all_finite(cI) && spread(cI) < kGridStability,
              "c_I n_m 32/64/128: " + num(cI[0]) + ", " + num(cI[1]) + ", " + num(cI[2]));
  }
  const auto& fine = corpus(64, 1e-3);
  if (!completed(fine, o)) return o;
  std::size_t samples = 0;
  bool finite = true;
  for (const auto& r : fine)
    for (const auto& s : r.result.n_evolution) {
      ++samples;
      finite = finite && s.finite && std::isfinite(s.c_I) && std::isfinite(s.c_II) && std::isfinite(s.c_III) &&
               std::isfinite(s.c_IV) && std::isfinite(s.identity_residual);
    }
  o.require(finite && samples > 0, "all terms finite over " + std::to_string(samples) + " samples");
  return o;
}

// --- 9 ------------------------------------------------------------------------

// dense dopri5 on w = log log(2 + y); y itself overflows for the fitted C2
std::vector<double> oracle_comparison(double C2, double y0, const std::vector<double>& times) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 1>;
  State y{to_loglog(y0)};
  std::vector<double> out;
  auto stepper = ode::make_dense_output(1e-14, 1e-14, ode::runge_kutta_dopri5<State>());
  ode::integrate_times(
      stepper, [C2](const State& x, State& dx, double) { dx[0] = comparison_rhs_loglog(C2, x[0]); }, y, times.begin(),
      times.end(), 1e-4, [&out](const State& x, double) { out.push_back(x[0]); });
  return out;
}

Outcome closure() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig c;
  c.grid = Grid2D::square(128);
  c.manifold = MicroManifold{64, 2.0};
  c.params.delta = 0.1;
  c.params.b = 1.0;
  c.initial.preset = "aligned-f";
  c.run.T = 2.0;
  c.run.dt = 2.5e-3;
  c.run.snapshot_stride = 100;
  c.diagnostics.r_values = {4.0};
  c.diagnostics.r = 4.0;
  const SimulationResult res = run_simulation(c);
  o.require(res.status == RunStatus::Completed, "run " + std::to_string(res.steps) + " steps " + res.message);
  if (res.status != RunStatus::Completed) return o;
  const ReportSet rep = generate_reports(res.history, c.diagnostics);

  bool finite = true;
  for (const auto& col : res.history.columns())
    for (double v : res.history.column(col)) finite = finite && std::isfinite(v);
  for (const auto& row : rep.inequality_rows()) finite = finite && row.finite();
  for (const auto& [k, v] : rep.constants()) finite = finite && std::isfinite(v);
  for (const auto& s : res.n_evolution) finite = finite && s.finite;
  o.require(finite && rep.gronwall && rep.gronwall->finite, "diagnostics finite");
  if (!rep.gronwall || !rep.budgets) return o;
  o.require(rep.gronwall->dominated,
            "B <= y, C2 = " + num(rep.gronwall->C2) + ", loglog y(T) " + num(rep.gronwall->loglog_y.back()));

  const auto& t = rep.budgets->t;
  const std::vector<double> tt(t.begin(), t.end());
  const auto mine = integrate_comparison_loglog(rep.gronwall->C2, rep.budgets->B.front(), tt);
  const auto ref = oracle_comparison(rep.gronwall->C2, rep.budgets->B.front(), tt);
  // relative error in z = log(2 + y) >= log 2
  double err = 0.0;
  for (std::size_t k = 0; k < ref.size() && k < mine.size(); ++k)
    err = std::max(err, std::abs(std::exp(mine[k]) - std::exp(ref[k])) / std::exp(ref[k]));
  o.require(ref.size() == mine.size() && err <= kOracleTol, "comparison vs oracle " + num(err));
  const double secs = seconds_since(t0);
  o.require(secs < kClosureBudgetSeconds, "runtime " + num(secs) + " s");
  return o;
}

// --- 10 -----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <class A, class B>
bool same_bits(const A& a, const B& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Outcome plumbing() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "mmf_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  ScenarioConfig c = small_config("random-seeded", 32, 16, 0.05, 1e-3);
  c.run.seed = 7;
  c.run.snapshot_stride = 10;
  const SimulationState s0 = initial_state(c);
  save_snapshot(s0, dir / "a.mmf");
  const SimulationState s1 = load_snapshot(dir / "a.mmf");
  save_snapshot(s1, dir / "b.mmf");
  const bool snap = same_bits(s0.omega.values(), s1.omega.values()) && same_bits(s0.f.values(), s1.f.values()) &&
                    same_bits(s0.sigma.s11.values(), s1.sigma.s11.values()) &&
                    same_bits(s0.sigma.s12.values(), s1.sigma.s12.values()) &&
                    same_bits(s0.sigma.s22.values(), s1.sigma.s22.values()) && s0.t == s1.t &&
                    s0.delta == s1.delta && s0.b == s1.b && slurp(dir / "a.mmf") == slurp(dir / "b.mmf");
  o.require(snap, "snapshot round trip");

  const SimulationResult r1 = run_simulation(c);
  const SimulationResult r2 = run_simulation(c);
  write_series(r1.history, dir / "series.csv");
  const RunHistory back = load_series(dir / "series.csv");
  bool csv = back.columns() == r1.history.columns() && back.size() == r1.history.size();
  for (const auto& col : r1.history.columns())
    csv = csv && same_bits(back.column(col), r1.history.column(col));
  o.require(csv, "CSV round trip");

  save_snapshot(r1.final_state, dir / "r1.mmf");
  save_snapshot(r2.final_state, dir / "r2.mmf");
  write_series(r2.history, dir / "series2.csv");
  const bool det = slurp(dir / "r1.mmf") == slurp(dir / "r2.mmf") &&
                   slurp(dir / "series.csv") == slurp(dir / "series2.csv");
  o.require(det, "same seed, same output");

  {
    std::ofstream cfg(dir / "typo.cfg");
    cfg << "[grid]\nnx = 32\nny = 32\n[run]\ndtt = 0.01\n";
  }
  const std::string cfg = (dir / "typo.cfg").string(), out = (dir / "out").string();
  const char* argv[] = {"mmf", "simulate", cfg.c_str(), "--out", out.c_str()};
  std::ostringstream so, se;
  const int code = cli::main(5, argv, so, se);
  o.require(code == 2, "unknown key exit " + std::to_string(code));
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "spectral core", spectral_core},   {2, "Littlewood-Paley", littlewood_paley},
      {3, "log inequality", log_inequality}, {4, "microstructure", microstructure},
      {5, "stress", stress},                 {6, "energy / vorticity", energy},
      {7, "amplification", amplification},   {8, "N evolution", n_evolution},
      {9, "closure", closure},               {10, "plumbing", plumbing},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %-20s (%.1f s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
