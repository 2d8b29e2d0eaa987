#include "mmf/diagnostics.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

namespace mmf {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFloor = 1e-8;

std::vector<double> squared(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] * v[k];
  return out;
}

std::vector<double> powered(std::span<const double> v, double p) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::pow(v[k], p);
  return out;
}

double max_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

Spectrum2D derivative(Spectrum2D s, int axis) {
  const Grid2D g = s.grid();
  s.apply([&](int i, int jk) { return kI * (axis == 0 ? g.dkx(i) : g.dky(jk)); });
  return s;
}

double sigma_h1(const StressField& s) {
  const double a = sobolev_norm(s.s11, 1.0), b = sobolev_norm(s.s12, 1.0), c = sobolev_norm(s.s22, 1.0);
  return std::sqrt(a * a + 2.0 * b * b + c * c);
}

// phi1(z) = (1 - e^{-z}) / z and the two linear-interpolation weights, all / dt.
struct ExpWeights {
  double decay, constant, w0, w1;
};

ExpWeights exp_weights(double lambda, double dt) {
  const double z = lambda * dt;
  ExpWeights w{};
  w.decay = std::exp(-z);
  if (z < 1e-4) {
    w.constant = dt * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
    w.w1 = dt * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0);
    w.w0 = dt * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0);
  } else {
    const double phi1 = -std::expm1(-z) / z;
    w.constant = dt * phi1;
    w.w1 = dt * (1.0 - phi1) / z;
    w.w0 = dt * (phi1 - w.decay) / z;
  }
  return w;
}

ScalarField2D inner_theta(const PhaseField& a, const PhaseField& b) {
  ScalarField2D out(a.grid());
  const double dth = a.manifold().dtheta();
  for (std::size_t p = 0; p < a.point_count(); ++p) {
    const auto x = a.column(p);
    const auto y = b.column(p);
    double s = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) s += x[m] * y[m];
    out.values()[p] = s * dth;
  }
  return out;
}

double log_sum(double a, double b, double c) { return log_star(a) + log_star(b) + log_star(c); }

}  // namespace

// --- recorder --------------------------------------------------------------------

ScalarField2D hessian_magnitude(const VectorField2D& u) {
  ScalarField2D out(u.grid());
  for (int c = 0; c < 2; ++c) {
    const Spectrum2D s = u[c].spectrum();
    const ScalarField2D d11 = ScalarField2D::from_spectrum(derivative(derivative(s, 0), 0));
    const ScalarField2D d12 = ScalarField2D::from_spectrum(derivative(derivative(s, 0), 1));
    const ScalarField2D d22 = ScalarField2D::from_spectrum(derivative(derivative(s, 1), 1));
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double a = d11.values()[p], b = d12.values()[p], e = d22.values()[p];
      out.values()[p] += a * a + 2.0 * b * b + e * e;
    }
  }
  for (double& v : out.values()) v = std::sqrt(v);
  return out;
}

ScalarField2D gradient_magnitude(const VectorField2D& u) {
  const TensorField2D g = gradient_tensor(u);
  ScalarField2D out(u.grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0;
    for (const auto& c : g.c) s += c.values()[p] * c.values()[p];
    out.values()[p] = std::sqrt(s);
  }
  return out;
}

StepRecorder::StepRecorder(const Grid2D& grid, RecorderOptions options)
    : grid_(grid), options_(std::move(options)), lp_(DyadicPartition::build(grid)) {
  for (double r : options_.r_values)
    if (!(r >= 1.0)) throw Error(ErrorKind::InvalidExponent, "recorder exponents must be >= 1");
}

std::vector<std::string> StepRecorder::columns() const {
  std::vector<std::string> c{"t",          "u_L2",         "grad_u_L2",     "u_H1",       "u_H2",    "lap_u_L2",
                             "u_Linf",     "omega_L2",     "sigma_L2",      "sigma_Linf", "sigma_H1", "div_sigma_L2",
                             "grad_sigma_L2", "besov_grad", "ubar_Linf",    "grad_ubar_Linf", "ubar_H2"};
  for (double r : options_.r_values)
    for (const char* base : {"omega", "sigma", "div_sigma", "grad_sigma", "grad_omega", "grad2_u", "grad2_ubar"})
      c.push_back(lebesgue_column(base, r));
  if (options_.density)
    for (const char* name : {"max_rho", "min_rho", "min_f", "mass", "max_N", "N_L2"}) c.emplace_back(name);
  return c;
}

std::map<std::string, double> StepRecorder::measure(double t, const VectorField2D& u, const ScalarField2D& omega,
                                                    const StressField& sigma, const VectorField2D& u_bar,
                                                    const ParticleDensity* f) const {
  std::map<std::string, double> m;
  m["t"] = t;
  const TensorField2D gu = gradient_tensor(u);
  m["u_L2"] = lp_norm(u, 2.0);
  m["grad_u_L2"] = lp_norm(gu, 2.0);
  m["u_H1"] = sobolev_norm(u, 1.0);
  m["u_H2"] = sobolev_norm(u, 2.0);
  m["lap_u_L2"] = lp_norm(VectorField2D(laplacian(u[0]), laplacian(u[1])), 2.0);
  m["u_Linf"] = lp_norm(u, kInf);
  m["omega_L2"] = lp_norm(omega, 2.0);

  const ScalarField2D smag = sigma.magnitude();
  const VectorField2D div = stress_divergence(sigma);
  const ScalarField2D gsig = stress_gradient_magnitude(sigma);
  m["sigma_L2"] = lp_norm(smag, 2.0);
  m["sigma_Linf"] = lp_norm(smag, kInf);
  m["sigma_H1"] = sigma_h1(sigma);
  m["div_sigma_L2"] = lp_norm(div, 2.0);
  m["grad_sigma_L2"] = lp_norm(gsig, 2.0);
  m["besov_grad"] = besov_grad_norm(lp_, u);

  const TensorField2D gub = gradient_tensor(u_bar);
  m["ubar_Linf"] = lp_norm(u_bar, kInf);
  m["grad_ubar_Linf"] = lp_norm(gub, kInf);
  m["ubar_H2"] = sobolev_norm(u_bar, 2.0);

  const ScalarField2D gw = [&] {
    const VectorField2D g = spectral_gradient(omega);
    ScalarField2D out(omega.grid());
    for (std::size_t p = 0; p < out.size(); ++p) out.values()[p] = std::hypot(g[0].values()[p], g[1].values()[p]);
    return out;
  }();
  const ScalarField2D h2u = hessian_magnitude(u);
  const ScalarField2D h2ub = hessian_magnitude(u_bar);
  for (double r : options_.r_values) {
    m[lebesgue_column("omega", r)] = lp_norm(omega, r);
    m[lebesgue_column("sigma", r)] = lp_norm(smag, r);
    m[lebesgue_column("div_sigma", r)] = lp_norm(div, r);
    m[lebesgue_column("grad_sigma", r)] = lp_norm(gsig, r);
    m[lebesgue_column("grad_omega", r)] = lp_norm(gw, r);
    m[lebesgue_column("grad2_u", r)] = lp_norm(h2u, r);
    m[lebesgue_column("grad2_ubar", r)] = lp_norm(h2ub, r);
  }

  if (options_.density) {
    if (f == nullptr) throw Error(ErrorKind::InvalidParameter, "density columns requested without a density");
    const DensityReport d = inspect_density(*f);
    m["max_rho"] = d.max_rho;
    m["min_rho"] = d.min_rho;
    m["min_f"] = d.min_value;
    m["mass"] = d.mass;
    const ScalarField2D N = compute_N(*f);
    m["max_N"] = lp_norm(N, kInf);
    m["N_L2"] = lp_norm(N, 2.0);
  }
  return m;
}

// --- Duhamel decomposition -------------------------------------------------------

std::array<Spectrum2D, 4> stress_response(const Spectrum2D& s11, const Spectrum2D& s12, const Spectrum2D& s22) {
  const Grid2D& g = s11.grid();
  std::array<Spectrum2D, 4> out{Spectrum2D(g), Spectrum2D(g), Spectrum2D(g), Spectrum2D(g)};
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      const double xi[2] = {g.dkx(i), g.dky(jk)};
      const double k2 = xi[0] * xi[0] + xi[1] * xi[1];
      if (k2 == 0.0) continue;
      const Complex a = s11(i, jk), b = s12(i, jk), c = s22(i, jk);
      // v = S xi, then Leray projection
      const Complex v[2] = {a * xi[0] + b * xi[1], b * xi[0] + c * xi[1]};
      const Complex dot = (xi[0] * v[0] + xi[1] * v[1]) / k2;
      const Complex pv[2] = {v[0] - xi[0] * dot, v[1] - xi[1] * dot};
      for (int a_ = 0; a_ < 2; ++a_)
        for (int b_ = 0; b_ < 2; ++b_) out[static_cast<std::size_t>(2 * a_ + b_)](i, jk) = -xi[b_] * pv[a_];
    }
  return out;
}

namespace {

// the flow solver only sees the dealiased part of the stress
std::array<Spectrum2D, 4> forcing_response(const StressField& sigma) {
  Spectrum2D a = sigma.s11.spectrum(), b = sigma.s12.spectrum(), c = sigma.s22.spectrum();
  a.truncate();
  b.truncate();
  c.truncate();
  return stress_response(a, b, c);
}

}  // namespace

DuhamelTracker::DuhamelTracker(const VectorField2D& u0, DyadicPartition lp) : lp_(std::move(lp)) {
  require_same_grid(lp_.grid(), u0.grid(), "DuhamelTracker");
  const Grid2D& g = lp_.grid();
  for (int a = 0; a < 2; ++a) {
    const Spectrum2D s = u0[a].spectrum();
    for (int b = 0; b < 2; ++b) grad0_[static_cast<std::size_t>(2 * a + b)] = derivative(s, b);
  }
  for (auto& s : F_) s = Spectrum2D(g);
  for (auto& s : U_) s = Spectrum2D(g);
  Muu_prev_ = quadratic_response(u0);
}

std::array<Spectrum2D, 4> DuhamelTracker::quadratic_response(const VectorField2D& u) const {
  return stress_response(dealiased_product_spectrum(u[0], u[0]), dealiased_product_spectrum(u[0], u[1]),
                         dealiased_product_spectrum(u[1], u[1]));
}

void DuhamelTracker::advance(double dt, const StressField& sigma, const VectorField2D& u_next) {
  const Grid2D& g = lp_.grid();
  const auto Ms = forcing_response(sigma);
  const auto Mq = quadratic_response(u_next);
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      const ExpWeights w = exp_weights(g.k_squared(i, jk), dt);
      for (std::size_t c = 0; c < 4; ++c) {
        F_[c](i, jk) = w.decay * F_[c](i, jk) + w.constant * Ms[c](i, jk);
        U_[c](i, jk) = w.decay * U_[c](i, jk) - (w.w0 * Muu_prev_[c](i, jk) + w.w1 * Mq[c](i, jk));
      }
    }
  Muu_prev_ = Mq;
  t_ += dt;
}

void DuhamelTracker::advance_forcing(double dt, const StressField& sigma) {
  const Grid2D& g = lp_.grid();
  const auto Ms = forcing_response(sigma);
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      const ExpWeights w = exp_weights(g.k_squared(i, jk), dt);
      for (std::size_t c = 0; c < 4; ++c) F_[c](i, jk) = w.decay * F_[c](i, jk) + w.constant * Ms[c](i, jk);
    }
  t_ += dt;
}

std::array<Spectrum2D, 4> DuhamelTracker::heat_part() const {
  std::array<Spectrum2D, 4> out;
  for (std::size_t c = 0; c < 4; ++c) out[c] = heat_semigroup(grad0_[c], t_);
  return out;
}

double DuhamelTracker::residual(const VectorField2D& u) const {
  const auto heat = heat_part();
  double num = 0.0, den = 0.0;
  for (int a = 0; a < 2; ++a) {
    const Spectrum2D s = u[a].spectrum();
    for (int b = 0; b < 2; ++b) {
      const std::size_t c = static_cast<std::size_t>(2 * a + b);
      Spectrum2D actual = derivative(s, b);
      const double n = spectral_l2_norm(actual);
      actual -= heat[c];
      actual -= F_[c];
      actual -= U_[c];
      const double r = spectral_l2_norm(actual);
      num += r * r;
      den += n * n;
    }
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

std::vector<double> DuhamelTracker::F_block_sup() const { return block_sup_norms(lp_, F_); }

double DuhamelTracker::F_block_sup(int q) const {
  const Grid2D& g = lp_.grid();
  std::vector<double> mag2(g.size(), 0.0);
  for (const auto& comp : F_) {
    const ScalarField2D piece = ScalarField2D::from_spectrum(block_project(lp_, comp, q));
    for (std::size_t k = 0; k < mag2.size(); ++k) mag2[k] += piece.values()[k] * piece.values()[k];
  }
  return std::sqrt(max_of(mag2));
}

double DuhamelTracker::F_sup() const {
  const Grid2D& g = lp_.grid();
  std::vector<double> mag2(g.size(), 0.0);
  for (const auto& comp : F_) {
    const ScalarField2D piece = ScalarField2D::from_spectrum(comp);
    for (std::size_t k = 0; k < mag2.size(); ++k) mag2[k] += piece.values()[k] * piece.values()[k];
  }
  return std::sqrt(max_of(mag2));
}

ShellDecayFit monochromatic_shell_sweep(const Grid2D& grid, double r, double T, int steps, int q_min, int q_max) {
  if (!(r > 2.0)) throw Error(ErrorKind::InvalidExponent, "shell sweep needs r > 2");
  if (steps < 1 || !(T > 0.0) || q_min < 0 || q_max <= q_min)
    throw Error(ErrorKind::InvalidParameter, "shell sweep needs T > 0, steps >= 1 and 0 <= q_min < q_max");
  const DyadicPartition lp = DyadicPartition::build(grid);
  if (q_max > lp.j_max()) throw Error(ErrorKind::ShellOutOfRange, "shell sweep beyond the resolved shells");
  ShellDecayFit fit;
  fit.bound_slope = -(1.0 - 2.0 / r);
  const double dt = T / steps;
  for (int q = q_min; q <= q_max; ++q) {
    const double K = std::ldexp(1.0, q) * grid.wavenumber_unit();
    StressField sigma(grid);
    sigma.s12 = ScalarField2D::from_function(grid, [&](double x, double) { return std::cos(K * x); });
    DuhamelTracker tracker(VectorField2D(grid), lp);
    double integral = 0.0, prev = 0.0;
    for (int n = 0; n < steps; ++n) {
      tracker.advance_forcing(dt, sigma);
      const double cur = tracker.F_block_sup(q);
      integral += 0.5 * dt * (prev + cur);
      prev = cur;
    }
    const double forcing = T * lp_norm(stress_divergence(sigma), r);
    fit.q.push_back(q);
    fit.ratio.push_back(integral / forcing);
  }
  // least-squares slope of log2(ratio) against q
  const double n = static_cast<double>(fit.q.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < fit.q.size(); ++k) {
    const double x = fit.q[k], y = std::log2(fit.ratio[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.pass = std::isfinite(fit.slope) && fit.slope <= fit.bound_slope;
  return fit;
}

// --- budgets -----------------------------------------------------------------------

BudgetReport compute_budgets(const RunHistory& h, double r) {
  if (!(r > 2.0)) throw Error(ErrorKind::InvalidExponent, "budgets need r > 2");
  h.require_nonempty("compute_budgets");
  BudgetReport b;
  b.r = r;
  const auto t = h.times();
  b.t.assign(t.begin(), t.end());
  b.T = t.back() - t.front();

  const auto s2 = h.column("sigma_L2");
  const auto sinf = h.column("sigma_Linf");
  const auto dsr = h.column(lebesgue_column("div_sigma", r));
  const auto ds2 = h.column("div_sigma_L2");
  const auto gsr = h.column(lebesgue_column("grad_sigma", r));
  const auto sh1 = h.column("sigma_H1");
  const auto u2 = h.column("u_L2");
  const auto uh1 = h.column("u_H1");
  const auto uh2 = h.column("u_H2");

  b.K_2_2 = std::sqrt(time_integral(h, squared(s2)));
  b.K_inf_1 = time_integral(h, sinf);
  b.K_2_1 = time_integral(h, s2);
  b.K_inf_inf = max_of(sinf);
  b.B_r_1 = time_integral(h, dsr);
  b.B_r_2 = std::sqrt(time_integral(h, squared(dsr)));
  b.B_2_2 = std::sqrt(time_integral(h, squared(ds2)));
  b.p_point = 4.0 * r / (r - 2.0);
  b.B_r_point = std::pow(time_integral(h, powered(dsr, b.p_point)), 1.0 / b.p_point);

  b.u0_L2 = u2.front();
  b.u0_H1 = uh1.front();
  b.K0 = b.K_2_2 * b.K_2_2 + b.u0_L2 * b.u0_L2;
  b.omega0_Lr = h.column(lebesgue_column("omega", r)).front();
  b.grad_omega0_Lr = h.column(lebesgue_column("grad_omega", r)).front();
  b.Omega_r = b.B_r_2 + b.omega0_Lr;
  b.Omega_2 = b.B_2_2 + h.column("omega_L2").front();
  b.E1 = time_integral(h, squared(uh1));
  b.E2 = time_integral(h, squared(uh2));
  b.R1 = time_integral(h, squared(sh1)) + b.u0_H1 * b.u0_H1;

  const std::size_t K = t.size();
  b.n.resize(K);
  for (std::size_t k = 0; k < K; ++k) b.n[k] = gsr[k] * gsr[k] + sh1[k] * sh1[k];
  b.B = cumulative_integral(h, b.n);
  const auto g = h.column("grad_ubar_Linf");
  b.g.assign(g.begin(), g.end());
  b.gamma.resize(K);
  double run = 0.0;
  for (std::size_t k = 0; k < K; ++k) b.gamma[k] = run = std::max(run, b.g[k]);
  const auto h2 = h.column(lebesgue_column("grad2_ubar", r));
  const auto ubh2 = h.column("ubar_H2");
  b.G.resize(K);
  for (std::size_t k = 0; k < K; ++k) b.G[k] = h2[k] * h2[k] + ubh2[k] * ubh2[k];
  b.G_integral = cumulative_integral(h, b.G);

  const double nmax = max_of(b.n);
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double d = (b.B[k + 1] - b.B[k - 1]) / (t[k + 1] - t[k - 1]);
    if (nmax > 0.0) b.dB_consistency = std::max(b.dB_consistency, std::abs(d - b.n[k]) / nmax);
  }
  return b;
}

// --- logarithmic bounds --------------------------------------------------------------

double InequalityRow::ratio() const noexcept { return lhs == 0.0 ? 0.0 : lhs / rhs; }
bool InequalityRow::finite() const noexcept { return std::isfinite(lhs) && std::isfinite(rhs) && std::isfinite(ratio()); }

double advection_identity_residual(const VectorField2D& u) {
  const Grid2D& g = u.grid();
  const ScalarField2D omega = curl(u);
  const VectorField2D gw = spectral_gradient(omega);
  ScalarField2D lhs(g);
  for (std::size_t p = 0; p < lhs.size(); ++p)
    lhs.values()[p] = u[0].values()[p] * gw[0].values()[p] + u[1].values()[p] * gw[1].values()[p];
  Spectrum2D l = lhs.spectrum();
  l.truncate();

  ScalarField2D diff(g), cross(g);
  for (std::size_t p = 0; p < diff.size(); ++p) {
    const double a = u[0].values()[p], b = u[1].values()[p];
    diff.values()[p] = b * b - a * a;
    cross.values()[p] = a * b;
  }
  const Spectrum2D sd = diff.spectrum();
  const Spectrum2D sc = cross.spectrum();
  Spectrum2D rhs(g);
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      if (!g.keeps(i, jk)) continue;
      const double k1 = g.dkx(i), k2 = g.dky(jk);
      // d1 d2 -> -k1 k2, (d1^2 - d2^2) -> (k2^2 - k1^2)
      rhs(i, jk) = -k1 * k2 * sd(i, jk) + (k2 * k2 - k1 * k1) * sc(i, jk);
    }
  l -= rhs;
  const double scale = lp_norm(u, kInf) * lp_norm(gw, 2.0);
  if (scale == 0.0) return spectral_l2_norm(l);
  return spectral_l2_norm(l) / scale;
}

LogBoundsReport log_bounds_report(const RunHistory& h, double r) {
  const BudgetReport b = compute_budgets(h, r);
  LogBoundsReport rep;
  rep.r = r;
  const double L = log_sum(b.Omega_r, b.Omega_2, b.K0);
  const auto uinf = h.column("u_Linf");

  rep.rows.push_back({"velocity_sup_log", time_integral(h, squared(uinf)), b.K0 * L});
  rep.rows.push_back({"hessian_log", std::sqrt(time_integral(h, squared(h.column(lebesgue_column("grad2_u", r))))),
                      b.T * b.grad_omega0_Lr + std::sqrt(b.K0) * b.Omega_r * std::sqrt(L)});
  if (h.has_column("F_Linf")) {
    double rhs = std::sqrt(b.K0 * b.T);
    if (b.K_inf_inf > 0.0) rhs += b.K_inf_inf * log_star(b.B_r_point / b.K_inf_inf);
    rep.rows.push_back({"stress_response_sup", max_of(h.column("F_Linf")), rhs});
  }
  for (double p : {1.0, 1.5}) {
    const double lhs = time_integral(h, powered(uinf, p));
    const double rhs = std::pow(b.T, 1.0 - p / 2.0) * std::pow(b.K0 * L, p / 2.0);
    rep.rows.push_back({p == 1.0 ? "velocity_sup_p1" : "velocity_sup_p1.5", lhs, rhs});
  }
  for (const auto& s : h.snapshots()) {
    rep.identity_residual = std::max(rep.identity_residual, advection_identity_residual(s.u));
    ++rep.identity_snapshots;
  }
  return rep;
}

// --- amplification ---------------------------------------------------------------

double amplification_rhs(const BudgetReport& b, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidEpsilon, "epsilon must be positive");
  const double T = b.T;
  return std::sqrt(T) * b.u0_H1 + b.K_2_1 * T + b.K_inf_1 * log_star(b.B_r_1 / epsilon) +
         (1.0 + T) * b.E1 * log_star((1.0 + T) * b.R1 / epsilon) + epsilon;
}

AmplificationReport amplification_report(const RunHistory& h, double r, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorKind::InvalidEpsilon, "epsilon must be positive");
  const BudgetReport b = compute_budgets(h, r);
  AmplificationReport rep;
  rep.r = r;
  rep.epsilon = epsilon;
  rep.lhs = time_integral(h, h.column("besov_grad"));
  rep.rhs = amplification_rhs(b, epsilon);

  const auto objective = [&](double log_eps) { return amplification_rhs(b, std::exp(log_eps)); };
  const auto best = boost::math::tools::brent_find_minima(objective, -40.0, 40.0, 40);
  rep.epsilon_opt = std::exp(best.first);
  rep.rhs_opt = best.second;

  for (int q = -1;; ++q) {
    const std::string name = "F_shell_" + std::to_string(q);
    if (!h.has_column(name)) break;
    ShellRow row;
    row.q = q;
    row.measured = time_integral(h, h.column(name));
    if (q < 0) {
      row.low_bound = b.K_2_1 * b.T;
      row.high_bound = row.low_bound;
    } else {
      row.low_bound = 4.0 * b.K_inf_1;
      row.high_bound = 4.0 * std::exp2(-q * (1.0 - 2.0 / r)) * b.B_r_1;
    }
    rep.shells.push_back(row);
  }
  rep.M_formula = log_star(b.B_r_1 / epsilon);
  rep.M_crossover = (b.K_inf_1 > 0.0 && b.B_r_1 > b.K_inf_1) ? std::log2(b.B_r_1 / b.K_inf_1) / (1.0 - 2.0 / r) : 0.0;
  if (h.has_column("duhamel_residual")) {
    rep.has_decomposition = true;
    rep.decomposition_residual = max_of(h.column("duhamel_residual"));
  }
  return rep;
}

// --- N evolution -------------------------------------------------------------------

NEvolutionReport n_evolution_residual(const ParticleDensity& f, const VectorField2D& u_bar, const ModelParams& params,
                                      double coefficient_eps, double fd_step) {
  params.validate();
  const Grid2D& g = f.grid();
  const MicroManifold& mm = f.manifold();
  require_same_grid(g, u_bar.grid(), "n_evolution_residual");
  const std::size_t np = g.size();

  const PhaseField gx[2] = {x_derivative(f, 0), x_derivative(f, 1)};
  const PhaseField Rg[2] = {apply_R(gx[0]), apply_R(gx[1])};
  const TensorField2D grad = gradient_tensor(u_bar);
  // hess[i][j][k] = d_k d_j ubar_i
  std::array<std::array<std::array<ScalarField2D, 2>, 2>, 2> hess;
  for (int i = 0; i < 2; ++i) {
    const Spectrum2D s = u_bar[i].spectrum();
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) hess[i][j][k] = ScalarField2D::from_spectrum(derivative(derivative(s, j), k));
  }
  const auto drift = params.drift.sample(mm);
  const auto coeff = [&](int i, int j) {
    std::vector<double> c(static_cast<std::size_t>(mm.n_m));
    for (int m = 0; m < mm.n_m; ++m) c[static_cast<std::size_t>(m)] = drift[static_cast<std::size_t>(4 * m + 2 * i + j)];
    return c;
  };

  NEvolutionReport rep;
  ScalarField2D N2 = inner_theta(Rg[0], Rg[0]);
  N2 += inner_theta(Rg[1], Rg[1]);
  rep.N = N2;
  for (double& v : rep.N.values()) v = std::sqrt(std::max(v, 0.0));

  rep.D = ScalarField2D(g);
  for (int k = 0; k < 2; ++k) {
    const PhaseField d = theta_derivative(Rg[k]);
    rep.D += inner_theta(d, d);
  }
  rep.D *= coefficient_eps;

  rep.I = ScalarField2D(g);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      const ScalarField2D prod = inner_theta(Rg[j], Rg[k]);
      for (std::size_t p = 0; p < np; ++p) rep.I.values()[p] -= grad(j, k).values()[p] * prod.values()[p];
    }

  rep.II = ScalarField2D(g);
  rep.III = ScalarField2D(g);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto c = coeff(i, j);
      const PhaseField h = apply_R(theta_derivative(multiply_theta(f, c)));
      for (int k = 0; k < 2; ++k) {
        const ScalarField2D a = inner_theta(h, Rg[k]);
        for (std::size_t p = 0; p < np; ++p) rep.II.values()[p] -= hess[i][j][k].values()[p] * a.values()[p];
        const PhaseField hk = apply_R(theta_derivative(multiply_theta(gx[k], c)));
        const ScalarField2D b = inner_theta(hk, Rg[k]);
        for (std::size_t p = 0; p < np; ++p) rep.III.values()[p] -= grad(i, j).values()[p] * b.values()[p];
      }
    }

  rep.IV = ScalarField2D(g);
  if (params.b != 0.0) {
    const PhaseField dU = theta_derivative(mean_field_potential(f, params));
    for (int k = 0; k < 2; ++k) {
      const PhaseField dUk = theta_derivative(mean_field_potential(gx[k], params));
      PhaseField q(g, mm);
      for (std::size_t n = 0; n < q.storage().size(); ++n)
        q.storage()[n] = gx[k].storage()[n] * dU.storage()[n] + f.storage()[n] * dUk.storage()[n];
      const ScalarField2D a = inner_theta(apply_R(theta_derivative(q)), Rg[k]);
      rep.IV -= a;
    }
  }

  // finite difference along the flow
  FokkerPlanckSolver solver(g, mm, params);
  double h = fd_step;
  if (!(h > 0.0)) {
    const double limit = solver.max_stable_dt(f, u_bar);
    h = std::isfinite(limit) ? std::min(1e-5, 1e-3 * limit) : 1e-5;
  }
  rep.fd_step = h;
  const ParticleDensity fh = solver.step(f, u_bar, h);
  const ScalarField2D Nh = compute_N(fh, NQuadrature::Direct);
  const VectorField2D gN2 = spectral_gradient(N2);
  rep.material_half_N2 = ScalarField2D(g);
  rep.material_N = ScalarField2D(g);
  rep.bound_shape = ScalarField2D(g);
  const ScalarField2D gub = gradient_magnitude(u_bar);
  const ScalarField2D hub = hessian_magnitude(u_bar);
  double scale = 0.0, worst = 0.0;
  rep.max_material_N = -kInf;
  for (std::size_t p = 0; p < np; ++p) {
    const double n = rep.N.values()[p];
    const double nh = Nh.values()[p];
    const double adv = u_bar[0].values()[p] * gN2[0].values()[p] + u_bar[1].values()[p] * gN2[1].values()[p];
    const double half = (nh * nh - n * n) / (2.0 * h) + 0.5 * adv;
    rep.material_half_N2.values()[p] = half;
    const double terms[5] = {-rep.D.values()[p], rep.I.values()[p], rep.II.values()[p], rep.III.values()[p],
                             rep.IV.values()[p]};
    double sum = 0.0, mag = 0.0;
    for (double v : terms) {
      sum += v;
      mag += std::abs(v);
    }
    scale = std::max(scale, mag);
    worst = std::max(worst, std::abs(half - sum));

    const double bound = (gub.values()[p] + 1.0 / params.delta) * n + hub.values()[p];
    rep.bound_shape.values()[p] = bound;
    if (n > kFloor) {
      const double dn = half / n;
      rep.material_N.values()[p] = dn;
      rep.max_material_N = std::max(rep.max_material_N, dn);
      if (bound > 0.0) rep.fitted_c = std::max(rep.fitted_c, dn / bound);
      const double n2 = n * n;
      if (gub.values()[p] > kFloor) {
        rep.c_I = std::max(rep.c_I, std::abs(rep.I.values()[p]) / (gub.values()[p] * n2));
        rep.c_III = std::max(rep.c_III, std::abs(rep.III.values()[p]) / (gub.values()[p] * n2));
      }
      if (hub.values()[p] > kFloor) rep.c_II = std::max(rep.c_II, std::abs(rep.II.values()[p]) / (hub.values()[p] * n));
      if (params.b > 0.0) rep.c_IV = std::max(rep.c_IV, std::abs(rep.IV.values()[p]) / (params.b / params.delta * n2));
    }
  }
  if (rep.max_material_N == -kInf) rep.max_material_N = 0.0;
  rep.identity_residual = scale > 0.0 ? worst / scale : worst;
  rep.min_margin = kInf;
  for (std::size_t p = 0; p < np; ++p)
    rep.min_margin = std::min(rep.min_margin, rep.fitted_c * rep.bound_shape.values()[p] - rep.material_N.values()[p]);

  rep.finite = rep.N.all_finite() && rep.D.all_finite() && rep.I.all_finite() && rep.II.all_finite() &&
               rep.III.all_finite() && rep.IV.all_finite() && rep.material_N.all_finite() && std::isfinite(rep.fitted_c);
  return rep;
}

// --- comparison ODE ----------------------------------------------------------------

double comparison_rhs(double C2, double y) { return C2 * (1.0 + y * log_star(std::max(y, 0.0))); }

double comparison_rhs_loglog(double C2, double w) {
  const double z = std::exp(w);
  const double e = std::exp(-z);
  return C2 * (1.0 - 2.0 * e + e / z);
}

double to_loglog(double y) { return std::log(log_star(y)); }

double from_loglog(double w) { return std::exp(std::exp(w)) - 2.0; }

std::vector<double> integrate_comparison_loglog(double C2, double y0, std::span<const double> times, int substeps) {
  if (substeps < 1) throw Error(ErrorKind::InvalidParameter, "substeps must be >= 1");
  std::vector<double> w(times.size());
  if (times.empty()) return w;
  double v = to_loglog(y0);
  w[0] = v;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double span = times[k] - times[k - 1];
    const int n = std::max(substeps, static_cast<int>(std::ceil(std::abs(C2 * span) / 0.01)));
    const double h = span / n;
    for (int s = 0; s < n; ++s) {
      const double k1 = comparison_rhs_loglog(C2, v);
      const double k2 = comparison_rhs_loglog(C2, v + 0.5 * h * k1);
      const double k3 = comparison_rhs_loglog(C2, v + 0.5 * h * k2);
      const double k4 = comparison_rhs_loglog(C2, v + h * k3);
      v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    w[k] = v;
  }
  return w;
}

std::vector<double> integrate_comparison_ode(double C2, double y0, std::span<const double> times, int substeps) {
  std::vector<double> y = integrate_comparison_loglog(C2, y0, times, substeps);
  for (double& v : y) v = from_loglog(v);
  return y;
}

GronwallReport gronwall_tracker(const BudgetReport& b) {
  if (b.t.empty()) throw Error(ErrorKind::EmptyHistory, "gronwall_tracker: budgets are empty");
  GronwallReport rep;
  for (std::size_t k = 0; k < b.t.size(); ++k) rep.C2 = std::max(rep.C2, b.n[k] / (1.0 + b.B[k] * log_star(b.B[k])));
  rep.loglog_y = integrate_comparison_loglog(rep.C2, b.B.front(), b.t);
  rep.y.resize(b.t.size());
  for (std::size_t k = 0; k < b.t.size(); ++k) {
    rep.y[k] = from_loglog(rep.loglog_y[k]);
    // B <= y compared where both are representable
    if (to_loglog(b.B[k]) > rep.loglog_y[k] + 1e-12) rep.dominated = false;
    if (rep.y[k] > 0.0 && std::isfinite(rep.y[k])) rep.max_ratio = std::max(rep.max_ratio, b.B[k] / rep.y[k]);
    const double num = b.n[k] - b.n.front();
    const double den = b.gamma[k] * b.B[k] + b.G_integral[k];
    if (num > 0.0 && den > 0.0) rep.c_integrated = std::max(rep.c_integrated, num / den);
    if (!std::isfinite(rep.loglog_y[k])) rep.finite = false;
  }
  rep.finite = rep.finite && std::isfinite(rep.C2) && std::isfinite(rep.c_integrated);
  return rep;
}

}  // namespace mmf
