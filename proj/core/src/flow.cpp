#include "mmf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mmf {

namespace {

constexpr Complex kI{0.0, 1.0};

Spectrum2D integrating_factor_apply(Spectrum2D spec, double dt) { return heat_semigroup(std::move(spec), dt); }

Spectrum2D tendency(const ScalarField2D& omega, const VectorField2D& u, const StressField& sigma) {
  Spectrum2D n = forcing_spectrum(sigma);
  n -= advection_spectrum(omega, u);
  return n;
}

FlowState heun_step(const FlowState& state, const StressField& s0, const StressField& s1, double dt,
                    double cfl_safety) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidParameter, "time step must be positive");
  require_same_grid(state.grid(), s0.grid(), "nse_step");
  const double limit = nse_max_stable_dt(state.u, cfl_safety);
  if (dt > limit)
    throw Error(ErrorKind::CflViolation, "flow step dt = " + std::to_string(dt) + " exceeds the CFL limit " +
                                             std::to_string(limit) + " at t = " + std::to_string(state.t));

  const Spectrum2D w0 = state.omega.spectrum();
  const Spectrum2D n0 = tendency(state.omega, state.u, s0);

  Spectrum2D a = w0;
  {
    Spectrum2D step = n0;
    step *= dt;
    a += step;
  }
  a = integrating_factor_apply(std::move(a), dt);
  a(0, 0) = 0.0;
  const ScalarField2D a_phys = ScalarField2D::from_spectrum(a);
  const VectorField2D ua = biot_savart(a);
  const Spectrum2D na = tendency(a_phys, ua, s1);

  Spectrum2D next = integrating_factor_apply(w0, dt);
  Spectrum2D en0 = integrating_factor_apply(n0, dt);
  en0 += na;
  en0 *= 0.5 * dt;
  next += en0;
  next(0, 0) = 0.0;

  FlowState out;
  out.omega = ScalarField2D::from_spectrum(next);
  out.u = biot_savart(next);
  out.t = state.t + dt;
  if (!out.omega.all_finite() || !out.u.all_finite())
    throw Error(ErrorKind::NonFiniteField, "vorticity became non-finite at t = " + std::to_string(out.t));
  return out;
}

}  // namespace

FlowState FlowState::from_vorticity(ScalarField2D omega, double t) {
  FlowState s;
  s.u = biot_savart(omega);
  s.omega = std::move(omega);
  s.t = t;
  return s;
}

Spectrum2D forcing_spectrum(const StressField& sigma) {
  const Grid2D& g = sigma.grid();
  const Spectrum2D s11 = sigma.s11.spectrum();
  const Spectrum2D s12 = sigma.s12.spectrum();
  const Spectrum2D s22 = sigma.s22.spectrum();
  Spectrum2D out(g);
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      if (!g.keeps(i, jk)) continue;
      const double k1 = g.dkx(i), k2 = g.dky(jk);
      out(i, jk) = -(k1 * k1 - k2 * k2) * s12(i, jk) - k1 * k2 * (s22(i, jk) - s11(i, jk));
    }
  return out;
}

Spectrum2D advection_spectrum(const ScalarField2D& omega, const VectorField2D& u) {
  const Grid2D& g = omega.grid();
  const Spectrum2D q1 = dealiased_product_spectrum(u[0], omega);
  const Spectrum2D q2 = dealiased_product_spectrum(u[1], omega);
  Spectrum2D out(g);
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) out(i, jk) = kI * (g.dkx(i) * q1(i, jk) + g.dky(jk) * q2(i, jk));
  return out;
}

StressField sigma_from_vorticity_source(const ScalarField2D& source) {
  const Grid2D& g = source.grid();
  const Spectrum2D s = source.spectrum();
  Spectrum2D s12(g), s22(g);
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      if (!g.keeps(i, jk)) continue;
      const double k1 = g.dkx(i), k2 = g.dky(jk);
      const double d = k1 * k1 - k2 * k2;
      if (d != 0.0)
        s12(i, jk) = -s(i, jk) / d;
      else if (k1 * k2 != 0.0)
        s22(i, jk) = -s(i, jk) / (k1 * k2);
    }
  return StressField(ScalarField2D(g), ScalarField2D::from_spectrum(s12), ScalarField2D::from_spectrum(s22));
}

double nse_max_stable_dt(const VectorField2D& u, double cfl_safety) {
  const double umax = lp_norm(u, std::numeric_limits<double>::infinity());
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return cfl_safety * u.grid().min_spacing() / umax;
}

FlowState nse_step(const FlowState& state, const StressField& sigma, double dt, double cfl_safety) {
  return heun_step(state, sigma, sigma, dt, cfl_safety);
}

FlowState nse_step(const FlowState& state, const ForcingProvider& sigma, double dt, double cfl_safety) {
  return heun_step(state, sigma(state.t), sigma(state.t + dt), dt, cfl_safety);
}

// --- time average ------------------------------------------------------------

VelocityRingBuffer::VelocityRingBuffer(double delta, double dt_hint, AverageWindow window)
    : delta_(delta), capacity_(0), window_(window) {
  if (!(delta > 0.0) || !(dt_hint > 0.0)) throw Error(ErrorKind::InvalidParameter, "window and step must be positive");
  capacity_ = static_cast<std::size_t>(std::ceil(delta / dt_hint)) + 1;
}

double VelocityRingBuffer::last_time() const {
  if (samples_.empty()) throw Error(ErrorKind::EmptyHistory, "velocity buffer is empty");
  return samples_.back().t;
}

std::vector<double> VelocityRingBuffer::timestamps() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.t);
  return out;
}

VectorField2D VelocityRingBuffer::push(const VectorField2D& u, double t) {
  if (!samples_.empty()) {
    if (!(t > samples_.back().t)) throw Error(ErrorKind::NonMonotoneTime, "velocity sample times must increase");
    require_same_grid(samples_.back().u.grid(), u.grid(), "VelocityRingBuffer");
  }
  samples_.push_back({t, u});
  const double start = t - delta_;
  while (samples_.size() > 1 && samples_.front().t < start) samples_.pop_front();
  return average();
}

VectorField2D VelocityRingBuffer::average() const {
  if (samples_.empty()) throw Error(ErrorKind::EmptyHistory, "velocity buffer is empty");
  const Grid2D& g = samples_.back().u.grid();
  const double t = samples_.back().t;
  const double start = std::max(t - delta_, 0.0);
  VectorField2D out(g);
  const std::size_t n = g.size();
  // constant extension of the oldest retained sample back to the window start
  const double lead = std::max(samples_.front().t - start, 0.0);
  const double divisor = window_ == AverageWindow::Fixed ? delta_ : std::min(delta_, t - start);
  if (divisor <= 0.0) return samples_.back().u;

  for (int c = 0; c < 2; ++c) {
    auto& o = out[c].storage();
    const auto& first = samples_.front().u[c].storage();
    for (std::size_t p = 0; p < n; ++p) o[p] = lead * first[p];
    for (std::size_t k = 1; k < samples_.size(); ++k) {
      const double h = 0.5 * (samples_[k].t - samples_[k - 1].t);
      const auto& a = samples_[k - 1].u[c].storage();
      const auto& b = samples_[k].u[c].storage();
      for (std::size_t p = 0; p < n; ++p) o[p] += h * (a[p] + b[p]);
    }
    for (double& v : o) v /= divisor;
  }
  return out;
}

VectorField2D update_time_average(VelocityRingBuffer& buffer, const VectorField2D& u, double t) {
  return buffer.push(u, t);
}

// --- budgets -------------------------------------------------------------------

EnergyBalance energy_balance(const RunHistory& history) {
  history.require_nonempty("energy_balance");
  const auto u = history.column("u_L2");
  const auto gu = history.column("grad_u_L2");
  const auto s = history.column("sigma_L2");
  std::vector<double> u2(u.size()), gu2(u.size()), s2(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    u2[k] = u[k] * u[k];
    gu2[k] = gu[k] * gu[k];
    s2[k] = s[k] * s[k];
  }
  const auto diss = cumulative_integral(history, gu2);
  EnergyBalance e;
  double sup_u2 = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    e.lhs = std::max(e.lhs, u2[k] + diss[k]);
    sup_u2 = std::max(sup_u2, u2[k]);
  }
  e.rhs = time_integral(history, s2) + u2.front();
  e.margin = e.rhs - e.lhs;
  e.split_lhs = sup_u2 + diss.back();
  e.split_margin = e.rhs - e.split_lhs;
  return e;
}

VorticityLrBound vorticity_lr_check(const RunHistory& history, double r) {
  if (!(r >= 2.0)) throw Error(ErrorKind::InvalidExponent, "vorticity bound needs r >= 2");
  history.require_nonempty("vorticity_lr_check");
  const auto w = history.column(lebesgue_column("omega", r));
  const auto ds = history.column(lebesgue_column("div_sigma", r));
  const auto w2 = history.column("omega_L2");
  const auto lap = history.column("lap_u_L2");
  const auto gs = history.column("grad_sigma_L2");
  std::vector<double> ds2(w.size()), lap2(w.size()), gs2(w.size());
  VorticityLrBound b;
  for (std::size_t k = 0; k < w.size(); ++k) {
    b.lhs = std::max(b.lhs, w[k] * w[k]);
    ds2[k] = ds[k] * ds[k];
    lap2[k] = lap[k] * lap[k];
    gs2[k] = gs[k] * gs[k];
  }
  b.rhs = time_integral(history, ds2) + w.front() * w.front();
  b.lap_lhs = time_integral(history, lap2);
  b.lap_rhs = time_integral(history, gs2) + w2.front() * w2.front();
  return b;
}

}  // namespace mmf
