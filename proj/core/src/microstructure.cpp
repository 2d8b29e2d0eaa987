#include "mmf/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fft.hpp"
#include "mmf/parallel.hpp"
#include "mmf/summation.hpp"

namespace mmf {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_same_phase(const PhaseField& a, const PhaseField& b, const char* where) {
  require_same_grid(a.grid(), b.grid(), where);
  if (!(a.manifold() == b.manifold())) throw Error(ErrorKind::ShapeMismatch, std::string(where) + ": manifolds differ");
}

// Same dealiasing fraction as the spatial grid, applied to theta modes.
bool theta_keeps(const Grid2D& g, int n_m, int k) {
  return 2L * g.dealias_den * k < static_cast<long>(g.dealias_num) * n_m;
}

double theta_dk(int n_m, int k) { return k == n_m / 2 ? 0.0 : static_cast<double>(k); }

std::vector<Complex> theta_forward(const PhaseField& h) {
  std::vector<Complex> spec(h.point_count() * h.manifold().n_modes());
  detail::forward_1d(h.n_m(), h.point_count(), h.values().data(), spec.data());
  return spec;
}

void theta_inverse(const std::vector<Complex>& spec, PhaseField& out) {
  detail::inverse_1d(out.n_m(), out.point_count(), spec.data(), out.values().data());
}

template <class M>
PhaseField theta_multiplier(const PhaseField& h, M&& mult) {
  auto spec = theta_forward(h);
  const int nk = h.manifold().n_modes();
  std::vector<Complex> table(static_cast<std::size_t>(nk));
  for (int k = 0; k < nk; ++k) table[static_cast<std::size_t>(k)] = mult(k);
  for (std::size_t p = 0; p < h.point_count(); ++p)
    for (int k = 0; k < nk; ++k) spec[p * nk + k] *= table[static_cast<std::size_t>(k)];
  PhaseField out(h.grid(), h.manifold());
  theta_inverse(spec, out);
  return out;
}

std::vector<Complex> x_forward(const PhaseField& h) {
  const Grid2D& g = h.grid();
  std::vector<Complex> spec(g.spectral_size() * h.n_m());
  detail::forward_2d(g.nx, g.ny, h.n_m(), h.values().data(), spec.data());
  return spec;
}

}  // namespace

// --- MicroManifold ---------------------------------------------------------

void MicroManifold::validate() const {
  if (n_m < 16 || n_m % 2 != 0)
    throw Error(ErrorKind::InvalidGrid, "manifold needs an even number of points >= 16, got " + std::to_string(n_m));
  if (!(s > 1.5) || !std::isfinite(s)) throw Error(ErrorKind::InvalidParameter, "smoothing order s must exceed 1.5");
}

double MicroManifold::r_multiplier(int k) const noexcept {
  return std::pow(1.0 + static_cast<double>(k) * k, -0.5 * s);
}

// --- PhaseField ------------------------------------------------------------

PhaseField::PhaseField(const Grid2D& grid, const MicroManifold& manifold, double value)
    : grid_(grid), manifold_(manifold), values_(grid.size() * static_cast<std::size_t>(manifold.n_m), value) {}

PhaseField::PhaseField(const Grid2D& grid, const MicroManifold& manifold, std::vector<double> values)
    : grid_(grid), manifold_(manifold), values_(std::move(values)) {
  if (values_.size() != grid.size() * static_cast<std::size_t>(manifold.n_m))
    throw Error(ErrorKind::ShapeMismatch, "phase field storage has " + std::to_string(values_.size()) + " values");
}

ScalarField2D PhaseField::theta_integral() const {
  ScalarField2D rho(grid_);
  const double dth = manifold_.dtheta();
  for (std::size_t p = 0; p < point_count(); ++p) {
    double s = 0.0;
    for (double v : column(p)) s += v;
    rho.values()[p] = s * dth;
  }
  return rho;
}

double PhaseField::total() const { return pairwise_sum(theta_integral().values()) * grid_.cell_area(); }

double PhaseField::min_value() const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::min(m, v);
  return m;
}

bool PhaseField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

PhaseField& PhaseField::operator+=(const PhaseField& other) { return add_scaled(1.0, other); }
PhaseField& PhaseField::operator-=(const PhaseField& other) { return add_scaled(-1.0, other); }

PhaseField& PhaseField::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

PhaseField& PhaseField::add_scaled(double s, const PhaseField& other) {
  require_same_phase(*this, other, "PhaseField");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
  return *this;
}

DensityReport inspect_density(const ParticleDensity& f) {
  DensityReport r;
  r.min_value = f.min_value();
  const ScalarField2D rho = f.theta_integral();
  const auto [lo, hi] = std::minmax_element(rho.values().begin(), rho.values().end());
  r.min_rho = *lo;
  r.max_rho = *hi;
  r.mass = pairwise_sum(rho.values()) * f.grid().cell_area();
  r.admissible = r.min_value >= -1e-10 && r.min_rho >= -1e-10 && r.max_rho <= 1.0 + 1e-8;
  return r;
}

// --- kernel and drift ------------------------------------------------------

InteractionKernel InteractionKernel::convolution(std::function<double(double)> profile) {
  InteractionKernel k;
  k.profile_ = std::move(profile);
  return k;
}

InteractionKernel InteractionKernel::general(std::function<double(double, double)> kernel) {
  InteractionKernel k;
  k.general_ = std::move(kernel);
  return k;
}

InteractionKernel InteractionKernel::maier_saupe() {
  return convolution([](double d) { return -std::cos(2.0 * d); });
}

double InteractionKernel::operator()(double theta, double theta_prime) const {
  if (profile_) return profile_(theta - theta_prime);
  if (general_) return general_(theta, theta_prime);
  throw Error(ErrorKind::InvalidParameter, "interaction kernel is empty");
}

std::vector<double> InteractionKernel::sample(const MicroManifold& manifold) const {
  const int n = manifold.n_m;
  std::vector<double> table(static_cast<std::size_t>(n) * n);
  if (profile_) {
    std::vector<double> offsets(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) offsets[static_cast<std::size_t>(d)] = profile_(manifold.theta(std::min(d, n - d)));
    for (int m = 0; m < n; ++m)
      for (int q = 0; q < n; ++q) table[static_cast<std::size_t>(m) * n + q] = offsets[static_cast<std::size_t>((m - q + n) % n)];
    return table;
  }
  if (!general_) throw Error(ErrorKind::InvalidParameter, "interaction kernel is empty");
  for (int m = 0; m < n; ++m)
    for (int q = m; q < n; ++q) {
      const double a = general_(manifold.theta(m), manifold.theta(q));
      const double b = general_(manifold.theta(q), manifold.theta(m));
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        throw Error(ErrorKind::InvalidParameter, "interaction kernel is not symmetric");
      table[static_cast<std::size_t>(m) * n + q] = a;
      table[static_cast<std::size_t>(q) * n + m] = a;
    }
  return table;
}

DriftCoefficients DriftCoefficients::rods() {
  return {[](double th) {
    const double c = std::cos(th), s = std::sin(th);
    return std::array<double, 4>{-s * c, -s * s, c * c, s * c};
  }};
}

std::vector<double> DriftCoefficients::sample(const MicroManifold& manifold) const {
  if (!c) throw Error(ErrorKind::InvalidParameter, "drift coefficients are empty");
  std::vector<double> out(static_cast<std::size_t>(manifold.n_m) * 4);
  for (int m = 0; m < manifold.n_m; ++m) {
    const auto v = c(manifold.theta(m));
    std::copy(v.begin(), v.end(), out.begin() + 4 * m);
  }
  return out;
}

void ModelParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(ErrorKind::InvalidParameter, "delta must be positive");
  if (!(b >= 0.0) || !std::isfinite(b)) throw Error(ErrorKind::InvalidParameter, "b must be nonnegative");
  if (!(tau > 0.0) || !(nu > 0.0)) throw Error(ErrorKind::InvalidParameter, "tau and nu must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw Error(ErrorKind::InvalidParameter, "cfl_safety must lie in (0, 1]");
  if (!drift.c) throw Error(ErrorKind::InvalidParameter, "drift coefficients are empty");
}

// --- theta and x operators -------------------------------------------------

PhaseField apply_R(const PhaseField& h, double power) {
  const MicroManifold& mm = h.manifold();
  return theta_multiplier(h, [&](int k) { return Complex(std::pow(mm.r_multiplier(k), power), 0.0); });
}

std::vector<double> apply_R(std::span<const double> column, const MicroManifold& manifold) {
  const int n = manifold.n_m;
  if (column.size() != static_cast<std::size_t>(n)) throw Error(ErrorKind::ShapeMismatch, "apply_R: column length differs from n_m");
  std::vector<Complex> spec(static_cast<std::size_t>(manifold.n_modes()));
  detail::forward_1d(n, 1, column.data(), spec.data());
  for (int k = 0; k < manifold.n_modes(); ++k) spec[static_cast<std::size_t>(k)] *= manifold.r_multiplier(k);
  std::vector<double> out(static_cast<std::size_t>(n));
  detail::inverse_1d(n, 1, spec.data(), out.data());
  return out;
}

PhaseField theta_derivative(const PhaseField& h) {
  const int n = h.n_m();
  return theta_multiplier(h, [&](int k) { return kI * theta_dk(n, k); });
}

PhaseField x_derivative(const PhaseField& h, int axis) {
  if (axis != 0 && axis != 1) throw Error(ErrorKind::InvalidParameter, "axis must be 0 or 1");
  const Grid2D& g = h.grid();
  const int nm = h.n_m();
  auto spec = x_forward(h);
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      const Complex m = kI * (axis == 0 ? g.dkx(i) : g.dky(jk));
      Complex* c = spec.data() + (static_cast<std::size_t>(i) * g.nky() + jk) * nm;
      for (int q = 0; q < nm; ++q) c[q] *= m;
    }
  PhaseField out(g, h.manifold());
  detail::inverse_2d(g.nx, g.ny, nm, spec.data(), out.values().data());
  return out;
}

PhaseField multiply(const PhaseField& h, const ScalarField2D& a) {
  require_same_grid(h.grid(), a.grid(), "multiply");
  PhaseField out = h;
  for (std::size_t p = 0; p < h.point_count(); ++p)
    for (double& v : out.column(p)) v *= a.values()[p];
  return out;
}

PhaseField multiply_theta(const PhaseField& h, std::span<const double> profile) {
  if (profile.size() != static_cast<std::size_t>(h.n_m())) throw Error(ErrorKind::ShapeMismatch, "multiply_theta: profile length");
  PhaseField out = h;
  for (std::size_t p = 0; p < h.point_count(); ++p) {
    auto col = out.column(p);
    for (int m = 0; m < h.n_m(); ++m) col[static_cast<std::size_t>(m)] *= profile[static_cast<std::size_t>(m)];
  }
  return out;
}

PhaseField mean_field_potential(const PhaseField& f, const ModelParams& params) {
  params.validate();
  PhaseField out(f.grid(), f.manifold());
  if (params.b == 0.0) return out;
  const int n = f.n_m();
  const auto table = params.kernel.sample(f.manifold());
  const double scale = params.b / params.delta * f.manifold().dtheta();
  parallel_for(f.point_count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto in = f.column(p);
      auto o = out.column(p);
      for (int m = 0; m < n; ++m) {
        double s = 0.0;
        const double* row = table.data() + static_cast<std::size_t>(m) * n;
        for (int q = 0; q < n; ++q) s += row[q] * in[static_cast<std::size_t>(q)];
        o[static_cast<std::size_t>(m)] = scale * s;
      }
    }
  });
  return out;
}

double micro_drift(const std::array<double, 4>& grad_u_bar, double theta, const ModelParams& params) {
  if (!params.drift.c) throw Error(ErrorKind::InvalidParameter, "drift coefficients are empty");
  const auto c = params.drift.c(theta);
  double w = 0.0;
  for (int k = 0; k < 4; ++k) w += c[static_cast<std::size_t>(k)] * grad_u_bar[static_cast<std::size_t>(k)];
  return w;
}

// --- Fokker-Planck solver --------------------------------------------------

FokkerPlanckSolver::FokkerPlanckSolver(const Grid2D& grid, const MicroManifold& manifold, ModelParams params)
    : grid_(grid), manifold_(manifold), params_(std::move(params)) {
  grid_.validate();
  manifold_.validate();
  params_.validate();
  const int n = manifold_.n_m;
  if (params_.b != 0.0) {
    kernel_table_ = params_.kernel.sample(manifold_);
    if (params_.kernel.is_convolution()) {
      kernel_eigen_.resize(static_cast<std::size_t>(manifold_.n_modes()));
      detail::forward_1d(n, 1, kernel_table_.data(), kernel_eigen_.data());
      const double scale = kTwoPi * params_.b / params_.delta;
      for (auto& e : kernel_eigen_) e *= scale;
    }
  }
  drift_table_ = params_.drift.sample(manifold_);
  W_ = PhaseField(grid_, manifold_);
  dU_ = PhaseField(grid_, manifold_);
  flux1_ = PhaseField(grid_, manifold_);
  flux2_ = PhaseField(grid_, manifold_);
  gf_ = PhaseField(grid_, manifold_);
  theta_part_ = PhaseField(grid_, manifold_);
  theta_spec_.resize(grid_.size() * manifold_.n_modes());
  x_spec1_.resize(grid_.spectral_size() * n);
  x_spec2_.resize(grid_.spectral_size() * n);
}

void FokkerPlanckSolver::prepare_velocity(const VectorField2D& u_bar) {
  require_same_grid(grid_, u_bar.grid(), "FokkerPlanckSolver");
  u_bar_ = u_bar;
  const TensorField2D grad = gradient_tensor(u_bar);
  const int n = manifold_.n_m;
  parallel_for(grid_.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const double g[4] = {grad.c[0].values()[p], grad.c[1].values()[p], grad.c[2].values()[p], grad.c[3].values()[p]};
      auto w = W_.column(p);
      for (int m = 0; m < n; ++m) {
        const double* c = drift_table_.data() + 4 * m;
        w[static_cast<std::size_t>(m)] = c[0] * g[0] + c[1] * g[1] + c[2] * g[2] + c[3] * g[3];
      }
    }
  });
}

void FokkerPlanckSolver::potential_derivative(const PhaseField& f, PhaseField& dU) {
  const int n = manifold_.n_m;
  const int nk = manifold_.n_modes();
  if (params_.b == 0.0) {
    std::fill(dU.storage().begin(), dU.storage().end(), 0.0);
    return;
  }
  if (!kernel_eigen_.empty()) {
    detail::forward_1d(n, f.point_count(), f.values().data(), theta_spec_.data());
    for (std::size_t p = 0; p < f.point_count(); ++p)
      for (int k = 0; k < nk; ++k) theta_spec_[p * nk + k] *= kernel_eigen_[static_cast<std::size_t>(k)] * (kI * theta_dk(n, k));
    detail::inverse_1d(n, f.point_count(), theta_spec_.data(), dU.values().data());
    return;
  }
  dU = theta_derivative(mean_field_potential(f, params_));
}

void FokkerPlanckSolver::transport_tendency(const PhaseField& f, PhaseField& out) {
  const int n = manifold_.n_m;
  const int nk = manifold_.n_modes();
  const std::size_t np = grid_.size();

  potential_derivative(f, dU_);
  // angular flux -d_theta(G f)
  for (std::size_t k = 0; k < f.storage().size(); ++k) gf_.storage()[k] = (dU_.storage()[k] + W_.storage()[k]) * f.storage()[k];
  detail::forward_1d(n, np, gf_.values().data(), theta_spec_.data());
  for (std::size_t p = 0; p < np; ++p)
    for (int k = 0; k < nk; ++k) {
      Complex& c = theta_spec_[p * nk + k];
      c = theta_keeps(grid_, n, k) ? -kI * theta_dk(n, k) * c : Complex{};
    }
  detail::inverse_1d(n, np, theta_spec_.data(), theta_part_.values().data());

  // spatial flux -div_x(ubar f)
  const auto& u1 = u_bar_[0].storage();
  const auto& u2 = u_bar_[1].storage();
  for (std::size_t p = 0; p < np; ++p) {
    const double a = u1[p], b = u2[p];
    const double* fc = f.storage().data() + p * n;
    double* o1 = flux1_.storage().data() + p * n;
    double* o2 = flux2_.storage().data() + p * n;
    for (int m = 0; m < n; ++m) {
      o1[m] = a * fc[m];
      o2[m] = b * fc[m];
    }
  }
  detail::forward_2d(grid_.nx, grid_.ny, n, flux1_.values().data(), x_spec1_.data());
  detail::forward_2d(grid_.nx, grid_.ny, n, flux2_.values().data(), x_spec2_.data());
  for (int i = 0; i < grid_.nx; ++i)
    for (int jk = 0; jk < grid_.nky(); ++jk) {
      const std::size_t base = (static_cast<std::size_t>(i) * grid_.nky() + jk) * n;
      if (!grid_.keeps(i, jk)) {
        std::fill(x_spec1_.begin() + base, x_spec1_.begin() + base + n, Complex{});
        continue;
      }
      const Complex m1 = -kI * grid_.dkx(i), m2 = -kI * grid_.dky(jk);
      for (int q = 0; q < n; ++q) x_spec1_[base + q] = m1 * x_spec1_[base + q] + m2 * x_spec2_[base + q];
    }
  detail::inverse_2d(grid_.nx, grid_.ny, n, x_spec1_.data(), out.values().data());
  for (std::size_t k = 0; k < out.storage().size(); ++k) out.storage()[k] += theta_part_.storage()[k];
}

void FokkerPlanckSolver::diffuse(PhaseField& f, double t) const {
  const int n = manifold_.n_m;
  const int nk = manifold_.n_modes();
  std::vector<Complex> spec(f.point_count() * nk);
  detail::forward_1d(n, f.point_count(), f.values().data(), spec.data());
  std::vector<double> decay(static_cast<std::size_t>(nk));
  for (int k = 0; k < nk; ++k) decay[static_cast<std::size_t>(k)] = std::exp(-static_cast<double>(k) * k * t / params_.delta);
  for (std::size_t p = 0; p < f.point_count(); ++p)
    for (int k = 0; k < nk; ++k) spec[p * nk + k] *= decay[static_cast<std::size_t>(k)];
  detail::inverse_1d(n, f.point_count(), spec.data(), f.values().data());
}

double FokkerPlanckSolver::drift_sup(const ParticleDensity& f, const VectorField2D& u_bar) {
  prepare_velocity(u_bar);
  potential_derivative(f, dU_);
  double g = 0.0;
  for (std::size_t k = 0; k < dU_.storage().size(); ++k) g = std::max(g, std::abs(dU_.storage()[k] + W_.storage()[k]));
  return g;
}

double FokkerPlanckSolver::max_stable_dt(const ParticleDensity& f, const VectorField2D& u_bar) {
  const double g = drift_sup(f, u_bar);
  const double u = lp_norm(u_bar, std::numeric_limits<double>::infinity());
  double limit = std::numeric_limits<double>::infinity();
  if (u > 0.0) limit = std::min(limit, grid_.min_spacing() / u);
  if (g > 0.0) limit = std::min(limit, manifold_.dtheta() / g);
  return params_.cfl_safety * limit;
}

ParticleDensity FokkerPlanckSolver::step(const ParticleDensity& f, const VectorField2D& u_bar, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidParameter, "time step must be positive");
  require_same_grid(grid_, f.grid(), "fokker_planck_step");
  if (!(f.manifold() == manifold_)) throw Error(ErrorKind::ShapeMismatch, "fokker_planck_step: manifold differs");
  const double limit = max_stable_dt(f, u_bar);
  if (dt > limit)
    throw Error(ErrorKind::CflViolation,
                "Fokker-Planck step dt = " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(limit));

  PhaseField g = f;
  diffuse(g, 0.5 * dt);
  PhaseField k(grid_, manifold_);

  transport_tendency(g, k);
  PhaseField g1 = g;
  g1.add_scaled(dt, k);

  transport_tendency(g1, k);
  PhaseField g2 = g1;
  g2.add_scaled(dt, k);
  for (std::size_t q = 0; q < g2.storage().size(); ++q) g2.storage()[q] = 0.75 * g.storage()[q] + 0.25 * g2.storage()[q];

  transport_tendency(g2, k);
  PhaseField g3 = g2;
  g3.add_scaled(dt, k);
  for (std::size_t q = 0; q < g3.storage().size(); ++q)
    g3.storage()[q] = g.storage()[q] / 3.0 + 2.0 / 3.0 * g3.storage()[q];

  diffuse(g3, 0.5 * dt);
  if (!g3.all_finite()) throw Error(ErrorKind::NonFiniteField, "Fokker-Planck step produced a non-finite density");
  return ParticleDensity(std::move(g3));
}

ParticleDensity fokker_planck_step(const ParticleDensity& f, const VectorField2D& u_bar, double dt,
                                   const ModelParams& params) {
  FokkerPlanckSolver solver(f.grid(), f.manifold(), params);
  return solver.step(f, u_bar, dt);
}

// --- N(x) ------------------------------------------------------------------

ScalarField2D compute_N(const PhaseField& f, NQuadrature quadrature) {
  const Grid2D& g = f.grid();
  const MicroManifold& mm = f.manifold();
  const int nk = mm.n_modes();
  const std::size_t np = f.point_count();

  ScalarField2D out(g);
  std::vector<double> acc(np, 0.0);
  for (int axis = 0; axis < 2; ++axis) {
    const PhaseField d = x_derivative(f, axis);
    auto spec = theta_forward(d);
    for (std::size_t p = 0; p < np; ++p)
      for (int k = 0; k < nk; ++k) spec[p * nk + k] *= mm.r_multiplier(k);
    if (quadrature == NQuadrature::Parseval) {
      for (std::size_t p = 0; p < np; ++p) {
        double s = 0.0;
        for (int k = 0; k < nk; ++k) s += mm.mode_weight(k) * std::norm(spec[p * nk + k]);
        acc[p] += kTwoPi * s;
      }
    } else {
      PhaseField rd(g, mm);
      theta_inverse(spec, rd);
      for (std::size_t p = 0; p < np; ++p) {
        double s = 0.0;
        for (double v : rd.column(p)) s += v * v;
        acc[p] += s * mm.dtheta();
      }
    }
  }
  for (std::size_t p = 0; p < np; ++p) out.values()[p] = std::sqrt(acc[p]);
  return out;
}

}  // namespace mmf
