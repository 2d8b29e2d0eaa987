#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "mmf/grid.hpp"

namespace mmf {

/// The unit circle of rod orientations, sampled at theta_m = m * 2 pi / n_m.
struct MicroManifold {
  int n_m = 64;
  /// Smoothing order of R = (-Delta_g + I)^{-s/2}; must exceed d/2 + 1 = 1.5.
  double s = 2.0;

  void validate() const;
  double dtheta() const noexcept { return kTwoPi / n_m; }
  double theta(int m) const noexcept { return m * dtheta(); }
  int n_modes() const noexcept { return n_m / 2 + 1; }
  /// Multiplier (1 + k^2)^{-s/2}.
  double r_multiplier(int k) const noexcept;
  /// Multiplicity of an r2c coefficient in Parseval sums.
  double mode_weight(int k) const noexcept { return (k == 0 || k == n_m / 2) ? 1.0 : 2.0; }
  bool operator==(const MicroManifold&) const = default;
};

/// Real function of (x, theta). Storage is `values[p * n_m + m]` with p = i * n_y + j
/// the spatial point index, so every theta column is contiguous.
class PhaseField {
 public:
  PhaseField() = default;
  PhaseField(const Grid2D& grid, const MicroManifold& manifold, double value = 0.0);
  PhaseField(const Grid2D& grid, const MicroManifold& manifold, std::vector<double> values);

  template <class F>
  static PhaseField from_function(const Grid2D& grid, const MicroManifold& manifold, F&& fn) {
    PhaseField out(grid, manifold);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        for (int m = 0; m < manifold.n_m; ++m)
          out(static_cast<std::size_t>(i) * grid.ny + j, m) = fn(grid.x(i), grid.y(j), manifold.theta(m));
    return out;
  }

  const Grid2D& grid() const noexcept { return grid_; }
  const MicroManifold& manifold() const noexcept { return manifold_; }
  std::size_t point_count() const noexcept { return grid_.size(); }
  int n_m() const noexcept { return manifold_.n_m; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& storage() noexcept { return values_; }
  const std::vector<double>& storage() const noexcept { return values_; }

  double& operator()(std::size_t p, int m) noexcept { return values_[p * manifold_.n_m + m]; }
  double operator()(std::size_t p, int m) const noexcept { return values_[p * manifold_.n_m + m]; }
  std::span<double> column(std::size_t p) noexcept { return {values_.data() + p * manifold_.n_m, static_cast<std::size_t>(manifold_.n_m)}; }
  std::span<const double> column(std::size_t p) const noexcept {
    return {values_.data() + p * manifold_.n_m, static_cast<std::size_t>(manifold_.n_m)};
  }

  /// rho(x) = sum_m f(x, theta_m) dtheta.
  ScalarField2D theta_integral() const;
  /// Integral over x and theta.
  double total() const;
  double min_value() const noexcept;
  bool all_finite() const noexcept;

  PhaseField& operator+=(const PhaseField& other);
  PhaseField& operator-=(const PhaseField& other);
  PhaseField& operator*=(double s) noexcept;
  /// this += s * other
  PhaseField& add_scaled(double s, const PhaseField& other);

 private:
  Grid2D grid_{};
  MicroManifold manifold_{};
  std::vector<double> values_;
};

/// The particle density f(x, m, t) >= 0 with rho = int_M f dm <= 1.
class ParticleDensity : public PhaseField {
 public:
  using PhaseField::PhaseField;
  explicit ParticleDensity(PhaseField field) : PhaseField(std::move(field)) {}
};

struct DensityReport {
  double min_value = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
  double mass = 0.0;
  /// f >= -1e-10 and rho in [0, 1 + 1e-8].
  bool admissible = true;
};
DensityReport inspect_density(const ParticleDensity& f);

/// Symmetric interaction kernel K(theta, theta') sampled on the manifold.
class InteractionKernel {
 public:
  /// K(theta, theta') = profile(theta - theta'); the profile must be even and 2 pi periodic.
  static InteractionKernel convolution(std::function<double(double)> profile);
  /// General symmetric kernel, evaluated on the upper triangle and mirrored.
  static InteractionKernel general(std::function<double(double, double)> kernel);
  /// -cos 2(theta - theta').
  static InteractionKernel maier_saupe();

  bool is_convolution() const noexcept { return static_cast<bool>(profile_); }
  double operator()(double theta, double theta_prime) const;
  /// n_m x n_m row-major samples; exactly symmetric. Throws Error(InvalidParameter)
  /// if the kernel is not symmetric to 1e-12.
  std::vector<double> sample(const MicroManifold& manifold) const;

 private:
  std::function<double(double)> profile_;
  std::function<double(double, double)> general_;
};

/// Coefficients c^{ij}(theta) of the angular drift W = sum_ij c^{ij} d ubar_i / d x_j;
/// entry (i, j) is returned at index 2 i + j.
struct DriftCoefficients {
  std::function<std::array<double, 4>(double)> c;

  /// c^{ij} = m_perp_i m_j with m = (cos, sin), m_perp = (-sin, cos).
  static DriftCoefficients rods();
  /// Samples at the manifold nodes, layout [m * 4 + 2 i + j].
  std::vector<double> sample(const MicroManifold& manifold) const;
};

struct ModelParams {
  double delta = 1.0;  ///< Deborah number
  double b = 0.0;      ///< interaction intensity
  double tau = 1.0;    ///< particle time scale (pre-rescaling)
  double nu = 1.0;     ///< viscosity (pre-rescaling)
  InteractionKernel kernel = InteractionKernel::maier_saupe();
  DriftCoefficients drift = DriftCoefficients::rods();
  /// dt <= cfl_safety * min(h / ||ubar||_inf, dtheta / ||G||_inf).
  double cfl_safety = 0.5;

  void validate() const;
};

// --- theta-direction operators ---------------------------------------------

/// R^power applied along theta at every spatial point (power = 1 is R).
PhaseField apply_R(const PhaseField& h, double power = 1.0);
/// R on a single theta column.
std::vector<double> apply_R(std::span<const double> column, const MicroManifold& manifold);
PhaseField theta_derivative(const PhaseField& h);
/// Spatial derivative d/dx_axis of every theta slice.
PhaseField x_derivative(const PhaseField& h, int axis);
/// Pointwise product of a phase field with a spatial field.
PhaseField multiply(const PhaseField& h, const ScalarField2D& a);
/// Pointwise product with a function of theta sampled at the nodes.
PhaseField multiply_theta(const PhaseField& h, std::span<const double> profile);

/// U = (b/delta) * sum_{theta'} K(theta, theta') f(x, theta') dtheta.
PhaseField mean_field_potential(const PhaseField& f, const ModelParams& params);

/// W(theta) = sum_ij c^{ij}(theta) d ubar_i / d x_j for one velocity gradient
/// (entry (i, j) at index 2 i + j).
double micro_drift(const std::array<double, 4>& grad_u_bar, double theta, const ModelParams& params);

/// Reusable workspace for advancing the Fokker-Planck equation
///   d_t f + ubar . grad_x f + d_theta(G f) = (1/delta) d_theta^2 f,  G = d_theta U + W.
///
/// One step is a Strang sequence: exact half-step of theta diffusion, an
/// SSP-RK3 stage sequence for the dealiased transport written in divergence
/// form, and a second exact diffusion half-step.
class FokkerPlanckSolver {
 public:
  FokkerPlanckSolver(const Grid2D& grid, const MicroManifold& manifold, ModelParams params);

  /// Throws Error(CflViolation) or Error(NonFiniteField).
  ParticleDensity step(const ParticleDensity& f, const VectorField2D& u_bar, double dt);

  /// Largest admissible dt for the given state and advecting velocity.
  double max_stable_dt(const ParticleDensity& f, const VectorField2D& u_bar);

  /// ||G||_inf for the state and velocity.
  double drift_sup(const ParticleDensity& f, const VectorField2D& u_bar);

  const ModelParams& params() const noexcept { return params_; }

 private:
  void prepare_velocity(const VectorField2D& u_bar);
  void potential_derivative(const PhaseField& f, PhaseField& dU);
  void transport_tendency(const PhaseField& f, PhaseField& out);
  void diffuse(PhaseField& f, double t) const;

  Grid2D grid_;
  MicroManifold manifold_;
  ModelParams params_;
  std::vector<double> kernel_table_;
  std::vector<Complex> kernel_eigen_;  // for convolution kernels
  std::vector<double> drift_table_;
  // per-step velocity data
  VectorField2D u_bar_;
  PhaseField W_;
  // scratch
  PhaseField dU_, flux1_, flux2_, gf_, theta_part_;
  std::vector<Complex> theta_spec_, x_spec1_, x_spec2_;
};

ParticleDensity fokker_planck_step(const ParticleDensity& f, const VectorField2D& u_bar, double dt,
                                   const ModelParams& params);

enum class NQuadrature { Direct, Parseval };

/// N(x) = (int_M |R grad_x f|^2 dm)^{1/2}.
ScalarField2D compute_N(const PhaseField& f, NQuadrature quadrature = NQuadrature::Parseval);

}  // namespace mmf
