#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmf/flow.hpp"
#include "mmf/history.hpp"
#include "mmf/littlewood_paley.hpp"
#include "mmf/microstructure.hpp"
#include "mmf/stress.hpp"

namespace mmf {

// --- per-step series ---------------------------------------------------------

struct RecorderOptions {
  /// Lebesgue exponents for the r-dependent columns (besides 2).
  std::vector<double> r_values{3.0, 4.0, 8.0};
  /// Record density columns (max_rho, max_N, ...); needs f at every step.
  bool density = true;
};

/// Evaluates every per-step scalar of a run.
class StepRecorder {
 public:
  StepRecorder(const Grid2D& grid, RecorderOptions options);

  std::vector<std::string> columns() const;
  const RecorderOptions& options() const noexcept { return options_; }

  std::map<std::string, double> measure(double t, const VectorField2D& u, const ScalarField2D& omega,
                                        const StressField& sigma, const VectorField2D& u_bar,
                                        const ParticleDensity* f) const;

 private:
  Grid2D grid_;
  RecorderOptions options_;
  DyadicPartition lp_;
};

/// Pointwise Euclidean modulus of all second derivatives d_a d_b u_c.
ScalarField2D hessian_magnitude(const VectorField2D& u);
/// Pointwise Frobenius modulus of grad u.
ScalarField2D gradient_magnitude(const VectorField2D& u);

// --- Duhamel decomposition of grad u -------------------------------------------

/// Gradient response multiplier of the Stokes forcing P div s:
///   M_ij = -xi_j xi_k (delta_il - xi_i xi_l / |xi|^2) s_lk, entry (i, j) at 2 i + j.
std::array<Spectrum2D, 4> stress_response(const Spectrum2D& s11, const Spectrum2D& s12, const Spectrum2D& s22);

/// Splits grad u = exp(t Delta) grad u0 + F + U along a run, with
///   F(t) = int_0^t exp((t-s) Delta) M(sigma(s)) ds,  U(t) = -int_0^t exp((t-s) Delta) M(u (x) u)(s) ds.
/// Time integrals use exact exponential weights, sigma dealiased and constant
/// over a step (as the flow solver sees it) and u (x) u linear between steps.
class DuhamelTracker {
 public:
  DuhamelTracker(const VectorField2D& u0, DyadicPartition lp);

  void advance(double dt, const StressField& sigma, const VectorField2D& u_next);
  /// Same, with the quadratic part disabled (forcing-only runs).
  void advance_forcing(double dt, const StressField& sigma);

  double time() const noexcept { return t_; }
  const std::array<Spectrum2D, 4>& F() const noexcept { return F_; }
  const std::array<Spectrum2D, 4>& U() const noexcept { return U_; }
  std::array<Spectrum2D, 4> heat_part() const;

  /// ||grad u - (heat + F + U)||_2 / max(||grad u||_2, tiny).
  double residual(const VectorField2D& u) const;
  /// sup norms of the blocks of F, index q + 1.
  std::vector<double> F_block_sup() const;
  /// sup norm of block q of F alone.
  double F_block_sup(int q) const;
  double F_sup() const;
  const DyadicPartition& partition() const noexcept { return lp_; }

 private:
  std::array<Spectrum2D, 4> quadratic_response(const VectorField2D& u) const;

  DyadicPartition lp_;
  double t_ = 0.0;
  std::array<Spectrum2D, 4> grad0_;
  std::array<Spectrum2D, 4> F_, U_;
  std::array<Spectrum2D, 4> Muu_prev_;
};

struct ShellDecayFit {
  std::vector<int> q;
  /// int ||Delta_q F||_inf dt / int ||div sigma||_r dt for sigma at |xi| = 2^q.
  std::vector<double> ratio;
  double slope = 0.0;
  /// -(1 - 2/r)
  double bound_slope = 0.0;
  bool pass = false;
};

/// Sweep of time-constant single-mode stresses sigma_12 = cos(2^q x), measuring
/// how the response of shell q decays with q.
ShellDecayFit monochromatic_shell_sweep(const Grid2D& grid, double r, double T, int steps, int q_min, int q_max);

// --- budgets -------------------------------------------------------------------

struct BudgetReport {
  double r = 4.0;
  double T = 0.0;
  double K0 = 0.0;
  double K_2_2 = 0.0, K_inf_1 = 0.0, K_2_1 = 0.0, K_inf_inf = 0.0;
  double B_r_1 = 0.0, B_r_2 = 0.0, B_2_2 = 0.0;
  /// exponent used for the pointwise stress-response bound and B_r^(p) at it
  double p_point = 0.0, B_r_point = 0.0;
  double Omega_r = 0.0, Omega_2 = 0.0;
  double E1 = 0.0, E2 = 0.0, R1 = 0.0;
  double u0_L2 = 0.0, u0_H1 = 0.0, omega0_Lr = 0.0, grad_omega0_Lr = 0.0;
  std::vector<double> t, n, B, g, gamma, G, G_integral;
  /// max_k |(B_{k+1} - B_{k-1}) / (t_{k+1} - t_{k-1}) - n_k| / max(n)
  double dB_consistency = 0.0;
};

/// Throws Error(InvalidExponent) for r <= 2, Error(EmptyHistory).
BudgetReport compute_budgets(const RunHistory& history, double r);

struct InequalityRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs / rhs, 0 when lhs == 0
  double ratio() const noexcept;
  bool finite() const noexcept;
};

struct LogBoundsReport {
  double r = 4.0;
  std::vector<InequalityRow> rows;
  /// worst relative residual of the quadratic advection identity over the snapshots
  double identity_residual = 0.0;
  std::size_t identity_snapshots = 0;
};

/// Relative residual of u.grad(omega) = d1 d2 (u2^2 - u1^2) + (d1^2 - d2^2)(u1 u2)
/// evaluated spectrally for a divergence-free u.
double advection_identity_residual(const VectorField2D& u);

LogBoundsReport log_bounds_report(const RunHistory& history, double r);

struct ShellRow {
  int q = 0;
  double measured = 0.0;    ///< int ||Delta_q F||_inf dt
  double low_bound = 0.0;   ///< 4 int ||sigma||_inf
  double high_bound = 0.0;  ///< 4 * 2^{-q(1-2/r)} int ||div sigma||_r
};

struct AmplificationReport {
  double r = 4.0;
  double epsilon = 1.0;
  double lhs = 0.0;  ///< int besov_grad_norm(u) dt
  double rhs = 0.0;  ///< unit-constant bound at epsilon
  double epsilon_opt = 0.0;
  double rhs_opt = 0.0;
  std::vector<ShellRow> shells;
  /// log_*(int ||div sigma||_r / epsilon)
  double M_formula = 0.0;
  /// first shell where the high-frequency bound drops below the flat one
  double M_crossover = 0.0;
  double decomposition_residual = 0.0;
  bool has_decomposition = false;
  double ratio() const noexcept { return rhs > 0.0 ? lhs / rhs : 0.0; }
};

/// Throws Error(InvalidEpsilon) for epsilon <= 0, Error(InvalidExponent) for r <= 2.
AmplificationReport amplification_report(const RunHistory& history, double r, double epsilon = 1.0);
/// Amplification bound with unit constants as a function of epsilon.
double amplification_rhs(const BudgetReport& b, double epsilon);

// --- N evolution terms ---------------------------------------------------------

struct NEvolutionReport {
  ScalarField2D N, D, I, II, III, IV;
  /// 1/2 D(N^2)/Dt from a short Fokker-Planck step
  ScalarField2D material_half_N2;
  /// DN/Dt where N > floor, 0 elsewhere
  ScalarField2D material_N;
  /// (|grad ubar| + 1/delta) N + |grad grad ubar|
  ScalarField2D bound_shape;
  double fitted_c = 0.0;
  double c_I = 0.0, c_II = 0.0, c_III = 0.0, c_IV = 0.0;
  /// max |1/2 D(N^2)/Dt - (-D + I + II + III + IV)| / max(N^2 scale)
  double identity_residual = 0.0;
  /// min over x of fitted_c * bound_shape - DN/Dt
  double min_margin = 0.0;
  double max_material_N = 0.0;
  double fd_step = 0.0;
  bool finite = true;
};

/// All terms of 1/2 (d_t + ubar.grad) N^2 = -D + I + II + III + IV at every x.
/// D uses coefficient_eps as its prefactor (pass 1/delta for the model value).
/// fd_step <= 0 picks a step of 1e-3 of the CFL limit.
NEvolutionReport n_evolution_residual(const ParticleDensity& f, const VectorField2D& u_bar, const ModelParams& params,
                             double coefficient_eps, double fd_step = 0.0);

// --- comparison ODE ------------------------------------------------------------

/// C2 (1 + y log_*(y)).
double comparison_rhs(double C2, double y);
/// Same ODE in w = log log(2 + y): w' = C2 (1 - 2e + e / z), z = e^w, e = e^-z.
/// The solution grows like exp(exp(C2 t)); in w it grows linearly and never overflows.
double comparison_rhs_loglog(double C2, double w);
/// w = log log(2 + y) and back; the inverse saturates at +inf.
double to_loglog(double y);
double from_loglog(double w);
/// Classical RK4 on w over the given time grid, at least `substeps` equal substeps per
/// interval and more where C2 h exceeds 0.01. Returns w.
std::vector<double> integrate_comparison_loglog(double C2, double y0, std::span<const double> times, int substeps = 4);
/// from_loglog of the above; +inf once y leaves the double range.
std::vector<double> integrate_comparison_ode(double C2, double y0, std::span<const double> times, int substeps = 4);

struct GronwallReport {
  double C2 = 0.0;
  /// c in n(t) <= n(0) + c gamma(t) B(t) + c int G
  double c_integrated = 0.0;
  std::vector<double> y;
  /// log log(2 + y), finite even where y overflows
  std::vector<double> loglog_y;
  bool dominated = true;
  /// max_t B(t) / y(t) where y > 0
  double max_ratio = 0.0;
  bool finite = true;
};

GronwallReport gronwall_tracker(const BudgetReport& budgets);

}  // namespace mmf
