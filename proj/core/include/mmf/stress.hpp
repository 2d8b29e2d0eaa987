#pragma once

#include <functional>

#include "mmf/grid.hpp"
#include "mmf/microstructure.hpp"

namespace mmf {

struct SymMatrix2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  /// Frobenius norm with the off-diagonal entry counted twice.
  double frobenius() const noexcept;
};

/// Symmetric 2x2 tensor field; the (2, 1) entry is the stored (1, 2) entry.
struct StressField {
  ScalarField2D s11, s12, s22;

  StressField() = default;
  explicit StressField(const Grid2D& grid) : s11(grid), s12(grid), s22(grid) {}
  StressField(ScalarField2D a11, ScalarField2D a12, ScalarField2D a22)
      : s11(std::move(a11)), s12(std::move(a12)), s22(std::move(a22)) {}

  const Grid2D& grid() const noexcept { return s11.grid(); }
  const ScalarField2D& operator()(int a, int b) const noexcept;
  ScalarField2D& operator()(int a, int b) noexcept;
  /// Pointwise Frobenius modulus.
  ScalarField2D magnitude() const;
  bool all_finite() const noexcept { return s11.all_finite() && s12.all_finite() && s22.all_finite(); }

  StressField& operator+=(const StressField& other);
  StressField& operator*=(double s) noexcept;
};

/// Expansion coefficients of the added stress,
///   tau^(1)(x) = int gamma1(m) f dm,   tau^(2)(x) = int int gamma2(m1, m2) f f dm1 dm2.
struct StressCoefficients {
  enum class Order2 { Zero, Separable, Dense };

  std::function<SymMatrix2(double)> gamma1;
  Order2 order2 = Order2::Zero;
  /// Used for Order2::Dense.
  std::function<SymMatrix2(double, double)> gamma2;
  /// Used for Order2::Separable: gamma2(m1, m2) = gamma2_left(m1) * gamma2_right(m2).
  std::function<SymMatrix2(double)> gamma2_left;
  std::function<double(double)> gamma2_right;
  /// Number of expansion terms kept, 1 or 2.
  int k_max = 2;

  /// gamma1 = m (x) m - I/2, gamma2 = 0.
  static StressCoefficients rods();
  void validate() const;

  /// gamma2 evaluated at a pair of angles, whatever the representation.
  SymMatrix2 gamma2_at(double t1, double t2) const;
  /// Sup over the manifold nodes of the Frobenius norm of gamma1 (resp. gamma2).
  double gamma1_sup(const MicroManifold& mm) const;
  double gamma2_sup(const MicroManifold& mm) const;
  /// || R^{-1} gamma1 ||_{L2(M)} (Frobenius), the analytic constant in |grad tau^(1)| <= c N.
  double gamma1_gradient_constant(const MicroManifold& mm) const;
  /// Largest theta Fourier coefficient of the sampled coefficients at |k| >= n_m/4.
  double spectral_tail(const MicroManifold& mm) const;
};

StressField stress_order1(const PhaseField& f, const StressCoefficients& coeffs);
StressField stress_order2(const PhaseField& f, const StressCoefficients& coeffs);
/// Unscaled tau_p = sum_{k <= k_max} tau^(k).
StressField added_stress(const PhaseField& f, const StressCoefficients& coeffs);
/// sigma = tau / (delta nu) * tau_p.
StressField total_sigma(const PhaseField& f, const StressCoefficients& coeffs, const ModelParams& params);

struct StressBoundReport {
  /// max |tau_p| / rho where rho > 1e-8.
  double max_rho_ratio = 0.0;
  /// max |grad tau_p| / N where N > 1e-8.
  double max_N_ratio = 0.0;
  double gamma1_sup = 0.0;
  double gamma2_sup = 0.0;
  /// max over x of c_gamma(x) = gamma1_sup + gamma2_sup rho(x).
  double c_gamma = 0.0;
  double gradient_constant = 0.0;
  /// Some point has |tau_p| > c_gamma(x) (1 + 1e-6) rho(x).
  bool exceeded = false;
};

StressBoundReport check_stress_bounds(const StressField& tau_p, const ScalarField2D& rho, const ScalarField2D& N,
                                      const StressCoefficients& coeffs, const MicroManifold& manifold);

/// Pointwise Frobenius modulus of grad tau (the three stored components, off-diagonal twice).
ScalarField2D stress_gradient_magnitude(const StressField& tau);

/// div sigma as a vector field: (d1 s11 + d2 s12, d1 s12 + d2 s22).
VectorField2D stress_divergence(const StressField& sigma);

}  // namespace mmf
