#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "mmf/error.hpp"

namespace mmf {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on the torus [0, L)^2.
///
/// Physical samples are stored row-major with x as the slow index:
/// `values[i * ny + j]` holds the sample at (x_i, y_j). Spectral coefficients
/// use the real-to-complex half layout `coeffs[i * (ny/2 + 1) + jk]`.
struct Grid2D {
  int nx = 64;
  int ny = 64;
  double length = kTwoPi;
  /// Dealiasing keeps integer modes with |k| < (num/den) * n/2 on each axis.
  int dealias_num = 2;
  int dealias_den = 3;

  static Grid2D square(int n, double length = kTwoPi) { return Grid2D{n, n, length, 2, 3}; }

  /// Throws Error(InvalidGrid) unless n_x, n_y >= 8, even, L > 0 and the
  /// dealias fraction lies in (0, 1].
  void validate() const;

  std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * ny; }
  int nky() const noexcept { return ny / 2 + 1; }
  std::size_t spectral_size() const noexcept { return static_cast<std::size_t>(nx) * nky(); }

  double dx() const noexcept { return length / nx; }
  double dy() const noexcept { return length / ny; }
  double min_spacing() const noexcept { return dx() < dy() ? dx() : dy(); }
  double cell_area() const noexcept { return dx() * dy(); }
  double area() const noexcept { return length * length; }
  double x(int i) const noexcept { return i * dx(); }
  double y(int j) const noexcept { return j * dy(); }
  double wavenumber_unit() const noexcept { return kTwoPi / length; }

  /// Integer wavenumbers in [-n/2, n/2).
  int mode_x(int i) const noexcept { return i < nx / 2 ? i : i - nx; }
  int mode_y(int jk) const noexcept { return jk < ny / 2 ? jk : jk - ny; }
  double kx(int i) const noexcept { return mode_x(i) * wavenumber_unit(); }
  double ky(int jk) const noexcept { return mode_y(jk) * wavenumber_unit(); }
  double k_squared(int i, int jk) const noexcept {
    const double a = kx(i), b = ky(jk);
    return a * a + b * b;
  }
  /// Wavenumbers used for differentiation: the Nyquist mode has no
  /// real-valued derivative and is mapped to zero.
  double dkx(int i) const noexcept { return i == nx / 2 ? 0.0 : kx(i); }
  double dky(int jk) const noexcept { return jk == ny / 2 ? 0.0 : ky(jk); }

  bool nyquist(int i, int jk) const noexcept { return i == nx / 2 || jk == ny / 2; }
  bool keeps(int i, int jk) const noexcept;
  /// Largest retained |integer mode| along x (identical rule along y).
  int dealias_cutoff_x() const noexcept;
  int dealias_cutoff_y() const noexcept;
  /// Multiplicity of a half-spectrum column in Parseval sums.
  double column_weight(int jk) const noexcept { return (jk == 0 || jk == ny / 2) ? 1.0 : 2.0; }

  bool operator==(const Grid2D&) const = default;
};

class Spectrum2D;

/// Real scalar field on a Grid2D.
class ScalarField2D {
 public:
  ScalarField2D() = default;
  explicit ScalarField2D(const Grid2D& grid, double value = 0.0);
  ScalarField2D(const Grid2D& grid, std::vector<double> values);

  template <class F>
  static ScalarField2D from_function(const Grid2D& grid, F&& fn) {
    ScalarField2D out(grid);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j) out(i, j) = fn(grid.x(i), grid.y(j));
    return out;
  }

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& storage() noexcept { return values_; }
  const std::vector<double>& storage() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int i, int j) noexcept { return values_[static_cast<std::size_t>(i) * grid_.ny + j]; }
  double operator()(int i, int j) const noexcept {
    return values_[static_cast<std::size_t>(i) * grid_.ny + j];
  }

  Spectrum2D spectrum() const;
  static ScalarField2D from_spectrum(const Spectrum2D& spec);

  double mean() const;
  bool all_finite() const noexcept;

  ScalarField2D& operator+=(const ScalarField2D& other);
  ScalarField2D& operator-=(const ScalarField2D& other);
  ScalarField2D& operator*=(double s) noexcept;

 private:
  Grid2D grid_{};
  std::vector<double> values_;
};

ScalarField2D operator+(ScalarField2D a, const ScalarField2D& b);
ScalarField2D operator-(ScalarField2D a, const ScalarField2D& b);
ScalarField2D operator*(double s, ScalarField2D a);

/// Normalized Fourier coefficients: f(x) = sum_k c_k exp(i k.x), the r2c half
/// of the spectrum (columns jk = 0..ny/2).
class Spectrum2D {
 public:
  Spectrum2D() = default;
  explicit Spectrum2D(const Grid2D& grid);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  Complex& operator()(int i, int jk) noexcept { return coeffs_[static_cast<std::size_t>(i) * grid_.nky() + jk]; }
  Complex operator()(int i, int jk) const noexcept {
    return coeffs_[static_cast<std::size_t>(i) * grid_.nky() + jk];
  }

  template <class M>
  Spectrum2D& apply(M&& multiplier) {
    for (int i = 0; i < grid_.nx; ++i)
      for (int jk = 0; jk < grid_.nky(); ++jk) (*this)(i, jk) *= multiplier(i, jk);
    return *this;
  }

  /// Zeroes every mode outside the dealiasing window.
  Spectrum2D& truncate();

  Spectrum2D& operator+=(const Spectrum2D& other);
  Spectrum2D& operator-=(const Spectrum2D& other);
  Spectrum2D& operator*=(Complex s) noexcept;

 private:
  Grid2D grid_{};
  std::vector<Complex> coeffs_;
};

struct VectorField2D {
  std::array<ScalarField2D, 2> c;

  VectorField2D() = default;
  explicit VectorField2D(const Grid2D& grid) : c{ScalarField2D(grid), ScalarField2D(grid)} {}
  VectorField2D(ScalarField2D u1, ScalarField2D u2) : c{std::move(u1), std::move(u2)} {}

  const Grid2D& grid() const noexcept { return c[0].grid(); }
  ScalarField2D& operator[](int k) noexcept { return c[k]; }
  const ScalarField2D& operator[](int k) const noexcept { return c[k]; }
  bool all_finite() const noexcept { return c[0].all_finite() && c[1].all_finite(); }
};

/// General 2x2 tensor field; entry (a, b) is stored at c[2a + b]. Gradients
/// use the convention (grad u)(a, b) = d u_a / d x_b.
struct TensorField2D {
  std::array<ScalarField2D, 4> c;

  TensorField2D() = default;
  explicit TensorField2D(const Grid2D& grid)
      : c{ScalarField2D(grid), ScalarField2D(grid), ScalarField2D(grid), ScalarField2D(grid)} {}

  const Grid2D& grid() const noexcept { return c[0].grid(); }
  ScalarField2D& operator()(int a, int b) noexcept { return c[2 * a + b]; }
  const ScalarField2D& operator()(int a, int b) const noexcept { return c[2 * a + b]; }
};

// --- spectral differential operators -------------------------------------

VectorField2D spectral_gradient(const ScalarField2D& f);
TensorField2D gradient_tensor(const VectorField2D& u);
/// d1 u2 - d2 u1.
ScalarField2D curl(const VectorField2D& u);
ScalarField2D divergence(const VectorField2D& u);
Spectrum2D divergence_spectrum(const VectorField2D& u);
ScalarField2D laplacian(const ScalarField2D& f);

/// Velocity with d1 u2 - d2 u1 = omega through the streamfunction
/// psi = Delta^{-1} omega, u = (-d2 psi, d1 psi). The mean of omega must vanish
/// relative to its L2 norm, otherwise Error(NonzeroMeanVorticity).
VectorField2D biot_savart(const ScalarField2D& omega);
VectorField2D biot_savart(const Spectrum2D& omega_hat);

VectorField2D leray_project(const VectorField2D& v);

/// Exact heat semigroup exp(t Delta) on a spectrum.
Spectrum2D heat_semigroup(Spectrum2D spec, double t);

// --- norms ----------------------------------------------------------------

/// Quadrature L^r norm (uniform weights h^2, pairwise row-major summation).
/// r = +inf returns the max modulus. Vector and tensor fields use the pointwise
/// Euclidean (Frobenius) modulus. Throws Error(InvalidExponent) for r < 1.
double lp_norm(const ScalarField2D& f, double r);
double lp_norm(const VectorField2D& u, double r);
double lp_norm(const TensorField2D& t, double r);
/// L^r norm of pointwise magnitudes already sampled on `grid`.
double lp_norm_of_magnitude(const Grid2D& grid, std::span<const double> magnitude, double r);

/// L2 norm from the coefficients via Parseval.
double spectral_l2_norm(const Spectrum2D& spec);
/// H^s norm with weight (1 + |k|^2)^s.
double sobolev_norm(const Spectrum2D& spec, double s);
double sobolev_norm(const ScalarField2D& f, double s);
double sobolev_norm(const VectorField2D& u, double s);
/// Homogeneous seminorm with weight |k|^(2 s).
double homogeneous_sobolev_norm(const Spectrum2D& spec, double s);

// --- products -------------------------------------------------------------

/// Pointwise product followed by truncation to the dealiasing window.
ScalarField2D dealiased_product(const ScalarField2D& a, const ScalarField2D& b);
Spectrum2D dealiased_product_spectrum(const ScalarField2D& a, const ScalarField2D& b);
ScalarField2D truncated(const ScalarField2D& f);

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* where);

}  // namespace mmf
