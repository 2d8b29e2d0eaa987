#include "mmf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fft.hpp"
#include "mmf/summation.hpp"

namespace mmf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonzeroMeanVorticity: return "NonzeroMeanVorticity";
    case ErrorKind::InvalidExponent: return "InvalidExponent";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ShellOutOfRange: return "ShellOutOfRange";
    case ErrorKind::EmptyShell: return "EmptyShell";
    case ErrorKind::NegativeArgument: return "NegativeArgument";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::NonFiniteField: return "NonFiniteField";
    case ErrorKind::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorKind::EmptyHistory: return "EmptyHistory";
    case ErrorKind::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

double pairwise_sum(std::span<const double> values) noexcept {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// --- Grid2D ---------------------------------------------------------------

void Grid2D::validate() const {
  if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
    throw Error(ErrorKind::InvalidGrid,
                "grid sizes must be even and >= 8, got " + std::to_string(nx) + "x" + std::to_string(ny));
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorKind::InvalidGrid, "torus side must be positive");
  if (dealias_num <= 0 || dealias_den <= 0 || dealias_num > dealias_den)
    throw Error(ErrorKind::InvalidGrid, "dealias fraction must lie in (0, 1]");
}

bool Grid2D::keeps(int i, int jk) const noexcept {
  const long ax = std::abs(mode_x(i));
  const long ay = std::abs(mode_y(jk));
  return 2L * dealias_den * ax < static_cast<long>(dealias_num) * nx &&
         2L * dealias_den * ay < static_cast<long>(dealias_num) * ny;
}

int Grid2D::dealias_cutoff_x() const noexcept {
  int k = 0;
  while (2L * dealias_den * (k + 1) < static_cast<long>(dealias_num) * nx && k + 1 < nx / 2) ++k;
  return k;
}

int Grid2D::dealias_cutoff_y() const noexcept {
  int k = 0;
  while (2L * dealias_den * (k + 1) < static_cast<long>(dealias_num) * ny && k + 1 < ny / 2) ++k;
  return k;
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* where) {
  if (!(a == b)) throw Error(ErrorKind::ShapeMismatch, std::string(where) + ": fields live on different grids");
}

// --- ScalarField2D ----------------------------------------------------------

ScalarField2D::ScalarField2D(const Grid2D& grid, double value) : grid_(grid), values_(grid.size(), value) {
  grid_.validate();
}

ScalarField2D::ScalarField2D(const Grid2D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.size())
    throw Error(ErrorKind::ShapeMismatch, "value array does not match the grid size");
}

Spectrum2D ScalarField2D::spectrum() const {
  Spectrum2D out(grid_);
  detail::forward_2d(grid_.nx, grid_.ny, 1, values_.data(), out.coeffs().data());
  return out;
}

ScalarField2D ScalarField2D::from_spectrum(const Spectrum2D& spec) {
  ScalarField2D out(spec.grid());
  detail::inverse_2d(spec.grid().nx, spec.grid().ny, 1, spec.coeffs().data(), out.values_.data());
  return out;
}

double ScalarField2D::mean() const { return pairwise_sum(values_) / static_cast<double>(values_.size()); }

bool ScalarField2D::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField2D& ScalarField2D::operator+=(const ScalarField2D& other) {
  require_same_grid(grid_, other.grid_, "ScalarField2D::operator+=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

ScalarField2D& ScalarField2D::operator-=(const ScalarField2D& other) {
  require_same_grid(grid_, other.grid_, "ScalarField2D::operator-=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

ScalarField2D& ScalarField2D::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField2D operator+(ScalarField2D a, const ScalarField2D& b) { return a += b; }
ScalarField2D operator-(ScalarField2D a, const ScalarField2D& b) { return a -= b; }
ScalarField2D operator*(double s, ScalarField2D a) { return a *= s; }

// --- Spectrum2D -------------------------------------------------------------

Spectrum2D::Spectrum2D(const Grid2D& grid) : grid_(grid), coeffs_(grid.spectral_size()) { grid_.validate(); }

Spectrum2D& Spectrum2D::truncate() {
  for (int i = 0; i < grid_.nx; ++i)
    for (int jk = 0; jk < grid_.nky(); ++jk)
      if (!grid_.keeps(i, jk)) (*this)(i, jk) = 0.0;
  return *this;
}

Spectrum2D& Spectrum2D::operator+=(const Spectrum2D& other) {
  require_same_grid(grid_, other.grid_, "Spectrum2D::operator+=");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Spectrum2D& Spectrum2D::operator-=(const Spectrum2D& other) {
  require_same_grid(grid_, other.grid_, "Spectrum2D::operator-=");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

Spectrum2D& Spectrum2D::operator*=(Complex s) noexcept {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

// --- differential operators --------------------------------------------------

namespace {

constexpr Complex kI{0.0, 1.0};

Spectrum2D derivative(const Spectrum2D& spec, int axis) {
  Spectrum2D out = spec;
  const Grid2D& g = spec.grid();
  out.apply([&](int i, int jk) { return kI * (axis == 0 ? g.dkx(i) : g.dky(jk)); });
  return out;
}

}  // namespace

VectorField2D spectral_gradient(const ScalarField2D& f) {
  const Spectrum2D spec = f.spectrum();
  return VectorField2D(ScalarField2D::from_spectrum(derivative(spec, 0)),
                       ScalarField2D::from_spectrum(derivative(spec, 1)));
}

TensorField2D gradient_tensor(const VectorField2D& u) {
  TensorField2D out;
  for (int a = 0; a < 2; ++a) {
    const Spectrum2D spec = u[a].spectrum();
    for (int b = 0; b < 2; ++b) out(a, b) = ScalarField2D::from_spectrum(derivative(spec, b));
  }
  return out;
}

ScalarField2D curl(const VectorField2D& u) {
  require_same_grid(u[0].grid(), u[1].grid(), "curl");
  Spectrum2D s = derivative(u[1].spectrum(), 0);
  s -= derivative(u[0].spectrum(), 1);
  return ScalarField2D::from_spectrum(s);
}

Spectrum2D divergence_spectrum(const VectorField2D& u) {
  require_same_grid(u[0].grid(), u[1].grid(), "divergence");
  Spectrum2D s = derivative(u[0].spectrum(), 0);
  s += derivative(u[1].spectrum(), 1);
  return s;
}

ScalarField2D divergence(const VectorField2D& u) { return ScalarField2D::from_spectrum(divergence_spectrum(u)); }

ScalarField2D laplacian(const ScalarField2D& f) {
  Spectrum2D s = f.spectrum();
  const Grid2D& g = f.grid();
  s.apply([&](int i, int jk) { return -g.k_squared(i, jk); });
  return ScalarField2D::from_spectrum(s);
}

VectorField2D biot_savart(const Spectrum2D& omega_hat) {
  const Grid2D& g = omega_hat.grid();
  const double mean = omega_hat(0, 0).real();
  const double l2 = spectral_l2_norm(omega_hat);
  if (std::abs(mean) > 1e-12 * l2)
    throw Error(ErrorKind::NonzeroMeanVorticity,
                "vorticity mean " + std::to_string(mean) + " is not zero relative to its L2 norm");
  Spectrum2D u1(g), u2(g);
  for (int i = 0; i < g.nx; ++i) {
    for (int jk = 0; jk < g.nky(); ++jk) {
      const double kx = g.dkx(i), ky = g.dky(jk);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue;
      const Complex psi = -omega_hat(i, jk) / k2;
      u1(i, jk) = -kI * ky * psi;
      u2(i, jk) = kI * kx * psi;
    }
  }
  return VectorField2D(ScalarField2D::from_spectrum(u1), ScalarField2D::from_spectrum(u2));
}

VectorField2D biot_savart(const ScalarField2D& omega) { return biot_savart(omega.spectrum()); }

VectorField2D leray_project(const VectorField2D& v) {
  require_same_grid(v[0].grid(), v[1].grid(), "leray_project");
  const Grid2D& g = v.grid();
  Spectrum2D a = v[0].spectrum(), b = v[1].spectrum();
  for (int i = 0; i < g.nx; ++i) {
    for (int jk = 0; jk < g.nky(); ++jk) {
      const double kx = g.dkx(i), ky = g.dky(jk);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) {
        // Nyquist-only modes carry no derivative; they are dropped so the
        // output is exactly divergence-free and the mean flow is kept.
        if (i != 0 || jk != 0) a(i, jk) = b(i, jk) = 0.0;
        continue;
      }
      const Complex kdotv = kx * a(i, jk) + ky * b(i, jk);
      a(i, jk) -= kx * kdotv / k2;
      b(i, jk) -= ky * kdotv / k2;
    }
  }
  return VectorField2D(ScalarField2D::from_spectrum(a), ScalarField2D::from_spectrum(b));
}

Spectrum2D heat_semigroup(Spectrum2D spec, double t) {
  const Grid2D g = spec.grid();
  spec.apply([&](int i, int jk) { return std::exp(-t * g.k_squared(i, jk)); });
  return spec;
}

// --- norms ----------------------------------------------------------------

double lp_norm_of_magnitude(const Grid2D& grid, std::span<const double> magnitude, double r) {
  if (!(r >= 1.0)) throw Error(ErrorKind::InvalidExponent, "norm exponent must be >= 1");
  if (std::isinf(r)) {
    double m = 0.0;
    for (double v : magnitude) m = std::max(m, std::abs(v));
    return m;
  }
  std::vector<double> powered(magnitude.size());
  if (r == 2.0) {
    for (std::size_t k = 0; k < magnitude.size(); ++k) powered[k] = magnitude[k] * magnitude[k];
    return std::sqrt(pairwise_sum(powered) * grid.cell_area());
  }
  for (std::size_t k = 0; k < magnitude.size(); ++k) powered[k] = std::pow(std::abs(magnitude[k]), r);
  return std::pow(pairwise_sum(powered) * grid.cell_area(), 1.0 / r);
}

double lp_norm(const ScalarField2D& f, double r) { return lp_norm_of_magnitude(f.grid(), f.values(), r); }

double lp_norm(const VectorField2D& u, double r) {
  require_same_grid(u[0].grid(), u[1].grid(), "lp_norm");
  std::vector<double> mag(u[0].size());
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(u[0].values()[k], u[1].values()[k]);
  return lp_norm_of_magnitude(u.grid(), mag, r);
}

double lp_norm(const TensorField2D& t, double r) {
  std::vector<double> mag(t.c[0].size());
  for (std::size_t k = 0; k < mag.size(); ++k) {
    double s = 0.0;
    for (const auto& comp : t.c) s += comp.values()[k] * comp.values()[k];
    mag[k] = std::sqrt(s);
  }
  return lp_norm_of_magnitude(t.grid(), mag, r);
}

namespace {

double weighted_spectral_sum(const Spectrum2D& spec, auto&& weight) {
  const Grid2D& g = spec.grid();
  std::vector<double> terms(spec.size());
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk)
      terms[static_cast<std::size_t>(i) * g.nky() + jk] =
          g.column_weight(jk) * weight(i, jk) * std::norm(spec(i, jk));
  return pairwise_sum(terms) * g.area();
}

}  // namespace

double spectral_l2_norm(const Spectrum2D& spec) {
  return std::sqrt(weighted_spectral_sum(spec, [](int, int) { return 1.0; }));
}

double sobolev_norm(const Spectrum2D& spec, double s) {
  const Grid2D& g = spec.grid();
  return std::sqrt(weighted_spectral_sum(spec, [&](int i, int jk) { return std::pow(1.0 + g.k_squared(i, jk), s); }));
}

double homogeneous_sobolev_norm(const Spectrum2D& spec, double s) {
  const Grid2D& g = spec.grid();
  return std::sqrt(weighted_spectral_sum(spec, [&](int i, int jk) { return std::pow(g.k_squared(i, jk), s); }));
}

double sobolev_norm(const ScalarField2D& f, double s) { return sobolev_norm(f.spectrum(), s); }

double sobolev_norm(const VectorField2D& u, double s) {
  const double a = sobolev_norm(u[0], s), b = sobolev_norm(u[1], s);
  return std::sqrt(a * a + b * b);
}

// --- products -------------------------------------------------------------

Spectrum2D dealiased_product_spectrum(const ScalarField2D& a, const ScalarField2D& b) {
  require_same_grid(a.grid(), b.grid(), "dealiased_product");
  ScalarField2D p(a.grid());
  for (std::size_t k = 0; k < p.size(); ++k) p.values()[k] = a.values()[k] * b.values()[k];
  Spectrum2D s = p.spectrum();
  s.truncate();
  return s;
}

ScalarField2D dealiased_product(const ScalarField2D& a, const ScalarField2D& b) {
  return ScalarField2D::from_spectrum(dealiased_product_spectrum(a, b));
}

ScalarField2D truncated(const ScalarField2D& f) {
  Spectrum2D s = f.spectrum();
  s.truncate();
  return ScalarField2D::from_spectrum(s);
}

}  // namespace mmf
