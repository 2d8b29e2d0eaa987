#include "mmf/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mmf {

namespace {

double bump(double t) noexcept { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

constexpr Complex kI{0.0, 1.0};

void check_shell(const DyadicPartition& lp, int j) {
  if (j < 0 || j > lp.last_shell())
    throw Error(ErrorKind::ShellOutOfRange,
                "shell " + std::to_string(j) + " outside [0, " + std::to_string(lp.last_shell()) + "]");
}

Spectrum2D multiply(const std::span<const double> table, Spectrum2D spec) {
  auto c = spec.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= table[k];
  return spec;
}

}  // namespace

double RadialCutoff::operator()(double r) const noexcept {
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double a = bump(outer - r);
  const double b = bump(r - inner);
  return a / (a + b);
}

DyadicPartition DyadicPartition::build(const Grid2D& grid, RadialCutoff cutoff) {
  grid.validate();
  if (!(cutoff.inner >= 0.5 && cutoff.outer <= 1.0 && cutoff.inner < cutoff.outer && cutoff.outer < 2.0 * cutoff.inner))
    throw Error(ErrorKind::InvalidParameter, "radial cutoff radii violate the annulus/disjointness constraints");

  DyadicPartition lp;
  lp.grid_ = grid;
  lp.cutoff_ = cutoff;

  const double unit = grid.wavenumber_unit();
  const double nyquist = std::min(grid.nx, grid.ny) / 2 * unit;
  int j = 0;
  while (std::ldexp(1.0, j + 2) <= nyquist) ++j;
  lp.j_max_ = j;
  if (lp.j_max_ < 3)
    throw Error(ErrorKind::GridTooCoarse, "fewer than four dyadic shells fit below the Nyquist wavenumber");

  lp.radius_.resize(grid.spectral_size());
  double kmax = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int jk = 0; jk < grid.nky(); ++jk) {
      const double r = std::sqrt(grid.k_squared(i, jk));
      lp.radius_[static_cast<std::size_t>(i) * grid.nky() + jk] = r;
      kmax = std::max(kmax, r);
    }
  int last = 0;
  while (cutoff.inner * std::ldexp(1.0, last + 1) < kmax) ++last;
  lp.last_shell_ = std::max(last, lp.j_max_);

  lp.blocks_.assign(static_cast<std::size_t>(lp.block_count()), std::vector<double>(grid.spectral_size()));
  for (std::size_t k = 0; k < lp.radius_.size(); ++k) {
    const double r = lp.radius_[k];
    lp.blocks_[0][k] = cutoff.chi(r);
    for (int q = 0; q <= lp.last_shell_; ++q) lp.blocks_[static_cast<std::size_t>(q) + 1][k] = cutoff.phi(std::ldexp(r, -q));
  }
  return lp;
}

std::span<const double> DyadicPartition::block_multiplier(int q) const {
  if (q < -1 || q > last_shell_) throw Error(ErrorKind::ShellOutOfRange, "block index " + std::to_string(q));
  return blocks_[static_cast<std::size_t>(q + 1)];
}

double DyadicPartition::low_pass_multiplier(int j, int i, int jk) const noexcept {
  return cutoff_.chi(std::ldexp(radius(i, jk), -j));
}

double DyadicPartition::partition_residual() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < radius_.size(); ++k) {
    double s = 0.0;
    for (const auto& b : blocks_) s += b[k];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

Spectrum2D shell_project(const DyadicPartition& lp, const Spectrum2D& f, int j) {
  check_shell(lp, j);
  require_same_grid(lp.grid(), f.grid(), "shell_project");
  return multiply(lp.block_multiplier(j), f);
}

ScalarField2D shell_project(const DyadicPartition& lp, const ScalarField2D& f, int j) {
  return ScalarField2D::from_spectrum(shell_project(lp, f.spectrum(), j));
}

VectorField2D shell_project(const DyadicPartition& lp, const VectorField2D& u, int j) {
  return VectorField2D(shell_project(lp, u[0], j), shell_project(lp, u[1], j));
}

Spectrum2D block_project(const DyadicPartition& lp, const Spectrum2D& f, int q) {
  require_same_grid(lp.grid(), f.grid(), "block_project");
  return multiply(lp.block_multiplier(q), f);
}

Spectrum2D low_pass(const DyadicPartition& lp, const Spectrum2D& f, int j) {
  if (j < 0) throw Error(ErrorKind::ShellOutOfRange, "low-pass index must be >= 0");
  require_same_grid(lp.grid(), f.grid(), "low_pass");
  Spectrum2D out = f;
  out.apply([&](int i, int jk) { return lp.low_pass_multiplier(j, i, jk); });
  return out;
}

ScalarField2D low_pass(const DyadicPartition& lp, const ScalarField2D& f, int j) {
  return ScalarField2D::from_spectrum(low_pass(lp, f.spectrum(), j));
}

VectorField2D low_pass(const DyadicPartition& lp, const VectorField2D& u, int j) {
  return VectorField2D(low_pass(lp, u[0], j), low_pass(lp, u[1], j));
}

std::vector<double> block_sup_norms(const DyadicPartition& lp, std::span<const Spectrum2D> components) {
  const Grid2D& g = lp.grid();
  std::vector<double> out(static_cast<std::size_t>(lp.block_count()), 0.0);
  std::vector<double> mag2(g.size());
  for (int q = -1; q <= lp.last_shell(); ++q) {
    std::fill(mag2.begin(), mag2.end(), 0.0);
    for (const auto& comp : components) {
      const ScalarField2D piece = ScalarField2D::from_spectrum(block_project(lp, comp, q));
      for (std::size_t k = 0; k < mag2.size(); ++k) mag2[k] += piece.values()[k] * piece.values()[k];
    }
    double m = 0.0;
    for (double v : mag2) m = std::max(m, v);
    out[static_cast<std::size_t>(q + 1)] = std::sqrt(m);
  }
  return out;
}

double bernstein_ratio(const DyadicPartition& lp, const ScalarField2D& f, int j, double a, double b,
                       std::array<int, 2> alpha) {
  if (!(b >= 1.0 && a >= b)) throw Error(ErrorKind::InvalidExponent, "Bernstein exponents need 1 <= b <= a");
  if (alpha[0] < 0 || alpha[1] < 0) throw Error(ErrorKind::InvalidParameter, "negative multi-index");
  const Spectrum2D shell = shell_project(lp, f.spectrum(), j);
  const double denom_norm = lp_norm(ScalarField2D::from_spectrum(shell), b);
  if (denom_norm == 0.0) throw Error(ErrorKind::EmptyShell, "shell " + std::to_string(j) + " of the field is empty");

  const Grid2D& g = f.grid();
  Spectrum2D deriv = shell;
  deriv.apply([&](int i, int jk) {
    Complex m{1.0, 0.0};
    for (int p = 0; p < alpha[0]; ++p) m *= kI * g.dkx(i);
    for (int p = 0; p < alpha[1]; ++p) m *= kI * g.dky(jk);
    return m;
  });
  const double num = lp_norm(ScalarField2D::from_spectrum(deriv), a);
  const double inv_a = std::isinf(a) ? 0.0 : 1.0 / a;
  const double inv_b = std::isinf(b) ? 0.0 : 1.0 / b;
  const double expo = j * (alpha[0] + alpha[1]) + 2.0 * j * (inv_b - inv_a);
  return num / (std::exp2(expo) * denom_norm);
}

double heat_shell_decay(const DyadicPartition& lp, const ScalarField2D& f, int j, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParameter, "heat time must be nonnegative");
  const Spectrum2D shell = shell_project(lp, f.spectrum(), j);
  const double base = spectral_l2_norm(shell);
  if (base == 0.0) throw Error(ErrorKind::EmptyShell, "shell " + std::to_string(j) + " of the field is empty");
  return spectral_l2_norm(heat_semigroup(shell, t)) / base;
}

double log_star(double x) {
  if (x < 0.0 || std::isnan(x)) throw Error(ErrorKind::NegativeArgument, "log_* needs a nonnegative argument");
  return std::log(2.0 + x);
}

double BoundPair::ratio() const noexcept {
  if (lhs == 0.0) return 0.0;
  return lhs / rhs;
}

BoundPair log_velocity_bound(const ScalarField2D& omega, const VectorField2D& u, double r, double constant) {
  if (!(r > 2.0)) throw Error(ErrorKind::InvalidExponent, "logarithmic velocity bound needs r > 2");
  BoundPair out;
  out.lhs = lp_norm(u, std::numeric_limits<double>::infinity());
  const double w2 = lp_norm(omega, 2.0);
  if (w2 == 0.0) {
    out.rhs = 0.0;
    return out;
  }
  const double wr = lp_norm(omega, r);
  const double u2 = lp_norm(u, 2.0);
  const double arg = std::pow(wr / w2, r / (r - 2.0)) * (u2 / w2);
  out.rhs = constant * w2 * (1.0 + std::sqrt(log_star(arg)));
  return out;
}

double besov_grad_norm(const DyadicPartition& lp, const VectorField2D& u) {
  const Grid2D& g = u.grid();
  require_same_grid(lp.grid(), g, "besov_grad_norm");
  std::array<Spectrum2D, 4> comps;
  for (int a = 0; a < 2; ++a) {
    const Spectrum2D s = u[a].spectrum();
    for (int b = 0; b < 2; ++b) {
      Spectrum2D d = s;
      d.apply([&](int i, int jk) { return kI * (b == 0 ? g.dkx(i) : g.dky(jk)); });
      comps[static_cast<std::size_t>(2 * a + b)] = std::move(d);
    }
  }
  const auto norms = block_sup_norms(lp, comps);
  double total = 0.0;
  for (double v : norms) total += v;
  return total;
}

double besov_grad_norm(const VectorField2D& u) { return besov_grad_norm(DyadicPartition::build(u.grid()), u); }

BoundPair low_mode_sup_bound(const DyadicPartition& lp, const ScalarField2D& f, int j) {
  if (j < 1) throw Error(ErrorKind::ShellOutOfRange, "low-mode bound needs j >= 1");
  BoundPair out;
  out.lhs = lp_norm(low_pass(lp, f, j), std::numeric_limits<double>::infinity());
  out.rhs = lp_norm(f, 2.0) + std::sqrt(static_cast<double>(j)) * lp_norm(spectral_gradient(f), 2.0);
  return out;
}

}  // namespace mmf
