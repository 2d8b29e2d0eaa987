#pragma once

#include <array>
#include <span>
#include <vector>

#include "mmf/grid.hpp"

namespace mmf {

/// Radial cutoff built from the C-infinity bump exp(-1/t): equal to 1 on
/// [0, inner], 0 on [outer, inf), strictly decreasing in between.
///
/// Low-frequency profile chi(r) = cutoff(r), annulus profile
/// phi(r) = cutoff(r/2) - cutoff(r). The supports are [0, outer] inside the unit
/// ball and [inner, 2 outer] inside the annulus (1/2, 2); disjointness of shells
/// j and j+2 needs outer < 2 inner.
struct RadialCutoff {
  double inner = 0.55;
  double outer = 0.95;

  double operator()(double r) const noexcept;
  double chi(double r) const noexcept { return (*this)(r); }
  double phi(double r) const noexcept { return (*this)(0.5 * r) - (*this)(r); }
};

/// Dyadic partition of unity sampled on a grid's half spectrum.
///
/// Blocks are indexed by q = -1 (the S_0 block, multiplier chi) and
/// q = 0..last_shell() (Delta_q, multiplier phi(2^-q xi)). Shells up to j_max()
/// lie entirely below the Nyquist wavenumber; the remaining shells up to
/// last_shell() are partially resolved and are needed for the partition to
/// cover every grid wavenumber.
class DyadicPartition {
 public:
  /// Throws Error(GridTooCoarse) if j_max() would be below 3.
  static DyadicPartition build(const Grid2D& grid, RadialCutoff cutoff = {});

  const Grid2D& grid() const noexcept { return grid_; }
  const RadialCutoff& cutoff() const noexcept { return cutoff_; }
  int j_max() const noexcept { return j_max_; }
  int last_shell() const noexcept { return last_shell_; }
  int block_count() const noexcept { return last_shell_ + 2; }

  /// Multiplier table of block q in {-1, 0, .., last_shell()}.
  std::span<const double> block_multiplier(int q) const;
  /// chi(2^-j xi) evaluated at the grid wavenumber (i, jk).
  double low_pass_multiplier(int j, int i, int jk) const noexcept;
  /// |xi| at a grid wavenumber.
  double radius(int i, int jk) const noexcept { return radius_[static_cast<std::size_t>(i) * grid_.nky() + jk]; }

  /// max over grid wavenumbers of |chi + sum_j phi_j - 1|.
  double partition_residual() const;

 private:
  Grid2D grid_{};
  RadialCutoff cutoff_{};
  int j_max_ = 0;
  int last_shell_ = 0;
  std::vector<double> radius_;
  std::vector<std::vector<double>> blocks_;  // index q + 1
};

/// Delta_j f; throws Error(ShellOutOfRange) unless 0 <= j <= last_shell().
Spectrum2D shell_project(const DyadicPartition& lp, const Spectrum2D& f, int j);
ScalarField2D shell_project(const DyadicPartition& lp, const ScalarField2D& f, int j);
VectorField2D shell_project(const DyadicPartition& lp, const VectorField2D& u, int j);
/// Block q = -1 is S_0, q >= 0 is Delta_q.
Spectrum2D block_project(const DyadicPartition& lp, const Spectrum2D& f, int q);

/// S_j f; throws Error(ShellOutOfRange) for j < 0.
Spectrum2D low_pass(const DyadicPartition& lp, const Spectrum2D& f, int j);
ScalarField2D low_pass(const DyadicPartition& lp, const ScalarField2D& f, int j);
VectorField2D low_pass(const DyadicPartition& lp, const VectorField2D& u, int j);

/// Sup norms of every block of a multi-component field, index q + 1. The
/// pointwise modulus is the Euclidean norm over the components.
std::vector<double> block_sup_norms(const DyadicPartition& lp, std::span<const Spectrum2D> components);

/// ||Delta_j d^alpha f||_{L^a} / (2^{j|alpha| + 2j(1/b - 1/a)} ||Delta_j f||_{L^b}).
/// Requires 1 <= b <= a <= inf; Error(EmptyShell) when the shell vanishes.
double bernstein_ratio(const DyadicPartition& lp, const ScalarField2D& f, int j, double a, double b,
                       std::array<int, 2> alpha);

/// ||Delta_j exp(t Delta) f||_2 / ||Delta_j f||_2.
double heat_shell_decay(const DyadicPartition& lp, const ScalarField2D& f, int j, double t);

/// log(2 + x); Error(NegativeArgument) for x < 0.
double log_star(double x);

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs / rhs, defined as 0 when lhs == 0.
  double ratio() const noexcept;
};

/// lhs = ||u||_inf, rhs = C ||w||_2 (1 + sqrt(log*((||w||_r/||w||_2)^{r/(r-2)} ||u||_2/||w||_2))).
/// Requires r > 2. For omega = 0 both sides are 0.
BoundPair log_velocity_bound(const ScalarField2D& omega, const VectorField2D& u, double r, double constant = 1.0);

/// ||S_0 grad u||_inf + sum_j ||Delta_j grad u||_inf, which dominates ||grad u||_inf.
double besov_grad_norm(const DyadicPartition& lp, const VectorField2D& u);
double besov_grad_norm(const VectorField2D& u);

/// lhs = ||S_j f||_inf, rhs = ||f||_2 + sqrt(j) ||grad f||_2. Requires j >= 1.
BoundPair low_mode_sup_bound(const DyadicPartition& lp, const ScalarField2D& f, int j);

}  // namespace mmf
