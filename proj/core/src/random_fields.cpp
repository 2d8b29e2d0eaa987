#include "mmf/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mmf/error.hpp"

namespace mmf {

ScalarField2D random_band_limited(const Grid2D& grid, const BandSpec& spec, std::uint64_t seed) {
  if (spec.k_min < 1 || spec.k_max < spec.k_min)
    throw Error(ErrorKind::InvalidParameter, "band needs 1 <= k_min <= k_max");
  if (2 * spec.k_max >= std::min(grid.nx, grid.ny))
    throw Error(ErrorKind::InvalidParameter, "band exceeds the grid resolution");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  struct Mode {
    int k1, k2;
    double a, b;
  };
  std::vector<Mode> modes;
  // half plane: k1 > 0, or k1 == 0 and k2 > 0
  for (int k1 = 0; k1 <= spec.k_max; ++k1)
    for (int k2 = -spec.k_max; k2 <= spec.k_max; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const double r = std::hypot(k1, k2);
      if (r < spec.k_min || r > spec.k_max) continue;
      const double sd = std::pow(r, -spec.slope);
      const double a = sd * normal(rng);
      const double b = sd * normal(rng);
      modes.push_back({k1, k2, a, b});
    }

  // a cos + b sin = Re((a - i b) e^{i k.x})
  Spectrum2D spec_out(grid);
  for (const Mode& m : modes) {
    const Complex c{0.5 * m.a, -0.5 * m.b};
    if (m.k2 > 0) {
      spec_out((m.k1 + grid.nx) % grid.nx, m.k2) = c;
    } else if (m.k2 < 0) {
      spec_out((grid.nx - m.k1) % grid.nx, -m.k2) = std::conj(c);
    } else {
      spec_out(m.k1, 0) = c;
      spec_out(grid.nx - m.k1, 0) = std::conj(c);
    }
  }
  ScalarField2D out = ScalarField2D::from_spectrum(spec_out);
  if (spec.l2_norm > 0.0) {
    const double n = lp_norm(out, 2.0);
    if (n > 0.0) out *= spec.l2_norm / n;
  }
  return out;
}

std::vector<ScalarField2D> random_corpus(const Grid2D& grid, const BandSpec& spec, std::size_t count,
                                         std::uint64_t seed) {
  std::vector<ScalarField2D> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_band_limited(grid, spec, seed + k));
  return out;
}

}  // namespace mmf
