#pragma once

#include <cstdint>
#include <vector>

#include "mmf/grid.hpp"

namespace mmf {

struct BandSpec {
  int k_min = 1;
  int k_max = 6;
  /// coefficient standard deviation ~ |k|^-slope
  double slope = 1.0;
  /// target L2 norm; <= 0 keeps the raw draw
  double l2_norm = 1.0;
};

/// Mean-zero real field sum a_k cos(k.x) + b_k sin(k.x) over integer modes with
/// k_min <= |k| <= k_max, Gaussian coefficients from a seeded mt19937_64.
/// The same (grid, spec, seed) always gives the same field.
ScalarField2D random_band_limited(const Grid2D& grid, const BandSpec& spec, std::uint64_t seed);

/// `count` fields with seeds seed, seed + 1, ...
std::vector<ScalarField2D> random_corpus(const Grid2D& grid, const BandSpec& spec, std::size_t count,
                                         std::uint64_t seed);

}  // namespace mmf
