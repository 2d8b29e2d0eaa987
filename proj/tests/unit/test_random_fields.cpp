#include <doctest.h>

#include <cmath>

#include "mmf/random_fields.hpp"

using namespace mmf;

TEST_CASE("band, norm and mean") {
  const Grid2D g = Grid2D::square(32);
  const ScalarField2D f = random_band_limited(g, {2, 5, 1.0, 3.0}, 42);
  CHECK(lp_norm(f, 2.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(f.mean()) < 1e-14);
  const Spectrum2D s = f.spectrum();
  double outside = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int jk = 0; jk < g.nky(); ++jk) {
      const double k = std::sqrt(g.k_squared(i, jk));
      if (k < 2.0 - 1e-12 || k > 5.0 + 1e-12) outside = std::max(outside, std::abs(s(i, jk)));
    }
  CHECK(outside < 1e-15);
}

TEST_CASE("seeded and resolution independent") {
  const BandSpec spec{1, 6, 1.0, 1.0};
  const ScalarField2D a = random_band_limited(Grid2D::square(32), spec, 7);
  const ScalarField2D b = random_band_limited(Grid2D::square(32), spec, 7);
  const ScalarField2D c = random_band_limited(Grid2D::square(32), spec, 8);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK(lp_norm(a - c, 2.0) > 0.1);
  // the same function sampled on a finer grid
  const ScalarField2D fine = random_band_limited(Grid2D::square(64), spec, 7);
  double err = 0.0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) err = std::max(err, std::abs(fine(2 * i, 2 * j) - a(i, j)));
  CHECK(err < 1e-13);
}

TEST_CASE("corpus and arguments") {
  const auto corpus = random_corpus(Grid2D::square(16), {1, 3, 1.0, 1.0}, 4, 10);
  CHECK(corpus.size() == 4);
  const ScalarField2D f11 = random_band_limited(Grid2D::square(16), {1, 3, 1.0, 1.0}, 11);
  CHECK(std::equal(f11.values().begin(), f11.values().end(), corpus[1].values().begin()));
  CHECK_THROWS_AS(random_band_limited(Grid2D::square(16), {1, 8, 1.0, 1.0}, 0), Error);
  CHECK_THROWS_AS(random_band_limited(Grid2D::square(16), {3, 2, 1.0, 1.0}, 0), Error);
}
