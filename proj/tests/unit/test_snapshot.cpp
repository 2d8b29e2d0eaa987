#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "mmf/snapshot.hpp"

using namespace mmf;
namespace fs = std::filesystem;

namespace {

SimulationState sample_state() {
  const Grid2D g = Grid2D::square(8);
  const MicroManifold mm{16, 2.5};
  SimulationState s;
  s.t = 0.125;
  s.delta = 0.3;
  s.b = 1.5;
  s.tau = 2.0;
  s.nu = 0.7;
  s.omega = ScalarField2D::from_function(g, [](double x, double y) { return std::sin(x) * std::cos(3 * y) / 3.0; });
  s.f = ParticleDensity(PhaseField::from_function(g, mm, [](double x, double, double th) {
    return (1.0 + 0.1 * std::cos(x + th)) / kTwoPi;
  }));
  s.sigma = StressField(g);
  s.sigma.s11 = ScalarField2D(g, 0.1);
  s.sigma.s12 = ScalarField2D(g, -1.0 / 3.0);
  s.sigma.s22 = ScalarField2D(g, 1e-300);
  return s;
}

fs::path temp(const char* name) { return fs::temp_directory_path() / name; }

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::string& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

template <class S>
bool same(const S& a, const S& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

ErrorKind load_error(const fs::path& p) {
  try {
    load_snapshot(p);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidGrid;
}

}  // namespace

TEST_CASE("bit-identical round trip") {
  const SimulationState s = sample_state();
  const fs::path p = temp("mmf_unit_a.mmf");
  save_snapshot(s, p);
  CHECK(fs::file_size(p) == 68 + 8 * (64 + 64 * 16 + 3 * 64) + 4);
  const SimulationState r = load_snapshot(p);
  CHECK(r.t == s.t);
  CHECK(r.nu == s.nu);
  CHECK(r.manifold() == s.manifold());
  CHECK(same(r.omega.values(), s.omega.values()));
  CHECK(same(r.f.values(), s.f.values()));
  CHECK(same(r.sigma.s22.values(), s.sigma.s22.values()));
  const fs::path q = temp("mmf_unit_b.mmf");
  save_snapshot(r, q);
  CHECK(bytes(p) == bytes(q));
  fs::remove(q);
  fs::remove(p);
}

TEST_CASE("corrupt files") {
  const fs::path p = temp("mmf_unit_c.mmf");
  save_snapshot(sample_state(), p);
  const std::string good = bytes(p);

  SUBCASE("truncated") {
    write_bytes(p, good.substr(0, good.size() - 9));
    CHECK(load_error(p) == ErrorKind::CorruptSnapshot);
  }
  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    write_bytes(p, b);
    CHECK(load_error(p) == ErrorKind::CorruptSnapshot);
  }
  SUBCASE("flipped payload byte") {
    std::string b = good;
    b[100] ^= 0x10;
    write_bytes(p, b);
    CHECK(load_error(p) == ErrorKind::CorruptSnapshot);
  }
  SUBCASE("future version") {
    std::string b = good;
    b[4] = 2;
    write_bytes(p, b);
    CHECK(load_error(p) == ErrorKind::VersionMismatch);
  }
  SUBCASE("missing file") {
    fs::remove(p);
    CHECK(load_error(p) == ErrorKind::IoError);
  }
  fs::remove(p);
}
