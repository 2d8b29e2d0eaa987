#pragma once

#include <filesystem>

#include "mmf/grid.hpp"
#include "mmf/microstructure.hpp"
#include "mmf/stress.hpp"

namespace mmf {

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Everything needed to restart or inspect a coupled run at one instant.
struct SimulationState {
  double t = 0.0;
  double delta = 1.0, b = 0.0, tau = 1.0, nu = 1.0;
  ScalarField2D omega;
  ParticleDensity f;
  StressField sigma;

  const Grid2D& grid() const noexcept { return omega.grid(); }
  const MicroManifold& manifold() const noexcept { return f.manifold(); }
};

/// Little-endian layout:
///   "MMF1", u32 version, u32 nx, ny, nm, f64 t, delta, b, tau, nu, s,
///   f64 omega[nx*ny], f[nx*ny*nm], s11, s12, s22 [nx*ny each], u32 crc32(payload).
/// The payload is everything after the header. Throws Error(IoError).
void save_snapshot(const SimulationState& state, const std::filesystem::path& path);

/// The box length is not stored; pass the one the run used.
/// Throws Error(IoError), Error(CorruptSnapshot), Error(VersionMismatch).
SimulationState load_snapshot(const std::filesystem::path& path, double length = kTwoPi);

}  // namespace mmf
