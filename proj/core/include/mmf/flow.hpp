#pragma once

#include <deque>
#include <functional>

#include "mmf/grid.hpp"
#include "mmf/history.hpp"
#include "mmf/stress.hpp"

namespace mmf {

/// Vorticity, time, and the velocity recovered from it by Biot-Savart.
struct FlowState {
  ScalarField2D omega;
  VectorField2D u;
  double t = 0.0;

  /// Throws Error(NonzeroMeanVorticity) if omega has a mean.
  static FlowState from_vorticity(ScalarField2D omega, double t = 0.0);
  const Grid2D& grid() const noexcept { return omega.grid(); }
};

using ForcingProvider = std::function<StressField(double t)>;

/// curl(div sigma) = (d1^2 - d2^2) s12 + d1 d2 (s22 - s11), truncated to the dealiasing window.
Spectrum2D forcing_spectrum(const StressField& sigma);
/// div(u omega), truncated.
Spectrum2D advection_spectrum(const ScalarField2D& omega, const VectorField2D& u);

/// A stress whose forcing curl(div sigma) equals the band-limited mean-zero source S.
StressField sigma_from_vorticity_source(const ScalarField2D& source);

/// Largest admissible step, cfl_safety * h / ||u||_inf (infinite for u = 0).
double nse_max_stable_dt(const VectorField2D& u, double cfl_safety = 0.5);

/// One step of d_t omega + div(u omega) - Delta omega = curl div sigma on the torus,
/// integrating-factor Heun: the viscous term is exact, advection and forcing explicit.
/// The stress is held at its given value through the step.
/// Throws Error(CflViolation) or Error(NonFiniteField).
FlowState nse_step(const FlowState& state, const StressField& sigma, double dt, double cfl_safety = 0.5);
/// Variant with a time-dependent stress sampled at both stage times.
FlowState nse_step(const FlowState& state, const ForcingProvider& sigma, double dt, double cfl_safety = 0.5);

enum class AverageWindow {
  /// (1/delta) int_{(t-delta)+}^t u ds
  Fixed,
  /// divide by min(t, delta) instead, the average over the elapsed window
  Elapsed,
};

/// Sliding window of past velocities for the time average ubar.
class VelocityRingBuffer {
 public:
  VelocityRingBuffer(double delta, double dt_hint, AverageWindow window = AverageWindow::Fixed);

  /// Appends (u, t), drops samples no longer needed, returns ubar(t).
  /// Throws Error(NonMonotoneTime) unless t exceeds the last timestamp.
  VectorField2D push(const VectorField2D& u, double t);
  /// ubar for the current contents.
  VectorField2D average() const;

  double delta() const noexcept { return delta_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double last_time() const;
  std::vector<double> timestamps() const;

 private:
  struct Sample {
    double t;
    VectorField2D u;
  };
  double delta_;
  std::size_t capacity_;
  AverageWindow window_;
  std::deque<Sample> samples_;
};

VectorField2D update_time_average(VelocityRingBuffer& buffer, const VectorField2D& u, double t);

struct EnergyBalance {
  /// sup_t (||u(t)||^2 + int_0^t ||grad u||^2)
  double lhs = 0.0;
  /// int_0^T ||sigma||^2 + ||u(0)||^2
  double rhs = 0.0;
  double margin = 0.0;
  /// sup_t ||u||^2 + int_0^T ||grad u||^2, the two terms bounded separately
  double split_lhs = 0.0;
  double split_margin = 0.0;
};

/// Needs columns u_L2, grad_u_L2, sigma_L2. Throws Error(EmptyHistory).
EnergyBalance energy_balance(const RunHistory& history);

struct VorticityLrBound {
  double lhs = 0.0;      ///< sup_t ||omega||_r^2
  double rhs = 0.0;      ///< int ||div sigma||_r^2 + ||omega(0)||_r^2
  double lap_lhs = 0.0;  ///< int ||Delta u||_2^2
  double lap_rhs = 0.0;  ///< int ||grad sigma||_2^2 + ||omega(0)||_2^2
  double ratio() const noexcept { return rhs > 0.0 ? lhs / rhs : 0.0; }
  double lap_ratio() const noexcept { return lap_rhs > 0.0 ? lap_lhs / lap_rhs : 0.0; }
};

/// Needs columns omega_L<r>, div_sigma_L<r>, omega_L2, lap_u_L2, grad_sigma_L2.
/// Throws Error(InvalidExponent) for r < 2, Error(EmptyHistory).
VorticityLrBound vorticity_lr_check(const RunHistory& history, double r);

}  // namespace mmf
