#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmf/diagnostics.hpp"
#include "mmf/flow.hpp"
#include "mmf/snapshot.hpp"

namespace mmf {

/// Length, time and velocity scales of the unit-viscosity system, from the
/// physical viscosity nu, particle time tau and Deborah number delta.
struct RescaleMap {
  double lambda = 1.0;          ///< sqrt(nu tau / delta)
  double time_scale = 1.0;      ///< tau / delta, physical time per unit time
  double velocity_scale = 1.0;  ///< delta lambda / tau, physical velocity per unit velocity
  double sigma_prefactor = 1.0; ///< tau / (delta nu)
};

/// Throws Error(ConfigInvalid) unless nu, tau, delta > 0.
RescaleMap rescale_map(double nu, double tau, double delta);

struct DiagnosticsConfig {
  /// energy, vorticity, log-bounds, amplification, n-evolution, gronwall, or all
  std::vector<std::string> reports{"all"};
  std::vector<double> r_values{3.0, 4.0, 8.0};
  /// exponent used for the budgets and the closure
  double r = 4.0;
  double epsilon = 1.0;
  /// track the Duhamel split of grad u (F_Linf, F_shell_q columns)
  bool duhamel = true;

  bool enabled(std::string_view report) const;
};

struct InitialData {
  /// taylor-green, random-seeded, uniform-f, aligned-f, file
  std::string preset = "taylor-green";
  /// flow part for the density presets: auto, zero, taylor-green, random
  std::string flow = "auto";
  double amplitude = 1.0;
  double rho = 0.5;
  double anisotropy = 0.5;
  int k_min = 1;
  int k_max = 4;
  std::string file;
};

struct RunSettings {
  double T = 1.0;
  double dt = 1e-3;
  double cfl_safety = 0.5;
  std::size_t snapshot_stride = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  /// keep f in the subsampled snapshots (8 nx ny nm bytes each)
  bool density_snapshots = false;
  AverageWindow window = AverageWindow::Fixed;
};

/// Sectioned key = value text:
///
///   [grid]        nx ny length
///   [manifold]    nm s
///   [model]       delta b tau nu k_max kernel units
///   [initial]     preset flow amplitude rho anisotropy k_min k_max file
///   [run]         T dt cfl_safety snapshot_stride seed threads window density_snapshots
///   [diagnostics] reports r_values r epsilon duhamel
///
/// '#' starts a comment. With units = physical, length, T, dt and the flow
/// amplitude are physical and converted by rescale_map at load.
struct ScenarioConfig {
  Grid2D grid = Grid2D::square(64);
  MicroManifold manifold{};
  ModelParams params{};
  int k_max = 2;
  std::string kernel = "maier-saupe";
  /// set when the file was in physical units and has been converted
  std::optional<RescaleMap> conversion;
  InitialData initial{};
  RunSettings run{};
  DiagnosticsConfig diagnostics{};

  /// Throws Error(ConfigInvalid).
  void validate() const;
  StressCoefficients stress_coefficients() const;
  /// Canonical key = value echo, section.key -> value.
  std::map<std::string, std::string> echo() const;
};

/// Throws Error(ConfigInvalid) for syntax errors, unknown sections or keys, bad values.
ScenarioConfig parse_config(std::string_view text);
/// Throws Error(IoError) when the file cannot be read, then as parse_config.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Builds the initial omega, f (and sigma from f) of a preset. Throws
/// Error(ConfigInvalid) if rho leaves [0, 1] or f is negative.
SimulationState initial_state(const ScenarioConfig& config);

enum class RunStatus { Completed, NonFinite, CflViolation };

/// Scalars of the N-evolution decomposition at one snapshot.
struct NEvolutionSample {
  double t = 0.0;
  double identity_residual = 0.0;
  double fitted_c = 0.0;
  double c_I = 0.0, c_II = 0.0, c_III = 0.0, c_IV = 0.0;
  double max_material_N = 0.0;
  bool finite = true;
};

struct SimulationResult {
  RunHistory history;
  SimulationState final_state;
  RunStatus status = RunStatus::Completed;
  std::string message;
  std::size_t steps = 0;
  std::vector<NEvolutionSample> n_evolution;
};

/// Coupled loop. Per step: sigma from f, flow step with sigma, ubar from the
/// velocity window, Fokker-Planck step with the new ubar, record. A
/// NonFiniteField or CflViolation stops the loop; the result then holds
/// everything recorded so far and the corresponding status.
/// Throws Error(ConfigInvalid).
SimulationResult run_simulation(const ScenarioConfig& config);
SimulationResult run_simulation(const ScenarioConfig& config, SimulationState initial);

struct ReportSet {
  std::optional<EnergyBalance> energy;
  std::vector<std::pair<double, VorticityLrBound>> vorticity;
  std::vector<LogBoundsReport> log_bounds;
  std::vector<AmplificationReport> amplification;
  std::optional<BudgetReport> budgets;
  std::optional<GronwallReport> gronwall;
  std::vector<NEvolutionSample> n_evolution;

  /// Every (lhs, rhs) pair, flattened with r-suffixed names.
  std::vector<InequalityRow> inequality_rows() const;
  /// Fitted constants and report scalars for the manifest.
  std::map<std::string, double> constants() const;
};

/// Pure over the history; reports whose columns are missing are skipped.
ReportSet generate_reports(const RunHistory& history, const DiagnosticsConfig& diagnostics);

}  // namespace mmf
