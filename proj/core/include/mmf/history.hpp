#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmf/grid.hpp"
#include "mmf/microstructure.hpp"
#include "mmf/stress.hpp"

namespace mmf {

/// Full fields retained at a subsampled step.
struct FieldSnapshot {
  std::size_t step = 0;
  double t = 0.0;
  ScalarField2D omega;
  VectorField2D u;
  VectorField2D u_bar;
  StressField sigma;
  std::optional<ParticleDensity> f;
};

/// Column name of an r-dependent Lebesgue norm, e.g. ("omega", 4) -> "omega_L4",
/// ("sigma", inf) -> "sigma_Linf".
std::string lebesgue_column(const std::string& base, double r);

/// Per-step scalar series (one row per recorded time) plus subsampled field
/// snapshots. The first column is always "t".
class RunHistory {
 public:
  RunHistory();
  explicit RunHistory(std::vector<std::string> columns);

  /// Adds a column; only allowed while the history is empty.
  void add_column(const std::string& name);
  bool has_column(const std::string& name) const noexcept;
  const std::vector<std::string>& columns() const noexcept { return names_; }

  /// Appends one row in column order. Throws Error(NonMonotoneTime) unless
  /// t grows strictly, Error(ShapeMismatch) for a wrong row length.
  void append(std::span<const double> row);
  /// Appends one row from a name -> value map; missing columns are NaN.
  void append(const std::map<std::string, double>& row);

  std::size_t size() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_ == 0; }
  /// Throws Error(InvalidParameter) for an unknown column.
  std::span<const double> column(const std::string& name) const;
  std::span<const double> times() const { return column("t"); }
  double final_time() const;

  std::vector<FieldSnapshot>& snapshots() noexcept { return snapshots_; }
  const std::vector<FieldSnapshot>& snapshots() const noexcept { return snapshots_; }

  /// Free-form run metadata (config echo, fitted constants).
  std::map<std::string, std::string>& metadata() noexcept { return metadata_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

  /// Throws Error(EmptyHistory) when no row has been recorded.
  void require_nonempty(const char* where) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
  std::size_t rows_ = 0;
  std::vector<FieldSnapshot> snapshots_;
  std::map<std::string, std::string> metadata_;
};

/// Trapezoid rule of a series over the history's time grid.
double time_integral(const RunHistory& h, std::span<const double> values);
/// Running trapezoid integral, same length as the history.
std::vector<double> cumulative_integral(const RunHistory& h, std::span<const double> values);

}  // namespace mmf
