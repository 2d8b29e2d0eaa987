#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mmf/history.hpp"

namespace mmf {

struct ReportSet;

/// Shortest decimal that parses back to the same double ("nan", "inf", "-inf" for non-finite).
std::string format_double(double v);
/// Strict parse of a whole token; throws Error(InvalidParameter).
double parse_double(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws Error(InvalidParameter) for an unknown column.
  std::vector<double> column(const std::string& name) const;
};

/// Comma-separated, LF line endings, one header row. Throws Error(IoError).
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);
/// Throws Error(IoError) and, for ragged rows or bad numbers, Error(CorruptSnapshot).
CsvTable read_csv(const std::filesystem::path& path);

void write_series(const RunHistory& history, const std::filesystem::path& path);
/// Rebuilds the scalar part of a history (no snapshots) from write_series output.
RunHistory load_series(const std::filesystem::path& path);

/// key = value lines, sorted by key.
void write_manifest(const std::filesystem::path& path, const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

/// Writes into out_dir (created if missing):
///   series.csv        every recorded column
///   budgets.csv       t, n_t, B_t, g_t, gamma_t, G_t, y_t (when budgets exist)
///   inequalities.csv  name, lhs, rhs, ratio
///   shells.csv        r, q, measured, low_bound, high_bound
///   manifest.txt      config echo plus fitted constants
void export_diagnostics(const RunHistory& history, const ReportSet& reports,
                        const std::map<std::string, std::string>& config_echo, const std::filesystem::path& out_dir);

}  // namespace mmf
