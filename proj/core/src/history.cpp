#include "mmf/history.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace mmf {

std::string lebesgue_column(const std::string& base, double r) {
  if (std::isinf(r)) return base + "_Linf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, r);
  return base + "_L" + std::string(buf, res.ptr);
}

RunHistory::RunHistory() : names_{"t"}, data_(1) {}

RunHistory::RunHistory(std::vector<std::string> columns) : RunHistory() {
  for (const auto& c : columns)
    if (c != "t") add_column(c);
}

void RunHistory::add_column(const std::string& name) {
  if (rows_ != 0) throw Error(ErrorKind::InvalidParameter, "columns must be declared before the first row");
  if (has_column(name)) throw Error(ErrorKind::InvalidParameter, "duplicate column " + name);
  names_.push_back(name);
  data_.emplace_back();
}

bool RunHistory::has_column(const std::string& name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

void RunHistory::append(std::span<const double> row) {
  if (row.size() != names_.size())
    throw Error(ErrorKind::ShapeMismatch, "history row has " + std::to_string(row.size()) + " values, expected " +
                                              std::to_string(names_.size()));
  if (rows_ > 0 && !(row[0] > data_[0].back()))
    throw Error(ErrorKind::NonMonotoneTime, "history times must increase strictly");
  for (std::size_t c = 0; c < row.size(); ++c) data_[c].push_back(row[c]);
  ++rows_;
}

void RunHistory::append(const std::map<std::string, double>& row) {
  std::vector<double> r(names_.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [k, v] : row) {
    const auto it = std::find(names_.begin(), names_.end(), k);
    if (it == names_.end()) throw Error(ErrorKind::InvalidParameter, "unknown history column " + k);
    r[static_cast<std::size_t>(it - names_.begin())] = v;
  }
  append(r);
}

std::span<const double> RunHistory::column(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorKind::InvalidParameter, "unknown history column " + name);
  return data_[static_cast<std::size_t>(it - names_.begin())];
}

double RunHistory::final_time() const {
  require_nonempty("final_time");
  return data_[0].back();
}

void RunHistory::require_nonempty(const char* where) const {
  if (rows_ == 0) throw Error(ErrorKind::EmptyHistory, std::string(where) + ": history is empty");
}

double time_integral(const RunHistory& h, std::span<const double> values) {
  h.require_nonempty("time_integral");
  const auto t = h.times();
  if (values.size() != t.size()) throw Error(ErrorKind::ShapeMismatch, "series length differs from the time grid");
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (values[k] + values[k - 1]);
  return s;
}

std::vector<double> cumulative_integral(const RunHistory& h, std::span<const double> values) {
  h.require_nonempty("cumulative_integral");
  const auto t = h.times();
  if (values.size() != t.size()) throw Error(ErrorKind::ShapeMismatch, "series length differs from the time grid");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (values[k] + values[k - 1]);
  return out;
}

}  // namespace mmf
