#include "mmf/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "mmf/scenario.hpp"

namespace mmf {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorKind::InvalidParameter, "not a number: '" + std::string(text) + "'");
  return v;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& r : rows) out.push_back(r[c]);
      return out;
    }
  throw Error(ErrorKind::InvalidParameter, "no column " + name);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t k = line.find(sep, start);
    out.push_back(line.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw Error(ErrorKind::ShapeMismatch, "header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw Error(ErrorKind::ShapeMismatch, "columns have different lengths");
  std::ofstream out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
    out << '\n';
  }
  finish(out, path);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::CorruptSnapshot, path.string() + " has no header");
  for (auto f : split(trim(line), ',')) t.header.emplace_back(trim(f));
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != t.header.size())
      throw Error(ErrorKind::CorruptSnapshot, path.string() + ":" + std::to_string(n) + ": wrong field count");
    std::vector<double> row;
    row.reserve(fields.size());
    try {
      for (auto f : fields) row.push_back(parse_double(trim(f)));
    } catch (const Error& e) {
      throw Error(ErrorKind::CorruptSnapshot, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_series(const RunHistory& h, const fs::path& path) {
  std::vector<std::vector<double>> cols;
  for (const auto& name : h.columns()) {
    const auto c = h.column(name);
    cols.emplace_back(c.begin(), c.end());
  }
  write_csv(path, h.columns(), cols);
}

RunHistory load_series(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.empty() || t.header.front() != "t")
    throw Error(ErrorKind::CorruptSnapshot, path.string() + ": first column must be t");
  RunHistory h(t.header);
  for (const auto& r : t.rows) h.append(r);
  return h;
}

void write_manifest(const fs::path& path, const std::map<std::string, std::string>& entries) {
  std::ofstream out = open_out(path);
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
  finish(out, path);
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[std::string(trim(std::string_view(line).substr(0, eq)))] =
        std::string(trim(std::string_view(line).substr(eq + 1)));
  }
  return out;
}

void export_diagnostics(const RunHistory& h, const ReportSet& reports,
                        const std::map<std::string, std::string>& config_echo, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  write_series(h, out_dir / "series.csv");

  if (reports.budgets) {
    const BudgetReport& b = *reports.budgets;
    std::vector<double> y = reports.gronwall ? reports.gronwall->y : std::vector<double>(b.t.size(), 0.0);
    std::vector<double> w = reports.gronwall ? reports.gronwall->loglog_y : std::vector<double>(b.t.size(), 0.0);
    write_csv(out_dir / "budgets.csv", {"t", "n_t", "B_t", "g_t", "gamma_t", "G_t", "y_t", "loglog_y_t"},
              {b.t, b.n, b.B, b.g, b.gamma, b.G, y, w});
  }

  {
    std::ofstream out = open_out(out_dir / "inequalities.csv");
    out << "name,lhs,rhs,ratio\n";
    for (const auto& row : reports.inequality_rows())
      out << row.name << ',' << format_double(row.lhs) << ',' << format_double(row.rhs) << ','
          << format_double(row.ratio()) << '\n';
    finish(out, out_dir / "inequalities.csv");
  }

  {
    std::vector<std::vector<double>> cols(5);
    for (const auto& a : reports.amplification)
      for (const auto& s : a.shells) {
        cols[0].push_back(a.r);
        cols[1].push_back(s.q);
        cols[2].push_back(s.measured);
        cols[3].push_back(s.low_bound);
        cols[4].push_back(s.high_bound);
      }
    write_csv(out_dir / "shells.csv", {"r", "q", "measured", "low_bound", "high_bound"}, cols);
  }

  std::map<std::string, std::string> manifest = config_echo;
  for (const auto& [k, v] : reports.constants()) manifest["constants." + k] = format_double(v);
  for (const auto& [k, v] : h.metadata()) manifest["run." + k] = v;
  write_manifest(out_dir / "manifest.txt", manifest);
}

}  // namespace mmf
