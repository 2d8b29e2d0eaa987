#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "mmf/export.hpp"
#include "mmf/parallel.hpp"
#include "mmf/scenario.hpp"

namespace mmf::cli {

namespace {

namespace fs = std::filesystem;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigInvalid:
      return 2;
    case ErrorKind::NonFiniteField:
    case ErrorKind::CflViolation:
      return 3;
    case ErrorKind::IoError:
    case ErrorKind::CorruptSnapshot:
    case ErrorKind::VersionMismatch:
      return 4;
    default:
      return 1;
  }
}

struct Common {
  std::string reports;
  std::string r_values;
  double epsilon = 0.0;
};

void apply_common(const Common& c, DiagnosticsConfig& d) {
  if (!c.reports.empty()) {
    d.reports.clear();
    std::stringstream ss(c.reports);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) d.reports.push_back(item);
  }
  if (!c.r_values.empty()) {
    d.r_values.clear();
    std::stringstream ss(c.r_values);
    for (std::string item; std::getline(ss, item, ',');) {
      try {
        d.r_values.push_back(parse_double(item));
      } catch (const Error&) {
        throw Error(ErrorKind::ConfigInvalid, "--r: '" + item + "' is not a number");
      }
    }
    if (d.r_values.empty()) throw Error(ErrorKind::ConfigInvalid, "--r needs at least one value");
    // the first exponent above 2 drives the budgets
    for (double r : d.r_values)
      if (r > 2.0) {
        d.r = r;
        break;
      }
  }
  if (c.epsilon != 0.0) d.epsilon = c.epsilon;
}

void print_rows(std::ostream& out, const ReportSet& reports) {
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %14s %14s %10s\n", "inequality", "lhs", "rhs", "ratio");
  out << line;
  for (const auto& row : reports.inequality_rows()) {
    std::snprintf(line, sizeof line, "%-32s %14.6e %14.6e %10.4f\n", row.name.c_str(), row.lhs, row.rhs, row.ratio());
    out << line;
  }
}

int simulate(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
             const std::optional<int>& threads, const std::optional<std::size_t>& stride, const Common& common,
             std::ostream& out, std::ostream& err) {
  ScenarioConfig config = load_config(config_path);
  if (seed) config.run.seed = *seed;
  if (threads) config.run.threads = *threads;
  if (stride) config.run.snapshot_stride = *stride;
  apply_common(common, config.diagnostics);
  config.validate();

  SimulationResult result = run_simulation(config);
  ReportSet reports = generate_reports(result.history, config.diagnostics);
  reports.n_evolution = result.n_evolution;

  const fs::path dir = out_dir.empty() ? fs::path("mmf-out") : fs::path(out_dir);
  export_diagnostics(result.history, reports, config.echo(), dir);
  save_snapshot(result.final_state, dir / "final.mmf");
  std::size_t saved = 0;
  for (const auto& s : result.history.snapshots()) {
    if (!s.f) continue;
    SimulationState st{s.t, config.params.delta, config.params.b, config.params.tau, config.params.nu, s.omega, *s.f,
                       s.sigma};
    char name[32];
    std::snprintf(name, sizeof name, "snap_%06zu.mmf", s.step);
    save_snapshot(st, dir / name);
    ++saved;
  }

  out << "steps " << result.steps << ", t = " << format_double(result.final_state.t) << ", " << saved + 1
      << " snapshot file(s) in " << dir.string() << '\n';
  print_rows(out, reports);
  if (result.status != RunStatus::Completed) {
    err << "numerical abort: " << result.message << '\n';
    return 3;
  }
  return 0;
}

int verify(const std::string& dir, const std::string& out_dir, const Common& common, std::ostream& out) {
  const fs::path series = fs::path(dir) / "series.csv";
  RunHistory h = load_series(series);
  DiagnosticsConfig d;
  apply_common(common, d);
  // only exponents that were recorded
  std::vector<double> rs;
  for (double r : d.r_values)
    if (h.has_column(lebesgue_column("omega", r))) rs.push_back(r);
  d.r_values = rs;
  if (!h.has_column(lebesgue_column("grad2_ubar", d.r)))
    for (double r : rs)
      if (r > 2.0) {
        d.r = r;
        break;
      }
  const ReportSet reports = generate_reports(h, d);
  print_rows(out, reports);
  for (const auto& [k, v] : reports.constants()) out << k << " = " << format_double(v) << '\n';
  if (!out_dir.empty()) {
    std::map<std::string, std::string> echo;
    const fs::path manifest = fs::path(dir) / "manifest.txt";
    if (fs::exists(manifest))
      for (const auto& [k, v] : read_manifest(manifest))
        if (k.rfind("constants.", 0) != 0) echo[k] = v;
    export_diagnostics(h, reports, echo, out_dir);
  }
  return 0;
}

int inspect(const std::string& path, double length, std::ostream& out) {
  const SimulationState s = load_snapshot(path, length);
  const DensityReport d = inspect_density(s.f);
  const VectorField2D u = biot_savart(s.omega);
  out << "grid      " << s.grid().nx << " x " << s.grid().ny << ", n_m = " << s.manifold().n_m
      << ", s = " << format_double(s.manifold().s) << '\n';
  out << "t         " << format_double(s.t) << '\n';
  out << "delta     " << format_double(s.delta) << "\nb         " << format_double(s.b) << "\ntau       "
      << format_double(s.tau) << "\nnu        " << format_double(s.nu) << '\n';
  out << "|u|_2     " << format_double(lp_norm(u, 2.0)) << '\n';
  out << "|omega|_2 " << format_double(lp_norm(s.omega, 2.0)) << '\n';
  out << "|sigma|_2 " << format_double(lp_norm(s.sigma.magnitude(), 2.0)) << '\n';
  out << "mass      " << format_double(d.mass) << '\n';
  out << "rho       [" << format_double(d.min_rho) << ", " << format_double(d.max_rho) << "]\n";
  out << "min f     " << format_double(d.min_value) << '\n';
  out << "admissible " << (d.admissible ? "yes" : "no") << '\n';
  return 0;
}

int convert(double nu, double tau, double delta, double length, double T, double velocity, std::ostream& out) {
  const RescaleMap m = rescale_map(nu, tau, delta);
  out << "lambda = sqrt(nu tau / delta) = " << format_double(m.lambda) << '\n';
  out << "time scale lambda^2 / nu = tau / delta = " << format_double(m.time_scale) << '\n';
  out << "v(x, t) = (delta lambda / tau) u(x / lambda, t delta / tau), velocity scale = "
      << format_double(m.velocity_scale) << '\n';
  out << "sigma = tau / (delta nu) tau_p, prefactor = " << format_double(m.sigma_prefactor) << '\n';
  out << "box length " << format_double(length) << " -> " << format_double(length / m.lambda) << '\n';
  out << "final time " << format_double(T) << " -> " << format_double(T / m.time_scale) << '\n';
  out << "velocity   " << format_double(velocity) << " -> " << format_double(velocity / m.velocity_scale) << '\n';
  return 0;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupled Navier-Stokes / Fokker-Planck simulator and estimate checker", "mmf"};
  app.require_subcommand(1);

  Common common;
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::size_t> stride;

  auto* sim = app.add_subcommand("simulate", "run a scenario and export its diagnostics");
  sim->add_option("scenario", config_path, "scenario file");
  sim->add_option("--config", config_path, "scenario file");
  sim->add_option("--out", out_dir, "output directory (default mmf-out)");
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--threads", threads, "worker threads");
  sim->add_option("--snapshot-stride", stride, "steps between field snapshots");

  std::string history_dir;
  auto* ver = app.add_subcommand("verify", "recompute reports from an exported series");
  ver->add_option("history-dir", history_dir, "directory holding series.csv")->required();
  ver->add_option("--out", out_dir, "write the recomputed tables here");

  for (auto* s : {sim, ver}) {
    s->add_option("--report", common.reports, "comma-separated reports (energy, vorticity, log-bounds, "
                                               "amplification, n-evolution, gronwall, all)");
    s->add_option("--r", common.r_values, "comma-separated Lebesgue exponents");
    s->add_option("--epsilon", common.epsilon, "epsilon of the amplification bound")->check(CLI::PositiveNumber);
  }
  int threads_all = 1;
  ver->add_option("--threads", threads_all, "worker threads");

  std::string snap_path;
  double length = 2.0 * 3.14159265358979323846;
  auto* ins = app.add_subcommand("inspect", "print a snapshot header and norms");
  ins->add_option("snapshot", snap_path, "snapshot file")->required();
  ins->add_option("--length", length, "box side used by the run");

  double nu = 1.0, tau = 1.0, delta = 1.0, plen = 2.0 * 3.14159265358979323846, pT = 1.0, pv = 1.0;
  auto* conv = app.add_subcommand("convert", "map physical (nu, tau, delta) to rescaled units");
  conv->add_option("--nu", nu, "viscosity")->required();
  conv->add_option("--tau", tau, "particle time scale")->required();
  conv->add_option("--delta", delta, "Deborah number")->required();
  conv->add_option("--length", plen, "physical box side");
  conv->add_option("--T", pT, "physical final time");
  conv->add_option("--velocity", pv, "physical velocity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      if (config_path.empty()) throw Error(ErrorKind::ConfigInvalid, "simulate needs a config file");
      return simulate(config_path, out_dir, seed, threads, stride, common, out, err);
    }
    if (*ver) {
      set_thread_count(threads_all);
      return verify(history_dir, out_dir, common, out);
    }
    if (*ins) return inspect(snap_path, length, out);
    if (*conv) return convert(nu, tau, delta, plen, pT, pv, out);
  } catch (const Error& e) {
    err << "mmf: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "mmf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mmf::cli
