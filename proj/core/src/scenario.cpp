#include "mmf/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mmf/export.hpp"
#include "mmf/parallel.hpp"
#include "mmf/random_fields.hpp"

namespace mmf {

namespace {

const std::set<std::string, std::less<>> kReports{"energy",        "vorticity",   "log-bounds",
                                                  "amplification", "n-evolution", "gronwall"};
const std::set<std::string, std::less<>> kPresets{"taylor-green", "random-seeded", "uniform-f", "aligned-f", "file"};
const std::set<std::string, std::less<>> kFlows{"auto", "zero", "taylor-green", "random"};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view v, const std::string& key) {
  try {
    const double d = parse_double(v);
    if (!std::isfinite(d)) invalid(key + " must be finite");
    return d;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    invalid(key + ": '" + std::string(v) + "' is not a number");
  }
}

template <class Int>
Int to_int(std::string_view v, const std::string& key) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    invalid(key + ": '" + std::string(v) + "' is not an integer");
  return out;
}

bool to_bool(std::string_view v, const std::string& key) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  invalid(key + ": '" + std::string(v) + "' is not a boolean");
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t k = v.find(',', start);
    const auto item = trim(v.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (!item.empty()) out.emplace_back(item);
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string join(const std::vector<double>& items) {
  std::string out;
  for (double v : items) out += (out.empty() ? "" : ",") + format_double(v);
  return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"grid.nx", [](auto& c, auto v, auto& k) { c.grid.nx = to_int<int>(v, k); }},
      {"grid.ny", [](auto& c, auto v, auto& k) { c.grid.ny = to_int<int>(v, k); }},
      {"grid.length", [](auto& c, auto v, auto& k) { c.grid.length = to_double(v, k); }},
      {"manifold.nm", [](auto& c, auto v, auto& k) { c.manifold.n_m = to_int<int>(v, k); }},
      {"manifold.s", [](auto& c, auto v, auto& k) { c.manifold.s = to_double(v, k); }},
      {"model.delta", [](auto& c, auto v, auto& k) { c.params.delta = to_double(v, k); }},
      {"model.b", [](auto& c, auto v, auto& k) { c.params.b = to_double(v, k); }},
      {"model.tau", [](auto& c, auto v, auto& k) { c.params.tau = to_double(v, k); }},
      {"model.nu", [](auto& c, auto v, auto& k) { c.params.nu = to_double(v, k); }},
      {"model.k_max", [](auto& c, auto v, auto& k) { c.k_max = to_int<int>(v, k); }},
      {"model.kernel", [](auto& c, auto v, auto&) { c.kernel = std::string(v); }},
      {"model.units",
       [](auto& c, auto v, auto& k) {
         if (v == "physical")
           c.conversion = RescaleMap{};
         else if (v == "rescaled")
           c.conversion.reset();
         else
           invalid(k + " must be physical or rescaled");
       }},
      {"initial.preset", [](auto& c, auto v, auto&) { c.initial.preset = std::string(v); }},
      {"initial.flow", [](auto& c, auto v, auto&) { c.initial.flow = std::string(v); }},
      {"initial.amplitude", [](auto& c, auto v, auto& k) { c.initial.amplitude = to_double(v, k); }},
      {"initial.rho", [](auto& c, auto v, auto& k) { c.initial.rho = to_double(v, k); }},
      {"initial.anisotropy", [](auto& c, auto v, auto& k) { c.initial.anisotropy = to_double(v, k); }},
      {"initial.k_min", [](auto& c, auto v, auto& k) { c.initial.k_min = to_int<int>(v, k); }},
      {"initial.k_max", [](auto& c, auto v, auto& k) { c.initial.k_max = to_int<int>(v, k); }},
      {"initial.file", [](auto& c, auto v, auto&) { c.initial.file = std::string(v); }},
      {"run.T", [](auto& c, auto v, auto& k) { c.run.T = to_double(v, k); }},
      {"run.dt", [](auto& c, auto v, auto& k) { c.run.dt = to_double(v, k); }},
      {"run.cfl_safety", [](auto& c, auto v, auto& k) { c.run.cfl_safety = to_double(v, k); }},
      {"run.snapshot_stride", [](auto& c, auto v, auto& k) { c.run.snapshot_stride = to_int<std::size_t>(v, k); }},
      {"run.seed", [](auto& c, auto v, auto& k) { c.run.seed = to_int<std::uint64_t>(v, k); }},
      {"run.threads", [](auto& c, auto v, auto& k) { c.run.threads = to_int<int>(v, k); }},
      {"run.density_snapshots", [](auto& c, auto v, auto& k) { c.run.density_snapshots = to_bool(v, k); }},
      {"run.window",
       [](auto& c, auto v, auto& k) {
         if (v == "fixed")
           c.run.window = AverageWindow::Fixed;
         else if (v == "elapsed")
           c.run.window = AverageWindow::Elapsed;
         else
           invalid(k + " must be fixed or elapsed");
       }},
      {"diagnostics.reports", [](auto& c, auto v, auto&) { c.diagnostics.reports = to_list(v); }},
      {"diagnostics.r_values",
       [](auto& c, auto v, auto& k) {
         c.diagnostics.r_values.clear();
         for (const auto& s : to_list(v)) c.diagnostics.r_values.push_back(to_double(s, k));
       }},
      {"diagnostics.r", [](auto& c, auto v, auto& k) { c.diagnostics.r = to_double(v, k); }},
      {"diagnostics.epsilon", [](auto& c, auto v, auto& k) { c.diagnostics.epsilon = to_double(v, k); }},
      {"diagnostics.duhamel", [](auto& c, auto v, auto& k) { c.diagnostics.duhamel = to_bool(v, k); }},
  };
  return table;
}

ScalarField2D flow_field(const ScenarioConfig& c, const std::string& kind) {
  const Grid2D& g = c.grid;
  const double kappa = g.wavenumber_unit();
  const double a = c.initial.amplitude;
  if (kind == "zero") return ScalarField2D(g);
  if (kind == "taylor-green")
    return ScalarField2D::from_function(
        g, [&](double x, double y) { return 2.0 * a * kappa * std::sin(kappa * x) * std::sin(kappa * y); });
  BandSpec band{c.initial.k_min, c.initial.k_max, 1.0, a * g.length};
  return random_band_limited(g, band, c.run.seed);
}

ParticleDensity aligned_density(const ScenarioConfig& c, const ScalarField2D& theta0) {
  const Grid2D& g = c.grid;
  const double kappa = g.wavenumber_unit();
  const double rho = c.initial.rho, a = c.initial.anisotropy;
  ParticleDensity f(g, c.manifold);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * g.ny + j;
      const double r0 = rho * (1.0 + 0.5 * std::sin(kappa * g.x(i)) * std::cos(kappa * g.y(j)));
      const double t0 = theta0(i, j);
      for (int m = 0; m < c.manifold.n_m; ++m)
        f(p, m) = r0 / kTwoPi * (1.0 + a * std::cos(2.0 * (c.manifold.theta(m) - t0)));
    }
  return f;
}

std::string fmt_r(double r) {
  const std::string s = lebesgue_column("", r);
  return "r" + s.substr(2);
}

}  // namespace

RescaleMap rescale_map(double nu, double tau, double delta) {
  if (!(nu > 0.0) || !(tau > 0.0) || !(delta > 0.0)) invalid("rescaling needs nu, tau, delta > 0");
  RescaleMap m;
  m.lambda = std::sqrt(nu * tau / delta);
  m.time_scale = tau / delta;
  m.velocity_scale = delta * m.lambda / tau;
  m.sigma_prefactor = tau / (delta * nu);
  return m;
}

bool DiagnosticsConfig::enabled(std::string_view report) const {
  for (const auto& r : reports)
    if (r == "all" || r == report) return true;
  return false;
}

void ScenarioConfig::validate() const {
  try {
    grid.validate();
    manifold.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }
  if (!(params.delta > 0.0)) invalid("model.delta must be > 0");
  if (!(params.tau > 0.0)) invalid("model.tau must be > 0");
  if (!(params.nu > 0.0)) invalid("model.nu must be > 0");
  if (!(params.b >= 0.0)) invalid("model.b must be >= 0");
  if (k_max != 1 && k_max != 2) invalid("model.k_max must be 1 or 2");
  if (kernel != "maier-saupe" && kernel != "zero") invalid("model.kernel must be maier-saupe or zero");
  if (!kPresets.count(initial.preset)) invalid("unknown initial.preset '" + initial.preset + "'");
  if (!kFlows.count(initial.flow)) invalid("unknown initial.flow '" + initial.flow + "'");
  if (!(initial.rho >= 0.0 && initial.rho <= 1.0)) invalid("initial.rho must lie in [0, 1]");
  if (!(std::abs(initial.anisotropy) <= 1.0)) invalid("initial.anisotropy must lie in [-1, 1]");
  if (initial.k_min < 1 || initial.k_max < initial.k_min) invalid("initial needs 1 <= k_min <= k_max");
  if (initial.preset == "file" && initial.file.empty()) invalid("initial.file is required for preset file");
  if (!(run.T > 0.0)) invalid("run.T must be > 0");
  if (!(run.dt > 0.0) || run.dt > run.T) invalid("run.dt must lie in (0, T]");
  if (!(run.cfl_safety > 0.0 && run.cfl_safety <= 1.0)) invalid("run.cfl_safety must lie in (0, 1]");
  if (run.snapshot_stride < 1) invalid("run.snapshot_stride must be >= 1");
  if (run.threads < 1) invalid("run.threads must be >= 1");
  for (const auto& r : diagnostics.reports)
    if (r != "all" && r != "none" && !kReports.count(r)) invalid("unknown report '" + r + "'");
  for (double r : diagnostics.r_values)
    if (!(r >= 2.0)) invalid("diagnostics.r_values must be >= 2");
  if (!(diagnostics.r > 2.0) || std::isinf(diagnostics.r)) invalid("diagnostics.r must be finite and > 2");
  if (!(diagnostics.epsilon > 0.0)) invalid("diagnostics.epsilon must be > 0");
}

StressCoefficients ScenarioConfig::stress_coefficients() const {
  StressCoefficients c = StressCoefficients::rods();
  c.k_max = k_max;
  return c;
}

std::map<std::string, std::string> ScenarioConfig::echo() const {
  const auto d = [](double v) { return format_double(v); };
  std::map<std::string, std::string> e{
      {"grid.nx", std::to_string(grid.nx)},
      {"grid.ny", std::to_string(grid.ny)},
      {"grid.length", d(grid.length)},
      {"manifold.nm", std::to_string(manifold.n_m)},
      {"manifold.s", d(manifold.s)},
      {"model.delta", d(params.delta)},
      {"model.b", d(params.b)},
      {"model.tau", d(params.tau)},
      {"model.nu", d(params.nu)},
      {"model.k_max", std::to_string(k_max)},
      {"model.kernel", kernel},
      {"model.units", "rescaled"},
      {"initial.preset", initial.preset},
      {"initial.flow", initial.flow},
      {"initial.amplitude", d(initial.amplitude)},
      {"initial.rho", d(initial.rho)},
      {"initial.anisotropy", d(initial.anisotropy)},
      {"initial.k_min", std::to_string(initial.k_min)},
      {"initial.k_max", std::to_string(initial.k_max)},
      {"run.T", d(run.T)},
      {"run.dt", d(run.dt)},
      {"run.cfl_safety", d(run.cfl_safety)},
      {"run.snapshot_stride", std::to_string(run.snapshot_stride)},
      {"run.seed", std::to_string(run.seed)},
      {"run.threads", std::to_string(run.threads)},
      {"run.window", run.window == AverageWindow::Fixed ? "fixed" : "elapsed"},
      {"run.density_snapshots", run.density_snapshots ? "true" : "false"},
      {"diagnostics.reports", join(diagnostics.reports)},
      {"diagnostics.r_values", join(diagnostics.r_values)},
      {"diagnostics.r", d(diagnostics.r)},
      {"diagnostics.epsilon", d(diagnostics.epsilon)},
      {"diagnostics.duhamel", diagnostics.duhamel ? "true" : "false"},
  };
  if (!initial.file.empty()) e["initial.file"] = initial.file;
  if (conversion) {
    e["rescale.lambda"] = d(conversion->lambda);
    e["rescale.time_scale"] = d(conversion->time_scale);
    e["rescale.velocity_scale"] = d(conversion->velocity_scale);
  }
  return e;
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig c;
  std::set<std::string> seen;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') invalid(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> sections{"grid", "manifold", "model", "initial", "run", "diagnostics"};
      if (!sections.count(section)) invalid(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) invalid(where + "expected key = value");
    if (section.empty()) invalid(where + "key outside of a section");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) invalid(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) invalid(where + "duplicate key '" + key + "'");
    it->second(c, value, key);
  }

  if (c.conversion) {
    const RescaleMap m = rescale_map(c.params.nu, c.params.tau, c.params.delta);
    c.conversion = m;
    c.grid.length /= m.lambda;
    c.run.T /= m.time_scale;
    c.run.dt /= m.time_scale;
    c.initial.amplitude /= m.velocity_scale;
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SimulationState initial_state(const ScenarioConfig& c) {
  c.validate();
  SimulationState s;
  s.delta = c.params.delta;
  s.b = c.params.b;
  s.tau = c.params.tau;
  s.nu = c.params.nu;
  const std::string& preset = c.initial.preset;

  if (preset == "file") {
    try {
      s = load_snapshot(c.initial.file, c.grid.length);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IoError) throw;
      invalid("initial.file: " + std::string(e.what()));
    }
    if (s.grid().nx != c.grid.nx || s.grid().ny != c.grid.ny || s.manifold().n_m != c.manifold.n_m)
      invalid("initial.file resolution differs from [grid] / [manifold]");
    s.delta = c.params.delta;
    s.b = c.params.b;
    s.tau = c.params.tau;
    s.nu = c.params.nu;
  } else {
    std::string flow = c.initial.flow;
    if (flow == "auto") flow = preset == "random-seeded" ? "random" : "taylor-green";
    s.omega = flow_field(c, flow);
    if (preset == "taylor-green" || preset == "uniform-f") {
      s.f = ParticleDensity(c.grid, c.manifold, c.initial.rho / kTwoPi);
    } else if (preset == "aligned-f") {
      const double kappa = c.grid.wavenumber_unit();
      const ScalarField2D theta0 = ScalarField2D::from_function(
          c.grid, [&](double x, double y) { return 0.25 * kPi * (std::sin(kappa * x) + std::cos(kappa * y)); });
      s.f = aligned_density(c, theta0);
    } else {
      BandSpec band{1, 3, 1.0, 0.5 * c.grid.length};
      s.f = aligned_density(c, random_band_limited(c.grid, band, c.run.seed + 1));
    }
  }

  const DensityReport d = inspect_density(s.f);
  if (!d.admissible)
    invalid("initial density is not admissible: min f = " + format_double(d.min_value) +
            ", rho in [" + format_double(d.min_rho) + ", " + format_double(d.max_rho) + "]");
  s.sigma = total_sigma(s.f, c.stress_coefficients(), c.params);
  return s;
}

// --- driver ------------------------------------------------------------------------

SimulationResult run_simulation(const ScenarioConfig& config) { return run_simulation(config, initial_state(config)); }

SimulationResult run_simulation(const ScenarioConfig& config, SimulationState initial) {
  config.validate();
  set_thread_count(config.run.threads);
  const Grid2D& g = config.grid;
  require_same_grid(g, initial.grid(), "run_simulation");
  ModelParams params = config.params;
  params.cfl_safety = config.run.cfl_safety;
  if (config.kernel == "zero") params.kernel = InteractionKernel::convolution([](double) { return 0.0; });
  const StressCoefficients coeffs = config.stress_coefficients();
  const DiagnosticsConfig& diag = config.diagnostics;

  RecorderOptions ropt;
  ropt.r_values = diag.r_values;
  if (std::find(ropt.r_values.begin(), ropt.r_values.end(), diag.r) == ropt.r_values.end())
    ropt.r_values.push_back(diag.r);
  const StepRecorder recorder(g, ropt);

  SimulationResult result;
  RunHistory& h = result.history;
  for (const auto& c : recorder.columns())
    if (c != "t") h.add_column(c);
  std::optional<DuhamelTracker> duhamel;
  if (diag.duhamel) {
    DyadicPartition lp = DyadicPartition::build(g);
    h.add_column("F_Linf");
    for (int q = -1; q <= lp.last_shell(); ++q) h.add_column("F_shell_" + std::to_string(q));
    h.add_column("duhamel_residual");
  }
  for (const auto& [k, v] : config.echo()) h.metadata()[k] = v;

  FlowState flow = FlowState::from_vorticity(initial.omega, initial.t);
  if (diag.duhamel) duhamel.emplace(flow.u, DyadicPartition::build(g));
  FokkerPlanckSolver fp(g, config.manifold, params);
  VelocityRingBuffer window(params.delta, config.run.dt, config.run.window);
  VectorField2D u_bar = window.push(flow.u, flow.t);
  ParticleDensity f = std::move(initial.f);
  StressField sigma = total_sigma(f, coeffs, params);
  const bool want_n = diag.enabled("n-evolution");

  const auto record = [&](std::size_t step) {
    auto row = recorder.measure(flow.t, flow.u, flow.omega, sigma, u_bar, &f);
    if (duhamel) {
      row["F_Linf"] = duhamel->F_sup();
      const auto blocks = duhamel->F_block_sup();
      for (std::size_t b = 0; b < blocks.size(); ++b)
        row["F_shell_" + std::to_string(static_cast<int>(b) - 1)] = blocks[b];
      row["duhamel_residual"] = duhamel->residual(flow.u);
    }
    for (const auto& [k, v] : row)
      if (!std::isfinite(v))
        throw Error(ErrorKind::NonFiniteField, "diagnostic " + k + " is non-finite at t = " + format_double(flow.t));
    h.append(row);
    if (step % config.run.snapshot_stride == 0) {
      FieldSnapshot snap{step, flow.t, flow.omega, flow.u, u_bar, sigma, std::nullopt};
      if (config.run.density_snapshots) snap.f = f;
      h.snapshots().push_back(std::move(snap));
      if (want_n) {
        const NEvolutionReport r = n_evolution_residual(f, u_bar, params, 1.0 / params.delta);
        result.n_evolution.push_back({flow.t, r.identity_residual, r.fitted_c, r.c_I, r.c_II, r.c_III, r.c_IV,
                                      r.max_material_N, r.finite});
      }
    }
  };

  const auto steps = static_cast<std::size_t>(std::max<long long>(1, std::llround(config.run.T / config.run.dt)));
  const double dt = config.run.dt;
  try {
    record(0);
    for (std::size_t n = 0; n < steps; ++n) {
      flow = nse_step(flow, sigma, dt, config.run.cfl_safety);
      u_bar = window.push(flow.u, flow.t);
      f = fp.step(f, u_bar, dt);
      StressField next = total_sigma(f, coeffs, params);
      if (!next.all_finite())
        throw Error(ErrorKind::NonFiniteField, "stress became non-finite at t = " + format_double(flow.t));
      if (duhamel) duhamel->advance(dt, sigma, flow.u);
      sigma = std::move(next);
      result.steps = n + 1;
      record(n + 1);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NonFiniteField)
      result.status = RunStatus::NonFinite;
    else if (e.kind() == ErrorKind::CflViolation)
      result.status = RunStatus::CflViolation;
    else
      throw;
    result.message = e.what();
  }
  if (!h.snapshots().empty() && h.snapshots().back().step != result.steps && result.status == RunStatus::Completed) {
    FieldSnapshot snap{result.steps, flow.t, flow.omega, flow.u, u_bar, sigma, std::nullopt};
    if (config.run.density_snapshots) snap.f = f;
    h.snapshots().push_back(std::move(snap));
  }
  h.metadata()["status"] = result.status == RunStatus::Completed    ? "completed"
                           : result.status == RunStatus::NonFinite ? "non-finite"
                                                                   : "cfl-violation";
  h.metadata()["steps"] = std::to_string(result.steps);
  if (!result.message.empty()) h.metadata()["message"] = result.message;

  result.final_state.t = flow.t;
  result.final_state.delta = params.delta;
  result.final_state.b = params.b;
  result.final_state.tau = params.tau;
  result.final_state.nu = params.nu;
  result.final_state.omega = flow.omega;
  result.final_state.f = std::move(f);
  result.final_state.sigma = std::move(sigma);
  return result;
}

// --- reports -----------------------------------------------------------------------

ReportSet generate_reports(const RunHistory& h, const DiagnosticsConfig& diag) {
  ReportSet out;
  if (h.empty()) return out;
  const auto has = [&](std::initializer_list<std::string> cols) {
    return std::all_of(cols.begin(), cols.end(), [&](const std::string& c) { return h.has_column(c); });
  };
  if (diag.enabled("energy") && has({"u_L2", "grad_u_L2", "sigma_L2"})) out.energy = energy_balance(h);
  std::vector<double> rs = diag.r_values;
  if (std::find(rs.begin(), rs.end(), diag.r) == rs.end()) rs.push_back(diag.r);
  for (double r : rs) {
    if (diag.enabled("vorticity") && has({lebesgue_column("omega", r), lebesgue_column("div_sigma", r)}))
      out.vorticity.emplace_back(r, vorticity_lr_check(h, r));
    if (!(r > 2.0) || std::isinf(r) || !h.has_column(lebesgue_column("grad2_ubar", r))) continue;
    if (diag.enabled("log-bounds")) out.log_bounds.push_back(log_bounds_report(h, r));
    if (diag.enabled("amplification")) out.amplification.push_back(amplification_report(h, r, diag.epsilon));
  }
  if (diag.enabled("gronwall") && h.has_column(lebesgue_column("grad2_ubar", diag.r))) {
    out.budgets = compute_budgets(h, diag.r);
    out.gronwall = gronwall_tracker(*out.budgets);
  }
  return out;
}

std::vector<InequalityRow> ReportSet::inequality_rows() const {
  std::vector<InequalityRow> rows;
  if (energy) {
    rows.push_back({"energy", energy->lhs, energy->rhs});
    rows.push_back({"energy_split", energy->split_lhs, energy->rhs});
  }
  bool lap = false;
  for (const auto& [r, v] : vorticity) {
    rows.push_back({"vorticity_" + fmt_r(r), v.lhs, v.rhs});
    if (!lap) rows.push_back({"laplacian", v.lap_lhs, v.lap_rhs});
    lap = true;
  }
  for (const auto& l : log_bounds)
    for (const auto& row : l.rows) rows.push_back({row.name + "_" + fmt_r(l.r), row.lhs, row.rhs});
  for (const auto& a : amplification) {
    rows.push_back({"amplification_" + fmt_r(a.r), a.lhs, a.rhs});
    rows.push_back({"amplification_opt_" + fmt_r(a.r), a.lhs, a.rhs_opt});
  }
  if (gronwall && budgets && !budgets->B.empty())
    rows.push_back({"closure_loglog", to_loglog(budgets->B.back()), gronwall->loglog_y.back()});
  return rows;
}

std::map<std::string, double> ReportSet::constants() const {
  std::map<std::string, double> c;
  if (energy) {
    c["energy_margin"] = energy->margin;
    c["energy_split_margin"] = energy->split_margin;
  }
  for (const auto& [r, v] : vorticity) c["vorticity_ratio_" + fmt_r(r)] = v.ratio();
  for (const auto& l : log_bounds) {
    c["identity_residual_" + fmt_r(l.r)] = l.identity_residual;
    for (const auto& row : l.rows) c["ratio_" + row.name + "_" + fmt_r(l.r)] = row.ratio();
  }
  for (const auto& a : amplification) {
    const std::string s = "_" + fmt_r(a.r);
    c["amplification_ratio" + s] = a.ratio();
    c["epsilon_opt" + s] = a.epsilon_opt;
    c["M_formula" + s] = a.M_formula;
    c["M_crossover" + s] = a.M_crossover;
    if (a.has_decomposition) c["decomposition_residual" + s] = a.decomposition_residual;
  }
  if (budgets) {
    const BudgetReport& b = *budgets;
    c["K0"] = b.K0;
    c["E1"] = b.E1;
    c["E2"] = b.E2;
    c["R1"] = b.R1;
    c["Omega_r"] = b.Omega_r;
    c["Omega_2"] = b.Omega_2;
    c["B_r_1"] = b.B_r_1;
    c["K_inf_1"] = b.K_inf_1;
    c["K_2_1"] = b.K_2_1;
    c["dB_consistency"] = b.dB_consistency;
  }
  if (gronwall) {
    c["C2"] = gronwall->C2;
    c["c_integrated"] = gronwall->c_integrated;
    c["closure_max_ratio"] = gronwall->max_ratio;
    c["closure_dominated"] = gronwall->dominated ? 1.0 : 0.0;
  }
  if (!n_evolution.empty()) {
    double res = 0.0, fc = 0.0, cI = 0.0, cII = 0.0, cIII = 0.0, cIV = 0.0;
    bool fin = true;
    for (const auto& s : n_evolution) {
      res = std::max(res, s.identity_residual);
      fc = std::max(fc, s.fitted_c);
      cI = std::max(cI, s.c_I);
      cII = std::max(cII, s.c_II);
      cIII = std::max(cIII, s.c_III);
      cIV = std::max(cIV, s.c_IV);
      fin = fin && s.finite;
    }
    c["n_identity_residual"] = res;
    c["n_fitted_c"] = fc;
    c["n_c_I"] = cI;
    c["n_c_II"] = cII;
    c["n_c_III"] = cIII;
    c["n_c_IV"] = cIV;
    c["n_finite"] = fin ? 1.0 : 0.0;
  }
  return c;
}

}  // namespace mmf
