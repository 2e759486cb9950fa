#include "comcheck/cli/runner.hpp"

#include <glob.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "comcheck/exact2.hpp"
#include "comcheck/observables.hpp"

#ifndef COMCHECK_VERSION
#define COMCHECK_VERSION "unknown"
#endif

namespace comcheck::cli {

namespace fs = std::filesystem;

std::size_t max_basis() {
  const char* env = std::getenv("COMCHECK_MAX_BASIS");
  if (!env || !*env) return FockBasis::kDefaultMaxConfigs;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) {
    throw ConfigError(std::string("COMCHECK_MAX_BASIS: expected a positive integer, got '") + env + "'");
  }
  return static_cast<std::size_t>(v);
}

std::string code_version() { return COMCHECK_VERSION; }

namespace {

std::string history_csv(const GroundStateResult& g) {
  std::string out = "iteration,energy,delta\n";
  for (const auto& h : g.history) {
    out += std::to_string(h.iteration) + "," + format_number(h.energy) + "," + format_number(h.delta) + "\n";
  }
  return out;
}

std::string profile_csv(const MctdhbState& s) {
  const RealField rho = density(s);
  std::string out = "x,density\n";
  for (int i = 0; i < s.grid.size(); ++i) out += format_number(s.grid.x(i)) + "," + format_number(rho[i]) + "\n";
  return out;
}

json measurement_json(const Measurement& m, int particles) {
  std::vector<double> frac;
  for (double n : m.occupations) frac.push_back(n / particles);
  return {{"energy", m.energy},
          {"sigma_R2", m.sigma_r2},
          {"sigma_n2", m.sigma_n2},
          {"occupations", m.occupations},
          {"occupation_fractions", frac}};
}

MctdhbState prepare_initial(const RunConfig& c, const HamiltonianSpec& spec, const Grid& grid,
                            std::optional<GroundStateResult>& ground, std::ostream& log) {
  const std::size_t cap = max_basis();
  InitialShape shape;
  shape.kind = c.shape;
  shape.width = c.width;
  switch (c.initial) {
    case InitialKind::kProduct:
      return init_product_state(shape, c.particles, c.modes, grid, cap);
    case InitialKind::kLoad: {
      MctdhbState s = load_state(c.load_file, cap);
      if (s.particles() != c.particles || s.modes() != c.modes) {
        throw ConfigError(c.origin + ": key 'initial.file': state has N=" + std::to_string(s.particles()) +
                          ", M=" + std::to_string(s.modes()) + " but the config asks for N=" +
                          std::to_string(c.particles) + ", M=" + std::to_string(c.modes));
      }
      if (!(s.grid == grid)) throw ConfigError(c.origin + ": key 'initial.file': state grid differs from [grid]");
      s.validate(1e-6);
      s.time = 0.0;
      return s;
    }
    case InitialKind::kRelax: {
      const int m_relax = c.relax_modes > 0 ? c.relax_modes : c.modes;
      const MctdhbState seed = init_product_state(shape, c.particles, m_relax, grid, cap);
      log << "relax: N=" << c.particles << " M=" << m_relax << " dtau=" << c.relax.dtau << std::endl;
      ground = relax(seed, spec, c.relax);
      log << "relax: E=" << format_number(ground->energy) << " after " << ground->iterations << " iterations"
          << std::endl;
      MctdhbState s = ground->state;
      if (m_relax < c.modes) s = pad_modes(s, c.modes, c.width);
      s.time = 0.0;
      return s;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

RunOutcome run_config(const RunConfig& c, std::ostream& log) {
  const auto wall_start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.output_dir = c.output_dir;
  const Grid grid = c.grid();
  const HamiltonianSpec spec = c.hamiltonian();
  spec.validate();

  ArtifactDir dir(c.output_dir);
  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["origin"] = c.origin;
  summary["config"] = {{"crc32", crc32_hex(c.source)}};
  summary["code_version"] = code_version();
  summary["system"] = {{"particles", c.particles}, {"modes", c.modes}, {"units", to_string(c.units)}};
  dir.write("config.ini", c.source);

  auto finish = [&](const std::string& status) {
    summary["status"] = status;
    summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    out.summary = summary;
    dir.commit(summary);
    out.summary["files"] = dir.checksums();
  };
  auto abort_run = [&](const std::string& what, const MctdhbState* state, const TimeSeries* partial) {
    log << "physics abort: " << what << std::endl;
    out.abort_reason = what;
    summary["abort"] = what;
    if (state) dir.write("abort_state.json", state_to_json(*state).dump() + "\n");
    if (partial && partial->size() > 0) dir.write("timeseries.csv", timeseries_csv(*partial));
    out.exit_code = kExitPhysicsAbort;
    finish("physics_abort");
    return out;
  };

  MctdhbState initial;
  try {
    initial = prepare_initial(c, spec, grid, out.ground, log);
  } catch (const RelaxationError& e) {
    return abort_run(e.what(), &e.partial().state, nullptr);
  } catch (const StepRejectedError& e) {
    return abort_run(e.what(), nullptr, nullptr);
  }
  out.initial = initial;

  const double t_pre = HamiltonianSpec::kBeforeStart;
  const Measurement m0 = measure(initial, spec, t_pre);
  summary["initial_state"] = measurement_json(m0, c.particles);
  dir.write("initial_density.csv", profile_csv(initial));
  if (out.ground) {
    summary["relaxation"] = {{"energy", out.ground->energy},
                             {"iterations", out.ground->iterations},
                             {"regularized_steps", out.ground->regularized_steps},
                             {"reduced_steps", out.ground->reduced_steps}};
    dir.write("relax_history.csv", history_csv(*out.ground));
    dir.write("ground_state.json", state_to_json(out.ground->state).dump() + "\n");
  }
  if (c.width_bounds) {
    const double sol = soliton_variance(c.particles, spec.coupling_at(t_pre));
    out.reports.push_back(width_bounds_check(m0.sigma_r2, m0.sigma_n2, sol, c.width_slack));
  }
  double final_energy = m0.energy;

  if (c.t_final > 0.0) {
    PropagateOptions po;
    po.t_final = c.t_final;
    po.dt = c.dt;
    po.record_every = c.record_every;
    po.record_density = c.record_density;
    po.edge_threshold = c.edge_threshold;
    std::size_t next_report = 1;
    const std::size_t total_records = static_cast<std::size_t>(std::ceil(c.t_final / c.dt / c.record_every)) + 1;
    po.on_record = [&](const TimeSeries& ts) {
      if (ts.size() * 10 >= next_report * total_records) {
        log << "propagate: t=" << format_number(ts.times.back()) << " sigma_R2=" << format_number(ts.sigma_r2.back())
            << std::endl;
        ++next_report;
      }
    };
    log << "propagate: t_final=" << c.t_final << " dt=" << c.dt << std::endl;
    try {
      PropagationResult pr = propagate(initial, spec, po);
      out.series = pr.series;
      summary["propagation"] = {{"records", pr.series.size()}, {"regularized_steps", pr.regularized_steps}};
      dir.write("final_state.json", state_to_json(pr.final_state).dump() + "\n");
    } catch (const PropagationError& e) {
      return abort_run(e.what(), &e.state(), &e.partial());
    }
    final_energy = out.series->energy.back();
    dir.write("timeseries.csv", timeseries_csv(*out.series));
    dir.write("occupancy.csv", occupancy_csv(*out.series));
    if (c.record_density) dir.write("densities.csv", density_csv(*out.series, grid));

    if (c.com_reference == ComReference::kBallistic) {
      const double omega_final = c.omega_after.value_or(c.omega);
      out.reports.push_back(com_convergence_test(
          *out.series, harmonic_com_reference(out.series->times, c.particles, c.mass, c.omega, omega_final),
          c.com_tolerance));
    } else if (c.com_reference == ComReference::kTwin) {
      RunConfig twin_cfg = c;
      twin_cfg.coupling_after = 0.0;
      const HamiltonianSpec twin_spec = twin_cfg.hamiltonian();
      MctdhbState twin_init = initial;
      if (c.twin_length > 0.0 || c.twin_points > 0) {
        const Grid tg(c.twin_length > 0.0 ? c.twin_length : c.length, c.twin_points > 0 ? c.twin_points : c.points,
                      c.center);
        InitialShape shape;
        shape.kind = c.shape;
        shape.width = c.width;
        twin_init = init_product_state(shape, c.particles, c.modes, tg, max_basis());
      }
      PropagateOptions tpo = po;
      tpo.on_record = nullptr;
      tpo.record_density = false;
      log << "propagate: g = 0 twin" << std::endl;
      try {
        out.twin = propagate(twin_init, twin_spec, tpo).series;
      } catch (const PropagationError& e) {
        return abort_run(std::string("g = 0 twin: ") + e.what(), &e.state(), &e.partial());
      }
      dir.write("twin_timeseries.csv", timeseries_csv(*out.twin));
      out.reports.push_back(com_convergence_test(*out.series, *out.twin, c.com_tolerance));
    }
    if (c.modes > 1) out.reports.push_back(occupancy_threshold_check(*out.series, c.occupancy_threshold));
  }
  summary["final_energy"] = final_energy;

  json reports = json::array();
  json detailed = json::array();
  bool failed = false;
  std::string headline = "inconclusive";
  for (const auto& r : out.reports) {
    reports.push_back(report_to_json(r));
    detailed.push_back(report_to_json(r, true));
    if (!r.advisory && r.verdict == Verdict::kUnconverged) failed = true;
    if (r.test == "com_convergence") headline = to_string(r.verdict);
    log << "diagnostic " << r.test << ": " << to_string(r.verdict) << " (metric " << format_number(r.metric) << ")"
        << (r.advisory ? " [advisory]" : "") << std::endl;
  }
  summary["diagnostics"] = reports;
  summary["headline_verdict"] = headline;
  if (!out.reports.empty()) dir.write("diagnostics.json", detailed.dump(2) + "\n");
  out.exit_code = failed ? kExitDiagnosticFailure : kExitOk;
  finish("ok");
  log << "wrote " << c.output_dir.string() << std::endl;
  return out;
}

int run_command(const fs::path& config_path, std::ostream& log) {
  try {
    const RunConfig c = load_config(config_path);
    return run_config(c, log).exit_code;
  } catch (const ConfigError& e) {
    log << "schema error: " << e.what() << std::endl;
    return kExitSchema;
  } catch (const ResourceLimitError& e) {
    log << "resource limit: " << e.what() << std::endl;
    return kExitSchema;
  }
}

int compare_command(const fs::path& a, const fs::path& b, double tol, const fs::path& report_path, std::ostream& log) {
  DiagnosticReport r;
  try {
    r = com_convergence_test(read_timeseries(a), read_timeseries(b), tol);
  } catch (const std::invalid_argument& e) {
    log << "compare: incompatible inputs: " << e.what() << std::endl;
    return kExitSchema;
  }
  json j = report_to_json(r, true);
  j["a"] = a.string();
  j["b"] = b.string();
  for (const auto& [name, p] : {std::pair{"a_artifacts_ok", a}, std::pair{"b_artifacts_ok", b}}) {
    if (fs::is_directory(p)) j[name] = verify_artifacts(p).empty();
  }
  if (!report_path.empty()) {
    if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
    write_file_atomic(report_path, j.dump(2) + "\n");
  }
  log << "compare: " << to_string(r.verdict) << " (max |ratio - 1| = " << format_number(r.metric) << ", tol "
      << format_number(tol) << ")" << std::endl;
  return r.verdict == Verdict::kUnconverged ? kExitDiagnosticFailure : kExitOk;
}

int scan_command(const std::string& pattern, std::ostream& log) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::string> paths;
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (paths.empty()) {
    log << "scan: no config matches '" << pattern << "'" << std::endl;
    return kExitSchema;
  }
  int worst = kExitOk;
  for (const auto& p : paths) {
    log << "scan: " << p << std::endl;
    const int code = run_command(p, log);
    log << "scan: " << p << " -> exit " << code << std::endl;
    worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace comcheck::cli
