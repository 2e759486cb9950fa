#include <cmath>
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "comcheck/cli/artifacts.hpp"
#include "comcheck/cli/config.hpp"
#include "comcheck/cli/runner.hpp"

using namespace comcheck;
using namespace comcheck::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("comcheck_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string minimal_config(const fs::path& out, const std::string& extra = "") {
  return "schema_version = 1\n"
         "[system]\nparticles = 2\nmodes = 1\n"
         "[grid]\nlength = 12\npoints = 121\n"
         "[hamiltonian]\nomega = 1\ncoupling = 0\n"
         "[initial]\nkind = relax\ndtau = 2e-3\nenergy_tolerance = 1e-12\n" +
         extra + "[output]\ndirectory = " + out.string() + "\n";
}

RunConfig parse(const std::string& text) { return parse_config(text, "test.ini"); }

}  // namespace

TEST_CASE("config rejects unknown keys by path") {
  const std::string text = minimal_config("out");
  CHECK_NOTHROW(parse(text));
  try {
    std::string bad = text;
    bad.insert(bad.find("coupling = 0"), "omega_final = 0\n");
    parse(bad);
    FAIL("accepted an unknown key");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("omega_final") != std::string::npos);
  }
  CHECK_THROWS_AS(parse(text + "[bogus]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse(text + "[grid]\ncenter = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[system]\nparticles = 2\n"), ConfigError);
  std::string wrong = text;
  wrong.replace(wrong.find("= 1\n"), 4, "= 9\n");
  CHECK_THROWS_AS(parse(wrong), ConfigError);
  CHECK_THROWS_AS(parse(minimal_config("out", "width = abc\n")), ConfigError);
}

TEST_CASE("config round-trips through render") {
  const RunConfig a = parse(minimal_config("out", "relax_modes = 1\n"));
  const RunConfig b = parse(render_config(a));
  CHECK(b.particles == a.particles);
  CHECK(b.points == a.points);
  CHECK(b.relax.dtau == a.relax.dtau);
  CHECK(b.output_dir == a.output_dir);
}

TEST_CASE("numbers are written with 17 significant digits") {
  for (double v : {0.1, 1.0 / 3.0, -1165.333385, 6.02e-23}) {
    const std::string s = format_number(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("crc32 check value") { CHECK(crc32_hex("123456789") == "cbf43926"); }

TEST_CASE("artifact directories appear atomically") {
  const fs::path target = scratch("atomic");
  {
    ArtifactDir dir(target);
    dir.write("a.csv", "x\n1\n");
    CHECK_FALSE(fs::exists(target));
  }
  CHECK_FALSE(fs::exists(target));
  for (const auto& e : fs::directory_iterator(target.parent_path()))
    CHECK(e.path().filename().string().find("atomic") == std::string::npos);

  ArtifactDir dir(target);
  dir.write("a.csv", "x\n1\n");
  dir.commit(json{{"k", 1}});
  CHECK(fs::exists(target / "a.csv"));
  CHECK(verify_artifacts(target).empty());
  std::ofstream(target / "a.csv") << "x\n2\n";
  CHECK_FALSE(verify_artifacts(target).empty());

  const fs::path single = target.parent_path() / "single.json";
  write_file_atomic(single, "1\n");
  write_file_atomic(single, "2\n");
  CHECK(read_file(single) == "2\n");
  for (const auto& e : fs::directory_iterator(target.parent_path()))
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
}

TEST_CASE("minimal non-interacting run") {
  const fs::path out = scratch("minimal");
  const RunConfig c = parse(minimal_config(out, "[propagation]\nt_final = 0.2\ndt = 1e-3\nrecord_every = 50\n"));
  std::ostringstream log;
  const RunOutcome r = run_config(c, log);
  CHECK(r.exit_code == kExitOk);
  REQUIRE(r.ground);
  CHECK(r.ground->energy == doctest::Approx(1.0).epsilon(1e-5));

  const json s = json::parse(read_file(out / "summary.json"));
  CHECK(s["status"] == "ok");
  CHECK(s["code_version"] == code_version());
  CHECK(s["config"]["crc32"] == crc32_hex(c.source));
  CHECK(s.contains("wall_time_s"));
  CHECK(s["files"].contains("timeseries.csv"));
  CHECK(verify_artifacts(out).empty());

  const std::string ts = read_file(out / "timeseries.csv");
  CHECK(ts.rfind("t,energy,sigma_R2,sigma_n2,occ_1\n", 0) == 0);
  const TimeSeries back = read_timeseries(out);
  REQUIRE(back.size() == 5);
  CHECK(back.energy[4] == r.series->energy[4]);
  CHECK(fs::exists(out / "occupancy.csv"));

  CHECK(compare_command(out, out, 0.05, out.parent_path() / "self.json", log) == kExitOk);
  const json rep = json::parse(read_file(out.parent_path() / "self.json"));
  CHECK(rep["metric"] == 0.0);
  CHECK(rep["a_artifacts_ok"] == true);
}

TEST_CASE("compare rejects series on different time stamps") {
  const fs::path a = scratch("cmp_a");
  const fs::path b = scratch("cmp_b");
  std::ostringstream log;
  run_config(parse(minimal_config(a, "[propagation]\nt_final = 0.2\nrecord_every = 50\n")), log);
  run_config(parse(minimal_config(b, "[propagation]\nt_final = 0.2\nrecord_every = 40\n")), log);
  CHECK(compare_command(a, b, 0.05, {}, log) == kExitSchema);
}

TEST_CASE("ballistic reference after trap release") {
  const fs::path out = scratch("release");
  std::string text =
      minimal_config(out, "[propagation]\nt_final = 1\nrecord_every = 100\n[diagnostics]\ncom_reference = ballistic\n");
  text.insert(text.find("coupling = 0"), "omega_after = 0\n");
  const RunConfig c = parse(text);
  std::ostringstream log;
  const RunOutcome r = run_config(c, log);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.summary["headline_verdict"] == "converged");
}

TEST_CASE("trap frequency quench follows the breathing law") {
  const fs::path out = scratch("breathing");
  std::string text =
      minimal_config(out, "[propagation]\nt_final = 2\nrecord_every = 100\n[diagnostics]\ncom_reference = ballistic\n");
  text.insert(text.find("coupling = 0"), "omega_after = 2\n");
  std::ostringstream log;
  const RunOutcome r = run_config(parse(text), log);
  CHECK(r.exit_code == kExitOk);
  REQUIRE(r.series);
  CHECK(r.series->times[5] == doctest::Approx(0.5));
  CHECK(r.series->sigma_r2[5] == doctest::Approx(0.25 * (1.0 - 0.75 * std::pow(std::sin(1.0), 2))).epsilon(1e-4));
}

TEST_CASE("exit codes") {
  std::ostringstream log;
  SUBCASE("schema error") {
    const fs::path cfg = scratch("bad.ini");
    std::string text = minimal_config(scratch("bad"));
    text.insert(text.find("coupling = 0"), "omega_final = 0\n");
    std::ofstream(cfg) << text;
    CHECK(run_command(cfg, log) == kExitSchema);
  }
  SUBCASE("configuration cap from the environment") {
    const fs::path cfg = scratch("cap.ini");
    std::string text = minimal_config(scratch("cap"));
    text.replace(text.find("modes = 1"), 9, "modes = 3");
    std::ofstream(cfg) << text;
    ::setenv("COMCHECK_MAX_BASIS", "4", 1);
    CHECK(max_basis() == 4);
    CHECK(run_command(cfg, log) == kExitSchema);
    ::setenv("COMCHECK_MAX_BASIS", "zero", 1);
    CHECK_THROWS_AS(max_basis(), ConfigError);
    ::unsetenv("COMCHECK_MAX_BASIS");
  }
  SUBCASE("physics abort dumps the state") {
    const fs::path out = scratch("abort");
    const fs::path cfg = scratch("abort.ini");
    std::ofstream(cfg) << "schema_version = 1\n[system]\nparticles = 1\nmodes = 1\nunits = untrapped\n"
                          "[grid]\nlength = 8\npoints = 81\n[hamiltonian]\nomega = 0\ncoupling = 0\n"
                          "[initial]\nkind = product\nshape = gaussian\nwidth = 0.5\n"
                          "[propagation]\nt_final = 5\ndt = 1e-3\n[output]\ndirectory = "
                       << out.string() << "\n";
    CHECK(run_command(cfg, log) == kExitPhysicsAbort);
    CHECK(fs::exists(out / "abort_state.json"));
    CHECK(fs::exists(out / "timeseries.csv"));
    CHECK(json::parse(read_file(out / "summary.json"))["status"] == "physics_abort");
  }
  SUBCASE("unconverged diagnostic") {
    const fs::path out = scratch("unconverged");
    const fs::path cfg = scratch("unconverged.ini");
    std::ofstream(cfg) << "schema_version = 1\n[system]\nparticles = 2\nmodes = 1\n"
                          "[grid]\nlength = 14\npoints = 281\n[hamiltonian]\nomega = 1\nomega_after = 0\n"
                          "coupling = -3\n[initial]\nkind = relax\ndtau = 1e-3\nenergy_tolerance = 1e-10\n"
                          "[propagation]\nt_final = 0.1\ndt = 1e-3\nrecord_every = 50\n"
                          "[diagnostics]\ncom_reference = ballistic\n[output]\ndirectory = "
                       << out.string() << "\n";
    CHECK(run_command(cfg, log) == kExitDiagnosticFailure);
    CHECK(json::parse(read_file(out / "summary.json"))["headline_verdict"] == "unconverged");
  }
}

TEST_CASE("scan runs every match and reports the worst exit code") {
  const fs::path dir = scratch("scan");
  fs::create_directories(dir);
  std::ofstream(dir / "a.ini") << minimal_config(dir / "out_a");
  std::string bad = minimal_config(dir / "out_b");
  bad.insert(bad.find("points"), "bogus = 1\n");
  std::ofstream(dir / "b.ini") << bad;
  std::ostringstream log;
  CHECK(scan_command((dir / "*.ini").string(), log) == kExitSchema);
  CHECK(fs::exists(dir / "out_a" / "summary.json"));
  CHECK(scan_command((dir / "none*.ini").string(), log) == kExitSchema);
}
