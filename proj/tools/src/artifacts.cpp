#include "comcheck/cli/artifacts.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/crc.hpp>

namespace comcheck::cli {

namespace fs = std::filesystem;

std::uint32_t crc32(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::string crc32_hex(const std::string& bytes) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", crc32(bytes));
  return buf;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path temp = path;
  temp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + temp.string());
  }
  fs::rename(temp, path);
}

ArtifactDir::ArtifactDir(fs::path target) : target_(std::move(target)) {
  if (target_.filename().empty()) target_ = target_.parent_path();
  const fs::path parent = target_.parent_path().empty() ? fs::path(".") : target_.parent_path();
  fs::create_directories(parent);
  temp_ = parent / ("." + target_.filename().string() + ".tmp-" + std::to_string(::getpid()));
  fs::remove_all(temp_);
  fs::create_directories(temp_);
}

ArtifactDir::~ArtifactDir() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(temp_, ec);
  }
}

void ArtifactDir::write(const std::string& name, const std::string& content) {
  const fs::path p = temp_ / name;
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
  checksums_[name] = crc32_hex(content);
}

void ArtifactDir::commit(json summary) {
  json files = json::object();
  for (const auto& [name, sum] : checksums_) files[name] = {{"crc32", sum}};
  summary["files"] = files;
  {
    std::ofstream out(temp_ / "summary.json");
    out << summary.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write summary.json");
  }
  fs::path old;
  if (fs::exists(target_)) {
    old = target_;
    old += ".old-" + std::to_string(::getpid());
    fs::remove_all(old);
    fs::rename(target_, old);
  }
  fs::rename(temp_, target_);
  committed_ = true;
  if (!old.empty()) fs::remove_all(old);
}

std::string timeseries_csv(const TimeSeries& ts) {
  std::string out = "t,energy,sigma_R2,sigma_n2";
  for (int k = 1; k <= ts.modes; ++k) out += ",occ_" + std::to_string(k);
  out += "\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out += format_number(ts.times[i]) + "," + format_number(ts.energy[i]) + "," + format_number(ts.sigma_r2[i]) + "," +
           format_number(ts.sigma_n2[i]);
    for (double n : ts.occupations[i]) out += "," + format_number(n);
    out += "\n";
  }
  return out;
}

std::string occupancy_csv(const TimeSeries& ts) {
  std::string out = "t";
  for (int k = 1; k <= ts.modes; ++k) out += ",frac_" + std::to_string(k);
  out += "\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out += format_number(ts.times[i]);
    for (double n : ts.occupations[i]) out += "," + format_number(n / ts.particles);
    out += "\n";
  }
  return out;
}

std::string density_csv(const TimeSeries& ts, const Grid& grid) {
  std::string out = "t,x,density\n";
  for (std::size_t i = 0; i < ts.densities.size(); ++i) {
    const std::string t = format_number(ts.times[i]);
    for (int j = 0; j < grid.size(); ++j) {
      out += t + "," + format_number(grid.x(j)) + "," + format_number(ts.densities[i][j]) + "\n";
    }
  }
  return out;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
  }
  throw std::invalid_argument("CSV has no column '" + name + "'");
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty CSV");
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) t.header.push_back(cell);
  }
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": not a number: '" + cell + "'");
      }
    }
    if (row.size() != t.header.size()) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": expected " +
                                  std::to_string(t.header.size()) + " columns");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string write_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) out += (c ? "," : "") + table.header[c];
  out += "\n";
  for (const auto& r : table.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + format_number(r[c]);
    out += "\n";
  }
  return out;
}

TimeSeries read_timeseries(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "timeseries.csv" : path;
  const CsvTable t = read_csv(file);
  TimeSeries ts;
  ts.times = t.column("t");
  ts.sigma_r2 = t.column("sigma_R2");
  ts.energy = t.column("energy");
  ts.sigma_n2 = t.column("sigma_n2");
  int m = 0;
  for (const auto& h : t.header)
    if (h.rfind("occ_", 0) == 0) ++m;
  ts.modes = m;
  for (const auto& row : t.rows) {
    std::vector<double> occ(row.end() - m, row.end());
    ts.occupations.push_back(std::move(occ));
  }
  double total = 0.0;
  if (!ts.occupations.empty())
    for (double v : ts.occupations.front()) total += v;
  ts.particles = static_cast<int>(std::lround(total));
  return ts;
}

json state_to_json(const MctdhbState& state) {
  json j;
  j["format"] = "comcheck-state";
  j["version"] = 1;
  j["grid"] = {{"length", state.grid.length()}, {"points", state.grid.size()}, {"center", state.grid.center()}};
  j["particles"] = state.particles();
  j["modes"] = state.modes();
  j["time"] = state.time;
  json orb = json::array();
  for (int k = 0; k < state.modes(); ++k) {
    std::vector<double> re(state.grid.size()), im(state.grid.size());
    for (int i = 0; i < state.grid.size(); ++i) {
      re[i] = state.orbitals(i, k).real();
      im[i] = state.orbitals(i, k).imag();
    }
    orb.push_back({{"re", re}, {"im", im}});
  }
  j["orbitals"] = orb;
  std::vector<double> cre(state.coefficients.size()), cim(state.coefficients.size());
  for (Eigen::Index i = 0; i < state.coefficients.size(); ++i) {
    cre[i] = state.coefficients[i].real();
    cim[i] = state.coefficients[i].imag();
  }
  j["coefficients"] = {{"re", cre}, {"im", cim}};
  return j;
}

MctdhbState state_from_json(const json& j, std::size_t max_configs) {
  if (j.value("format", "") != "comcheck-state") throw std::invalid_argument("not a comcheck state file");
  const Grid grid(j.at("grid").at("length").get<double>(), j.at("grid").at("points").get<int>(),
                  j.at("grid").at("center").get<double>());
  const int n = j.at("particles").get<int>();
  const int m = j.at("modes").get<int>();
  MctdhbState s{grid, enumerate_configs(n, m, max_configs), {}, {}, j.at("time").get<double>()};
  s.orbitals.resize(grid.size(), m);
  const auto& orb = j.at("orbitals");
  if (static_cast<int>(orb.size()) != m) throw std::invalid_argument("state file: orbital count mismatch");
  for (int k = 0; k < m; ++k) {
    const auto re = orb[k].at("re").get<std::vector<double>>();
    const auto im = orb[k].at("im").get<std::vector<double>>();
    if (static_cast<int>(re.size()) != grid.size() || re.size() != im.size()) {
      throw std::invalid_argument("state file: orbital length mismatch");
    }
    for (int i = 0; i < grid.size(); ++i) s.orbitals(i, k) = cplx(re[i], im[i]);
  }
  const auto cre = j.at("coefficients").at("re").get<std::vector<double>>();
  const auto cim = j.at("coefficients").at("im").get<std::vector<double>>();
  if (cre.size() != s.basis->size() || cim.size() != cre.size()) {
    throw std::invalid_argument("state file: coefficient count mismatch");
  }
  s.coefficients.resize(static_cast<Eigen::Index>(cre.size()));
  for (std::size_t i = 0; i < cre.size(); ++i) s.coefficients[static_cast<Eigen::Index>(i)] = cplx(cre[i], cim[i]);
  return s;
}

MctdhbState load_state(const fs::path& path, std::size_t max_configs) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open state file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return state_from_json(j, max_configs);
}

json report_to_json(const DiagnosticReport& r, bool with_detail) {
  json j;
  j["test"] = r.test;
  j["verdict"] = to_string(r.verdict);
  j["metric"] = std::isnan(r.metric) ? json(nullptr) : json(r.metric);
  j["threshold"] = r.threshold;
  j["advisory"] = r.advisory;
  if (!r.note.empty()) j["note"] = r.note;
  j["warnings"] = r.warnings;
  if (with_detail) {
    j["columns"] = r.columns;
    j["detail"] = r.detail;
  }
  return j;
}

std::vector<std::string> verify_artifacts(const fs::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) return {"summary.json"};
  json summary;
  in >> summary;
  std::vector<std::string> bad;
  const json files = summary.value("files", json::object());
  for (const auto& [name, entry] : files.items()) {
    std::ifstream f(dir / name, std::ios::binary);
    if (!f) {
      bad.push_back(name);
      continue;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    if (crc32_hex(ss.str()) != entry.value("crc32", "")) bad.push_back(name);
  }
  return bad;
}

}  // namespace comcheck::cli
