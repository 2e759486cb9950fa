#include "comcheck/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace comcheck::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {"schema_version"}},
      {"system", {"particles", "modes", "units"}},
      {"grid", {"length", "points", "center"}},
      {"hamiltonian", {"mass", "omega", "omega_after", "coupling", "coupling_after"}},
      {"initial",
       {"kind", "shape", "width", "file", "dtau", "energy_tolerance", "max_iterations", "relax_modes",
        "allow_untrapped"}},
      {"propagation", {"t_final", "dt", "record_every", "record_density", "edge_threshold"}},
      {"diagnostics",
       {"com_reference", "com_tolerance", "occupancy_threshold", "width_bounds", "width_slack", "twin_length",
        "twin_points"}},
      {"output", {"directory"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Line of `key` inside `section` (1-based), 0 if not found.
int line_of(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  std::string current;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      if (key.empty() && current == section) return n;
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && current == section && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, const std::string& text, const std::string& origin)
      : tree_(tree), text_(text), origin_(origin) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    std::ostringstream msg;
    msg << origin_;
    const int line = line_of(text_, section, key);
    if (line > 0) msg << ":" << line;
    msg << ": ";
    if (!key.empty()) msg << "key '" << (section.empty() ? key : section + "." + key) << "': ";
    msg << what;
    throw ConfigError(msg.str());
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const pt::ptree* node = &tree_;
    if (!section.empty()) {
      auto it = tree_.find(section);
      if (it == tree_.not_found()) return std::nullopt;
      node = &it->second;
    }
    auto it = node->find(key);
    if (it == node->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  double number(const std::string& section, const std::string& key, std::optional<double> fallback) const {
    const auto v = raw(section, key);
    if (!v) {
      if (fallback) return *fallback;
      fail(section, key, "required");
    }
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      fail(section, key, "expected a number, got '" + *v + "'");
    }
  }

  std::optional<double> optional_number(const std::string& section, const std::string& key) const {
    if (!raw(section, key)) return std::nullopt;
    return number(section, key, std::nullopt);
  }

  long integer(const std::string& section, const std::string& key, std::optional<long> fallback) const {
    const auto v = raw(section, key);
    if (!v) {
      if (fallback) return *fallback;
      fail(section, key, "required");
    }
    try {
      std::size_t used = 0;
      const long i = std::stol(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return i;
    } catch (const std::exception&) {
      fail(section, key, "expected an integer, got '" + *v + "'");
    }
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(section, key, "expected true or false, got '" + *v + "'");
  }

  std::string word(const std::string& section, const std::string& key, const std::string& fallback,
                   const std::set<std::string>& allowed) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (!allowed.empty() && !allowed.count(*v)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(section, key, "expected one of {" + list + "}, got '" + *v + "'");
    }
    return *v;
  }

  void reject_unknown() const {
    const auto& s = schema();
    for (const auto& [name, node] : tree_) {
      if (node.empty()) {
        if (!s.at("").count(name)) fail("", name, "unknown key");
        continue;
      }
      auto sec = s.find(name);
      if (sec == s.end() || name.empty()) fail(name, "", "unknown section [" + name + "]");
      for (const auto& [key, child] : node) {
        if (!child.empty()) fail(name, key, "nested values are not allowed");
        if (!sec->second.count(key)) fail(name, key, "unknown key");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  const std::string& text_;
  const std::string& origin_;
};

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

}  // namespace

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::kRelax:
      return "relax";
    case InitialKind::kProduct:
      return "product";
    case InitialKind::kLoad:
      return "load";
  }
  return "relax";
}

std::string to_string(ComReference ref) {
  switch (ref) {
    case ComReference::kNone:
      return "none";
    case ComReference::kBallistic:
      return "ballistic";
    case ComReference::kTwin:
      return "twin";
  }
  return "none";
}

std::string to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::kSech:
      return "sech";
    case ShapeKind::kGaussian:
      return "gaussian";
    case ShapeKind::kCustom:
      return "custom";
  }
  return "gaussian";
}

HamiltonianSpec RunConfig::hamiltonian() const {
  HamiltonianSpec spec;
  spec.mass = mass;
  spec.units = units;
  spec.omega = omega_after ? Schedule::step_at_zero(omega, *omega_after) : Schedule(omega);
  spec.coupling = coupling_after ? Schedule::step_at_zero(coupling, *coupling_after) : Schedule(coupling);
  return spec;
}

RunConfig parse_config(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r(tree, text, origin);
  r.reject_unknown();

  const long version = r.integer("", "schema_version", std::nullopt);
  if (version != kSchemaVersion) {
    r.fail("", "schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                     std::to_string(kSchemaVersion) + ")");
  }

  RunConfig c;
  c.source = text;
  c.origin = origin;

  c.particles = static_cast<int>(r.integer("system", "particles", std::nullopt));
  if (c.particles < 1) r.fail("system", "particles", "must be >= 1");
  c.modes = static_cast<int>(r.integer("system", "modes", std::nullopt));
  if (c.modes < 1) r.fail("system", "modes", "must be >= 1");
  c.units = r.word("system", "units", "trapped", {"trapped", "untrapped"}) == "trapped" ? UnitSystem::kTrapped
                                                                                        : UnitSystem::kUntrapped;

  c.length = r.number("grid", "length", std::nullopt);
  if (!(c.length > 0.0)) r.fail("grid", "length", "must be positive");
  c.points = static_cast<int>(r.integer("grid", "points", std::nullopt));
  if (c.points < Grid::kMinPoints) r.fail("grid", "points", "must be >= 5");
  c.center = r.number("grid", "center", 0.0);

  c.mass = r.number("hamiltonian", "mass", 1.0);
  if (!(c.mass > 0.0)) r.fail("hamiltonian", "mass", "must be positive");
  c.omega = r.number("hamiltonian", "omega", c.units == UnitSystem::kTrapped ? 1.0 : 0.0);
  if (c.omega < 0.0) r.fail("hamiltonian", "omega", "must be >= 0");
  c.omega_after = r.optional_number("hamiltonian", "omega_after");
  if (c.omega_after && *c.omega_after < 0.0) r.fail("hamiltonian", "omega_after", "must be >= 0");
  c.coupling = r.number("hamiltonian", "coupling", std::nullopt);
  c.coupling_after = r.optional_number("hamiltonian", "coupling_after");

  const std::string kind = r.word("initial", "kind", "relax", {"relax", "product", "load"});
  c.initial = kind == "relax" ? InitialKind::kRelax : kind == "product" ? InitialKind::kProduct : InitialKind::kLoad;
  c.shape = r.word("initial", "shape", "gaussian", {"sech", "gaussian"}) == "sech" ? ShapeKind::kSech
                                                                                   : ShapeKind::kGaussian;
  c.width = r.number("initial", "width", 1.0);
  if (!(c.width > 0.0)) r.fail("initial", "width", "must be positive");
  if (auto f = r.raw("initial", "file")) {
    std::filesystem::path p(*f);
    c.load_file = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
  }
  if (c.initial == InitialKind::kLoad && c.load_file.empty()) r.fail("initial", "file", "required for kind = load");
  c.relax.dtau = r.number("initial", "dtau", 1e-3);
  if (!(c.relax.dtau > 0.0)) r.fail("initial", "dtau", "must be positive");
  c.relax.energy_tolerance = r.number("initial", "energy_tolerance", 1e-10);
  if (!(c.relax.energy_tolerance > 0.0)) r.fail("initial", "energy_tolerance", "must be positive");
  c.relax.max_iterations = r.integer("initial", "max_iterations", 400000);
  if (c.relax.max_iterations < 1) r.fail("initial", "max_iterations", "must be >= 1");
  c.relax.allow_untrapped = r.boolean("initial", "allow_untrapped", false);
  c.relax.history_stride = 100;
  c.relax_modes = static_cast<int>(r.integer("initial", "relax_modes", 0));
  if (c.relax_modes < 0 || c.relax_modes > c.modes) r.fail("initial", "relax_modes", "must be in [0, modes]");
  if (c.initial == InitialKind::kRelax && !c.relax.allow_untrapped && !(c.omega > 0.0)) {
    r.fail("hamiltonian", "omega", "relaxation needs omega > 0 (or initial.allow_untrapped = true)");
  }

  c.t_final = r.number("propagation", "t_final", 0.0);
  if (c.t_final < 0.0) r.fail("propagation", "t_final", "must be >= 0");
  c.dt = r.number("propagation", "dt", 1e-3);
  if (!(c.dt > 0.0)) r.fail("propagation", "dt", "must be positive");
  c.record_every = static_cast<int>(r.integer("propagation", "record_every", 10));
  if (c.record_every < 1) r.fail("propagation", "record_every", "must be >= 1");
  c.record_density = r.boolean("propagation", "record_density", false);
  c.edge_threshold = r.number("propagation", "edge_threshold", 1e-6);
  if (!(c.edge_threshold > 0.0)) r.fail("propagation", "edge_threshold", "must be positive");

  const std::string ref = r.word("diagnostics", "com_reference", "none", {"none", "ballistic", "twin"});
  c.com_reference = ref == "none" ? ComReference::kNone : ref == "ballistic" ? ComReference::kBallistic
                                                                             : ComReference::kTwin;
  if (c.com_reference != ComReference::kNone && c.t_final == 0.0) {
    r.fail("diagnostics", "com_reference", "needs a propagation stage (propagation.t_final > 0)");
  }
  if (c.com_reference == ComReference::kBallistic && !(c.omega > 0.0)) {
    r.fail("diagnostics", "com_reference", "ballistic reference needs a trapped initial state (omega > 0)");
  }
  c.com_tolerance = r.number("diagnostics", "com_tolerance", 0.05);
  if (!(c.com_tolerance > 0.0)) r.fail("diagnostics", "com_tolerance", "must be positive");
  c.occupancy_threshold = r.number("diagnostics", "occupancy_threshold", 1e-3);
  if (!(c.occupancy_threshold > 0.0)) r.fail("diagnostics", "occupancy_threshold", "must be positive");
  c.width_bounds = r.boolean("diagnostics", "width_bounds", false);
  if (c.width_bounds && (!(c.coupling < 0.0) || c.particles < 2)) {
    r.fail("diagnostics", "width_bounds", "needs attractive coupling and N >= 2");
  }
  c.width_slack = r.number("diagnostics", "width_slack", 0.05);
  if (c.width_slack < 0.0) r.fail("diagnostics", "width_slack", "must be >= 0");
  c.twin_length = r.number("diagnostics", "twin_length", 0.0);
  c.twin_points = static_cast<int>(r.integer("diagnostics", "twin_points", 0));
  if ((c.twin_length != 0.0 || c.twin_points != 0) && c.initial != InitialKind::kProduct) {
    r.fail("diagnostics", "twin_length", "a separate twin grid needs an analytic (product) initial state");
  }
  if (c.twin_length < 0.0) r.fail("diagnostics", "twin_length", "must be >= 0");
  if (c.twin_points != 0 && c.twin_points < Grid::kMinPoints) r.fail("diagnostics", "twin_points", "must be >= 5");

  if (auto d = r.raw("output", "directory")) {
    std::filesystem::path p(*d);
    c.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  } else {
    std::filesystem::path stem = std::filesystem::path(origin).stem();
    c.output_dir = std::filesystem::path("comcheck-out") / (stem.empty() ? "run" : stem);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

std::string render_config(const RunConfig& c) {
  std::ostringstream o;
  o << "schema_version = " << kSchemaVersion << "\n\n";
  o << "[system]\nparticles = " << c.particles << "\nmodes = " << c.modes << "\nunits = " << to_string(c.units)
    << "\n\n";
  o << "[grid]\nlength = " << fmt(c.length) << "\npoints = " << c.points << "\ncenter = " << fmt(c.center) << "\n\n";
  o << "[hamiltonian]\nmass = " << fmt(c.mass) << "\nomega = " << fmt(c.omega) << "\n";
  if (c.omega_after) o << "omega_after = " << fmt(*c.omega_after) << "\n";
  o << "coupling = " << fmt(c.coupling) << "\n";
  if (c.coupling_after) o << "coupling_after = " << fmt(*c.coupling_after) << "\n";
  o << "\n[initial]\nkind = " << to_string(c.initial) << "\nshape = " << to_string(c.shape)
    << "\nwidth = " << fmt(c.width) << "\n";
  if (!c.load_file.empty()) o << "file = " << c.load_file << "\n";
  o << "dtau = " << fmt(c.relax.dtau) << "\nenergy_tolerance = " << fmt(c.relax.energy_tolerance)
    << "\nmax_iterations = " << c.relax.max_iterations << "\nrelax_modes = " << c.relax_modes
    << "\nallow_untrapped = " << (c.relax.allow_untrapped ? "true" : "false") << "\n\n";
  o << "[propagation]\nt_final = " << fmt(c.t_final) << "\ndt = " << fmt(c.dt) << "\nrecord_every = " << c.record_every
    << "\nrecord_density = " << (c.record_density ? "true" : "false") << "\nedge_threshold = " << fmt(c.edge_threshold)
    << "\n\n";
  o << "[diagnostics]\ncom_reference = " << to_string(c.com_reference) << "\ncom_tolerance = " << fmt(c.com_tolerance)
    << "\noccupancy_threshold = " << fmt(c.occupancy_threshold)
    << "\nwidth_bounds = " << (c.width_bounds ? "true" : "false") << "\nwidth_slack = " << fmt(c.width_slack)
    << "\ntwin_length = " << fmt(c.twin_length) << "\ntwin_points = " << c.twin_points << "\n\n";
  o << "[output]\ndirectory = " << c.output_dir.string() << "\n";
  return o.str();
}

}  // namespace comcheck::cli
