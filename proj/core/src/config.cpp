#include "quasiband/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "quasiband/error.hpp"
#include "quasiband/potential_io.hpp"

namespace quasiband {

namespace {

using nlohmann::json;

const std::set<std::string> kBoundIds{"T1", "T2", "T3", "cor42", "cor43", "cor44"};
const std::set<std::string> kWindows{"gamma",         "gamma_minus", "gamma_plus", "t2_gamma_minus",
                                     "t2_gamma_plus", "sigma_b",     "sigma_e"};
const std::set<std::string> kAxes{"omega", "amplitude"};

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("config: '{}' must be a table", where));
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(fmt::format("config: unknown key '{}' in '{}'", key, where));
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

template <class T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

std::filesystem::path relative_to(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

CellIndex read_index(const json& v) {
  CellIndex c{};
  if (v.is_number_integer()) {
    c[0] = v.get<int>();
    return c;
  }
  if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError("config: site index must be an integer or an array of 1..4 integers");
  for (std::size_t j = 0; j < v.size(); ++j) c[j] = v[j].get<int>();
  return c;
}

PotentialSource read_potential(const json& p, const std::filesystem::path& base) {
  check_keys(p, "potential", {"file", "kind", "amplitude", "sites", "cuboid"});
  PotentialSource src;
  if (p.contains("file")) {
    src.kind = PotentialSource::Kind::File;
    src.file = relative_to(base, p.at("file").get<std::string>());
    if (!std::filesystem::exists(src.file))
      throw ConfigError(fmt::format("config: potential file '{}' does not exist", src.file.string()));
    return src;
  }
  const std::string kind = p.value("kind", "none");
  if (p.contains("cuboid")) src.cuboid = read_index(p.at("cuboid"));
  if (kind == "cosine") {
    src.kind = PotentialSource::Kind::Cosine;
    read(p, "amplitude", src.amplitude);
    for (const auto& s : p.at("sites")) src.sites.push_back(Site{read_index(s), 0});
  } else if (kind == "constant") {
    src.kind = PotentialSource::Kind::Constant;
    for (const auto& s : p.at("sites")) {
      check_keys(s, "potential.sites", {"index", "vertex", "value"});
      src.values[Site{read_index(s.at("index")), s.value("vertex", 0)}] += s.at("value").get<double>();
    }
  } else if (kind != "none") {
    throw ConfigError(fmt::format("config: unknown potential kind '{}'", kind));
  }
  return src;
}

ExperimentConfig from_json(const json& doc, const std::filesystem::path& base) {
  check_keys(doc, "<root>",
             {"name", "graph", "potential", "omega", "s_plus", "truncation", "bound", "windows", "checks", "sweep",
              "workers", "bargmann", "calibrate", "seed", "output"});
  ExperimentConfig cfg;
  read(doc, "name", cfg.name);
  read(doc, "graph", cfg.graph);
  if (!builtin_graph(cfg.graph)) {
    const auto path = relative_to(base, cfg.graph);
    if (!std::filesystem::exists(path))
      throw ConfigError(fmt::format("config: graph '{}' is neither builtin nor an existing file", cfg.graph));
    cfg.graph = path.string();
  }
  if (doc.contains("potential")) cfg.potential = read_potential(doc.at("potential"), base);
  read(doc, "omega", cfg.omega);
  read(doc, "s_plus", cfg.s_plus);
  read(doc, "workers", cfg.workers);
  read(doc, "seed", cfg.seed);

  if (doc.contains("truncation")) {
    const auto& t = doc.at("truncation");
    check_keys(t, "truncation", {"radius", "modes", "time_grid", "band_grid"});
    read(t, "radius", cfg.truncation.radius);
    read(t, "modes", cfg.truncation.modes);
    read(t, "time_grid", cfg.truncation.time_grid);
    read(t, "band_grid", cfg.truncation.band_grid);
  }
  if (doc.contains("bound")) {
    const auto& b = doc.at("bound");
    check_keys(b, "bound", {"id", "cks_minus", "cks_plus", "c", "scale"});
    read(b, "id", cfg.bound.id);
    read(b, "cks_minus", cfg.bound.cks_minus);
    read(b, "cks_plus", cfg.bound.cks_plus);
    read(b, "c", cfg.bound.c);
    read(b, "scale", cfg.bound.scale);
  }
  read(doc, "windows", cfg.windows);
  if (doc.contains("checks")) {
    const auto& c = doc.at("checks");
    check_keys(c, "checks",
               {"convergence", "periodicity", "periodicity_radius", "mode_support", "mode_support_tol", "envelopes"});
    read(c, "convergence", cfg.checks.convergence);
    read(c, "periodicity", cfg.checks.periodicity);
    read(c, "periodicity_radius", cfg.checks.periodicity_radius);
    read(c, "mode_support", cfg.checks.mode_support);
    read(c, "mode_support_tol", cfg.checks.mode_support_tol);
    const std::string env = c.value("envelopes", "sampled");
    if (env == "sampled")
      cfg.checks.envelopes = EnvelopeMode::Sampled;
    else if (env == "rigorous")
      cfg.checks.envelopes = EnvelopeMode::RigorousOverestimate;
    else
      throw ConfigError(fmt::format("config: unknown envelope mode '{}'", env));
  }
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    check_keys(s, "sweep", {"axes"});
    for (const auto& a : s.at("axes")) {
      check_keys(a, "sweep.axes", {"name", "values"});
      cfg.sweep.push_back({a.at("name").get<std::string>(), a.at("values").get<std::vector<double>>()});
    }
  }
  if (doc.contains("bargmann")) {
    const auto& b = doc.at("bargmann");
    check_keys(b, "bargmann", {"instances", "support", "amplitude", "radius", "margin"});
    read(b, "instances", cfg.bargmann.instances);
    read(b, "support", cfg.bargmann.support);
    read(b, "amplitude", cfg.bargmann.amplitude);
    read(b, "radius", cfg.bargmann.radius);
    read(b, "margin", cfg.bargmann.margin);
  }
  if (doc.contains("calibrate")) {
    const auto& c = doc.at("calibrate");
    check_keys(c, "calibrate", {"graph", "wells", "radii", "mu", "sign"});
    read(c, "graph", cfg.calibrate.graph);
    read(c, "wells", cfg.calibrate.wells);
    read(c, "radii", cfg.calibrate.radii);
    read(c, "mu", cfg.calibrate.mu);
    if (c.contains("sign")) {
      const std::string sign = c.at("sign").get<std::string>();
      if (sign == "minus")
        cfg.calibrate.sign = -1;
      else if (sign == "plus")
        cfg.calibrate.sign = 1;
      else
        throw ConfigError(fmt::format("config: calibrate.sign must be 'minus' or 'plus' (got '{}')", sign));
    }
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"json", "csv"});
    if (o.contains("json")) cfg.json_out = relative_to(base, o.at("json").get<std::string>());
    if (o.contains("csv")) cfg.csv_out = relative_to(base, o.at("csv").get<std::string>());
  }
  cfg.validate(false);
  return cfg;
}

ExperimentConfig parse_guarded(const std::string& text, const std::filesystem::path& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(fmt::format("config: {}", ex.what()));
  }
  try {
    return from_json(doc, base);
  } catch (const json::exception& ex) {
    throw ConfigError(fmt::format("config: {}", ex.what()));
  }
}

}  // namespace

TimePeriodicPotential PotentialSource::build(double omega) const {
  switch (kind) {
    case Kind::None: return TimePeriodicPotential(omega, {}, cuboid);
    case Kind::File: return load_potential_file(file).with_omega(omega);
    case Kind::Cosine: return cosine_potential(omega, sites, amplitude, cuboid);
    case Kind::Constant: return constant_potential(omega, values, cuboid);
  }
  return {};
}

void ExperimentConfig::validate(bool for_sweep) const {
  if (truncation.radius < 1) throw ConfigError(fmt::format("config: radius must be >= 1 (got {})", truncation.radius));
  if (truncation.modes && *truncation.modes < 0) throw ConfigError("config: modes must be non-negative");
  if (truncation.time_grid < 64)
    throw ConfigError(fmt::format("config: time_grid must be >= 64 (got {})", truncation.time_grid));
  if (truncation.band_grid < 8)
    throw ConfigError(fmt::format("config: band_grid must be >= 8 (got {})", truncation.band_grid));
  if (omega && !(*omega > 0.0)) throw ConfigError(fmt::format("config: omega must be positive (got {})", *omega));
  if (!bound.id.empty() && !kBoundIds.count(bound.id))
    throw ConfigError(fmt::format("config: unknown bound '{}'", bound.id));
  if ((bound.id == "T2" || bound.id == "cor43") && !bound.c)
    throw ConfigError(fmt::format("config: bound {} needs the constant c", bound.id));
  if (bound.id.rfind("cor", 0) == 0 && !half_line())
    throw ConfigError("config: corollary bounds need the half-line graph");
  if (!(bound.scale > 0.0)) throw ConfigError("config: bound scale must be positive");
  for (const auto& w : windows)
    if (!kWindows.count(w)) throw ConfigError(fmt::format("config: unknown window '{}'", w));
  std::set<std::string> seen;
  for (const auto& a : sweep) {
    if (!kAxes.count(a.name)) throw ConfigError(fmt::format("config: unknown sweep axis '{}'", a.name));
    if (!seen.insert(a.name).second) throw ConfigError(fmt::format("config: sweep axis '{}' repeated", a.name));
    if (a.values.empty()) throw ConfigError(fmt::format("config: sweep axis '{}' is empty", a.name));
  }
  if (for_sweep && sweep.empty()) throw ConfigError("config: sweep mode needs at least one sweep axis");
  if (workers && *workers < 1) throw ConfigError("config: workers must be >= 1");
  if (checks.periodicity_radius < 1) throw ConfigError("config: periodicity_radius must be >= 1");
  if (bargmann.instances < 0 || bargmann.support < 1 || bargmann.radius < bargmann.support)
    throw ConfigError("config: bargmann suite needs support >= 1 and radius >= support");
  if (calibrate.radii.empty()) throw ConfigError("config: calibrate.radii must be non-empty");
}

ExperimentConfig parse_config_json(const std::string& text, const std::filesystem::path& base_dir) {
  return parse_guarded(text, base_dir);
}

ExperimentConfig parse_config_toml(const std::string& text, const std::filesystem::path& base_dir) {
  std::ostringstream as_json;
  try {
    const toml::table table = toml::parse(text);
    as_json << toml::json_formatter{table};
  } catch (const toml::parse_error& ex) {
    throw ConfigError(fmt::format("config: {} (line {})", ex.description(), ex.source().begin.line));
  }
  return parse_guarded(as_json.str(), base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = path.parent_path();
  const auto ext = path.extension().string();
  ExperimentConfig cfg;
  try {
    if (ext == ".toml")
      cfg = parse_config_toml(buf.str(), base);
    else if (ext == ".json")
      cfg = parse_config_json(buf.str(), base);
    else
      throw ConfigError(fmt::format("unrecognized config extension '{}' (expected .json or .toml)", ext));
  } catch (const ConfigError& ex) {
    throw ConfigError(fmt::format("{}: {}", path.string(), ex.what()));
  }
  cfg.source = path;
  return cfg;
}

int resolve_workers(const ExperimentConfig& cfg, std::optional<int> cli_override) {
  if (const char* env = std::getenv("QUASIBAND_WORKERS"); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError(fmt::format("QUASIBAND_WORKERS must be a positive integer (got '{}')", env));
    return static_cast<int>(n);
  }
  if (cli_override) {
    if (*cli_override < 1) throw ConfigError("worker count must be >= 1");
    return *cli_override;
  }
  return cfg.workers.value_or(1);
}

}  // namespace quasiband
