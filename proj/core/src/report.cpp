#include "quasiband/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "quasiband/error.hpp"

namespace quasiband {

namespace {

using ojson = nlohmann::ordered_json;

ojson number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double to_number(const ojson& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError(fmt::format("report: '{}' is not a number", s));
  }
  return j.get<double>();
}

ojson number_map(const std::map<std::string, double>& m) {
  ojson out = ojson::object();
  for (const auto& [k, v] : m) out[k] = number(v);
  return out;
}

std::map<std::string, double> read_number_map(const ojson& j) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = to_number(v);
  return out;
}

ojson number_list(const std::vector<double>& v) {
  ojson out = ojson::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

std::vector<double> read_number_list(const ojson& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(to_number(x));
  return out;
}

// Floats are written with 17 significant digits; everything else uses the
// library's own formatting.
void write(std::string& out, const ojson& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ojson(k).dump() + ": ";
        write(out, v, indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write(out, v, indent, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case ojson::value_t::number_float: out += fmt::format("{:.17g}", j.get<double>()); return;
    default: out += j.dump();
  }
}

std::string dump(const ojson& j) {
  std::string out;
  write(out, j, 2, 0);
  out += "\n";
  return out;
}

ojson bound_to_json(const BoundResult& b) {
  ojson j;
  j["formula"] = b.formula;
  j["value"] = number(b.value);
  j["applicable"] = b.applicable;
  j["preconditions"] = ojson::array();
  for (const auto& p : b.preconditions)
    j["preconditions"].push_back({{"name", p.name}, {"satisfied", p.satisfied}, {"margin", number(p.margin)}});
  j["inputs"] = number_map(b.inputs);
  j["note"] = b.note;
  return j;
}

BoundResult bound_from_json(const ojson& j) {
  BoundResult b;
  b.formula = j.at("formula").get<std::string>();
  b.value = to_number(j.at("value"));
  b.applicable = j.at("applicable").get<bool>();
  for (const auto& p : j.at("preconditions"))
    b.preconditions.push_back({p.at("name").get<std::string>(), p.at("satisfied").get<bool>(), to_number(p.at("margin"))});
  b.inputs = read_number_map(j.at("inputs"));
  b.note = j.at("note").get<std::string>();
  return b;
}

ojson instance_to_json(const InstanceRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["axes"] = number_map(r.axes);
  j["status"] = r.status;
  j["error"] = r.error;
  j["frame"] = number_map(r.frame);
  j["truncation"] = number_map(r.truncation);
  j["counts"] = ojson::array();
  for (const auto& c : r.counts)
    j["counts"].push_back({{"window", c.window},
                           {"lo", number(c.lo)},
                           {"hi", number(c.hi)},
                           {"raw", c.raw},
                           {"filtered", c.filtered},
                           {"eigenvalues", number_list(c.eigenvalues)}});
  j["bounds"] = ojson::array();
  for (const auto& b : r.bounds) j["bounds"].push_back(bound_to_json(b));
  j["verdicts"] = ojson::array();
  for (const auto& v : r.verdicts)
    j["verdicts"].push_back({{"formula", v.formula},
                             {"window", v.window},
                             {"count", v.count},
                             {"bound", number(v.bound)},
                             {"slack", number(v.slack)},
                             {"pass", v.pass}});
  j["convergence"] = ojson::array();
  for (const auto& c : r.convergence) {
    ojson delta = ojson::object();
    for (const auto& [k, v] : c.delta) delta[k] = v;
    j["convergence"].push_back({{"kind", c.kind}, {"from", c.from}, {"to", c.to}, {"delta", delta}, {"changed", c.changed}});
  }
  if (r.periodicity) {
    const auto& p = *r.periodicity;
    j["periodicity"] = {{"radius", p.radius},
                        {"modes", p.modes},
                        {"max_deviation", number(p.max_deviation)},
                        {"matched", p.matched},
                        {"candidates", p.candidates},
                        {"unmatched", number_list(p.unmatched)}};
  } else {
    j["periodicity"] = nullptr;
  }
  if (r.mode_support) {
    const auto& m = *r.mode_support;
    j["mode_support"] = {
        {"tested", m.tested}, {"passed", m.passed}, {"max_outside_ratio", number(m.max_outside_ratio)}};
  } else {
    j["mode_support"] = nullptr;
  }
  j["ratios"] = number_map(r.ratios);
  j["warnings"] = r.warnings;
  return j;
}

InstanceRecord instance_from_json(const ojson& j) {
  InstanceRecord r;
  r.id = j.at("id").get<std::string>();
  r.axes = read_number_map(j.at("axes"));
  r.status = j.at("status").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.frame = read_number_map(j.at("frame"));
  r.truncation = read_number_map(j.at("truncation"));
  for (const auto& c : j.at("counts"))
    r.counts.push_back({c.at("window").get<std::string>(), to_number(c.at("lo")), to_number(c.at("hi")),
                        c.at("raw").get<long long>(), c.at("filtered").get<long long>(),
                        read_number_list(c.at("eigenvalues"))});
  for (const auto& b : j.at("bounds")) r.bounds.push_back(bound_from_json(b));
  for (const auto& v : j.at("verdicts"))
    r.verdicts.push_back({v.at("formula").get<std::string>(), v.at("window").get<std::string>(),
                          v.at("count").get<long long>(), to_number(v.at("bound")), to_number(v.at("slack")),
                          v.at("pass").get<bool>()});
  for (const auto& c : j.at("convergence")) {
    ConvergenceRecord rec;
    rec.kind = c.at("kind").get<std::string>();
    rec.from = c.at("from").get<int>();
    rec.to = c.at("to").get<int>();
    for (const auto& [k, v] : c.at("delta").items()) rec.delta[k] = v.get<long long>();
    rec.changed = c.at("changed").get<bool>();
    r.convergence.push_back(std::move(rec));
  }
  if (const auto& p = j.at("periodicity"); !p.is_null())
    r.periodicity = PeriodicitySummary{p.at("radius").get<int>(),      p.at("modes").get<int>(),
                                       to_number(p.at("max_deviation")), p.at("matched").get<int>(),
                                       p.at("candidates").get<int>(),  read_number_list(p.at("unmatched"))};
  if (const auto& m = j.at("mode_support"); !m.is_null())
    r.mode_support = ModeSupportSummary{m.at("tested").get<int>(), m.at("passed").get<int>(),
                                        to_number(m.at("max_outside_ratio"))};
  r.ratios = read_number_map(j.at("ratios"));
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

ojson to_json(const VerificationReport& report, bool with_timestamp) {
  ojson j;
  j["schema_version"] = report.schema_version;
  if (with_timestamp) j["generated_at"] = report.generated_at;
  j["command"] = report.command;
  j["config_name"] = report.config_name;
  j["seed"] = report.seed;
  const auto& s = report.summary;
  ojson violations = ojson::array();
  for (const auto& v : s.violations)
    violations.push_back({{"instance", v.instance},
                          {"formula", v.formula},
                          {"window", v.window},
                          {"count", v.count},
                          {"bound", number(v.bound)}});
  j["summary"] = {{"instances", s.instances},
                  {"verdicts", s.verdicts},
                  {"unconverged", s.unconverged},
                  {"failed", s.failed},
                  {"violations", violations},
                  {"max_periodicity_deviation",
                   s.max_periodicity_deviation ? number(*s.max_periodicity_deviation) : ojson(nullptr)},
                  {"metrics", number_map(s.metrics)}};
  j["notes"] = report.notes;
  j["open_questions"] = report.open_questions;
  j["instances"] = ojson::array();
  for (const auto& r : report.instances) j["instances"].push_back(instance_to_json(r));
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

}  // namespace

void summarize(VerificationReport& report) {
  ReportSummary s;
  s.metrics = report.summary.metrics;
  s.instances = static_cast<int>(report.instances.size());
  for (const auto& r : report.instances) {
    if (r.status == "unconverged") ++s.unconverged;
    if (r.status == "failed") ++s.failed;
    for (const auto& v : r.verdicts) {
      ++s.verdicts;
      if (!v.pass) s.violations.push_back({r.id, v.formula, v.window, v.count, v.bound});
    }
    if (r.periodicity && r.periodicity->candidates > 0)
      s.max_periodicity_deviation = std::max(s.max_periodicity_deviation.value_or(0.0), r.periodicity->max_deviation);
  }
  report.summary = std::move(s);
}

std::string report_to_json(const VerificationReport& report) { return dump(to_json(report, true)); }

std::string canonical_json(const VerificationReport& report) { return dump(to_json(report, false)); }

VerificationReport report_from_json(const std::string& text) {
  try {
    const ojson j = ojson::parse(text);
    VerificationReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      throw ConfigError(fmt::format("report: unsupported schema version {}", r.schema_version));
    r.generated_at = j.value("generated_at", "");
    r.command = j.at("command").get<std::string>();
    r.config_name = j.at("config_name").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& s = j.at("summary");
    r.summary.instances = s.at("instances").get<int>();
    r.summary.verdicts = s.at("verdicts").get<int>();
    r.summary.unconverged = s.at("unconverged").get<int>();
    r.summary.failed = s.at("failed").get<int>();
    for (const auto& v : s.at("violations"))
      r.summary.violations.push_back({v.at("instance").get<std::string>(), v.at("formula").get<std::string>(),
                                      v.at("window").get<std::string>(), v.at("count").get<long long>(),
                                      to_number(v.at("bound"))});
    if (!s.at("max_periodicity_deviation").is_null())
      r.summary.max_periodicity_deviation = to_number(s.at("max_periodicity_deviation"));
    r.summary.metrics = read_number_map(s.at("metrics"));
    r.notes = j.at("notes").get<std::map<std::string, std::string>>();
    r.open_questions = j.at("open_questions").get<std::vector<std::string>>();
    for (const auto& inst : j.at("instances")) r.instances.push_back(instance_from_json(inst));
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(fmt::format("report: {}", ex.what()));
  }
}

std::string report_to_csv(const VerificationReport& report) {
  std::set<std::string> axes, frame, trunc, windows, bounds, ratios;
  for (const auto& r : report.instances) {
    for (const auto& [k, _] : r.axes) axes.insert(k);
    for (const auto& [k, _] : r.frame) frame.insert(k);
    for (const auto& [k, _] : r.truncation) trunc.insert(k);
    for (const auto& c : r.counts) windows.insert(c.window);
    for (const auto& b : r.bounds) bounds.insert(b.formula);
    for (const auto& [k, _] : r.ratios) ratios.insert(k);
  }

  std::vector<std::string> header{"id", "status"};
  for (const auto& k : axes) header.push_back("axis_" + k);
  for (const auto& k : frame) header.push_back("frame_" + k);
  for (const auto& k : trunc) header.push_back("truncation_" + k);
  for (const auto& w : windows) {
    header.push_back("raw_" + w);
    header.push_back("filtered_" + w);
  }
  for (const auto& b : bounds) header.push_back("bound_" + b);
  header.insert(header.end(), {"verdicts", "violations", "min_slack", "periodicity_max_deviation"});
  for (const auto& k : ratios) header.push_back("ratio_" + k);
  header.push_back("error");

  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";

  auto lookup = [](const std::map<std::string, double>& m, const std::string& k) {
    const auto it = m.find(k);
    return it == m.end() ? std::string() : csv_number(it->second);
  };
  for (const auto& r : report.instances) {
    std::vector<std::string> row{csv_field(r.id), r.status};
    for (const auto& k : axes) row.push_back(lookup(r.axes, k));
    for (const auto& k : frame) row.push_back(lookup(r.frame, k));
    for (const auto& k : trunc) row.push_back(lookup(r.truncation, k));
    for (const auto& w : windows) {
      const WindowCount* found = nullptr;
      for (const auto& c : r.counts)
        if (c.window == w) found = &c;
      row.push_back(found ? std::to_string(found->raw) : "");
      row.push_back(found ? std::to_string(found->filtered) : "");
    }
    for (const auto& b : bounds) {
      std::string cell;
      for (const auto& br : r.bounds)
        if (br.formula == b) cell = csv_number(br.value);
      row.push_back(cell);
    }
    int violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& v : r.verdicts) {
      violations += v.pass ? 0 : 1;
      min_slack = std::min(min_slack, v.slack);
    }
    row.push_back(std::to_string(r.verdicts.size()));
    row.push_back(std::to_string(violations));
    row.push_back(r.verdicts.empty() ? "" : csv_number(min_slack));
    row.push_back(r.periodicity ? csv_number(r.periodicity->max_deviation) : "");
    for (const auto& k : ratios) row.push_back(lookup(r.ratios, k));
    row.push_back(csv_field(r.error));
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void emit_report(const VerificationReport& report, ReportFormat format, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write report '{}'", path.string()));
  out << (format == ReportFormat::Json ? report_to_json(report) : report_to_csv(report));
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("I/O error writing report '{}'", path.string()));
}

VerificationReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open report '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

std::string utc_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

}  // namespace quasiband
