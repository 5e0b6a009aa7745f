#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "quasiband/config.hpp"
#include "quasiband/error.hpp"
#include "quasiband/graph_io.hpp"
#include "quasiband/harness.hpp"
#include "quasiband/report.hpp"

using namespace quasiband;

namespace {

constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

struct Outputs {
  std::string json;
  std::string csv;
};

void add_outputs(CLI::App* cmd, Outputs& out) {
  cmd->add_option("--json", out.json, "write the JSON report here (overrides the config)");
  cmd->add_option("--csv", out.csv, "write the CSV table here (overrides the config)");
}

void print_summary(const VerificationReport& r) {
  for (const auto& inst : r.instances) {
    std::string counts;
    for (const auto& c : inst.counts) counts += fmt::format(" {}={}/{}", c.window, c.filtered, c.raw);
    int failing = 0;
    for (const auto& v : inst.verdicts) failing += v.pass ? 0 : 1;
    fmt::print("{:<28} {:<11}{}  verdicts={} violations={}{}\n", inst.id, inst.status, counts, inst.verdicts.size(),
               failing, inst.error.empty() ? "" : "  error: " + inst.error);
  }
  const auto& s = r.summary;
  fmt::print("instances={} verdicts={} violations={} unconverged={} failed={}", s.instances, s.verdicts,
             s.violations.size(), s.unconverged, s.failed);
  if (s.max_periodicity_deviation) fmt::print(" periodicity_max_deviation={:.3e}", *s.max_periodicity_deviation);
  for (const auto& [k, v] : s.metrics) fmt::print(" {}={:.6g}", k, v);
  fmt::print("\n");
  for (const auto& v : s.violations)
    fmt::print("VIOLATION {} {} window={} count={} bound={:.17g}\n", v.instance, v.formula, v.window, v.count, v.bound);
}

int finish(const VerificationReport& report, const ExperimentConfig& cfg, const Outputs& out) {
  const std::string json = !out.json.empty() ? out.json : cfg.json_out ? cfg.json_out->string() : std::string();
  const std::string csv = !out.csv.empty() ? out.csv : cfg.csv_out ? cfg.csv_out->string() : std::string();
  if (!json.empty()) emit_report(report, ReportFormat::Json, json);
  if (!csv.empty()) emit_report(report, ReportFormat::Csv, csv);
  print_summary(report);
  return exit_code(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue counts and bounds for Floquet operators on periodic graphs"};
  app.require_subcommand(1);

  std::string graph_name;
  int grid = 128;
  std::string bands_out;
  auto* bands = app.add_subcommand("bands", "band structure, spectral top and flat-band flags");
  bands->add_option("graph", graph_name, "builtin graph (z1..z4, honeycomb, star-chain) or graph file")->required();
  bands->add_option("--grid", grid, "grid points per dimension")->check(CLI::PositiveNumber);
  bands->add_option("--out", bands_out, "write JSON here instead of stdout");

  std::string config_path;
  Outputs out;
  std::string bound_override;
  std::optional<int> workers;

  auto* count = app.add_subcommand("count", "quasi-energy eigenvalue counts per window");
  auto* verify = app.add_subcommand("verify", "counts against the selected bound");
  auto* sweep = app.add_subcommand("sweep", "verify over the Cartesian product of the sweep axes");
  auto* bargmann = app.add_subcommand("bargmann", "static half-line Bargmann suite");
  auto* calibrate = app.add_subcommand("calibrate", "empirical lower bound on C_ks");
  for (auto* cmd : {count, verify, sweep, bargmann, calibrate}) {
    cmd->add_option("--config", config_path, "experiment config (.json or .toml)")->required();
    add_outputs(cmd, out);
  }
  verify->add_option("--bound", bound_override, "T1, T2, T3, cor42, cor43 or cor44");
  sweep->add_option("--workers", workers, "concurrent instances (QUASIBAND_WORKERS takes precedence)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*bands) {
      const PeriodicGraph g = resolve_graph(graph_name);
      if (grid < 8) throw ConfigError("--grid must be >= 8");
      const std::string text = bands_json(g, graph_name, grid);
      if (bands_out.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream f(bands_out);
        if (!(f << text << "\n")) throw std::runtime_error(fmt::format("cannot write '{}'", bands_out));
      }
      return 0;
    }

    ExperimentConfig cfg = load_config(config_path);
    if (*verify && !bound_override.empty()) {
      cfg.bound.id = bound_override;
      cfg.validate(false);
    }
    if (*count) return finish(run_count(cfg), cfg, out);
    if (*verify) return finish(run_verify(cfg), cfg, out);
    if (*sweep) return finish(run_sweep(cfg, resolve_workers(cfg, workers)), cfg, out);
    if (*bargmann) return finish(run_bargmann(cfg), cfg, out);
    if (*calibrate) return finish(run_calibration(cfg), cfg, out);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
