#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quasiband/floquet.hpp"
#include "quasiband/lattice.hpp"

namespace quasiband {

struct PotentialSource {
  enum class Kind { None, File, Cosine, Constant };
  Kind kind = Kind::None;
  std::filesystem::path file;
  double amplitude = 1.0;
  std::vector<Site> sites;  // cosine support
  SiteFunction values;      // constant potential
  std::optional<CellIndex> cuboid;

  /// Materialize at frequency omega. File potentials keep their stored
  /// coefficients and only take the new frequency.
  TimePeriodicPotential build(double omega) const;
};

struct BoundSelection {
  std::string id;  // T1, T2, T3, cor42, cor43, cor44 (empty: none)
  double cks_minus = 1.0;
  double cks_plus = 1.0;
  std::optional<double> c;
  double scale = 1.0;  // multiplies every bound value before the verdict
};

struct TruncationSettings {
  int radius = 100;
  std::optional<int> modes;  // default: potential bandwidth + 8
  int time_grid = 256;
  int band_grid = 128;
};

struct CheckSettings {
  bool convergence = true;
  bool periodicity = false;
  int periodicity_radius = 40;
  bool mode_support = false;
  double mode_support_tol = 1e-2;
  EnvelopeMode envelopes = EnvelopeMode::Sampled;
};

struct SweepAxis {
  std::string name;  // "omega" or "amplitude"
  std::vector<double> values;
};

struct BargmannSuiteSettings {
  int instances = 200;
  int support = 30;
  double amplitude = 3.0;
  int radius = 3000;
  double margin = 1e-6;
};

struct CalibrationSettings {
  std::string graph = "z3";
  std::vector<double> wells{-2.0, -5.0, -10.0};
  std::vector<int> radii{8, 12};
  double mu = -1e-6;
  int sign = -1;  // -1: nu_minus against (q - mu)_-, +1: nu_plus against (q - mu)_+
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path source;  // config file path, if loaded from disk
  std::string graph = "half-line";
  PotentialSource potential;
  std::optional<double> omega;
  std::optional<double> s_plus;
  TruncationSettings truncation;
  BoundSelection bound;
  std::vector<std::string> windows;
  CheckSettings checks;
  std::vector<SweepAxis> sweep;
  std::optional<int> workers;
  BargmannSuiteSettings bargmann;
  CalibrationSettings calibrate;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> json_out;
  std::optional<std::filesystem::path> csv_out;

  bool half_line() const { return graph == "half-line"; }
  /// Throws ConfigError on inconsistent settings. `for_sweep` additionally
  /// requires non-empty sweep axes.
  void validate(bool for_sweep = false) const;
};

/// JSON or TOML, chosen by file extension.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_json(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig parse_config_toml(const std::string& text, const std::filesystem::path& base_dir = {});

/// Worker count: QUASIBAND_WORKERS, then the override, then the config, then 1.
int resolve_workers(const ExperimentConfig& cfg, std::optional<int> cli_override = std::nullopt);

}  // namespace quasiband
