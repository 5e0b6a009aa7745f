#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quasiband/config.hpp"
#include "quasiband/finite_volume.hpp"
#include "quasiband/report.hpp"

namespace quasiband {

struct InstanceParams {
  double omega = 0.0;
  double amplitude = 1.0;
  std::map<std::string, double> axes;  // as recorded in the report
};

/// Spectral top of the configured graph (override, or band-structure grid max).
double resolve_s_plus(const ExperimentConfig& cfg, const PeriodicGraph& g);

/// One verification instance. Numerical and input failures are captured in
/// the record (status "failed"), never thrown.
InstanceRecord evaluate_instance(const ExperimentConfig& cfg, const PeriodicGraph& g, double s_plus,
                                 const InstanceParams& params, bool with_bounds);

/// Counts, bounds, verdicts and convergence records for a single instance.
VerificationReport run_verify(const ExperimentConfig& cfg);
/// Window counts only; no bounds, no verdicts.
VerificationReport run_count(const ExperimentConfig& cfg);
/// Cartesian product of the sweep axes, rows ordered by axis index.
VerificationReport run_sweep(const ExperimentConfig& cfg, int workers);
/// Random finitely supported potentials of the Bargmann suite.
std::vector<SiteFunction> bargmann_suite(const BargmannSuiteSettings& s, std::uint64_t seed);
/// Static half-line suite: counts outside [0, 4] against Bargmann norms.
VerificationReport run_bargmann(const ExperimentConfig& cfg);
/// Empirical lower bound on C_ks from single-site wells at each radius.
VerificationReport run_calibration(const ExperimentConfig& cfg);

struct StaticInstance {
  const PeriodicGraph* graph = nullptr;
  TruncationSpec spec;
  SiteFunction q;
  double mu = -1e-6;
  std::string label;
};

struct CalibrationResult {
  bool informative = false;
  double constant = 0.0;  // max ratio over informative instances
  std::vector<long long> counts;
  std::vector<double> denominators;
  std::vector<double> ratios;  // NaN where the denominator vanished
};

/// sign = -1: nu_minus(q, mu) / sum (q - mu)_-^{d/2};
/// sign = +1: nu_plus(q, mu) / sum (q - mu)_+^{d/2}.
CalibrationResult calibrate_cks(const std::vector<StaticInstance>& suite, int sign);

/// 0 all verdicts pass, 2 violations, 4 numerical failure.
int exit_code(const VerificationReport& report);

std::string bands_json(const PeriodicGraph& g, const std::string& name, int grid);

}  // namespace quasiband
