#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasiband/bounds.hpp"

namespace quasiband {

inline constexpr int kReportSchemaVersion = 1;

struct WindowCount {
  std::string window;
  double lo = 0.0;
  double hi = 0.0;
  long long raw = 0;
  long long filtered = 0;
  std::vector<double> eigenvalues;  // trusted (low-leak) eigenvalues

  friend bool operator==(const WindowCount&, const WindowCount&) = default;
};

struct ConvergenceRecord {
  std::string kind;  // "radius" or "modes"
  int from = 0;
  int to = 0;
  std::map<std::string, long long> delta;  // filtered(to) - filtered(from) per window
  bool changed = false;

  friend bool operator==(const ConvergenceRecord&, const ConvergenceRecord&) = default;
};

struct Verdict {
  std::string formula;
  std::string window;
  long long count = 0;
  double bound = 0.0;
  double slack = 0.0;  // bound - count
  bool pass = true;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct PeriodicitySummary {
  int radius = 0;
  int modes = 0;
  double max_deviation = 0.0;
  int matched = 0;
  int candidates = 0;
  std::vector<double> unmatched;

  friend bool operator==(const PeriodicitySummary&, const PeriodicitySummary&) = default;
};

struct ModeSupportSummary {
  int tested = 0;
  int passed = 0;
  double max_outside_ratio = 0.0;

  friend bool operator==(const ModeSupportSummary&, const ModeSupportSummary&) = default;
};

struct InstanceRecord {
  std::string id;
  std::map<std::string, double> axes;
  std::string status = "ok";  // ok, unconverged, failed
  std::string error;
  std::map<std::string, double> frame;  // s_plus, omega, s_gamma, rho, s_e
  std::map<std::string, double> truncation;
  std::vector<WindowCount> counts;
  std::vector<BoundResult> bounds;
  std::vector<Verdict> verdicts;
  std::vector<ConvergenceRecord> convergence;
  std::optional<PeriodicitySummary> periodicity;
  std::optional<ModeSupportSummary> mode_support;
  std::map<std::string, double> ratios;
  std::vector<std::string> warnings;

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

struct ViolationRecord {
  std::string instance;
  std::string formula;
  std::string window;
  long long count = 0;
  double bound = 0.0;

  friend bool operator==(const ViolationRecord&, const ViolationRecord&) = default;
};

struct ReportSummary {
  int instances = 0;
  int verdicts = 0;
  int unconverged = 0;
  int failed = 0;
  std::vector<ViolationRecord> violations;
  std::optional<double> max_periodicity_deviation;
  std::map<std::string, double> metrics;

  friend bool operator==(const ReportSummary&, const ReportSummary&) = default;
};

struct VerificationReport {
  int schema_version = kReportSchemaVersion;
  std::string generated_at;  // excluded from the canonical form
  std::string command;
  std::string config_name;
  std::uint64_t seed = 0;
  std::vector<InstanceRecord> instances;
  ReportSummary summary;
  std::map<std::string, std::string> notes;
  std::vector<std::string> open_questions;

  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

/// Recompute the summary from the instance records.
void summarize(VerificationReport& report);

enum class ReportFormat { Json, Csv };

std::string report_to_json(const VerificationReport& report);
/// JSON with the timestamp removed; equal reports give equal strings.
std::string canonical_json(const VerificationReport& report);
VerificationReport report_from_json(const std::string& text);
std::string report_to_csv(const VerificationReport& report);

void emit_report(const VerificationReport& report, ReportFormat format, const std::filesystem::path& path);
VerificationReport load_report(const std::filesystem::path& path);

/// ISO-8601 UTC timestamp.
std::string utc_timestamp();

}  // namespace quasiband
