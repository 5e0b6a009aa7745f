// End-to-end acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oracle.hpp"
#include "quasiband/bounds.hpp"
#include "quasiband/config.hpp"
#include "quasiband/floquet.hpp"
#include "quasiband/harness.hpp"
#include "quasiband/report.hpp"

using namespace quasiband;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(QUASIBAND_SOURCE_DIR) / "configs";
const fs::path kScratch = fs::temp_directory_path() / "quasiband_acceptance";

struct Outcome {
  bool pass = false;
  std::string detail;
};

int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} > /dev/null 2>&1", QUASIBAND_CLI, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.begin(), v.end()}; }

Outcome band_tops() {
  const std::vector<std::pair<int, int>> cases{{1, 128}, {2, 128}, {3, 32}};
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& [d, grid] : cases) {
    const fs::path out = kScratch / fmt::format("bands_z{}.json", d);
    const int rc = run_cli(fmt::format("bands z{} --grid {} --out {}", d, grid, out.string()));
    double top = NAN;
    if (rc == 0) {
      std::ifstream in(out);
      top = nlohmann::json::parse(in).at("s_top").get<double>();
    }
    const bool good = rc == 0 && std::abs(top - 4.0 * d) <= 1e-6;
    ok = ok && good;
    detail += fmt::format("z{}: s_+={:.12g} ", d, top);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 60.0;
  return {ok, detail + fmt::format("in {:.1f} s", secs)};
}

Outcome inertia_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1234567);
  std::uniform_int_distribution<int> size(1, 200);
  int mismatches = 0, checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    const auto a = qbtest::random_hermitian(rng, n, trial % 2 == 1, trial % 3 == 0 ? 0.9 : 0.0);
    const auto spectrum = qbtest::oracle_spectrum(a);
    const auto m = qbtest::from_dense(a);
    CountOptions opts;
    if (trial % 4 == 3) opts.dense_limit = 0;
    std::uniform_real_distribution<double> shift(spectrum(0) - 1.0, spectrum(n - 1) + 1.0);
    for (int s = 0; s < 5; ++s) {
      const double mu = shift(rng);
      ++checks;
      if (count_below(m, mu, opts) != qbtest::oracle_count_below(spectrum, mu)) ++mismatches;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {mismatches == 0 && checks == 500 && secs < 60.0,
          fmt::format("{} shifts, {} mismatches, {:.1f} s", checks, mismatches, secs)};
}

Outcome bargmann_suite_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load_config(kConfigs / "bargmann-static.toml");
  const auto report = run_bargmann(cfg);
  const double harness_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto suite = bargmann_suite(cfg.bargmann, cfg.seed);
  const int radius = cfg.bargmann.radius;
  int disagreements = 0, violations = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    std::vector<double> q(static_cast<std::size_t>(cfg.bargmann.support), 0.0);
    double total = 0.0, plus = 0.0, minus = 0.0;
    for (const auto& [site, v] : suite[i]) {
      const int n = site.cell[0];
      q[static_cast<std::size_t>(n - 1)] = v;
      total += n * std::abs(v);
      plus += n * std::max(v, 0.0);
      minus += n * std::max(-v, 0.0);
    }
    const auto spectrum = qbtest::half_line_spectrum(q, radius);
    const long long below = qbtest::oracle_count_below(spectrum, -cfg.bargmann.margin);
    const long long above = radius - qbtest::oracle_count_below(spectrum, 4.0 + cfg.bargmann.margin);
    const auto& rec = report.instances[i];
    if (rec.counts.size() != 3 || rec.counts[0].raw != below || rec.counts[1].raw != above) ++disagreements;
    if (below + above > total || above > plus || below > minus) ++violations;
  }
  const bool documented = report.notes.count("truncation") > 0;
  const bool ok = suite.size() >= 200 && report.instances.size() == suite.size() && radius == 3000 &&
                  cfg.bargmann.support == 30 && cfg.bargmann.amplitude == 3.0 && disagreements == 0 &&
                  violations == 0 && report.summary.violations.empty() && report.summary.failed == 0 &&
                  documented && harness_secs < 300.0;
  return {ok, fmt::format("{} instances at R={}, oracle disagreements {}, oracle violations {}, harness violations "
                          "{}, suite {:.1f} s",
                          suite.size(), radius, disagreements, violations, report.summary.violations.size(),
                          harness_secs)};
}

VerificationReport gap_sweep;
double gap_sweep_seconds = 0.0;

Outcome gap_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load_config(kConfigs / "gap-1d.toml");
  gap_sweep = run_sweep(cfg, resolve_workers(cfg));
  gap_sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int converged = 0, verdicts = 0, failing = 0;
  for (const auto& inst : gap_sweep.instances) {
    if (inst.status != "ok") continue;
    ++converged;
    for (const auto& v : inst.verdicts) {
      ++verdicts;
      if (!(v.count <= v.bound)) ++failing;
      if (v.formula.rfind("cor42", 0) != 0) ++failing;
    }
  }
  const bool ok = gap_sweep.instances.size() == 12 && cfg.truncation.radius == 300 && cfg.truncation.modes == 10 &&
                  converged > 0 && verdicts == 3 * converged && failing == 0 &&
                  gap_sweep.summary.violations.empty() && gap_sweep.summary.failed == 0 &&
                  gap_sweep_seconds < 600.0;
  return {ok, fmt::format("{} instances, {} converged, {} verdicts, {} violations, {:.1f} s",
                          gap_sweep.instances.size(), converged, verdicts, failing, gap_sweep_seconds)};
}

Outcome periodicity() {
  double worst = 0.0;
  int candidates = 0, unmatched = 0, missing = 0;
  for (const auto& inst : gap_sweep.instances) {
    if (!inst.periodicity) {
      ++missing;
      continue;
    }
    worst = std::max(worst, inst.periodicity->max_deviation);
    candidates += inst.periodicity->candidates;
    unmatched += static_cast<int>(inst.periodicity->unmatched.size());
  }
  const bool ok = !gap_sweep.instances.empty() && missing == 0 && candidates > 0 && unmatched == 0 && worst < 1e-8;
  return {ok, fmt::format("max deviation {:.3e} over {} eigenvalues, {} unmatched", worst, candidates, unmatched)};
}

Outcome mode_decoupling() {
  struct Case {
    const char* graph;
    int radius;
    int modes;
    double omega;
    SiteFunction v;
  };
  const std::vector<Case> cases{
      {"half-line", 100, 5, 6.0, {{half_line_site(1), -1.5}, {half_line_site(2), 0.7}}},
      {"z2", 7, 3, 3.0, {{Site{}, -4.0}, {Site{CellIndex{1, 1, 0, 0}, 0}, 2.0}}},
      {"honeycomb", 5, 4, 2.5, {{Site{}, -2.0}, {Site{CellIndex{0, 0, 0, 0}, 1}, 1.0}}},
  };
  double worst = 0.0;
  bool ok = true;
  std::string dims;
  for (const auto& c : cases) {
    const bool half = std::string(c.graph) == "half-line";
    const auto g = half ? build_hypercubic(1) : *builtin_graph(c.graph);
    TruncationSpec spec{c.radius};
    spec.half_line = half;
    const auto q = assemble_quasienergy(g, constant_potential(c.omega, c.v), spec, c.modes);
    ok = ok && q.op().dimension() <= 3000;
    dims += fmt::format("{}:{} ", c.graph, q.op().dimension());
    const auto box = qbtest::oracle_spectrum(assemble_static(g, spec, c.v));
    std::vector<double> expect;
    for (int n = -c.modes; n <= c.modes; ++n)
      for (double mu : box) expect.push_back(mu + c.omega * n);
    worst = std::max(worst, qbtest::max_sorted_deviation(to_vector(dense_eigenvalues(q.op())), expect));
  }
  ok = ok && worst <= 1e-10;
  return {ok, fmt::format("dimensions {}max deviation {:.3e}", dims, worst)};
}

Outcome bound_arithmetic() {
  std::vector<std::string> bad;
  auto check = [&](const std::string& what, double engine, double oracle) {
    if (!(rel(engine, oracle) <= 1e-12)) bad.push_back(fmt::format("{} engine={:.17g} oracle={:.17g}", what, engine, oracle));
  };
  {
    const double w = 6.0, s = 4.0, sg = w - s;
    check("gamma", gap_gamma(SpectralFrame::make(s, w)), 16.0 * w / (sg * sg));
    Envelopes e;
    e.u[half_line_site(1)] = 1.0;
    e.v_plus[half_line_site(1)] = 0.0;
    e.v_minus[half_line_site(1)] = 0.0;
    const double gamma = 16.0 * w / (sg * sg);
    const double q = gamma * 1.0;
    const double chain = (9.0 * w / sg) * 1.0 * (1.0 + 2.0 * q / w) * (1.0 * q);
    const auto b = bound_T1(SpectralFrame::make(s, w), e, 1.0, 1.0, NormSpec::bargmann(), true);
    check("T1 chain", b.minus.value, chain);
    check("cor42 chain", bound_1d(SpectralFrame::make(s, w), e, Corollary::Cor42)[0].value, chain);
  }
  {
    const double w = 1.5, s = 4.0;
    const int rho = static_cast<int>(std::floor(s / w));
    const double se = (rho + 1) * w - s;
    const auto f = SpectralFrame::make(s, w);
    check("rho", f.rho, rho);
    check("s_e", f.s_e, se);
    check("gamma_e", gamma_edge(f), 16.0 * w * (rho + 1) / (se * se));
    check("gamma_b", gamma_band(f), 4.0 * w * (rho + 2) / (se * se));
    check("C_e", edge_constant(f), 1.0 + 8.0 * w * (rho + 1) / se);
  }
  {
    const double w = 5.0, s = 4.0;
    const int rho = static_cast<int>(std::floor(s / w));
    const double se = (rho + 1) * w - s;
    check("C_b", band_constant(SpectralFrame::make(s, w)), 1.0 + 4.0 * w * (w - se) * (rho + 2) / (se * se));
  }

  int nonlinear = 0;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> a(0.0, 2.0);
  for (double w : {1.5, 5.0, 8.0, 14.0}) {
    Envelopes e;
    for (int x = 0; x < 4; ++x) {
      const Site site{CellIndex{x, x % 2, 0, 0}, 0};
      e.u[site] = a(rng);
      e.v_plus[site] = a(rng);
      e.v_minus[site] = a(rng);
    }
    const double s = w == 14.0 ? 12.0 : 4.0;
    const auto f = SpectralFrame::make(s, w);
    auto values = [&](double k) {
      const auto t1 = bound_T1(f, e, k, k, NormSpec::lp(3));
      const auto t2 = bound_T2(f, e, k, k, 0.9, NormSpec::lp(3));
      const auto t3 = bound_T3(f, e, k, k, NormSpec::lp(3), true);
      return std::vector<double>{t1.minus.value, t1.plus.value, t1.total.value, t2.minus.value, t2.plus.value,
                                 t2.total.value, t3.band_minus.value, t3.band_plus.value, t3.edge.value};
    };
    const auto one = values(1.0);
    for (double k : {2.0, 8.0, 0.25}) {
      const auto scaled = values(k);
      for (std::size_t i = 0; i < one.size(); ++i)
        if (std::isfinite(one[i]) && scaled[i] != k * one[i]) ++nonlinear;
    }
  }

  const auto cal = run_calibration(load_config(kConfigs / "calibrate-z3.toml"));
  const auto& m = cal.summary.metrics;
  const bool informative = m.count("relative_spread") > 0 && m.count("cks_lower_bound_R8") > 0 &&
                           m.count("cks_lower_bound_R12") > 0 && m.at("cks_lower_bound") > 0.0;
  const double spread = informative ? m.at("relative_spread") : INFINITY;
  const bool ok = bad.empty() && nonlinear == 0 && informative && spread <= 0.05;
  std::string detail = fmt::format("{} constant mismatches, {} non-linear C_ks scalings, calibration spread {:.4f}",
                                   bad.size(), nonlinear, spread);
  for (const auto& b : bad) detail += "; " + b;
  return {ok, detail};
}

Outcome fault_injection() {
  const fs::path out = kScratch / "fault.json";
  fs::remove(out);
  const int rc = run_cli(fmt::format("verify --config {} --json {}", (kConfigs / "fault-injection.toml").string(),
                                     out.string()));
  std::size_t violations = 0;
  if (fs::exists(out)) violations = load_report(out).summary.violations.size();
  return {rc == 2 && violations == 1, fmt::format("exit code {}, {} violation(s)", rc, violations)};
}

}  // namespace

int main() {
  fs::create_directories(kScratch);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"band-structure exactness", band_tops},
      {"inertia oracle equivalence", inertia_oracle},
      {"static half-line Bargmann suite", bargmann_suite_check},
      {"time-periodic gap suite", gap_suite},
      {"quasi-energy periodicity", periodicity},
      {"mode decoupling", mode_decoupling},
      {"bound-formula arithmetic", bound_arithmetic},
      {"verdict self-test", fault_injection},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += o.pass ? 0 : 1;
    fmt::print("criterion {} {}: {} ({})\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
