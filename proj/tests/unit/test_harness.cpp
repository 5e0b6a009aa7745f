#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "quasiband/config.hpp"
#include "quasiband/error.hpp"
#include "quasiband/floquet.hpp"
#include "quasiband/harness.hpp"
#include "quasiband/report.hpp"

using namespace quasiband;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(QUASIBAND_SOURCE_DIR) / "configs";

ExperimentConfig gap_config(const std::string& potential, double omega, int radius, int modes) {
  return parse_config_toml("name = \"t\"\nomega = " + std::to_string(omega) + "\n[potential]\n" + potential +
                           "\n[truncation]\nradius = " + std::to_string(radius) +
                           "\nmodes = " + std::to_string(modes) + "\n[bound]\nid = \"cor42\"\n");
}

const WindowCount& count_of(const InstanceRecord& r, const std::string& w) {
  for (const auto& c : r.counts)
    if (c.window == w) return c;
  throw std::runtime_error("window not found: " + w);
}

InstanceRecord strip_id(InstanceRecord r) {
  r.id.clear();
  r.axes.clear();
  return r;
}

}  // namespace

TEST(Verify, FreeOperatorPasses) {
  const auto r = run_verify(gap_config("kind = \"none\"", 6.0, 80, 3));
  ASSERT_EQ(r.instances.size(), 1u);
  const auto& inst = r.instances[0];
  EXPECT_EQ(inst.status, "ok");
  for (const auto& c : inst.counts) EXPECT_EQ(c.filtered, 0) << c.window;
  for (const auto& b : inst.bounds) EXPECT_EQ(b.value, 0.0);
  EXPECT_EQ(inst.verdicts.size(), 3u);
  for (const auto& v : inst.verdicts) EXPECT_TRUE(v.pass);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Verify, CosineWellPassesWithSlackAndMatchesDenseOracle) {
  const auto cfg = gap_config("kind = \"cosine\"\namplitude = -0.8\nsites = [1, 2, 3]", 6.0, 60, 6);
  const auto r = run_verify(cfg);
  const auto& inst = r.instances[0];
  ASSERT_EQ(inst.status, "ok");
  ASSERT_EQ(inst.verdicts.size(), 3u);
  for (const auto& v : inst.verdicts) {
    EXPECT_TRUE(v.pass);
    EXPECT_GT(v.slack, 0.0);
  }
  const auto v = cosine_potential(6.0, {half_line_site(1), half_line_site(2), half_line_site(3)}, -0.8);
  TruncationSpec spec{60};
  spec.half_line = true;
  const auto spectrum = qbtest::oracle_spectrum(assemble_quasienergy(build_hypercubic(1), v, spec, 6).op());
  for (const char* w : {"gamma", "gamma_minus", "gamma_plus"}) {
    const auto& c = count_of(inst, w);
    EXPECT_EQ(c.raw, qbtest::oracle_count_in(spectrum, c.lo + kEdgeGuard, c.hi - kEdgeGuard)) << w;
    EXPECT_LE(c.filtered, c.raw);
  }
}

TEST(Verify, UnconvergedInstanceHasNoVerdicts) {
  const auto r = run_verify(gap_config("kind = \"constant\"\nsites = [{ index = 6, value = -8.0 }]", 6.0, 5, 4));
  const auto& inst = r.instances[0];
  EXPECT_EQ(inst.status, "unconverged");
  EXPECT_TRUE(inst.verdicts.empty());
  EXPECT_EQ(r.summary.unconverged, 1);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Verify, InjectedFaultIsReported) {
  const auto r = run_verify(load_config(kConfigs / "fault-injection.toml"));
  ASSERT_EQ(r.summary.violations.size(), 1u);
  EXPECT_EQ(r.summary.violations[0].formula, "cor43-total");
  EXPECT_EQ(exit_code(r), 2);
}

TEST(Count, NoBoundsNoVerdicts) {
  const auto r = run_count(gap_config("kind = \"cosine\"\namplitude = 0.5\nsites = [1]", 6.0, 40, 3));
  EXPECT_TRUE(r.instances[0].bounds.empty());
  EXPECT_TRUE(r.instances[0].verdicts.empty());
  EXPECT_FALSE(r.instances[0].counts.empty());
}

TEST(Sweep, SingleCellEqualsVerify) {
  auto cfg = gap_config("kind = \"cosine\"\namplitude = 0.7\nsites = [1, 2]", 6.0, 60, 4);
  cfg.sweep = {{"omega", {6.0}}};
  const auto s = run_sweep(cfg, 1);
  const auto v = run_verify(cfg);
  ASSERT_EQ(s.instances.size(), 1u);
  EXPECT_EQ(strip_id(s.instances[0]), strip_id(v.instances[0]));
}

TEST(Sweep, OrderAndWorkerIndependent) {
  auto cfg = gap_config("kind = \"cosine\"\namplitude = 1.0\nsites = [1, 2, 3]", 6.0, 60, 4);
  cfg.sweep = {{"omega", {5.0, 6.0, 8.0}}, {"amplitude", {0.5, 1.0}}};
  const auto a = run_sweep(cfg, 1);
  auto permuted = cfg;
  std::swap(permuted.sweep[0], permuted.sweep[1]);
  const auto b = run_sweep(permuted, 3);
  ASSERT_EQ(a.instances.size(), 6u);
  ASSERT_EQ(b.instances.size(), 6u);
  EXPECT_EQ(a.instances[1].axes.at("amplitude"), 1.0);
  EXPECT_EQ(b.instances[1].axes.at("omega"), 6.0);
  for (const auto& x : a.instances) {
    bool found = false;
    for (const auto& y : b.instances)
      if (y.id == x.id) {
        EXPECT_EQ(x, y);
        found = true;
      }
    EXPECT_TRUE(found) << x.id;
  }
  for (double amp : {0.5, 1.0}) {
    long long prev = -1;
    for (const auto& x : a.instances) {
      if (x.axes.at("amplitude") != amp) continue;
      const long long c = count_of(x, "gamma").filtered;
      if (prev >= 0) EXPECT_LE(c, prev);
      prev = c;
    }
  }
  EXPECT_EQ(canonical_json(run_sweep(cfg, 2)), canonical_json(a));
}

TEST(Sweep, FailuresAreRecordedNotThrown) {
  auto cfg = gap_config("kind = \"cosine\"\namplitude = 1.0\nsites = [1]", 6.0, 30, 3);
  cfg.sweep = {{"omega", {3.0, 6.0}}};
  const auto r = run_sweep(cfg, 1);
  ASSERT_EQ(r.instances.size(), 2u);
  EXPECT_TRUE(r.instances[0].verdicts.empty());
  EXPECT_FALSE(r.instances[1].verdicts.empty());
  EXPECT_THROW(run_sweep(gap_config("kind = \"none\"", 6.0, 30, 3), 1), ConfigError);
}

TEST(Bargmann, CountsMatchTridiagonalOracle) {
  auto cfg = load_config(kConfigs / "bargmann-static.toml");
  cfg.bargmann.instances = 25;
  cfg.bargmann.radius = 400;
  const auto r = run_bargmann(cfg);
  const auto suite = bargmann_suite(cfg.bargmann, cfg.seed);
  ASSERT_EQ(r.instances.size(), suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    std::vector<double> q(30, 0.0);
    double total = 0.0;
    for (const auto& [s, v] : suite[i]) {
      q[s.cell[0] - 1] = v;
      total += s.cell[0] * std::abs(v);
    }
    const auto spec = qbtest::half_line_spectrum(q, 400);
    const long long below = qbtest::oracle_count_below(spec, -1e-6);
    const long long above = 400 - qbtest::oracle_count_below(spec, 4.0 + 1e-6 + 1e-15);
    EXPECT_EQ(count_of(r.instances[i], "below").raw, below);
    EXPECT_EQ(count_of(r.instances[i], "above").raw, above);
    EXPECT_NEAR(r.instances[i].bounds[0].value, total, 1e-12 * total);
    EXPECT_LE(below + above, total);
  }
  EXPECT_TRUE(r.summary.violations.empty());
}

TEST(Bargmann, DeterministicForSeed) {
  auto cfg = load_config(kConfigs / "bargmann-static.toml");
  cfg.bargmann.instances = 10;
  cfg.bargmann.radius = 200;
  EXPECT_EQ(canonical_json(run_bargmann(cfg)), canonical_json(run_bargmann(cfg)));
  auto other = cfg;
  other.seed += 1;
  EXPECT_NE(canonical_json(run_bargmann(cfg)), canonical_json(run_bargmann(other)));
}

TEST(Calibration, ZeroSuiteIsUninformative) {
  const auto g = build_hypercubic(3);
  std::vector<StaticInstance> suite{{&g, {3}, {}, -1e-6, "zero"}};
  const auto r = calibrate_cks(suite, -1);
  EXPECT_FALSE(r.informative);
}

TEST(Calibration, RunningMaxMonotoneUnderScaling) {
  const auto g = build_hypercubic(3);
  std::vector<StaticInstance> suite;
  double prev = 0.0;
  for (double lam : {1.0, 2.0, 4.0, 8.0}) {
    suite.push_back({&g, {4}, {{Site{}, -3.0 * lam}}, -1e-6, "w"});
    const auto r = calibrate_cks(suite, -1);
    ASSERT_TRUE(r.informative);
    EXPECT_GE(r.constant, prev);
    prev = r.constant;
  }
  EXPECT_THROW(calibrate_cks(suite, 0), InvalidArgument);
}

TEST(Calibration, WellRatioIsFinite) {
  const auto g = build_hypercubic(3);
  std::vector<StaticInstance> suite{{&g, {6}, {{Site{}, -10.0}}, -1e-6, "deep"}};
  const auto r = calibrate_cks(suite, -1);
  ASSERT_TRUE(r.informative);
  EXPECT_EQ(r.counts[0], 1);
  EXPECT_NEAR(r.constant, 1.0 / std::pow(10.0 - 1e-6, 1.5), 1e-9);
}

TEST(Bands, JsonCarriesTop) {
  const std::string j = bands_json(build_hypercubic(2), "z2", 32);
  EXPECT_NE(j.find("\"s_top\""), std::string::npos);
  EXPECT_NE(j.find("\"flat_flags\""), std::string::npos);
}

#ifdef QUASIBAND_CLI
namespace {
int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + QUASIBAND_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST(Cli, ExitCodes) {
  const std::string cfg = kConfigs.string();
  EXPECT_EQ(run_cli("bands z1 --grid 32"), 0);
  EXPECT_EQ(run_cli("verify --config " + cfg + "/fault-injection.toml"), 2);
  EXPECT_EQ(run_cli("verify --config " + cfg + "/no-such.toml"), 3);
  EXPECT_EQ(run_cli("verify --config " + cfg + "/fault-injection.toml --bound T7"), 3);
  EXPECT_EQ(run_cli("frobnicate"), 3);
  EXPECT_EQ(run_cli("bands no-such-graph"), 3);
  EXPECT_EQ(run_cli("count --config " + cfg + "/fault-injection.toml"), 0);
}

TEST(Cli, WritesJsonAndCsv) {
  const fs::path dir = fs::temp_directory_path() / "quasiband_cli";
  fs::create_directories(dir);
  ASSERT_EQ(run_cli("verify --config " + kConfigs.string() + "/fault-injection.toml --json " +
                    (dir / "r.json").string() + " --csv " + (dir / "r.csv").string()),
            2);
  const auto r = load_report(dir / "r.json");
  EXPECT_EQ(r.summary.violations.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "r.csv"));
}
#endif
