#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "quasiband/bounds.hpp"
#include "quasiband/error.hpp"

using namespace quasiband;

namespace {

Site hl(int n) { return half_line_site(n); }

Envelopes single_site(double u, double vp, double vm) {
  Envelopes e;
  e.u[hl(1)] = u;
  e.v_plus[hl(1)] = vp;
  e.v_minus[hl(1)] = vm;
  e.delta_plus = vp;
  e.delta_minus = vm;
  return e;
}

Envelopes random_envelopes(std::mt19937_64& rng, int sites) {
  std::uniform_real_distribution<double> a(0.0, 2.0);
  Envelopes e;
  for (int n = 1; n <= sites; ++n) {
    e.u[hl(n)] = a(rng);
    e.v_plus[hl(n)] = a(rng);
    e.v_minus[hl(n)] = a(rng);
    e.delta_plus = std::max(e.delta_plus, e.v_plus[hl(n)]);
    e.delta_minus = std::max(e.delta_minus, e.v_minus[hl(n)]);
  }
  return e;
}

std::vector<double> all_values(const SpectralFrame& f, const Envelopes& e, double cm, double cp) {
  const NormSpec norm = NormSpec::lp(3);
  const auto t1 = bound_T1(f, e, cm, cp, norm);
  const auto t2 = bound_T2(f, e, cm, cp, 0.7, norm);
  const auto t3 = bound_T3(f, e, cm, cp, norm, true);
  return {t1.minus.value,      t1.plus.value,      t1.total.value, t2.minus.value, t2.plus.value,
          t2.total.value,      t3.band_minus.value, t3.band_plus.value, t3.edge.value};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Frame, MainGapNumbers) {
  const auto f = SpectralFrame::make(4.0, 6.0);
  EXPECT_EQ(f.s_gamma, 2.0);
  EXPECT_EQ(f.rho, 0);
  EXPECT_EQ(f.s_e, 2.0);
  EXPECT_TRUE(f.has_gap());
  EXPECT_EQ(f.gamma.lo, -2.0);
  EXPECT_EQ(f.gamma.hi, 0.0);
  EXPECT_EQ(f.gamma_minus().lo, -1.0);
  EXPECT_EQ(f.gamma_plus().lo, -2.0);
  EXPECT_EQ(f.gamma_plus().hi, -1.0);
  EXPECT_LT(rel(gap_gamma(f), 16.0 * 6.0 / (2.0 * 2.0)), 1e-12);
  EXPECT_EQ(gap_gamma(f), 24.0);
}

TEST(Frame, RhoZeroMakesEdgeEqualGap) {
  for (double w : {4.5, 5.0, 6.0, 7.25, 11.0}) {
    const auto f = SpectralFrame::make(4.0, w);
    ASSERT_EQ(f.rho, 0);
    EXPECT_EQ(f.s_e, f.s_gamma);
    EXPECT_EQ(gamma_edge(f), gap_gamma(f));
  }
}

TEST(Frame, EmbeddedConstantsAtOnePointFive) {
  const auto f = SpectralFrame::make(4.0, 1.5);
  EXPECT_EQ(f.rho, 2);
  EXPECT_NEAR(f.s_e, 0.5, 1e-15);
  EXPECT_FALSE(f.has_gap());
  EXPECT_LT(rel(gamma_edge(f), 16.0 * 1.5 * 3.0 / 0.25), 1e-12);
  EXPECT_LT(rel(gamma_band(f), 4.0 * 1.5 * 4.0 / 0.25), 1e-12);
  EXPECT_LT(rel(edge_constant(f), 1.0 + 8.0 * 1.5 * 3.0 / 0.5), 1e-12);
  EXPECT_LT(rel(gamma_edge(f), 288.0), 1e-12);
  EXPECT_LT(rel(gamma_band(f), 96.0), 1e-12);
  EXPECT_LT(rel(edge_constant(f), 73.0), 1e-12);
  EXPECT_EQ(f.sigma_b.lo, -1.5);
  EXPECT_NEAR(f.sigma_b.hi, -0.5, 1e-15);
}

TEST(Frame, BandConstantAtFive) {
  const auto f = SpectralFrame::make(4.0, 5.0);
  EXPECT_EQ(f.rho, 0);
  EXPECT_EQ(f.s_e, 1.0);
  EXPECT_LT(rel(band_constant(f), 1.0 + 4.0 * 5.0 * 4.0 * 2.0 / 1.0), 1e-12);
  EXPECT_LT(rel(band_constant(f), 161.0), 1e-12);
}

TEST(Frame, RejectsBadInputs) {
  EXPECT_THROW(SpectralFrame::make(4.0, 0.0), InvalidArgument);
  EXPECT_THROW(SpectralFrame::make(-1.0, 2.0), InvalidArgument);
}

TEST(Threshold, Examples) {
  EXPECT_EQ(frequency_threshold(4.0, 0.0), 4.0);
  EXPECT_NEAR(frequency_threshold(4.0, 0.5), 4.5 + std::sqrt(0.5 * 8.5), 1e-15);
  EXPECT_NEAR(frequency_threshold(4.0, 0.5), 6.5616, 1e-4);
}

TEST(Norms, Examples) {
  EXPECT_EQ(lp_power_norm({}, 1.5), 0.0);
  EXPECT_NEAR(lp_power_norm({{hl(1), 2.0}}, 1.5), std::pow(2.0, 1.5), 1e-15);
  EXPECT_EQ(lp_power_norm({{hl(1), 1.0}, {hl(2), -1.0}, {hl(3), 1.0}}, 2.0), 3.0);
  EXPECT_EQ(bargmann_norm({{hl(3), -0.5}}), 1.5);
  EXPECT_EQ(bargmann_norm({}), 0.0);
  EXPECT_EQ(bargmann_norm({{hl(1), 1.0}, {hl(2), 1.0}}), 3.0);
  EXPECT_THROW(bargmann_norm({{hl(0), 1.0}}), InvalidArgument);
  EXPECT_THROW(lp_power_norm({{hl(1), 1.0}}, 0.5), InvalidArgument);
  EXPECT_EQ(sup_norm({{hl(1), -4.0}, {hl(2), 3.0}}), 4.0);
}

TEST(Effective, PointwiseCombination) {
  const auto q = effective_potentials(single_site(1.0, 0.0, 2.0), 24.0);
  EXPECT_EQ(q.q_minus.at(hl(1)), 26.0);
  EXPECT_EQ(q.q_plus.at(hl(1)), 24.0);
  const auto z = effective_potentials(Envelopes{}, 24.0);
  EXPECT_EQ(lp_power_norm(z.q_plus, 1.0) + lp_power_norm(z.q_minus, 1.0), 0.0);
}

TEST(T1, ChainValue) {
  const auto f = SpectralFrame::make(4.0, 6.0);
  const auto b = bound_T1(f, single_site(1.0, 0.0, 0.0), 1.0, 1.0, NormSpec::bargmann(), true);
  const double gamma = 16.0 * 6.0 / (2.0 * 2.0);
  const double q = gamma * 1.0 * 1.0 + 0.0;
  const double chain = (9.0 * 6.0 / 2.0) * 1.0 * (1.0 + 2.0 * q / 6.0) * (1.0 * q);
  EXPECT_LT(rel(b.minus.value, chain), 1e-12);
  EXPECT_LT(rel(b.minus.value, 5832.0), 1e-12);
  EXPECT_LT(rel(b.plus.value, 5832.0), 1e-12);
  EXPECT_LT(rel(b.total.value, 2 * 5832.0), 1e-12);
  EXPECT_TRUE(b.minus.preconditions_hold());
  EXPECT_EQ(b.minus.inputs.at("gamma"), 24.0);
}

TEST(T1, StrictNormRequiresDimensionThree) {
  const auto f = SpectralFrame::make(4.0, 6.0);
  const auto b = bound_T1(f, single_site(1.0, 0.0, 0.0), 1.0, 1.0, NormSpec::bargmann(), false);
  EXPECT_FALSE(b.minus.preconditions_hold());
  EXPECT_TRUE(bound_T1(f, single_site(1.0, 0.0, 0.0), 1.0, 1.0, NormSpec::lp(3)).minus.preconditions_hold());
}

TEST(T1, ClosedGapGivesSentinel) {
  const auto f = SpectralFrame::make(4.0, 3.0);
  const auto b = bound_T1(f, single_site(1.0, 1.0, 1.0), 1.0, 1.0, NormSpec::lp(3));
  EXPECT_EQ(b.total.value, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(b.total.preconditions_hold());
}

TEST(T2, PreconditionFlags) {
  const auto f = SpectralFrame::make(4.0, 8.0);
  const auto b = bound_T2(f, single_site(0.5, 0.3, 0.3), 1.0, 1.0, 2.5, NormSpec::lp(3));
  EXPECT_TRUE(b.total.preconditions_hold());
  const auto bad = bound_T2(f, single_site(0.5, 0.3, 0.3), 1.0, 1.0, 1.5, NormSpec::lp(3));
  EXPECT_FALSE(bad.total.preconditions_hold());
  EXPECT_EQ(b.minus.inputs.at("gamma_minus_lo_literal"), 0.3);
  EXPECT_EQ(b.minus.inputs.at("gamma_minus_lo_interpreted"), -0.3);
  const double qm = 2.5 * 0.25 + 0.3;
  EXPECT_LT(rel(b.minus.value, std::pow(qm, 1.5)), 1e-12);
  EXPECT_THROW(bound_T2(f, Envelopes{}, 1.0, 1.0, 0.0, NormSpec::lp(3)), InvalidArgument);
}

TEST(Exact, ThresholdsDoNotFlap) {
  EXPECT_FALSE(exact::c_above_gap_threshold(6.0, 6.0, 4.0));
  EXPECT_TRUE(exact::c_above_gap_threshold(std::nextafter(6.0, 7.0), 6.0, 4.0));
  EXPECT_FALSE(exact::c_above_gap_threshold(1.0, 4.0, 4.0));
  EXPECT_TRUE(exact::product_within_sqrt3(1.0, 1.7320508));
  EXPECT_FALSE(exact::product_within_sqrt3(1.0, 1.7320509));
  EXPECT_TRUE(exact::product_within_sqrt3(0.0, 1e300));
  EXPECT_TRUE(exact::frequency_condition(4.0, 4.0, 0.0));
  EXPECT_FALSE(exact::frequency_condition(std::nextafter(4.0, 0.0), 4.0, 0.0));
  EXPECT_TRUE(exact::frequency_condition(6.5616, 4.0, 0.5));
  EXPECT_FALSE(exact::frequency_condition(6.5615, 4.0, 0.5));
  EXPECT_TRUE(exact::below_half_gap(0.99, 6.0, 4.0));
  EXPECT_FALSE(exact::below_half_gap(1.0, 6.0, 4.0));
}

TEST(T3, NeedsCuboidAndRho) {
  const auto f5 = SpectralFrame::make(4.0, 5.0);
  EXPECT_THROW(bound_T3(f5, Envelopes{}, 1, 1, NormSpec::lp(3), false), InvalidArgument);
  const auto b = bound_T3(f5, single_site(1, 1, 1), 1, 1, NormSpec::lp(3), true);
  EXPECT_FALSE(b.edge.applicable);
  EXPECT_TRUE(std::isinf(b.edge.value));
  EXPECT_EQ(b.band_minus.inputs.at("C_b"), 161.0);
}

TEST(T3, FormulaRecomputed) {
  const auto f = SpectralFrame::make(4.0, 1.5);
  const Envelopes e = single_site(0.2, 0.1, 0.3);
  const auto b = bound_T3(f, e, 2.0, 3.0, NormSpec::lp(3), true);
  const double gb = 96.0, ge = 288.0, cb = 1.0 + 4.0 * 1.5 * 1.0 * 4.0 / 0.25, ce = 73.0;
  const double qbm = gb * 0.04 + 0.3, qem = ge * 0.04 + 0.3, qep = ge * 0.04 + 0.1;
  EXPECT_LT(rel(b.band_minus.value, cb * (4.0 + 2.0 * qbm / 1.5) * 2.0 * std::pow(qbm, 1.5)), 1e-12);
  const double edge = ce * 3.0 * (3.0 + 2.0 * qep / 1.5) * std::pow(qep, 1.5) +
                      ce * 2.0 * (3.0 + 2.0 * qem / 1.5) * std::pow(qem, 1.5);
  EXPECT_LT(rel(b.edge.value, edge), 1e-12);
}

TEST(Properties, ZeroLaw) {
  for (double w : {1.5, 5.0, 6.0}) {
    const auto f = SpectralFrame::make(4.0, w);
    const Envelopes zero = single_site(0.0, 0.0, 0.0);
    if (f.has_gap())
      for (double v : {bound_T1(f, zero, 1, 1, NormSpec::lp(3)).total.value,
                       bound_T2(f, zero, 1, 1, 0.5, NormSpec::lp(3)).total.value})
        EXPECT_EQ(v, 0.0);
    const auto t3 = bound_T3(f, zero, 1, 1, NormSpec::lp(3), true);
    EXPECT_EQ(t3.band_minus.value, 0.0);
    EXPECT_EQ(t3.band_plus.value, 0.0);
    if (t3.edge.applicable) EXPECT_EQ(t3.edge.value, 0.0);
    for (auto c : {Corollary::Cor42, Corollary::Cor43, Corollary::Cor44}) {
      if (c != Corollary::Cor44 && !f.has_gap()) continue;
      for (const auto& r : bound_1d(f, zero, c, 0.5))
        if (r.applicable) EXPECT_EQ(r.value, 0.0) << r.formula;
    }
  }
}

TEST(Properties, ExactlyLinearInCks) {
  std::mt19937_64 rng(41);
  for (double w : {1.5, 5.0, 8.0}) {
    const auto f = SpectralFrame::make(4.0, w);
    const Envelopes e = random_envelopes(rng, 6);
    const auto base = all_values(f, e, 1.0, 1.0);
    for (double k : {2.0, 0.5, 4.0, 1024.0}) {
      const auto scaled = all_values(f, e, k, k);
      for (std::size_t i = 0; i < base.size(); ++i)
        if (std::isfinite(base[i])) EXPECT_EQ(scaled[i], k * base[i]) << w << " " << i;
    }
    const auto three = all_values(f, e, 3.0, 3.0);
    for (std::size_t i = 0; i < base.size(); ++i)
      if (std::isfinite(base[i])) EXPECT_LT(rel(three[i], 3.0 * base[i]), 1e-15);
  }
}

TEST(Properties, MonotoneInEnvelopes) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> bump(0.0, 0.5);
  for (double w : {1.5, 5.0, 8.0}) {
    const auto f = SpectralFrame::make(4.0, w);
    for (int trial = 0; trial < 20; ++trial) {
      const Envelopes e = random_envelopes(rng, 5);
      Envelopes g = e;
      for (auto* m : {&g.u, &g.v_plus, &g.v_minus})
        for (auto& [s, v] : *m) v += bump(rng);
      const auto a = all_values(f, e, 1.0, 1.0);
      const auto b = all_values(f, g, 1.0, 1.0);
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_GE(b[i], a[i]);
    }
  }
}

TEST(OneD, Cor42EqualsT1Bitwise) {
  std::mt19937_64 rng(47);
  for (double w : {5.0, 6.0, 8.0}) {
    const auto f = SpectralFrame::make(4.0, w);
    const Envelopes e = random_envelopes(rng, 5);
    const auto t1 = bound_T1(f, e, 1.0, 1.0, NormSpec::bargmann(), true);
    const auto c = bound_1d(f, e, Corollary::Cor42);
    ASSERT_EQ(c.size(), 3u);
    const BoundResult* t[] = {&t1.minus, &t1.plus, &t1.total};
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(std::memcmp(&c[i].value, &t[i]->value, sizeof(double)), 0);
      EXPECT_EQ(c[i].inputs, t[i]->inputs);
      EXPECT_EQ(c[i].preconditions, t[i]->preconditions);
    }
  }
  const auto f = SpectralFrame::make(4.0, 6.0);
  const auto c = bound_1d(f, single_site(1.0, 0.0, 0.0), Corollary::Cor42);
  EXPECT_LT(rel(c[0].value, 5832.0), 1e-12);
}

TEST(OneD, Cor44EdgeUsesFourTimesBandGamma) {
  const auto f = SpectralFrame::make(4.0, 1.5);
  const auto r = bound_1d(f, single_site(0.1, 0.0, 0.0), Corollary::Cor44);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[2].inputs.at("gamma_e"), 4.0 * r[2].inputs.at("gamma_b"));
  EXPECT_LT(rel(r[2].inputs.at("gamma_b"), 96.0), 1e-12);
  const auto t3 = bound_T3(f, single_site(0.1, 0.0, 0.0), 1.0, 1.0, NormSpec::bargmann(), true);
  EXPECT_EQ(r[0].value, t3.band_minus.value);
  const auto rho0 = bound_1d(SpectralFrame::make(4.0, 5.0), single_site(0.1, 0, 0), Corollary::Cor44);
  EXPECT_FALSE(rho0[2].applicable);
}

TEST(OneD, Cor43NeedsConstantAndFlags) {
  const auto f = SpectralFrame::make(4.0, 40.0);
  EXPECT_THROW(bound_1d(f, Envelopes{}, Corollary::Cor43), InvalidArgument);
  const auto r = bound_1d(f, single_site(0.0, 0.0, 1.1), Corollary::Cor43, 0.13);
  EXPECT_TRUE(r[2].preconditions_hold());
  EXPECT_LT(rel(r[2].value, 1.1 + 0.0), 1e-12);
  EXPECT_THROW(bound_1d(SpectralFrame::make(8.0, 10.0), Envelopes{}, Corollary::Cor42), InvalidArgument);
}

TEST(OneD, CorollaryNames) {
  for (auto c : {Corollary::Cor42, Corollary::Cor43, Corollary::Cor44})
    EXPECT_EQ(corollary_from_string(to_string(c)), c);
  EXPECT_FALSE(corollary_from_string("cor45").has_value());
}
