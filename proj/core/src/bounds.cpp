#include "quasiband/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "quasiband/error.hpp"

namespace quasiband {

namespace {

using boost::multiprecision::cpp_rational;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Doubles are dyadic rationals, so the conversion is exact.
cpp_rational rational(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("exact comparison needs finite inputs");
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  cpp_rational r(scaled);
  const int shift = exponent - 53;
  if (shift > 0)
    r *= cpp_rational(boost::multiprecision::cpp_int(1) << shift);
  else if (shift < 0)
    r /= cpp_rational(boost::multiprecision::cpp_int(1) << -shift);
  return r;
}

void require_frame(const SpectralFrame& f) {
  if (!(f.omega > 0.0)) throw InvalidArgument(fmt::format("omega must be positive (got {})", f.omega));
}

SiteFunction pointwise(const Envelopes& env, double gamma, const SiteFunction& v) {
  SiteFunction q;
  std::set<Site> support;
  for (const auto& [x, _] : env.u) support.insert(x);
  for (const auto& [x, _] : v) support.insert(x);
  for (const Site& x : support) {
    const auto iu = env.u.find(x);
    const auto iv = v.find(x);
    const double u = iu == env.u.end() ? 0.0 : iu->second;
    const double w = iv == v.end() ? 0.0 : iv->second;
    q[x] = gamma * u * u + w;
  }
  return q;
}

struct Part {
  double norm = 0.0;
  double sup = 0.0;
};

Part measure(const SiteFunction& q, const NormSpec& norm) { return {apply_norm(q, norm), sup_norm(q)}; }

Precondition gap_open(const SpectralFrame& f) { return {"omega > s_plus", f.has_gap(), f.omega - f.s_plus}; }

Precondition norm_admissible(const NormSpec& norm, bool relaxed) {
  const bool ok = relaxed || (norm.kind == NormSpec::Kind::LpPower && norm.p >= 1.5);
  return {"norm is l^{d/2} with d >= 3", ok, norm.kind == NormSpec::Kind::LpPower ? norm.p - 1.5 : 0.0};
}

void echo_part(BoundResult& r, const std::string& tag, const Part& p, double cks) {
  r.inputs["norm_" + tag] = p.norm;
  r.inputs["sup_" + tag] = p.sup;
  r.inputs["cks_" + tag] = cks;
}

void finish(BoundResult& r, bool gate) {
  if (!gate) {
    r.value = kInf;
    if (r.note.empty()) r.note = "hypotheses fail; +inf sentinel";
  }
}

}  // namespace

SpectralFrame SpectralFrame::make(double s_plus, double omega) {
  if (!(omega > 0.0)) throw InvalidArgument(fmt::format("omega must be positive (got {})", omega));
  if (!(s_plus >= 0.0) || !std::isfinite(s_plus))
    throw InvalidArgument(fmt::format("spectral top must be finite and non-negative (got {})", s_plus));
  SpectralFrame f;
  f.s_plus = s_plus;
  f.omega = omega;
  f.s_gamma = omega - s_plus;
  f.rho = static_cast<int>(std::floor(s_plus / omega));
  f.s_e = (f.rho + 1) * omega - s_plus;
  // floor() can land one short when s_plus / omega rounds below an integer.
  if (f.s_e > omega) {
    f.rho += 1;
    f.s_e = (f.rho + 1) * omega - s_plus;
  }
  f.sigma_b = {-omega, -f.s_e, "sigma_b"};
  f.sigma_e = {-f.s_e, 0.0, "sigma_e"};
  if (f.has_gap())
    f.gamma = {-f.s_gamma, 0.0, "gamma"};
  else
    f.gamma = {0.0, 0.0, "gamma"};
  return f;
}

SpectralWindow SpectralFrame::gamma_minus() const {
  if (!has_gap()) return {0.0, 0.0, "gamma_minus"};
  return {-0.5 * s_gamma, 0.0, "gamma_minus"};
}

SpectralWindow SpectralFrame::gamma_plus() const {
  if (!has_gap()) return {0.0, 0.0, "gamma_plus"};
  return {-s_gamma, -0.5 * s_gamma, "gamma_plus"};
}

std::string NormSpec::describe() const {
  if (kind == Kind::Bargmann) return "bargmann";
  return fmt::format("lp^p(p={})", p);
}

double lp_power_norm(const SiteFunction& q, double p) {
  if (!(p >= 1.0)) throw InvalidArgument(fmt::format("norm exponent must be >= 1 (got {})", p));
  double s = 0.0;
  for (const auto& [_, value] : q) s += std::pow(std::abs(value), p);
  return s;
}

double bargmann_norm(const SiteFunction& q) {
  double s = 0.0;
  for (const auto& [x, value] : q) {
    const int n = x.cell[0];
    if (n < 1) throw InvalidArgument(fmt::format("bargmann norm needs half-line sites n >= 1 (got {})", n));
    s += n * std::abs(value);
  }
  return s;
}

double sup_norm(const SiteFunction& q) {
  double m = 0.0;
  for (const auto& [_, value] : q) m = std::max(m, std::abs(value));
  return m;
}

double apply_norm(const SiteFunction& q, const NormSpec& norm) {
  return norm.kind == NormSpec::Kind::Bargmann ? bargmann_norm(q) : lp_power_norm(q, norm.p);
}

EffectivePotentials effective_potentials(const Envelopes& env, double gamma_const) {
  if (!(gamma_const > 0.0)) throw InvalidArgument(fmt::format("gamma must be positive (got {})", gamma_const));
  return {pointwise(env, gamma_const, env.v_plus), pointwise(env, gamma_const, env.v_minus)};
}

bool BoundResult::preconditions_hold() const {
  if (!applicable) return false;
  return std::all_of(preconditions.begin(), preconditions.end(), [](const Precondition& p) { return p.satisfied; });
}

double frequency_threshold(double s_plus, double delta) {
  return s_plus + delta + std::sqrt(delta * (2.0 * s_plus + delta));
}

double gap_gamma(const SpectralFrame& f) { return 16.0 * f.omega / (f.s_gamma * f.s_gamma); }
double gamma_edge(const SpectralFrame& f) { return 16.0 * f.omega * (f.rho + 1) / (f.s_e * f.s_e); }
double gamma_band(const SpectralFrame& f) { return 4.0 * f.omega * (f.rho + 2) / (f.s_e * f.s_e); }
double band_constant(const SpectralFrame& f) {
  return 1.0 + 4.0 * f.omega * (f.omega - f.s_e) * (f.rho + 2) / (f.s_e * f.s_e);
}
double edge_constant(const SpectralFrame& f) { return 1.0 + 8.0 * f.omega * (f.rho + 1) / f.s_e; }

namespace exact {

bool c_above_gap_threshold(double c, double omega, double s_plus) {
  const cpp_rational sg = rational(omega) - rational(s_plus);
  if (sg <= 0) return false;
  return rational(c) * sg * sg > 4 * rational(omega);
}

bool product_within_sqrt3(double delta, double c) {
  const cpp_rational p = rational(delta) * rational(c);
  return p <= 0 || p * p <= 3;
}

bool frequency_condition(double omega, double s_plus, double delta) {
  const cpp_rational w = rational(omega), s = rational(s_plus), d = rational(delta);
  if (d < 0) return false;
  const cpp_rational lhs = w - s - d;
  if (lhs < 0) return false;
  return lhs * lhs >= d * (2 * s + d);
}

bool below_half_gap(double delta, double omega, double s_plus) {
  return 2 * rational(delta) < rational(omega) - rational(s_plus);
}

}  // namespace exact

GapBounds bound_T1(const SpectralFrame& frame, const Envelopes& env, double cks_minus, double cks_plus,
                   const NormSpec& norm, bool relaxed) {
  require_frame(frame);
  GapBounds out;
  out.minus.formula = "T1-minus";
  out.plus.formula = "T1-plus";
  out.total.formula = "T1-total";
  const std::vector<Precondition> pre{gap_open(frame), norm_admissible(norm, relaxed)};
  for (BoundResult* r : {&out.minus, &out.plus, &out.total}) {
    r->preconditions = pre;
    r->inputs["omega"] = frame.omega;
    r->inputs["s_plus"] = frame.s_plus;
    r->inputs["s_gamma"] = frame.s_gamma;
  }
  if (!frame.has_gap()) {
    for (BoundResult* r : {&out.minus, &out.plus, &out.total}) finish(*r, false);
    return out;
  }

  const double gamma = gap_gamma(frame);
  const auto q = effective_potentials(env, gamma);
  const Part pm = measure(q.q_minus, norm);
  const Part pp = measure(q.q_plus, norm);
  const double prefactor = 9.0 * frame.omega / frame.s_gamma;
  const double c_minus = prefactor * cks_minus * (1.0 + 2.0 * pm.sup / frame.omega);
  const double c_plus = prefactor * cks_plus * (1.0 + 2.0 * pp.sup / frame.omega);

  out.minus.value = c_minus * pm.norm;
  out.plus.value = c_plus * pp.norm;
  out.total.value = c_plus * pp.norm + c_minus * pm.norm;
  for (BoundResult* r : {&out.minus, &out.plus, &out.total}) r->inputs["gamma"] = gamma;
  echo_part(out.minus, "minus", pm, cks_minus);
  echo_part(out.plus, "plus", pp, cks_plus);
  echo_part(out.total, "minus", pm, cks_minus);
  echo_part(out.total, "plus", pp, cks_plus);
  out.total.inputs["C_minus"] = c_minus;
  out.total.inputs["C_plus"] = c_plus;
  return out;
}

GapBounds bound_T2(const SpectralFrame& frame, const Envelopes& env, double cks_minus, double cks_plus, double c,
                   const NormSpec& norm) {
  require_frame(frame);
  if (!(c > 0.0)) throw InvalidArgument(fmt::format("constant c must be positive (got {})", c));
  const double w = frame.omega, s = frame.s_plus;
  const double dp = env.delta_plus, dm = env.delta_minus;

  const Precondition c_big{"c > 4 omega / s_gamma^2", exact::c_above_gap_threshold(c, w, s),
                           frame.has_gap() ? c - 4.0 * w / (frame.s_gamma * frame.s_gamma) : -kInf};
  const Precondition dp_c{"delta_plus * c <= sqrt(3)", exact::product_within_sqrt3(dp, c), std::sqrt(3.0) - dp * c};
  const Precondition dm_c{"delta_minus * c <= sqrt(3)", exact::product_within_sqrt3(dm, c), std::sqrt(3.0) - dm * c};
  const Precondition freq_m{"omega >= frequency threshold(delta_minus)", exact::frequency_condition(w, s, dm),
                            w - frequency_threshold(s, dm)};
  const Precondition freq_p{"omega >= frequency threshold(delta_plus)", exact::frequency_condition(w, s, dp),
                            w - frequency_threshold(s, dp)};
  const Precondition half_m{"delta_minus < s_gamma / 2", exact::below_half_gap(dm, w, s), 0.5 * frame.s_gamma - dm};
  const Precondition half_p{"delta_plus < s_gamma / 2", exact::below_half_gap(dp, w, s), 0.5 * frame.s_gamma - dp};

  const auto q = effective_potentials(env, c);
  const Part pm = measure(q.q_minus, norm);
  const Part pp = measure(q.q_plus, norm);

  GapBounds out;
  out.minus.formula = "T2-minus";
  out.minus.value = cks_minus * pm.norm;
  out.minus.preconditions = {gap_open(frame), c_big, dp_c, freq_m, half_m, half_p};
  echo_part(out.minus, "minus", pm, cks_minus);

  out.plus.formula = "T2-plus";
  out.plus.value = cks_plus * pp.norm;
  out.plus.preconditions = {gap_open(frame), c_big, dm_c, freq_p, half_m, half_p};
  echo_part(out.plus, "plus", pp, cks_plus);

  out.total.formula = "T2-total";
  out.total.value = cks_plus * pp.norm + cks_minus * pm.norm;
  out.total.preconditions = {gap_open(frame), c_big, dp_c, dm_c, freq_m, freq_p, half_m, half_p};
  echo_part(out.total, "minus", pm, cks_minus);
  echo_part(out.total, "plus", pp, cks_plus);

  for (BoundResult* r : {&out.minus, &out.plus, &out.total}) {
    r->inputs["omega"] = w;
    r->inputs["s_plus"] = s;
    r->inputs["c"] = c;
    r->inputs["delta_plus"] = dp;
    r->inputs["delta_minus"] = dm;
    r->inputs["gamma_minus_lo_literal"] = dm;
    r->inputs["gamma_minus_lo_interpreted"] = -dm;
    r->note = "gamma_minus window read as [-delta_minus, 0); the literal [delta_minus, 0) leaves the gap";
  }
  return out;
}

namespace {

EmbeddedBounds embedded(const SpectralFrame& frame, const Envelopes& env, double cks_minus, double cks_plus,
                        const NormSpec& norm, double ge) {
  const double w = frame.omega;
  const double gb = gamma_band(frame);
  const double cb = band_constant(frame);
  const double ce = edge_constant(frame);
  const int rho = frame.rho;

  const auto qb = effective_potentials(env, gb);
  const auto qe = effective_potentials(env, ge);
  const Part bm = measure(qb.q_minus, norm);
  const Part bp = measure(qb.q_plus, norm);
  const Part em = measure(qe.q_minus, norm);
  const Part ep = measure(qe.q_plus, norm);

  EmbeddedBounds out;
  out.band_minus.formula = "T3-band-minus";
  out.band_minus.value = cb * (rho + 2 + 2.0 * bm.sup / w) * cks_minus * bm.norm;
  echo_part(out.band_minus, "minus", bm, cks_minus);

  out.band_plus.formula = "T3-band-plus";
  out.band_plus.value = cb * (rho + 2 + 2.0 * bp.sup / w) * cks_plus * bp.norm;
  echo_part(out.band_plus, "plus", bp, cks_plus);
  out.band_plus.note = "plus branch emitted alongside the minus branch; the sign reading is unresolved";

  out.edge.formula = "T3-edge";
  const Precondition rho_pos{"rho >= 1", rho >= 1, static_cast<double>(rho)};
  out.edge.preconditions = {rho_pos};
  if (rho >= 1) {
    const double c_minus = ce * cks_minus * (rho + 1 + 2.0 * em.sup / w);
    const double c_plus = ce * cks_plus * (rho + 1 + 2.0 * ep.sup / w);
    out.edge.value = c_plus * ep.norm + c_minus * em.norm;
    out.edge.inputs["C_minus"] = c_minus;
    out.edge.inputs["C_plus"] = c_plus;
  } else {
    out.edge.applicable = false;
    out.edge.value = kInf;
    out.edge.note = "not applicable: sigma_e bound needs rho >= 1";
  }
  echo_part(out.edge, "minus", em, cks_minus);
  echo_part(out.edge, "plus", ep, cks_plus);

  for (BoundResult* r : {&out.band_minus, &out.band_plus, &out.edge}) {
    r->inputs["omega"] = w;
    r->inputs["s_plus"] = frame.s_plus;
    r->inputs["rho"] = rho;
    r->inputs["s_e"] = frame.s_e;
    r->inputs["gamma_b"] = gb;
    r->inputs["gamma_e"] = ge;
    r->inputs["C_b"] = cb;
    r->inputs["C_e"] = ce;
  }
  return out;
}

}  // namespace

EmbeddedBounds bound_T3(const SpectralFrame& frame, const Envelopes& env, double cks_minus, double cks_plus,
                        const NormSpec& norm, bool has_cuboid) {
  require_frame(frame);
  if (!has_cuboid) throw InvalidArgument("embedded-eigenvalue bounds need a potential with a support cuboid");
  return embedded(frame, env, cks_minus, cks_plus, norm, gamma_edge(frame));
}

std::string to_string(Corollary c) {
  switch (c) {
    case Corollary::Cor42: return "cor42";
    case Corollary::Cor43: return "cor43";
    case Corollary::Cor44: return "cor44";
  }
  return "?";
}

std::optional<Corollary> corollary_from_string(const std::string& s) {
  if (s == "cor42") return Corollary::Cor42;
  if (s == "cor43") return Corollary::Cor43;
  if (s == "cor44") return Corollary::Cor44;
  return std::nullopt;
}

std::vector<BoundResult> bound_1d(const SpectralFrame& frame, const Envelopes& env, Corollary variant,
                                  std::optional<double> c) {
  require_frame(frame);
  if (std::abs(frame.s_plus - 4.0) > 1e-9)
    throw InvalidArgument(fmt::format("half-line bounds assume s_+ = 4 (got {})", frame.s_plus));
  const NormSpec norm = NormSpec::bargmann();
  const std::string tag = to_string(variant);

  auto rename = [&](BoundResult r, const std::string& suffix) {
    r.formula = tag + "-" + suffix;
    return r;
  };

  switch (variant) {
    case Corollary::Cor42: {
      const GapBounds g = bound_T1(frame, env, 1.0, 1.0, norm, true);
      return {rename(g.minus, "minus"), rename(g.plus, "plus"), rename(g.total, "total")};
    }
    case Corollary::Cor43: {
      if (!c) throw InvalidArgument("cor43 needs the constant c");
      if (!(*c > 0.0)) throw InvalidArgument(fmt::format("constant c must be positive (got {})", *c));
      const double w = frame.omega;
      const double delta = std::max(env.delta_plus, env.delta_minus);
      const std::vector<Precondition> pre{
          gap_open(frame),
          {"c > 4 omega / s_gamma^2", exact::c_above_gap_threshold(*c, w, 4.0),
           frame.has_gap() ? *c - 4.0 * w / (frame.s_gamma * frame.s_gamma) : -kInf},
          {"delta * c <= sqrt(3)", exact::product_within_sqrt3(delta, *c), std::sqrt(3.0) - delta * *c},
          {"omega >= frequency threshold(delta)", exact::frequency_condition(w, 4.0, delta),
           w - frequency_threshold(4.0, delta)},
          {"delta < s_gamma / 2", exact::below_half_gap(delta, w, 4.0), 0.5 * frame.s_gamma - delta}};
      const auto q = effective_potentials(env, *c);
      const Part pm = measure(q.q_minus, norm);
      const Part pp = measure(q.q_plus, norm);
      BoundResult minus, plus, total;
      minus.value = pm.norm;
      echo_part(minus, "minus", pm, 1.0);
      plus.value = pp.norm;
      echo_part(plus, "plus", pp, 1.0);
      total.value = pp.norm + pm.norm;
      echo_part(total, "minus", pm, 1.0);
      echo_part(total, "plus", pp, 1.0);
      minus.note = plus.note = "component of the total; only the total is a stated bound";
      std::vector<BoundResult> out{rename(minus, "minus"), rename(plus, "plus"), rename(total, "total")};
      for (auto& r : out) {
        r.preconditions = pre;
        r.inputs["omega"] = w;
        r.inputs["c"] = *c;
        r.inputs["delta"] = delta;
      }
      return out;
    }
    case Corollary::Cor44: {
      const EmbeddedBounds e = embedded(frame, env, 1.0, 1.0, norm, 4.0 * gamma_band(frame));
      std::vector<BoundResult> out{rename(e.band_minus, "band-minus"), rename(e.band_plus, "band-plus"),
                                   rename(e.edge, "edge")};
      return out;
    }
  }
  return {};
}

}  // namespace quasiband
