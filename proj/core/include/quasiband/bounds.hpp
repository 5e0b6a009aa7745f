#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasiband/floquet.hpp"
#include "quasiband/site.hpp"
#include "quasiband/spectral_window.hpp"

namespace quasiband {

/// Spectral bookkeeping of the unperturbed quasi-energy operator for a
/// given spectral top s_+ and frequency omega.
struct SpectralFrame {
  double s_plus = 0.0;
  double omega = 0.0;
  double s_gamma = 0.0;  // omega - s_plus
  int rho = 0;           // floor(s_plus / omega)
  double s_e = 0.0;      // (rho + 1) omega - s_plus, in (0, omega]
  SpectralWindow sigma_b;
  SpectralWindow sigma_e;
  SpectralWindow gamma;  // main gap, empty unless omega > s_plus

  static SpectralFrame make(double s_plus, double omega);

  bool has_gap() const noexcept { return omega > s_plus; }
  SpectralWindow gamma_minus() const;  // [-s_gamma/2, 0)
  SpectralWindow gamma_plus() const;   // (-s_gamma, -s_gamma/2]
};

struct NormSpec {
  enum class Kind { LpPower, Bargmann };
  Kind kind = Kind::LpPower;
  double p = 1.5;

  static NormSpec lp(int dim) { return {Kind::LpPower, dim / 2.0}; }
  static NormSpec bargmann() { return {Kind::Bargmann, 1.0}; }
  std::string describe() const;
};

/// sum_x |q_x|^p.
double lp_power_norm(const SiteFunction& q, double p);
/// sum_{n>=1} n |q_n| on half-line sites.
double bargmann_norm(const SiteFunction& q);
double sup_norm(const SiteFunction& q);
double apply_norm(const SiteFunction& q, const NormSpec& norm);

struct EffectivePotentials {
  SiteFunction q_plus;
  SiteFunction q_minus;
};

/// q_pm = gamma * u^2 + v_pm, pointwise.
EffectivePotentials effective_potentials(const Envelopes& env, double gamma_const);

struct Precondition {
  std::string name;
  bool satisfied = false;
  double margin = 0.0;  // positive when satisfied with room to spare

  friend bool operator==(const Precondition&, const Precondition&) = default;
};

struct BoundResult {
  std::string formula;
  double value = 0.0;  // >= 0, or +inf when the hypotheses exclude a finite bound
  bool applicable = true;
  std::vector<Precondition> preconditions;
  std::map<std::string, double> inputs;
  std::string note;

  bool preconditions_hold() const;

  friend bool operator==(const BoundResult&, const BoundResult&) = default;
};

struct GapBounds {
  BoundResult minus;
  BoundResult plus;
  BoundResult total;
};

struct EmbeddedBounds {
  BoundResult band_minus;
  BoundResult band_plus;
  BoundResult edge;
};

/// Main-gap bound with gamma = 16 omega / s_gamma^2 and C_ks supplied by
/// the caller. `relaxed` admits norms other than l^{d/2} with d >= 3.
GapBounds bound_T1(const SpectralFrame& frame, const Envelopes& env, double cks_minus, double cks_plus,
                   const NormSpec& norm, bool relaxed = false);

/// Large-frequency main-gap bound with free constant c. Hypotheses are
/// recorded as flags, not enforced.
GapBounds bound_T2(const SpectralFrame& frame, const Envelopes& env, double cks_minus, double cks_plus, double c,
                   const NormSpec& norm);

/// Embedded-eigenvalue bounds on sigma_b and sigma_e for potentials with
/// cuboid support. Both sign branches of the band bound are emitted.
EmbeddedBounds bound_T3(const SpectralFrame& frame, const Envelopes& env, double cks_minus, double cks_plus,
                        const NormSpec& norm, bool has_cuboid);

enum class Corollary { Cor42, Cor43, Cor44 };
std::string to_string(Corollary c);
std::optional<Corollary> corollary_from_string(const std::string& s);

/// Half-line bounds (s_+ = 4, C_ks = 1, Bargmann norm).
std::vector<BoundResult> bound_1d(const SpectralFrame& frame, const Envelopes& env, Corollary variant,
                                  std::optional<double> c = std::nullopt);

/// s_+ + delta + sqrt(delta (2 s_+ + delta)).
double frequency_threshold(double s_plus, double delta);

// Constants shared by the formulas.
double gap_gamma(const SpectralFrame& f);     // 16 omega / s_gamma^2
double gamma_edge(const SpectralFrame& f);    // 16 omega (rho+1) / s_e^2
double gamma_band(const SpectralFrame& f);    // 4 omega (rho+2) / s_e^2
double band_constant(const SpectralFrame& f); // 1 + 4 omega (omega - s_e)(rho+2) / s_e^2
double edge_constant(const SpectralFrame& f); // 1 + 8 omega (rho+1) / s_e

namespace exact {
/// c > 4 omega / s_gamma^2 evaluated in exact rational arithmetic.
bool c_above_gap_threshold(double c, double omega, double s_plus);
/// delta * c <= sqrt(3), exact.
bool product_within_sqrt3(double delta, double c);
/// omega >= s_plus + delta + sqrt(delta (2 s_plus + delta)), exact.
bool frequency_condition(double omega, double s_plus, double delta);
/// delta < (omega - s_plus) / 2, exact.
bool below_half_gap(double delta, double omega, double s_plus);
}  // namespace exact

}  // namespace quasiband
