#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasiband/finite_volume.hpp"
#include "quasiband/lattice.hpp"
#include "quasiband/site.hpp"
#include "quasiband/spectral_window.hpp"
#include "quasiband/window_eigen.hpp"

namespace quasiband {

/// Real tau-periodic potential given by its time-Fourier coefficients,
/// V_x(t) = sum_{k=-K..K} c_x(k) e^{i k omega t}, tau = 2 pi / omega.
class TimePeriodicPotential {
 public:
  TimePeriodicPotential() = default;
  /// `coeffs[site]` holds c(-K..K) (size 2K+1, same K for every site).
  TimePeriodicPotential(double omega, std::map<Site, std::vector<Complex>> coeffs,
                        std::optional<CellIndex> support_cuboid = std::nullopt);

  double omega() const noexcept { return omega_; }
  int bandwidth() const noexcept { return bandwidth_; }
  const std::map<Site, std::vector<Complex>>& coefficients() const noexcept { return coeffs_; }
  const std::optional<CellIndex>& support_cuboid() const noexcept { return cuboid_; }

  /// Coefficient c_x(k); zero outside the stored band or support.
  Complex coefficient(const Site& x, int k) const;
  double value(const Site& x, double t) const;
  bool empty() const noexcept { return coeffs_.empty(); }
  /// True when only the k = 0 coefficients are nonzero.
  bool time_constant() const;

  TimePeriodicPotential with_omega(double omega) const;
  TimePeriodicPotential scaled(double factor) const;
  /// Potential built from -V(-t): c'(k) = -c(-k).
  TimePeriodicPotential reflected() const;

 private:
  double omega_ = 1.0;
  int bandwidth_ = 0;
  std::map<Site, std::vector<Complex>> coeffs_;
  std::optional<CellIndex> cuboid_;
};

TimePeriodicPotential cosine_potential(double omega, const std::vector<Site>& sites, double amplitude,
                                       std::optional<CellIndex> cuboid = std::nullopt);
TimePeriodicPotential constant_potential(double omega, const SiteFunction& values,
                                         std::optional<CellIndex> cuboid = std::nullopt);

/// (z)_+ and (z)_- with z = (z)_+ - (z)_-.
inline double positive_part(double z) { return 0.5 * (std::abs(z) + z); }
inline double negative_part(double z) { return 0.5 * (std::abs(z) - z); }

struct Envelopes {
  SiteFunction u;
  SiteFunction v_plus;
  SiteFunction v_minus;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
};

enum class EnvelopeMode { Sampled, RigorousOverestimate };

/// Pointwise sup envelopes of V over a uniform time grid. The rigorous mode
/// replaces u by the coefficient l1 norm, which bounds |V| for every t.
Envelopes sample_envelopes(const TimePeriodicPotential& v, int time_grid = 256,
                           EnvelopeMode mode = EnvelopeMode::Sampled);

/// Hermitian truncation of d + h_o + V on time modes [mode_lo, mode_hi]
/// times the spatial box. Rows are mode-major: row = (n - mode_lo) * box + s.
class QuasiEnergyMatrix {
 public:
  int mode_lo() const noexcept { return mode_lo_; }
  int mode_hi() const noexcept { return mode_hi_; }
  int num_modes() const noexcept { return mode_hi_ - mode_lo_ + 1; }
  double omega() const noexcept { return omega_; }
  Eigen::Index box_size() const noexcept { return inner_.dimension(); }

  const SymmetricOperator& inner() const noexcept { return inner_; }
  const SymmetricOperator& op() const noexcept { return full_; }
  const SparseHermitian& matrix() const noexcept { return full_.matrix(); }

  Eigen::Index row(int mode, Eigen::Index box_row) const { return (mode - mode_lo_) * box_size() + box_row; }
  /// Block of a full-length vector belonging to `mode`.
  Eigen::VectorXcd mode_component(const Eigen::VectorXcd& v, int mode) const;

  /// Squared mass on the two outermost modes at each end plus the outermost
  /// spatial shell, for a unit vector.
  double leak(const Eigen::VectorXcd& v) const;
  /// Squared mass on the two outermost modes at each end only.
  double mode_leak(const Eigen::VectorXcd& v) const;

 private:
  friend QuasiEnergyMatrix assemble_block_matrix(SymmetricOperator inner, const TimePeriodicPotential& v,
                                                 int mode_lo, int mode_hi);
  int mode_lo_ = 0;
  int mode_hi_ = 0;
  double omega_ = 1.0;
  SymmetricOperator inner_;
  SymmetricOperator full_;
};

/// Symmetric window [-N, N]; N must cover the potential's Fourier band.
QuasiEnergyMatrix assemble_quasienergy(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                       const TruncationSpec& spec, int half_width);
QuasiEnergyMatrix assemble_quasienergy_window(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                              const TruncationSpec& spec, int mode_lo, int mode_hi);

/// Reflected operator d - h_o + W with h_o replaced by -h_o; spectrum is
/// the negation of the original one when W = -V(-t).
QuasiEnergyMatrix assemble_reflected_quasienergy(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                                 const TruncationSpec& spec, int half_width);

inline constexpr double kEdgeGuard = 1e-8;
inline constexpr double kLeakTolerance = 1e-6;

struct QuasiEigenvalue {
  double value = 0.0;
  double leak = 0.0;
  double residual = 0.0;
};

struct QuasiCount {
  SpectralWindow window;          // as requested
  SpectralWindow guarded;         // shrunk by the edge guard
  Eigen::Index raw = 0;           // inertia count
  Eigen::Index filtered = 0;      // eigenpairs with leak below tolerance
  std::vector<QuasiEigenvalue> eigenvalues;
};

struct QuasiCountOptions {
  double edge_guard = kEdgeGuard;
  double leak_tolerance = kLeakTolerance;
  WindowEigenOptions eigen;
};

/// Count eigenvalues of the truncated quasi-energy operator in a window
/// inside (-omega, 0]; raw (inertia) and leak-filtered.
QuasiCount quasi_count(const QuasiEnergyMatrix& q, const SpectralWindow& window, const QuasiCountOptions& opts = {});

/// lambda - omega * ceil(lambda / omega), in (-omega, 0].
double fold_modulo(double lambda, double omega);

struct PeriodicityReport {
  double max_deviation = 0.0;       // shifted-window comparison
  double max_intra_deviation = 0.0; // lambda + omega inside the same window
  int matched = 0;
  int candidates = 0;
  struct Unmatched {
    double value;
    double leak;
  };
  std::vector<Unmatched> unmatched;
};

struct PeriodicityOptions {
  double margin = 1e-6;
  double leak_tolerance = 1e-10;
  double match_radius = 1e-6;
  WindowEigenOptions eigen;
};

/// Eigenvalues of the [-N, N] truncation in (-omega, 0) with small mode
/// leak, shifted by omega, matched against the [-N+1, N+1] truncation.
/// Both matrices share the spatial box, so only the mode cut is tested.
PeriodicityReport periodicity_check(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                    const TruncationSpec& spec, int half_width, const PeriodicityOptions& opts = {});

// Membership predicates.
bool in_cuboid(const CellIndex& x, const CellIndex& m, int dim);
bool in_half_space(const CellIndex& x, int axis, int z);
bool in_cone(const CellIndex& x, const CellIndex& m, int dim);

struct ModeSupportReport {
  bool applicable = true;
  std::string region;  // "sigma_e", "sigma_b" or "n/a"
  struct Mode {
    int mode;
    double norm;
    double outside_ratio;
  };
  std::vector<Mode> modes;
  bool pass = true;
};

/// Mass fraction of each designated mode component lying outside the
/// cuboid Q(m). `s_e` locates the eigenvalue in sigma_e = (-s_e, 0) or
/// sigma_b = (-omega, -s_e); the designated modes are -1..-rho or
/// -1..-(rho+1) respectively.
ModeSupportReport mode_support_check(const QuasiEnergyMatrix& q, const EigenPair& pair, int rho, double s_e,
                                     const CellIndex& cuboid, int dim, double tol);

struct ModeSupportScan {
  int tested = 0;
  int passed = 0;
  std::vector<ModeSupportReport> reports;
};

/// Run mode_support_check on every low-leak eigenpair in (-omega, 0).
ModeSupportScan mode_support_scan(const QuasiEnergyMatrix& q, int rho, double s_e, const CellIndex& cuboid, int dim,
                                  double tol, double leak_tolerance = kLeakTolerance,
                                  const WindowEigenOptions& eigen = {});

}  // namespace quasiband
