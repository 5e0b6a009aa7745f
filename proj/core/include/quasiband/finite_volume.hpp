#pragma once

#include <complex>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "quasiband/lattice.hpp"
#include "quasiband/site.hpp"
#include "quasiband/spectral_window.hpp"

namespace quasiband {

using SparseHermitian = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

enum class Boundary { Dirichlet };

/// Finite box of the periodic graph: cells with sup-norm <= radius. In
/// half-line mode the sites are n = 1..radius of N with y_0 = 0.
struct TruncationSpec {
  int radius = 1;
  Boundary boundary = Boundary::Dirichlet;
  bool half_line = false;

  void validate(const PeriodicGraph& g) const;
};

/// Sparse Hermitian matrix together with the row <-> site bookkeeping.
class SymmetricOperator {
 public:
  SymmetricOperator() = default;
  SymmetricOperator(SparseHermitian matrix, std::vector<Site> sites, int radius, bool half_line);

  Eigen::Index dimension() const noexcept { return matrix_.rows(); }
  const SparseHermitian& matrix() const noexcept { return matrix_; }
  const std::vector<Site>& sites() const noexcept { return sites_; }
  std::optional<Eigen::Index> row_of(const Site& s) const;
  int radius() const noexcept { return radius_; }
  bool half_line() const noexcept { return half_line_; }

  /// Rows whose site lies on the outermost shell of the box (the truncation
  /// boundary; the physical boundary of the half-line at n = 1 excluded).
  const std::vector<Eigen::Index>& boundary_rows() const noexcept { return boundary_rows_; }

  double inf_norm() const noexcept { return inf_norm_; }
  bool is_real() const noexcept { return is_real_; }

  /// Absolute mass of the potential that fell outside the box.
  double truncated_mass = 0.0;
  std::vector<std::string> warnings;

 private:
  SparseHermitian matrix_;
  std::vector<Site> sites_;
  std::map<Site, Eigen::Index> index_;
  std::vector<Eigen::Index> boundary_rows_;
  int radius_ = 0;
  bool half_line_ = false;
  double inf_norm_ = 0.0;
  bool is_real_ = true;
};

/// Enumerate the kept sites of a truncation in row order.
std::vector<Site> box_sites(const PeriodicGraph& g, const TruncationSpec& spec);

/// Matrix of Delta + periodic potential + q on the box, Dirichlet restriction.
SymmetricOperator assemble_static(const PeriodicGraph& g, const TruncationSpec& spec, const SiteFunction& q,
                                  double sign_of_q = 1.0);

struct Inertia {
  Eigen::Index negative = 0;
  Eigen::Index zero = 0;
  Eigen::Index positive = 0;
};

/// Counting engine controls. Matrices up to `dense_limit` rows are factored
/// with dense Bunch-Kaufman; larger ones with sparse LDL^T.
struct CountOptions {
  Eigen::Index dense_limit = 1500;
  double pivot_tolerance = 1e-12;  // relative to ||M||_inf
};

/// Inertia of (M - shift I). Throws FactorizationBreakdown when a pivot
/// falls below the pivot tolerance; no retry at this level.
Inertia inertia(const SymmetricOperator& m, double shift, const CountOptions& opts = {});

/// Number of eigenvalues strictly below mu via Sylvester's law of inertia.
/// Near-singular shifts are retried at mu - {1e-10, 1e-9, 1e-8}.
Eigen::Index count_below(const SymmetricOperator& m, double mu, const CountOptions& opts = {});

inline constexpr double kEdgeEpsilon = 1e-10;

/// Eigenvalues in (lo, hi] as count_below(hi + eps) - count_below(lo + eps).
Eigen::Index count_in(const SymmetricOperator& m, const SpectralWindow& window, const CountOptions& opts = {});

struct NuOptions {
  double sign_of_q = 1.0;
  bool relaxed = false;
  /// Spectral top of h_o; computed from a band structure when absent.
  std::optional<double> s_plus;
  CountOptions count;
};

/// Eigenvalues of h_o + sign*q below mu (mu < 0 unless relaxed).
Eigen::Index nu_minus(const PeriodicGraph& g, const TruncationSpec& spec, const SiteFunction& q, double mu,
                      const NuOptions& opts = {});
/// Eigenvalues of h_o + sign*q at or above mu (mu > s_+ unless relaxed).
Eigen::Index nu_plus(const PeriodicGraph& g, const TruncationSpec& spec, const SiteFunction& q, double mu,
                     const NuOptions& opts = {});

/// Matrix-market coordinate dump (lower triangle, complex field).
void write_matrix_market(const SymmetricOperator& m, const std::filesystem::path& path);

}  // namespace quasiband
