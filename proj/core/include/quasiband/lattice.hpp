#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quasiband/site.hpp"

namespace quasiband {

using Complex = std::complex<double>;
using HermitianMatrix = Eigen::MatrixXcd;

/// Edge of the fundamental graph. The edge joins `tail` in cell 0 with
/// `head` in cell `offset`; its reverse is implied.
struct Edge {
  int tail = 0;
  int head = 0;
  CellIndex offset{};
};

/// Locally finite Gamma-periodic graph described by its fundamental domain.
///
/// Vertices are numbered 0..num_vertices()-1; `names` keeps the ids used by
/// input files. Construction validates finiteness of degrees and
/// connectivity of the translated graph; the object is immutable afterwards.
class PeriodicGraph {
 public:
  PeriodicGraph(int dim, std::vector<Edge> edges, std::vector<double> site_potential,
                std::vector<std::string> names = {});

  int dim() const noexcept { return dim_; }
  int num_vertices() const noexcept { return static_cast<int>(potential_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& site_potential() const noexcept { return potential_; }
  const std::vector<int>& degrees() const noexcept { return degrees_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  int max_degree() const noexcept { return max_degree_; }

  /// Copy with the periodic potential shifted by a constant.
  PeriodicGraph with_potential_shift(double shift) const;

 private:
  int dim_;
  std::vector<Edge> edges_;
  std::vector<double> potential_;
  std::vector<std::string> names_;
  std::vector<int> degrees_;
  int max_degree_ = 0;
};

// Builders. All emit simple graphs.
PeriodicGraph build_hypercubic(int dim, double site_potential = 0.0);
PeriodicGraph build_honeycomb(double site_potential = 0.0);
/// Z^1 chain with `pendants` leaves hung on every chain vertex. Two or more
/// pendants per cell produce a flat band at 1.
PeriodicGraph build_star_chain(int pendants = 2);

/// Resolve "z1".."z4", "zd:<d>", "honeycomb", "star-chain", "half-line".
/// Returns nullopt for unknown names.
std::optional<PeriodicGraph> builtin_graph(const std::string& name);

/// h_o(theta) = degree + potential - sum_edges e^{i<theta,a>} (+ h.c.).
HermitianMatrix fiber_matrix(const PeriodicGraph& g, const std::vector<double>& theta);

struct BandInterval {
  double lower = 0.0;
  double upper = 0.0;
};

struct BandStructure {
  int dim = 1;
  int grid_per_dim = 0;
  int num_bands = 0;
  /// Row-major flattening of the tensor grid, first coordinate slowest.
  std::vector<std::vector<double>> grid;
  /// bands[point][j], sorted non-decreasing in j.
  std::vector<std::vector<double>> bands;
  std::vector<BandInterval> band_intervals;
  double s_top = 0.0;
  std::vector<double> s_top_theta;
  std::vector<bool> flat_flags;
  double flat_tolerance = 0.0;

  double spacing() const;
};

/// Uniform tensor grid on [0, 2pi)^d. Grid points are evaluated in
/// parallel; results land at their grid index so output is deterministic.
BandStructure band_structure(const PeriodicGraph& g, int grid_per_dim);

struct TopMaximizer {
  std::vector<double> theta;
  std::vector<int> grid_index;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd neg_hessian_eigenvalues;
};

struct TopRegularityReport {
  enum class Status { Regular, NotRegular, PossiblyFlatTop, TooManyMaximizers };
  Status status = Status::NotRegular;
  std::vector<TopMaximizer> maximizers;
  double min_neg_hessian_eigenvalue = 0.0;
  std::string diagnostic;
};

inline constexpr double kRegularityTolerance = 1e-6;

/// Grid evidence for a regular spectral top: clusters the maximizers of the
/// top band and takes a central-difference Hessian at each. Never a proof.
TopRegularityReport top_regularity_diagnostic(const BandStructure& bs,
                                              double regularity_tolerance = kRegularityTolerance);

std::string to_string(TopRegularityReport::Status s);

}  // namespace quasiband
