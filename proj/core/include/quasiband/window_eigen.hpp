#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "quasiband/finite_volume.hpp"

namespace quasiband {

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;  // unit norm
  double residual = 0.0;    // ||M v - value v||
};

struct WindowEigenOptions {
  /// Dense Hermitian eigensolve up to this dimension, shift-invert above.
  Eigen::Index dense_limit = 2000;
  /// Eigenvalues closer than this (relative to ||M||) are resolved as a cluster.
  double cluster_width = 1e-9;
  int inverse_iterations = 4;
  std::uint64_t seed = 20240601;
  CountOptions count;
};

/// All eigenpairs with eigenvalue in (lo, hi], ascending.
std::vector<EigenPair> eigenpairs_in(const SymmetricOperator& m, double lo, double hi,
                                     const WindowEigenOptions& opts = {});

/// Eigenvalues only, dense path (used by tests and small problems).
Eigen::VectorXd dense_eigenvalues(const SymmetricOperator& m);

}  // namespace quasiband
