#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "quasiband/finite_volume.hpp"

namespace quasiband {

/// Repeated symmetric-indefinite factorizations of (M - sigma I) for one
/// matrix. The sparse symbolic analysis is done once and reused across
/// shifts. Not thread-safe; create one per thread.
class ShiftedFactorization {
 public:
  explicit ShiftedFactorization(const SymmetricOperator& m, const CountOptions& opts = {});
  ~ShiftedFactorization();
  ShiftedFactorization(const ShiftedFactorization&) = delete;
  ShiftedFactorization& operator=(const ShiftedFactorization&) = delete;

  /// Factor at `shift`. Returns false if a pivot is below tolerance (the
  /// factorization is then unusable for counting).
  bool factor(double shift);
  Inertia inertia() const;
  double min_abs_pivot() const noexcept { return min_abs_pivot_; }
  double pivot_tolerance() const noexcept { return tolerance_; }

  /// Solve (M - shift I) X = B using the last factorization.
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const;

  /// count_below with the shift-perturbation ladder.
  Eigen::Index count_below(double mu);

  bool dense() const noexcept { return dense_; }

 private:
  struct Sparse;
  struct DenseState;

  const SymmetricOperator& op_;
  CountOptions opts_;
  bool dense_ = false;
  double tolerance_ = 0.0;
  double min_abs_pivot_ = 0.0;
  Inertia inertia_;
  std::unique_ptr<Sparse> sparse_;
  std::unique_ptr<DenseState> dense_state_;
};

}  // namespace quasiband
