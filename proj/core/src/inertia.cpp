#include "quasiband/inertia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <lapacke.h>

#include "quasiband/error.hpp"

namespace quasiband {

namespace {

using Ldlt = Eigen::SimplicialLDLT<SparseHermitian, Eigen::Lower, Eigen::AMDOrdering<int>>;

// Signs of the two eigenvalues of a Hermitian 2x2 block [a b*; b c].
std::pair<double, double> block_eigenvalues(double a, Complex b, double c) {
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), std::abs(b));
  return {mean - rad, mean + rad};
}

void tally(Inertia& in, double v) {
  if (v < 0.0)
    ++in.negative;
  else if (v > 0.0)
    ++in.positive;
  else
    ++in.zero;
}

}  // namespace

struct ShiftedFactorization::Sparse {
  SparseHermitian shifted;
  std::vector<Eigen::Index> diag_slot;
  Eigen::VectorXd base_diag;
  Ldlt ldlt;
};

struct ShiftedFactorization::DenseState {
  bool real = false;
  Eigen::MatrixXd base_real;
  Eigen::MatrixXcd base_complex;
  Eigen::MatrixXd fact_real;
  Eigen::MatrixXcd fact_complex;
  std::vector<lapack_int> ipiv;
};

ShiftedFactorization::ShiftedFactorization(const SymmetricOperator& m, const CountOptions& opts)
    : op_(m), opts_(opts) {
  const Eigen::Index n = m.dimension();
  dense_ = n <= opts_.dense_limit;
  tolerance_ = opts_.pivot_tolerance * (m.inf_norm() > 0.0 ? m.inf_norm() : 1.0);

  if (dense_) {
    dense_state_ = std::make_unique<DenseState>();
    dense_state_->real = m.is_real();
    Eigen::MatrixXcd full = Eigen::MatrixXcd(m.matrix());
    if (dense_state_->real)
      dense_state_->base_real = full.real();
    else
      dense_state_->base_complex = std::move(full);
    dense_state_->ipiv.resize(static_cast<std::size_t>(std::max<Eigen::Index>(n, 1)));
    return;
  }

  sparse_ = std::make_unique<Sparse>();
  sparse_->shifted = m.matrix();
  sparse_->shifted.makeCompressed();
  sparse_->diag_slot.assign(static_cast<std::size_t>(n), -1);
  sparse_->base_diag.resize(n);
  for (Eigen::Index col = 0; col < n; ++col) {
    for (SparseHermitian::InnerIterator it(sparse_->shifted, col); it; ++it) {
      if (it.row() == col) {
        sparse_->diag_slot[col] = &it.valueRef() - sparse_->shifted.valuePtr();
        sparse_->base_diag[col] = it.value().real();
      }
    }
    if (sparse_->diag_slot[col] < 0) throw NumericalError("sparse operator is missing a structural diagonal entry");
  }
  sparse_->ldlt.analyzePattern(sparse_->shifted);
}

ShiftedFactorization::~ShiftedFactorization() = default;

bool ShiftedFactorization::factor(double shift) {
  inertia_ = {};
  min_abs_pivot_ = std::numeric_limits<double>::infinity();
  const Eigen::Index n = op_.dimension();
  if (n == 0) return true;

  if (dense_) {
    auto& st = *dense_state_;
    lapack_int info = 0;
    if (st.real) {
      st.fact_real = st.base_real;
      st.fact_real.diagonal().array() -= shift;
      info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), st.fact_real.data(),
                            static_cast<lapack_int>(n), st.ipiv.data());
    } else {
      st.fact_complex = st.base_complex;
      st.fact_complex.diagonal().array() -= shift;
      info = LAPACKE_zhetrf(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n),
                            reinterpret_cast<lapack_complex_double*>(st.fact_complex.data()),
                            static_cast<lapack_int>(n), st.ipiv.data());
    }
    if (info < 0) throw NumericalError(fmt::format("symmetric-indefinite factorization: bad argument {}", -info));
    auto d = [&](Eigen::Index i, Eigen::Index j) -> Complex {
      return st.real ? Complex(st.fact_real(i, j), 0.0) : st.fact_complex(i, j);
    };
    for (Eigen::Index k = 0; k < n;) {
      if (st.ipiv[k] > 0) {
        const double pivot = d(k, k).real();
        min_abs_pivot_ = std::min(min_abs_pivot_, std::abs(pivot));
        tally(inertia_, pivot);
        ++k;
      } else {
        const auto [lo, hi] = block_eigenvalues(d(k, k).real(), d(k + 1, k), d(k + 1, k + 1).real());
        min_abs_pivot_ = std::min({min_abs_pivot_, std::abs(lo), std::abs(hi)});
        tally(inertia_, lo);
        tally(inertia_, hi);
        k += 2;
      }
    }
    return min_abs_pivot_ > tolerance_;
  }

  auto& sp = *sparse_;
  Complex* values = sp.shifted.valuePtr();
  for (Eigen::Index i = 0; i < n; ++i) values[sp.diag_slot[i]] = Complex(sp.base_diag[i] - shift, 0.0);
  sp.ldlt.factorize(sp.shifted);
  if (sp.ldlt.info() != Eigen::Success) {
    min_abs_pivot_ = 0.0;
    return false;
  }
  const auto& dvec = sp.ldlt.vectorD();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pivot = std::real(dvec[i]);
    min_abs_pivot_ = std::min(min_abs_pivot_, std::abs(pivot));
    tally(inertia_, pivot);
  }
  return min_abs_pivot_ > tolerance_;
}

Inertia ShiftedFactorization::inertia() const { return inertia_; }

Eigen::MatrixXcd ShiftedFactorization::solve(const Eigen::MatrixXcd& rhs) const {
  const Eigen::Index n = op_.dimension();
  if (!dense_) return sparse_->ldlt.solve(rhs);

  const auto& st = *dense_state_;
  const auto nrhs = static_cast<lapack_int>(rhs.cols());
  if (st.real) {
    Eigen::MatrixXd parts(n, 2 * rhs.cols());
    parts.leftCols(rhs.cols()) = rhs.real();
    parts.rightCols(rhs.cols()) = rhs.imag();
    const lapack_int info =
        LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), 2 * nrhs, st.fact_real.data(),
                       static_cast<lapack_int>(n), st.ipiv.data(), parts.data(), static_cast<lapack_int>(n));
    if (info != 0) throw NumericalError("dense triangular solve failed");
    Eigen::MatrixXcd out(n, rhs.cols());
    out.real() = parts.leftCols(rhs.cols());
    out.imag() = parts.rightCols(rhs.cols());
    return out;
  }
  Eigen::MatrixXcd out = rhs;
  const lapack_int info = LAPACKE_zhetrs(
      LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), nrhs,
      reinterpret_cast<const lapack_complex_double*>(st.fact_complex.data()), static_cast<lapack_int>(n),
      st.ipiv.data(), reinterpret_cast<lapack_complex_double*>(out.data()), static_cast<lapack_int>(n));
  if (info != 0) throw NumericalError("dense triangular solve failed");
  return out;
}

Eigen::Index ShiftedFactorization::count_below(double mu) {
  static constexpr double kLadder[] = {1e-10, 1e-9, 1e-8};
  std::vector<double> tried{mu};
  if (factor(mu)) return inertia_.negative;
  for (double step : kLadder) {
    const double shifted = mu - step;
    tried.push_back(shifted);
    if (factor(shifted)) return inertia_.negative;
  }
  std::string list;
  for (double s : tried) list += fmt::format("{}{:.17g}", list.empty() ? "" : ", ", s);
  throw FactorizationBreakdown(fmt::format("factorization breakdown at shifts [{}]", list), tried);
}

Inertia inertia(const SymmetricOperator& m, double shift, const CountOptions& opts) {
  ShiftedFactorization f(m, opts);
  if (!f.factor(shift))
    throw FactorizationBreakdown(fmt::format("near-zero pivot at shift {:.17g}", shift), {shift});
  return f.inertia();
}

Eigen::Index count_below(const SymmetricOperator& m, double mu, const CountOptions& opts) {
  ShiftedFactorization f(m, opts);
  return f.count_below(mu);
}

Eigen::Index count_in(const SymmetricOperator& m, const SpectralWindow& window, const CountOptions& opts) {
  if (window.empty()) return 0;
  ShiftedFactorization f(m, opts);
  const Eigen::Index upper = f.count_below(window.hi + kEdgeEpsilon);
  const Eigen::Index lower = f.count_below(window.lo + kEdgeEpsilon);
  return std::max<Eigen::Index>(0, upper - lower);
}

}  // namespace quasiband
