#include "quasiband/window_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <lapacke.h>

#include "quasiband/error.hpp"
#include "quasiband/inertia.hpp"

namespace quasiband {

namespace {

std::vector<EigenPair> dense_window(const SymmetricOperator& op, double lo, double hi) {
  const auto n = static_cast<lapack_int>(op.dimension());
  std::vector<EigenPair> out;
  if (n == 0) return out;
  lapack_int found = 0;
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  const Eigen::MatrixXcd full = Eigen::MatrixXcd(op.matrix());

  if (op.is_real()) {
    Eigen::MatrixXd a = full.real();
    Eigen::MatrixXd z(n, n);
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, a.data(), n, lo, hi, 0, 0, 0.0,
                                           &found, w.data(), z.data(), n, support.data());
    if (info != 0) throw NumericalError(fmt::format("dense eigensolve failed (info {})", info));
    for (lapack_int k = 0; k < found; ++k) out.push_back({w[k], z.col(k).cast<Complex>(), 0.0});
  } else {
    Eigen::MatrixXcd a = full;
    Eigen::MatrixXcd z(n, n);
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n,
                                           reinterpret_cast<lapack_complex_double*>(a.data()), n, lo, hi, 0, 0,
                                           0.0, &found, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()),
                                           n, support.data());
    if (info != 0) throw NumericalError(fmt::format("dense eigensolve failed (info {})", info));
    for (lapack_int k = 0; k < found; ++k) out.push_back({w[k], z.col(k), 0.0});
  }
  for (auto& p : out) p.residual = (op.matrix() * p.vector - p.value * p.vector).norm();
  return out;
}

struct Bracket {
  double lo;
  double hi;
  Eigen::Index count;
};

// Isolate eigenvalues in (lo, hi] by inertia bisection; brackets narrower
// than `width` may hold a cluster.
std::vector<Bracket> bisect(ShiftedFactorization& f, double lo, double hi, double width) {
  std::vector<Bracket> done;
  struct Node {
    double lo, hi;
    Eigen::Index below_lo, below_hi;
  };
  std::vector<Node> stack{{lo, hi, f.count_below(lo), f.count_below(hi)}};
  while (!stack.empty()) {
    Node node = stack.back();
    stack.pop_back();
    const Eigen::Index k = node.below_hi - node.below_lo;
    if (k <= 0) continue;
    if (node.hi - node.lo <= width) {
      done.push_back({node.lo, node.hi, k});
      continue;
    }
    const double mid = 0.5 * (node.lo + node.hi);
    const Eigen::Index below_mid = f.count_below(mid);
    stack.push_back({mid, node.hi, below_mid, node.below_hi});
    stack.push_back({node.lo, mid, node.below_lo, below_mid});
  }
  std::sort(done.begin(), done.end(), [](const Bracket& a, const Bracket& b) { return a.lo < b.lo; });
  return done;
}

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& x) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(x.rows(), x.cols());
}

std::vector<EigenPair> shift_invert_window(const SymmetricOperator& op, double lo, double hi,
                                           const WindowEigenOptions& opts) {
  const Eigen::Index n = op.dimension();
  std::vector<EigenPair> out;
  if (n == 0) return out;

  ShiftedFactorization f(op, opts.count);
  const double scale = std::max(1.0, op.inf_norm());
  const auto brackets = bisect(f, lo, hi, opts.cluster_width * scale);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  for (const auto& b : brackets) {
    const Eigen::Index k = b.count;
    const Eigen::Index block = std::min<Eigen::Index>(n, k + 2);
    double shift = 0.5 * (b.lo + b.hi);
    // Nudge off an exact zero pivot; solve needs a nonsingular factor only.
    for (int attempt = 0; !f.factor(shift) && f.min_abs_pivot() == 0.0 && attempt < 3; ++attempt)
      shift += 1e-3 * (b.hi - b.lo);

    Eigen::MatrixXcd x(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = Complex(gauss(rng), gauss(rng));
    x = orthonormalize(x);
    for (int it = 0; it < opts.inverse_iterations; ++it) x = orthonormalize(f.solve(x));

    // Rayleigh-Ritz on the block; keep the k Ritz values nearest the bracket.
    const Eigen::MatrixXcd mx = op.matrix() * x;
    Eigen::MatrixXcd h = x.adjoint() * mx;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(h);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(block));
    for (Eigen::Index j = 0; j < block; ++j) order[j] = j;
    const double mid = 0.5 * (b.lo + b.hi);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
      return std::abs(ritz.eigenvalues()[a] - mid) < std::abs(ritz.eigenvalues()[c] - mid);
    });
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Index col = order[j];
      EigenPair p;
      p.value = ritz.eigenvalues()[col];
      p.vector = x * ritz.eigenvectors().col(col);
      p.vector.normalize();
      p.residual = (op.matrix() * p.vector - p.value * p.vector).norm();
      out.push_back(std::move(p));
    }
  }
  std::sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
  return out;
}

}  // namespace

std::vector<EigenPair> eigenpairs_in(const SymmetricOperator& m, double lo, double hi,
                                     const WindowEigenOptions& opts) {
  if (!(lo < hi)) return {};
  if (m.dimension() <= opts.dense_limit) return dense_window(m, lo, hi);
  return shift_invert_window(m, lo, hi, opts);
}

Eigen::VectorXd dense_eigenvalues(const SymmetricOperator& m) {
  const auto n = static_cast<lapack_int>(m.dimension());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  Eigen::MatrixXcd a = Eigen::MatrixXcd(m.matrix());
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                         reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info != 0) throw NumericalError(fmt::format("dense eigensolve failed (info {})", info));
  return w;
}

}  // namespace quasiband
