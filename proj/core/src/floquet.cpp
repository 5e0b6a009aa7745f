#include "quasiband/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "quasiband/error.hpp"
#include "quasiband/inertia.hpp"

namespace quasiband {

namespace {

constexpr double kRealityTolerance = 1e-12;

std::string site_label(const Site& s) {
  return fmt::format("({},{},{},{}; v{})", s.cell[0], s.cell[1], s.cell[2], s.cell[3], s.vertex);
}

}  // namespace

TimePeriodicPotential::TimePeriodicPotential(double omega, std::map<Site, std::vector<Complex>> coeffs,
                                             std::optional<CellIndex> support_cuboid)
    : omega_(omega), coeffs_(std::move(coeffs)), cuboid_(support_cuboid) {
  if (!(omega_ > 0.0) || !std::isfinite(omega_))
    throw InvalidArgument(fmt::format("frequency must be positive and finite (got {})", omega_));
  std::size_t width = 0;
  for (const auto& [site, c] : coeffs_) {
    if (c.size() % 2 == 0) throw InvalidArgument("coefficient vector must have odd length 2K+1");
    width = std::max(width, c.size());
  }
  bandwidth_ = static_cast<int>(width / 2);
  for (auto& [site, c] : coeffs_) {
    // Pad every site to the common band.
    if (c.size() < width) {
      const std::size_t pad = (width - c.size()) / 2;
      std::vector<Complex> padded(width, Complex{});
      std::copy(c.begin(), c.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
      c = std::move(padded);
    }
    for (int k = 0; k <= bandwidth_; ++k) {
      const Complex a = c[bandwidth_ + k];
      const Complex b = c[bandwidth_ - k];
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(b - std::conj(a)) > kRealityTolerance * scale)
        throw InvalidArgument(fmt::format("potential at {} is not real: c(-{}) != conj(c({}))", site_label(site), k, k));
    }
    if (cuboid_) {
      bool nonzero = false;
      for (const Complex& z : c) nonzero = nonzero || z != Complex{};
      if (nonzero && !in_cuboid(site.cell, *cuboid_, kMaxDim))
        throw InvalidArgument(fmt::format("potential at {} lies outside the declared support cuboid", site_label(site)));
    }
  }
}

Complex TimePeriodicPotential::coefficient(const Site& x, int k) const {
  if (std::abs(k) > bandwidth_) return {};
  const auto it = coeffs_.find(x);
  if (it == coeffs_.end()) return {};
  return it->second[bandwidth_ + k];
}

double TimePeriodicPotential::value(const Site& x, double t) const {
  const auto it = coeffs_.find(x);
  if (it == coeffs_.end()) return 0.0;
  double sum = 0.0;
  for (int k = -bandwidth_; k <= bandwidth_; ++k)
    sum += (it->second[bandwidth_ + k] * std::polar(1.0, k * omega_ * t)).real();
  return sum;
}

bool TimePeriodicPotential::time_constant() const {
  for (const auto& [site, c] : coeffs_)
    for (int k = -bandwidth_; k <= bandwidth_; ++k)
      if (k != 0 && c[bandwidth_ + k] != Complex{}) return false;
  return true;
}

TimePeriodicPotential TimePeriodicPotential::with_omega(double omega) const {
  return TimePeriodicPotential(omega, coeffs_, cuboid_);
}

TimePeriodicPotential TimePeriodicPotential::scaled(double factor) const {
  auto c = coeffs_;
  for (auto& [site, v] : c)
    for (auto& z : v) z *= factor;
  return TimePeriodicPotential(omega_, std::move(c), cuboid_);
}

TimePeriodicPotential TimePeriodicPotential::reflected() const {
  auto c = coeffs_;
  for (auto& [site, v] : c) {
    std::reverse(v.begin(), v.end());
    for (auto& z : v) z = -z;
  }
  return TimePeriodicPotential(omega_, std::move(c), cuboid_);
}

TimePeriodicPotential cosine_potential(double omega, const std::vector<Site>& sites, double amplitude,
                                       std::optional<CellIndex> cuboid) {
  std::map<Site, std::vector<Complex>> c;
  for (const Site& s : sites) c[s] = {Complex(amplitude / 2, 0.0), Complex{}, Complex(amplitude / 2, 0.0)};
  return TimePeriodicPotential(omega, std::move(c), cuboid);
}

TimePeriodicPotential constant_potential(double omega, const SiteFunction& values, std::optional<CellIndex> cuboid) {
  std::map<Site, std::vector<Complex>> c;
  for (const auto& [s, v] : values) c[s] = {Complex(v, 0.0)};
  return TimePeriodicPotential(omega, std::move(c), cuboid);
}

Envelopes sample_envelopes(const TimePeriodicPotential& v, int time_grid, EnvelopeMode mode) {
  if (time_grid < 64) throw InvalidArgument("time grid must have at least 64 points");
  Envelopes env;
  const int big_k = v.bandwidth();
  for (const auto& [site, c] : v.coefficients()) {
    double u = 0.0, vp = 0.0, vm = 0.0;
    for (int j = 0; j < time_grid; ++j) {
      // omega t_j = 2 pi j / grid.
      const double phase = 2.0 * std::numbers::pi * j / time_grid;
      double value = 0.0;
      for (int k = -big_k; k <= big_k; ++k) value += (c[big_k + k] * std::polar(1.0, k * phase)).real();
      u = std::max(u, std::abs(value));
      vp = std::max(vp, positive_part(value));
      vm = std::max(vm, negative_part(value));
    }
    if (mode == EnvelopeMode::RigorousOverestimate) {
      u = 0.0;
      for (const Complex& z : c) u += std::abs(z);
    }
    env.u[site] = u;
    env.v_plus[site] = vp;
    env.v_minus[site] = vm;
    env.delta_plus = std::max(env.delta_plus, vp);
    env.delta_minus = std::max(env.delta_minus, vm);
  }
  return env;
}

Eigen::VectorXcd QuasiEnergyMatrix::mode_component(const Eigen::VectorXcd& v, int mode) const {
  if (mode < mode_lo_ || mode > mode_hi_) return Eigen::VectorXcd::Zero(box_size());
  return v.segment(row(mode, 0), box_size());
}

double QuasiEnergyMatrix::leak(const Eigen::VectorXcd& v) const {
  double mass = 0.0;
  const auto& shell = inner_.boundary_rows();
  for (int n = mode_lo_; n <= mode_hi_; ++n) {
    const bool outer = n <= mode_lo_ + 1 || n >= mode_hi_ - 1;
    if (outer) {
      mass += v.segment(row(n, 0), box_size()).squaredNorm();
    } else {
      for (Eigen::Index r : shell) mass += std::norm(v[row(n, r)]);
    }
  }
  return mass;
}

double QuasiEnergyMatrix::mode_leak(const Eigen::VectorXcd& v) const {
  double mass = 0.0;
  for (int n = mode_lo_; n <= mode_hi_; ++n)
    if (n <= mode_lo_ + 1 || n >= mode_hi_ - 1) mass += v.segment(row(n, 0), box_size()).squaredNorm();
  return mass;
}

QuasiEnergyMatrix assemble_block_matrix(SymmetricOperator inner, const TimePeriodicPotential& v, int mode_lo,
                                        int mode_hi) {
  if (mode_hi < mode_lo) throw InvalidArgument("empty mode window");
  if (mode_hi - mode_lo < 2 * v.bandwidth())
    throw InvalidArgument("mode window narrower than potential bandwidth");

  const Eigen::Index box = inner.dimension();
  const int modes = mode_hi - mode_lo + 1;
  const double omega = v.omega();

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(inner.matrix().nonZeros()) * modes +
                   v.coefficients().size() * static_cast<std::size_t>(modes) * (2 * v.bandwidth() + 1));

  std::vector<std::pair<Eigen::Index, const std::vector<Complex>*>> rows;
  double dropped = 0.0;
  for (const auto& [site, c] : v.coefficients()) {
    if (auto r = inner.row_of(site)) {
      rows.emplace_back(*r, &c);
    } else {
      for (const Complex& z : c) dropped += std::abs(z);
    }
  }

  const int big_k = v.bandwidth();
  for (int n = mode_lo; n <= mode_hi; ++n) {
    const Eigen::Index base = static_cast<Eigen::Index>(n - mode_lo) * box;
    for (Eigen::Index col = 0; col < inner.matrix().outerSize(); ++col) {
      for (SparseHermitian::InnerIterator it(inner.matrix(), col); it; ++it) {
        Complex value = it.value();
        if (it.row() == col) value = Complex(value.real() + omega * n, 0.0);
        triplets.emplace_back(base + it.row(), base + col, value);
      }
    }
    for (const auto& [r, c] : rows) {
      triplets.emplace_back(base + r, base + r, Complex((*c)[big_k].real(), 0.0));
      for (int k = 1; k <= big_k && n - k >= mode_lo; ++k) {
        // Block (n, n-k) carries c(k); block (n-k, n) its conjugate.
        const Complex z = (*c)[big_k + k];
        if (z == Complex{}) continue;
        const Eigen::Index other = static_cast<Eigen::Index>(n - k - mode_lo) * box;
        triplets.emplace_back(base + r, other + r, z);
        triplets.emplace_back(other + r, base + r, std::conj(z));
      }
    }
  }

  SparseHermitian m(box * modes, box * modes);
  m.setFromTriplets(triplets.begin(), triplets.end());

  QuasiEnergyMatrix q;
  q.mode_lo_ = mode_lo;
  q.mode_hi_ = mode_hi;
  q.omega_ = omega;
  q.full_ = SymmetricOperator(std::move(m), inner.sites(), inner.radius(), inner.half_line());
  q.full_.truncated_mass = dropped;
  if (dropped > 0.0)
    q.full_.warnings.push_back(fmt::format("time-periodic potential exceeds the box; truncated mass {:.6g}", dropped));
  q.inner_ = std::move(inner);
  return q;
}

QuasiEnergyMatrix assemble_quasienergy_window(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                              const TruncationSpec& spec, int mode_lo, int mode_hi) {
  return assemble_block_matrix(assemble_static(g, spec, {}), v, mode_lo, mode_hi);
}

QuasiEnergyMatrix assemble_quasienergy(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                       const TruncationSpec& spec, int half_width) {
  if (half_width < v.bandwidth())
    throw InvalidArgument("mode window narrower than potential bandwidth");
  return assemble_quasienergy_window(g, v, spec, -half_width, half_width);
}

QuasiEnergyMatrix assemble_reflected_quasienergy(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                                 const TruncationSpec& spec, int half_width) {
  if (half_width < v.bandwidth())
    throw InvalidArgument("mode window narrower than potential bandwidth");
  const SymmetricOperator h = assemble_static(g, spec, {});
  SymmetricOperator negated(SparseHermitian(-h.matrix()), h.sites(), h.radius(), h.half_line());
  return assemble_block_matrix(std::move(negated), v.reflected(), -half_width, half_width);
}

QuasiCount quasi_count(const QuasiEnergyMatrix& q, const SpectralWindow& window, const QuasiCountOptions& opts) {
  const double omega = q.omega();
  const double slack = 1e-12 * std::max(1.0, omega);
  if (window.lo < -omega - slack || window.hi > slack)
    throw InvalidArgument(fmt::format("window ({}, {}] is not inside (-omega, 0] with omega = {}", window.lo,
                                      window.hi, omega));
  QuasiCount out;
  out.window = window;
  out.guarded = SpectralWindow{window.lo + opts.edge_guard, window.hi - opts.edge_guard, window.label};
  if (out.guarded.empty()) return out;

  out.raw = count_in(q.op(), out.guarded, opts.eigen.count);
  if (out.raw == 0) return out;
  const auto pairs =
      eigenpairs_in(q.op(), out.guarded.lo + kEdgeEpsilon, out.guarded.hi + kEdgeEpsilon, opts.eigen);
  for (const auto& p : pairs) {
    const double leak = q.leak(p.vector);
    out.eigenvalues.push_back({p.value, leak, p.residual});
    if (leak < opts.leak_tolerance) ++out.filtered;
  }
  return out;
}

double fold_modulo(double lambda, double omega) {
  if (!(omega > 0.0)) throw InvalidArgument("fold_modulo needs omega > 0");
  double r = lambda - omega * std::ceil(lambda / omega);
  if (r <= -omega) r += omega;
  if (r > 0.0) r -= omega;
  return r;
}

namespace {

// Nearest value in an ascending list.
double nearest_distance(const std::vector<EigenPair>& sorted, double target) {
  double best = std::numeric_limits<double>::infinity();
  auto it = std::lower_bound(sorted.begin(), sorted.end(), target,
                             [](const EigenPair& p, double t) { return p.value < t; });
  if (it != sorted.end()) best = std::min(best, std::abs(it->value - target));
  if (it != sorted.begin()) best = std::min(best, std::abs(std::prev(it)->value - target));
  return best;
}

}  // namespace

PeriodicityReport periodicity_check(const PeriodicGraph& g, const TimePeriodicPotential& v,
                                    const TruncationSpec& spec, int half_width, const PeriodicityOptions& opts) {
  if (half_width < v.bandwidth() + 2)
    throw InvalidArgument("periodicity check needs at least two modes beyond the potential bandwidth");
  const double omega = v.omega();
  const QuasiEnergyMatrix base = assemble_quasienergy(g, v, spec, half_width);
  const QuasiEnergyMatrix shifted = assemble_quasienergy_window(g, v, spec, -half_width + 1, half_width + 1);

  const auto pairs = eigenpairs_in(base.op(), -omega + opts.margin, -opts.margin, opts.eigen);
  const double lo = opts.margin - opts.match_radius;
  const double hi = omega - opts.margin + opts.match_radius;
  const auto shifted_pairs = eigenpairs_in(shifted.op(), lo, hi, opts.eigen);
  const auto intra_pairs = eigenpairs_in(base.op(), lo, hi, opts.eigen);

  PeriodicityReport report;
  for (const auto& p : pairs) {
    const double leak = base.mode_leak(p.vector);
    if (!(leak < opts.leak_tolerance)) continue;
    ++report.candidates;
    const double target = p.value + omega;
    const double dev = nearest_distance(shifted_pairs, target);
    if (dev > opts.match_radius) {
      report.unmatched.push_back({p.value, leak});
      continue;
    }
    ++report.matched;
    report.max_deviation = std::max(report.max_deviation, dev);
    report.max_intra_deviation = std::max(report.max_intra_deviation, nearest_distance(intra_pairs, target));
  }
  return report;
}

bool in_cuboid(const CellIndex& x, const CellIndex& m, int dim) {
  for (int j = 0; j < dim; ++j)
    if (x[j] < 0 || x[j] > m[j]) return false;
  return true;
}

bool in_half_space(const CellIndex& x, int axis, int z) { return x[axis] >= z; }

bool in_cone(const CellIndex& x, const CellIndex& m, int dim) {
  int spread = 0;
  for (int j = 0; j + 1 < dim; ++j) spread += std::abs(x[j] - m[j]);
  return spread <= x[dim - 1] - m[dim - 1];
}

ModeSupportReport mode_support_check(const QuasiEnergyMatrix& q, const EigenPair& pair, int rho, double s_e,
                                     const CellIndex& cuboid, int dim, double tol) {
  ModeSupportReport report;
  const double omega = q.omega();
  int deepest = 0;
  if (pair.value > -s_e && pair.value < 0.0) {
    report.region = "sigma_e";
    deepest = rho;
  } else if (pair.value > -omega && pair.value < -s_e) {
    report.region = "sigma_b";
    deepest = rho + 1;
  } else {
    report.applicable = false;
    report.region = "n/a";
    return report;
  }
  const auto& sites = q.inner().sites();
  for (int n = -1; n >= -deepest; --n) {
    if (n < q.mode_lo()) break;
    const Eigen::VectorXcd psi = q.mode_component(pair.vector, n);
    const double total = psi.squaredNorm();
    const double norm = std::sqrt(total);
    if (norm <= 1e-12) {
      report.modes.push_back({n, norm, 0.0});
      continue;
    }
    double outside = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s)
      if (!in_cuboid(sites[s].cell, cuboid, dim)) outside += std::norm(psi[s]);
    const double ratio = outside / total;
    report.modes.push_back({n, norm, ratio});
    if (!(ratio < tol)) report.pass = false;
  }
  return report;
}

ModeSupportScan mode_support_scan(const QuasiEnergyMatrix& q, int rho, double s_e, const CellIndex& cuboid, int dim,
                                  double tol, double leak_tolerance, const WindowEigenOptions& eigen) {
  ModeSupportScan scan;
  const auto pairs = eigenpairs_in(q.op(), -q.omega() + kEdgeGuard, -kEdgeGuard, eigen);
  for (const auto& p : pairs) {
    if (!(q.leak(p.vector) < leak_tolerance)) continue;
    auto report = mode_support_check(q, p, rho, s_e, cuboid, dim, tol);
    if (!report.applicable) continue;
    ++scan.tested;
    if (report.pass) ++scan.passed;
    scan.reports.push_back(std::move(report));
  }
  return scan;
}

}  // namespace quasiband
