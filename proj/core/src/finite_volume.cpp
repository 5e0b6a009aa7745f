#include "quasiband/finite_volume.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "quasiband/error.hpp"
#include "quasiband/inertia.hpp"

namespace quasiband {

namespace {

int sup_norm(const CellIndex& c, int dim) {
  int m = 0;
  for (int j = 0; j < dim; ++j) m = std::max(m, std::abs(c[j]));
  return m;
}

double default_s_plus(const PeriodicGraph& g) {
  const int grid = g.dim() <= 2 ? 64 : (g.dim() == 3 ? 32 : 16);
  return band_structure(g, grid).s_top;
}

}  // namespace

void TruncationSpec::validate(const PeriodicGraph& g) const {
  if (radius < 1) throw InvalidArgument(fmt::format("truncation radius must be >= 1 (got {})", radius));
  if (half_line && (g.dim() != 1 || g.num_vertices() != 1))
    throw InvalidArgument("half-line truncation requires the Z^1 lattice");
}

SymmetricOperator::SymmetricOperator(SparseHermitian matrix, std::vector<Site> sites, int radius, bool half_line)
    : matrix_(std::move(matrix)), sites_(std::move(sites)), radius_(radius), half_line_(half_line) {
  matrix_.makeCompressed();
  for (std::size_t i = 0; i < sites_.size(); ++i) index_.emplace(sites_[i], static_cast<Eigen::Index>(i));

  std::vector<double> row_sum(static_cast<std::size_t>(matrix_.rows()), 0.0);
  for (Eigen::Index col = 0; col < matrix_.outerSize(); ++col) {
    for (SparseHermitian::InnerIterator it(matrix_, col); it; ++it) {
      row_sum[it.row()] += std::abs(it.value());
      if (it.value().imag() != 0.0) is_real_ = false;
    }
  }
  for (double s : row_sum) inf_norm_ = std::max(inf_norm_, s);

  // Block layouts (mode-major) repeat the site list; the boundary predicate
  // is evaluated per row on the site it carries.
  if (!sites_.empty()) {
    const Eigen::Index per_block = static_cast<Eigen::Index>(sites_.size());
    for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
      const Site& s = sites_[r % per_block];
      const bool on_shell = half_line_ ? s.cell[0] == radius_ : sup_norm(s.cell, kMaxDim) == radius_;
      if (on_shell) boundary_rows_.push_back(r);
    }
  }
}

std::optional<Eigen::Index> SymmetricOperator::row_of(const Site& s) const {
  const auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Site> box_sites(const PeriodicGraph& g, const TruncationSpec& spec) {
  spec.validate(g);
  std::vector<Site> sites;
  if (spec.half_line) {
    for (int n = 1; n <= spec.radius; ++n) sites.push_back(half_line_site(n));
    return sites;
  }
  const int d = g.dim();
  const int side = 2 * spec.radius + 1;
  std::size_t cells = 1;
  for (int j = 0; j < d; ++j) cells *= static_cast<std::size_t>(side);
  sites.reserve(cells * g.num_vertices());
  for (std::size_t c = 0; c < cells; ++c) {
    CellIndex x{};
    std::size_t rem = c;
    for (int j = d - 1; j >= 0; --j) {
      x[j] = static_cast<int>(rem % side) - spec.radius;
      rem /= side;
    }
    for (int v = 0; v < g.num_vertices(); ++v) sites.push_back(Site{x, v});
  }
  return sites;
}

SymmetricOperator assemble_static(const PeriodicGraph& g, const TruncationSpec& spec, const SiteFunction& q,
                                  double sign_of_q) {
  std::vector<Site> sites = box_sites(g, spec);
  std::map<Site, Eigen::Index> index;
  for (std::size_t i = 0; i < sites.size(); ++i) index.emplace(sites[i], static_cast<Eigen::Index>(i));
  const auto n = static_cast<Eigen::Index>(sites.size());

  std::vector<Eigen::Triplet<Complex>> triplets;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  double dropped = 0.0;
  for (const auto& [site, value] : q) {
    const auto it = index.find(site);
    if (it == index.end())
      dropped += std::abs(value);
    else
      diag[it->second] += sign_of_q * value;
  }

  if (spec.half_line) {
    // (Delta y)_n = y_{n-1} + y_{n+1} + 2 y_n, y_0 = 0.
    const double p = g.site_potential()[0];
    for (Eigen::Index i = 0; i < n; ++i) {
      diag[i] += 2.0 + p;
      if (i + 1 < n) {
        triplets.emplace_back(i, i + 1, Complex(1.0, 0.0));
        triplets.emplace_back(i + 1, i, Complex(1.0, 0.0));
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const int v = sites[i].vertex;
      diag[i] += g.degrees()[v] + g.site_potential()[v];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const Site& from = sites[i];
      for (const auto& e : g.edges()) {
        if (e.tail != from.vertex) continue;
        bool zero_offset = true;
        Site to{from.cell, e.head};
        for (int j = 0; j < g.dim(); ++j) {
          to.cell[j] += e.offset[j];
          zero_offset = zero_offset && e.offset[j] == 0;
        }
        if (zero_offset && e.tail == e.head) {
          diag[i] -= 2.0;
          continue;
        }
        const auto it = index.find(to);
        if (it == index.end()) continue;  // Dirichlet restriction
        triplets.emplace_back(i, it->second, Complex(-1.0, 0.0));
        triplets.emplace_back(it->second, i, Complex(-1.0, 0.0));
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, Complex(diag[i], 0.0));

  SparseHermitian m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  SymmetricOperator op(std::move(m), std::move(sites), spec.radius, spec.half_line);
  op.truncated_mass = dropped;
  if (dropped > 0.0)
    op.warnings.push_back(fmt::format("potential support exceeds the box; truncated mass {:.6g}", dropped));
  return op;
}

Eigen::Index nu_minus(const PeriodicGraph& g, const TruncationSpec& spec, const SiteFunction& q, double mu,
                      const NuOptions& opts) {
  if (!opts.relaxed && !(mu < 0.0)) throw InvalidArgument(fmt::format("nu_minus needs mu < 0 (got {})", mu));
  const SymmetricOperator m = assemble_static(g, spec, q, opts.sign_of_q);
  return count_below(m, mu, opts.count);
}

Eigen::Index nu_plus(const PeriodicGraph& g, const TruncationSpec& spec, const SiteFunction& q, double mu,
                     const NuOptions& opts) {
  if (!opts.relaxed) {
    const double s_plus = opts.s_plus ? *opts.s_plus : default_s_plus(g);
    if (!(mu > s_plus)) throw InvalidArgument(fmt::format("nu_plus needs mu > s_+ = {} (got {})", s_plus, mu));
  }
  const SymmetricOperator m = assemble_static(g, spec, q, opts.sign_of_q);
  return m.dimension() - count_below(m, mu, opts.count);
}

void write_matrix_market(const SymmetricOperator& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write matrix file '{}'", path.string()));
  std::size_t nnz = 0;
  for (Eigen::Index col = 0; col < m.matrix().outerSize(); ++col)
    for (SparseHermitian::InnerIterator it(m.matrix(), col); it; ++it)
      if (it.row() >= col) ++nnz;
  out << "%%MatrixMarket matrix coordinate complex hermitian\n";
  out << fmt::format("{} {} {}\n", m.dimension(), m.dimension(), nnz);
  for (Eigen::Index col = 0; col < m.matrix().outerSize(); ++col)
    for (SparseHermitian::InnerIterator it(m.matrix(), col); it; ++it)
      if (it.row() >= col)
        out << fmt::format("{} {} {:.17g} {:.17g}\n", it.row() + 1, col + 1, it.value().real(), it.value().imag());
  if (!out) throw std::runtime_error(fmt::format("I/O error writing '{}'", path.string()));
}

}  // namespace quasiband
