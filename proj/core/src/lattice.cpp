#include "quasiband/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

#include <fmt/format.h>

#include "quasiband/error.hpp"

namespace quasiband {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Connectivity of the translated graph, checked on a finite block of cells.
bool block_connected(int dim, int nv, const std::vector<Edge>& edges) {
  int max_offset = 0;
  for (const auto& e : edges)
    for (int j = 0; j < dim; ++j) max_offset = std::max(max_offset, std::abs(e.offset[j]));
  const int side = std::max(3, 2 * max_offset + 1);

  std::size_t cells = 1;
  for (int j = 0; j < dim; ++j) cells *= static_cast<std::size_t>(side);

  auto cell_coords = [&](std::size_t c) {
    CellIndex x{};
    for (int j = dim - 1; j >= 0; --j) {
      x[j] = static_cast<int>(c % side);
      c /= side;
    }
    return x;
  };
  auto cell_id = [&](const CellIndex& x) -> std::optional<std::size_t> {
    std::size_t c = 0;
    for (int j = 0; j < dim; ++j) {
      if (x[j] < 0 || x[j] >= side) return std::nullopt;
      c = c * side + static_cast<std::size_t>(x[j]);
    }
    return c;
  };

  DisjointSets sets(cells * nv);
  for (std::size_t c = 0; c < cells; ++c) {
    const CellIndex x = cell_coords(c);
    for (const auto& e : edges) {
      CellIndex y = x;
      for (int j = 0; j < dim; ++j) y[j] += e.offset[j];
      if (auto other = cell_id(y)) sets.unite(c * nv + e.tail, *other * nv + e.head);
    }
  }
  const std::size_t root = sets.find(0);
  for (std::size_t i = 1; i < cells * nv; ++i)
    if (sets.find(i) != root) return false;
  return true;
}

std::vector<double> grid_point(int dim, int n, std::size_t flat) {
  std::vector<double> theta(dim);
  for (int j = dim - 1; j >= 0; --j) {
    theta[j] = kTwoPi * static_cast<double>(flat % n) / n;
    flat /= n;
  }
  return theta;
}

std::vector<double> sorted_eigenvalues(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("fiber eigensolve failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PeriodicGraph::PeriodicGraph(int dim, std::vector<Edge> edges, std::vector<double> site_potential,
                             std::vector<std::string> names)
    : dim_(dim), edges_(std::move(edges)), potential_(std::move(site_potential)), names_(std::move(names)) {
  if (dim_ < 1 || dim_ > kMaxDim)
    throw InvalidArgument(fmt::format("invalid dimension {} (supported: 1..{})", dim_, kMaxDim));
  const int nv = num_vertices();
  if (nv == 0) throw InvalidArgument("graph has no fundamental vertices");
  if (names_.empty()) {
    for (int v = 0; v < nv; ++v) names_.push_back(std::to_string(v));
  } else if (static_cast<int>(names_.size()) != nv) {
    throw InvalidArgument("vertex name list does not match vertex count");
  }

  degrees_.assign(nv, 0);
  for (const auto& e : edges_) {
    if (e.tail < 0 || e.tail >= nv || e.head < 0 || e.head >= nv)
      throw InvalidArgument(fmt::format("edge ({}, {}) references an unknown vertex", e.tail, e.head));
    for (int j = dim_; j < kMaxDim; ++j)
      if (e.offset[j] != 0) throw InvalidArgument("edge offset has more components than the lattice rank");
    // Every fundamental edge is incident twice (once from each end).
    ++degrees_[e.tail];
    ++degrees_[e.head];
  }
  for (int v = 0; v < nv; ++v)
    if (degrees_[v] < 1) throw InvalidArgument(fmt::format("vertex {} has degree 0", names_[v]));
  max_degree_ = *std::max_element(degrees_.begin(), degrees_.end());

  if (!block_connected(dim_, nv, edges_))
    throw InvalidArgument("periodic graph is not connected");
}

PeriodicGraph PeriodicGraph::with_potential_shift(double shift) const {
  std::vector<double> p = potential_;
  for (double& x : p) x += shift;
  return PeriodicGraph(dim_, edges_, std::move(p), names_);
}

PeriodicGraph build_hypercubic(int dim, double site_potential) {
  if (dim <= 0 || dim > kMaxDim)
    throw InvalidArgument(fmt::format("invalid dimension {} for hypercubic lattice", dim));
  std::vector<Edge> edges;
  for (int j = 0; j < dim; ++j) {
    Edge e;
    e.offset[j] = 1;
    edges.push_back(e);
  }
  return PeriodicGraph(dim, std::move(edges), {site_potential});
}

PeriodicGraph build_honeycomb(double site_potential) {
  std::vector<Edge> edges{{0, 1, {0, 0, 0, 0}}, {0, 1, {-1, 0, 0, 0}}, {0, 1, {0, -1, 0, 0}}};
  return PeriodicGraph(2, std::move(edges), {site_potential, site_potential}, {"A", "B"});
}

PeriodicGraph build_star_chain(int pendants) {
  if (pendants < 1) throw InvalidArgument("star chain needs at least one pendant per cell");
  std::vector<Edge> edges{{0, 0, {1, 0, 0, 0}}};
  std::vector<std::string> names{"hub"};
  for (int p = 1; p <= pendants; ++p) {
    edges.push_back({0, p, {0, 0, 0, 0}});
    names.push_back("leaf" + std::to_string(p));
  }
  return PeriodicGraph(1, std::move(edges), std::vector<double>(pendants + 1, 0.0), std::move(names));
}

std::optional<PeriodicGraph> builtin_graph(const std::string& name) {
  if (name == "half-line" || name == "z1") return build_hypercubic(1);
  if (name.size() == 2 && name[0] == 'z' && name[1] >= '1' && name[1] <= '4') return build_hypercubic(name[1] - '0');
  if (name.rfind("zd:", 0) == 0) {
    try {
      return build_hypercubic(std::stoi(name.substr(3)));
    } catch (const std::logic_error&) {
      return std::nullopt;
    }
  }
  if (name == "honeycomb") return build_honeycomb();
  if (name == "star-chain") return build_star_chain(2);
  return std::nullopt;
}

HermitianMatrix fiber_matrix(const PeriodicGraph& g, const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != g.dim())
    throw InvalidArgument("quasimomentum dimension does not match the lattice rank");
  const int nv = g.num_vertices();
  HermitianMatrix m = HermitianMatrix::Zero(nv, nv);
  for (int v = 0; v < nv; ++v)
    m(v, v) = static_cast<double>(g.degrees()[v]) + g.site_potential()[v];
  for (const auto& e : g.edges()) {
    double phase = 0.0;
    for (int j = 0; j < g.dim(); ++j) phase += theta[j] * e.offset[j];
    const Complex z = std::polar(1.0, phase);
    if (e.tail == e.head) {
      m(e.tail, e.tail) -= 2.0 * z.real();
    } else {
      m(e.tail, e.head) -= z;
      m(e.head, e.tail) -= std::conj(z);
    }
  }
  return m;
}

double BandStructure::spacing() const { return kTwoPi / grid_per_dim; }

BandStructure band_structure(const PeriodicGraph& g, int grid_per_dim) {
  if (grid_per_dim < 8) throw InvalidArgument("band_structure needs at least 8 grid points per dimension");
  const int d = g.dim();
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(grid_per_dim);

  BandStructure bs;
  bs.dim = d;
  bs.grid_per_dim = grid_per_dim;
  bs.num_bands = g.num_vertices();
  bs.grid.resize(total);
  bs.bands.resize(total);

  std::vector<std::string> failures(total);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i) {
    bs.grid[i] = grid_point(d, grid_per_dim, static_cast<std::size_t>(i));
    try {
      bs.bands[i] = sorted_eigenvalues(fiber_matrix(g, bs.grid[i]));
    } catch (const std::exception& ex) {
      failures[i] = ex.what();
    }
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (!failures[i].empty()) {
      std::string where;
      for (double t : bs.grid[i]) where += fmt::format("{}{:.6f}", where.empty() ? "" : ", ", t);
      throw NumericalError(fmt::format("eigensolver failure at theta = ({}): {}", where, failures[i]));
    }
  }

  const int nb = bs.num_bands;
  bs.band_intervals.assign(nb, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < total; ++i) {
    for (int j = 0; j < nb; ++j) {
      bs.band_intervals[j].lower = std::min(bs.band_intervals[j].lower, bs.bands[i][j]);
      bs.band_intervals[j].upper = std::max(bs.band_intervals[j].upper, bs.bands[i][j]);
    }
    if (bs.bands[i][nb - 1] > bs.bands[argmax][nb - 1]) argmax = i;
  }
  bs.s_top = bs.bands[argmax][nb - 1];
  bs.s_top_theta = bs.grid[argmax];

  // One refinement level: 9^d points spanning one grid step around the maximizer.
  constexpr int kSub = 4;
  const double h = bs.spacing();
  std::size_t sub_total = 1;
  for (int j = 0; j < d; ++j) sub_total *= 2 * kSub + 1;
  for (std::size_t s = 0; s < sub_total; ++s) {
    std::vector<double> theta = bs.grid[argmax];
    std::size_t rem = s;
    for (int j = d - 1; j >= 0; --j) {
      const int step = static_cast<int>(rem % (2 * kSub + 1)) - kSub;
      rem /= 2 * kSub + 1;
      theta[j] += step * h / kSub;
    }
    const double top = sorted_eigenvalues(fiber_matrix(g, theta)).back();
    if (top > bs.s_top) {
      bs.s_top = top;
      bs.s_top_theta = theta;
    }
  }

  bs.flat_tolerance = 1e-10 * std::max(1.0, bs.s_top);
  bs.flat_flags.resize(nb);
  for (int j = 0; j < nb; ++j)
    bs.flat_flags[j] = (bs.band_intervals[j].upper - bs.band_intervals[j].lower) < bs.flat_tolerance;
  return bs;
}

std::string to_string(TopRegularityReport::Status s) {
  switch (s) {
    case TopRegularityReport::Status::Regular: return "regular";
    case TopRegularityReport::Status::NotRegular: return "not-regular";
    case TopRegularityReport::Status::PossiblyFlatTop: return "possibly-flat-top";
    case TopRegularityReport::Status::TooManyMaximizers: return "too-many-maximizers";
  }
  return "unknown";
}

TopRegularityReport top_regularity_diagnostic(const BandStructure& bs, double regularity_tolerance) {
  const int d = bs.dim;
  const int n = bs.grid_per_dim;
  const std::size_t total = bs.bands.size();
  const int top = bs.num_bands - 1;

  auto value = [&](std::size_t i) { return bs.bands[i][top]; };
  auto index_of = [&](const std::vector<int>& idx) {
    std::size_t flat = 0;
    for (int j = 0; j < d; ++j) flat = flat * n + static_cast<std::size_t>(((idx[j] % n) + n) % n);
    return flat;
  };
  auto coords_of = [&](std::size_t flat) {
    std::vector<int> idx(d);
    for (int j = d - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(flat % n);
      flat /= n;
    }
    return idx;
  };

  double grid_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < total; ++i) grid_max = std::max(grid_max, value(i));
  const double tie = 1e-9 * std::max(1.0, std::abs(grid_max));

  std::vector<char> is_max(total, 0);
  std::size_t n_max = 0;
  for (std::size_t i = 0; i < total; ++i)
    if (value(i) >= grid_max - tie) {
      is_max[i] = 1;
      ++n_max;
    }

  TopRegularityReport report;
  if (static_cast<double>(n_max) > 0.1 * static_cast<double>(total)) {
    report.status = TopRegularityReport::Status::PossiblyFlatTop;
    report.diagnostic = fmt::format("possibly flat top: {} of {} grid points attain the maximum", n_max, total);
    return report;
  }

  // Cluster maximizers over the periodic grid (face and diagonal neighbours).
  std::vector<int> cluster(total, -1);
  std::vector<std::size_t> representatives;
  std::size_t neighbour_count = 1;
  for (int j = 0; j < d; ++j) neighbour_count *= 3;
  for (std::size_t i = 0; i < total; ++i) {
    if (!is_max[i] || cluster[i] >= 0) continue;
    const int id = static_cast<int>(representatives.size());
    representatives.push_back(i);
    std::queue<std::size_t> todo;
    todo.push(i);
    cluster[i] = id;
    while (!todo.empty()) {
      const std::size_t cur = todo.front();
      todo.pop();
      if (value(cur) > value(representatives[id])) representatives[id] = cur;
      const auto base = coords_of(cur);
      for (std::size_t s = 0; s < neighbour_count; ++s) {
        auto idx = base;
        std::size_t rem = s;
        for (int j = 0; j < d; ++j) {
          idx[j] += static_cast<int>(rem % 3) - 1;
          rem /= 3;
        }
        const std::size_t nb = index_of(idx);
        if (is_max[nb] && cluster[nb] < 0) {
          cluster[nb] = id;
          todo.push(nb);
        }
      }
    }
  }
  if (representatives.size() > 8) {
    report.status = TopRegularityReport::Status::TooManyMaximizers;
    report.diagnostic = fmt::format("{} maximizer clusters (at most 8 supported)", representatives.size());
    return report;
  }

  const double h = bs.spacing();
  report.min_neg_hessian_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t rep : representatives) {
    const auto base = coords_of(rep);
    auto at = [&](int j, int sj, int k, int sk) {
      auto idx = base;
      idx[j] += sj;
      idx[k] += sk;
      return value(index_of(idx));
    };
    Eigen::MatrixXd hess(d, d);
    for (int j = 0; j < d; ++j) {
      hess(j, j) = (at(j, 1, j, 0) - 2.0 * value(rep) + at(j, -1, j, 0)) / (h * h);
      for (int k = j + 1; k < d; ++k) {
        hess(j, k) = (at(j, 1, k, 1) - at(j, 1, k, -1) - at(j, -1, k, 1) + at(j, -1, k, -1)) / (4.0 * h * h);
        hess(k, j) = hess(j, k);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(-hess);
    TopMaximizer m;
    m.theta = bs.grid[rep];
    m.grid_index = base;
    m.hessian = hess;
    m.neg_hessian_eigenvalues = solver.eigenvalues();
    report.min_neg_hessian_eigenvalue = std::min(report.min_neg_hessian_eigenvalue, solver.eigenvalues().minCoeff());
    report.maximizers.push_back(std::move(m));
  }
  report.status = report.min_neg_hessian_eigenvalue > regularity_tolerance ? TopRegularityReport::Status::Regular
                                                                          : TopRegularityReport::Status::NotRegular;
  report.diagnostic = fmt::format("{} maximizer(s); min eigenvalue of -Hessian {:.6g}", representatives.size(),
                                  report.min_neg_hessian_eigenvalue);
  return report;
}

}  // namespace quasiband
