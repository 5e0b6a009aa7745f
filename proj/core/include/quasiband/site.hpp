#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>

namespace quasiband {

inline constexpr int kMaxDim = 4;

using CellIndex = std::array<int, kMaxDim>;

/// A vertex of the infinite periodic graph: lattice cell plus fundamental
/// vertex. On the half-line the cell's first coordinate is the site n >= 1.
struct Site {
  CellIndex cell{};
  int vertex = 0;

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;
};

inline Site half_line_site(int n) { return Site{CellIndex{n, 0, 0, 0}, 0}; }

/// Finitely supported real function on sites.
using SiteFunction = std::map<Site, double>;

}  // namespace quasiband
