#pragma once

#include <limits>
#include <string>

namespace quasiband {

/// Half-open real interval (lo, hi]. Counting semantics: an eigenvalue
/// lambda belongs to the window iff lo < lambda <= hi.
struct SpectralWindow {
  double lo = 0.0;
  double hi = 0.0;
  std::string label;

  bool empty() const noexcept { return !(lo < hi); }
  bool contains(double x) const noexcept { return lo < x && x <= hi; }
  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return 0.5 * (lo + hi); }
};

}  // namespace quasiband
