#pragma once

#include <filesystem>
#include <string>

#include "quasiband/floquet.hpp"

namespace quasiband {

/// Potential file:
///   {"omega": w, "sites": [{"index": [..], "vertex": v, "coeffs": [{"k": k, "re": a, "im": b}]}],
///    "cuboid": [m_1, .., m_d]}
/// Missing coefficients are zero; c(-k) = conj(c(k)) is checked on load.
TimePeriodicPotential load_potential_file(const std::filesystem::path& path);
TimePeriodicPotential parse_potential_json(const std::string& text);
std::string potential_to_json(const TimePeriodicPotential& v, int dim);

}  // namespace quasiband
