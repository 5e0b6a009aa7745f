#pragma once

#include <filesystem>
#include <string>

#include "quasiband/lattice.hpp"

namespace quasiband {

/// Graph description file:
///   {"dim": d, "vertices": [{"id": .., "potential": ..}],
///    "edges": [{"tail": id, "head": id, "offset": [..]}]}
/// Vertex ids may be integers or strings.
PeriodicGraph load_graph_file(const std::filesystem::path& path);
PeriodicGraph parse_graph_json(const std::string& text);
std::string graph_to_json(const PeriodicGraph& g);

/// Builtin name or path to a graph description file.
PeriodicGraph resolve_graph(const std::string& name_or_path);

}  // namespace quasiband
