#include "quasiband/graph_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "quasiband/error.hpp"

namespace quasiband {

namespace {

using nlohmann::json;

std::string id_string(const json& id) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<long long>());
  throw ConfigError("graph file: vertex id must be an integer or a string");
}

PeriodicGraph from_json(const json& doc) {
  try {
    const int dim = doc.at("dim").get<int>();
    std::vector<std::string> names;
    std::vector<double> potential;
    std::map<std::string, int> index;
    for (const auto& v : doc.at("vertices")) {
      const std::string name = id_string(v.at("id"));
      if (!index.emplace(name, static_cast<int>(names.size())).second)
        throw ConfigError(fmt::format("graph file: duplicate vertex id '{}'", name));
      names.push_back(name);
      potential.push_back(v.value("potential", 0.0));
    }
    auto lookup = [&](const json& id) {
      const auto it = index.find(id_string(id));
      if (it == index.end()) throw ConfigError(fmt::format("graph file: unknown vertex id '{}'", id_string(id)));
      return it->second;
    };
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      Edge edge;
      edge.tail = lookup(e.at("tail"));
      edge.head = lookup(e.at("head"));
      const auto& off = e.at("offset");
      if (static_cast<int>(off.size()) != dim)
        throw ConfigError(fmt::format("graph file: edge offset has {} components, expected {}", off.size(), dim));
      for (int j = 0; j < dim; ++j) edge.offset[j] = off[j].get<int>();
      edges.push_back(edge);
    }
    return PeriodicGraph(dim, std::move(edges), std::move(potential), std::move(names));
  } catch (const json::exception& ex) {
    throw ConfigError(fmt::format("graph file: {}", ex.what()));
  } catch (const InvalidArgument& ex) {
    throw ConfigError(fmt::format("graph file: {}", ex.what()));
  }
}

}  // namespace

PeriodicGraph parse_graph_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(fmt::format("graph file: {}", ex.what()));
  }
  return from_json(doc);
}

PeriodicGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open graph file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph_json(buf.str());
}

std::string graph_to_json(const PeriodicGraph& g) {
  json doc;
  doc["dim"] = g.dim();
  doc["vertices"] = json::array();
  for (int v = 0; v < g.num_vertices(); ++v)
    doc["vertices"].push_back({{"id", g.names()[v]}, {"potential", g.site_potential()[v]}});
  doc["edges"] = json::array();
  for (const auto& e : g.edges()) {
    json off = json::array();
    for (int j = 0; j < g.dim(); ++j) off.push_back(e.offset[j]);
    doc["edges"].push_back({{"tail", g.names()[e.tail]}, {"head", g.names()[e.head]}, {"offset", off}});
  }
  return doc.dump(2);
}

PeriodicGraph resolve_graph(const std::string& name_or_path) {
  if (auto g = builtin_graph(name_or_path)) return *g;
  if (!std::filesystem::exists(name_or_path))
    throw ConfigError(fmt::format("'{}' is neither a builtin graph nor an existing file", name_or_path));
  return load_graph_file(name_or_path);
}

}  // namespace quasiband
