#include "quasiband/potential_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "quasiband/error.hpp"

namespace quasiband {

namespace {

using nlohmann::json;

CellIndex read_index(const json& arr, const char* what) {
  if (!arr.is_array() || arr.empty() || arr.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError(fmt::format("potential file: {} must be an array of 1..{} integers", what, kMaxDim));
  CellIndex c{};
  for (std::size_t j = 0; j < arr.size(); ++j) c[j] = arr[j].get<int>();
  return c;
}

TimePeriodicPotential from_json(const json& doc) {
  try {
    const double omega = doc.at("omega").get<double>();
    std::map<Site, std::map<int, Complex>> raw;
    int band = 0;
    for (const auto& s : doc.at("sites")) {
      Site site{read_index(s.at("index"), "site index"), s.value("vertex", 0)};
      auto& slot = raw[site];
      for (const auto& c : s.at("coeffs")) {
        const int k = c.at("k").get<int>();
        const Complex value(c.value("re", 0.0), c.value("im", 0.0));
        if (!slot.emplace(k, value).second)
          throw ConfigError(fmt::format("potential file: coefficient k={} listed twice for one site", k));
        band = std::max(band, std::abs(k));
      }
    }
    std::map<Site, std::vector<Complex>> coeffs;
    for (const auto& [site, slot] : raw) {
      std::vector<Complex> c(2 * static_cast<std::size_t>(band) + 1, Complex(0.0, 0.0));
      for (const auto& [k, value] : slot) c[static_cast<std::size_t>(k + band)] = value;
      coeffs.emplace(site, std::move(c));
    }
    std::optional<CellIndex> cuboid;
    if (doc.contains("cuboid") && !doc.at("cuboid").is_null()) cuboid = read_index(doc.at("cuboid"), "cuboid");
    return TimePeriodicPotential(omega, std::move(coeffs), cuboid);
  } catch (const json::exception& ex) {
    throw ConfigError(fmt::format("potential file: {}", ex.what()));
  } catch (const InvalidArgument& ex) {
    throw ConfigError(fmt::format("potential file: {}", ex.what()));
  }
}

}  // namespace

TimePeriodicPotential parse_potential_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(fmt::format("potential file: {}", ex.what()));
  }
  return from_json(doc);
}

TimePeriodicPotential load_potential_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open potential file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_potential_json(buf.str());
  } catch (const ConfigError& ex) {
    throw ConfigError(fmt::format("{}: {}", path.string(), ex.what()));
  }
}

std::string potential_to_json(const TimePeriodicPotential& v, int dim) {
  json doc;
  doc["omega"] = v.omega();
  doc["sites"] = json::array();
  const int band = v.bandwidth();
  for (const auto& [site, c] : v.coefficients()) {
    json s;
    s["index"] = std::vector<int>(site.cell.begin(), site.cell.begin() + dim);
    s["vertex"] = site.vertex;
    s["coeffs"] = json::array();
    for (int k = -band; k <= band; ++k) {
      const Complex z = c[static_cast<std::size_t>(k + band)];
      if (z == Complex(0.0, 0.0)) continue;
      s["coeffs"].push_back({{"k", k}, {"re", z.real()}, {"im", z.imag()}});
    }
    doc["sites"].push_back(std::move(s));
  }
  if (v.support_cuboid())
    doc["cuboid"] = std::vector<int>(v.support_cuboid()->begin(), v.support_cuboid()->begin() + dim);
  return doc.dump(2);
}

}  // namespace quasiband
