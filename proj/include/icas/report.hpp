#pragma once

// Report documents: the analysis report (JSON plus two CSVs), reading a report
// back for comparison, and the comparison document itself.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "icas/attacks.hpp"
#include "icas/error.hpp"
#include "icas/pipeline.hpp"

namespace icas::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "icas-report";
inline constexpr int kVersion = 1;
inline constexpr const char* kCompareSchema = "icas-compare";

class SchemaError : public Error {
public:
  using Error::Error;
};

/// What the report echoes of the run. The thread count is left out on
/// purpose: reports must not depend on it.
struct ConfigEcho {
  std::string lef, def, gds, netlist, layermap, attacks;
  std::string root_prefix = "sec_";
  int depth = 2;
  std::int64_t granularity = 1;
  std::optional<std::int64_t> extension;
  double sigma_threshold = 3.0;
};

inline Json rational(const Rational& r) { return Json{{"exact", r.str()}, {"value", r.to_double()}}; }

/// JSON has no infinities; those become the strings "inf" and "-inf".
inline Json real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
inline double real_of(const Json& j) {
  if (j.is_string()) {
    if (j == "inf") return std::numeric_limits<double>::infinity();
    if (j == "-inf") return -std::numeric_limits<double>::infinity();
    throw SchemaError("bad number '" + j.get<std::string>() + "'");
  }
  return j.get<double>();
}

inline Json pair_json(const attacks::ViablePair& p) {
  return Json{{"net", p.net},         {"region", p.region},           {"seed", {p.seed_col, p.seed_row}},
              {"region_size", p.region_size}, {"manhattan", p.manhattan}, {"sigma", real(p.sigma)}};
}

inline Json build(const pipeline::Analysis& a, const ConfigEcho& cfg) {
  Json j;
  j["schema"] = kSchema;
  j["version"] = kVersion;
  j["config"] = {{"lef", cfg.lef},
                 {"def", cfg.def},
                 {"gds", cfg.gds},
                 {"netlist", cfg.netlist},
                 {"layermap", cfg.layermap},
                 {"attacks", cfg.attacks},
                 {"root_prefix", cfg.root_prefix},
                 {"depth", cfg.depth},
                 {"granularity", cfg.granularity},
                 {"extension", cfg.extension ? Json(*cfg.extension) : Json(nullptr)},
                 {"sigma_threshold", cfg.sigma_threshold}};

  Json members = Json::object();
  for (const auto& [n, d] : a.db.critical.members) members[n] = d;
  j["critical"] = {{"roots", a.db.critical.roots}, {"members", members}, {"unmatched", a.db.unmatched}};

  std::int64_t open = 0;
  Json hist = Json::array();
  for (const auto& [size, count] : a.regions.histogram) {
    hist.push_back({{"size", size}, {"count", count}});
    open += size * count;
  }
  j["trigger_spaces"] = {{"regions", a.regions.regions.size()}, {"open_sites", open}, {"histogram", hist}};

  Json nets = Json::array();
  for (const metrics::NetBlockage& nb : a.blockage.per_net)
    nets.push_back({{"net", nb.net},
                    {"same_layer", rational(nb.same_layer)},
                    {"adjacent_layer", rational(nb.adjacent_layer)},
                    {"overall", rational(nb.overall)},
                    {"perimeter", nb.perimeter},
                    {"perimeter_blocked", nb.perimeter_blocked},
                    {"area", nb.area},
                    {"area_blocked", nb.area_blocked},
                    {"open_points", nb.open_point_count()}});
  j["blockage"] = {{"design",
                    {{"same_layer", rational(a.blockage.design.same_layer)},
                     {"adjacent_layer", rational(a.blockage.design.adjacent_layer)},
                     {"overall", rational(a.blockage.design.overall)}}},
                   {"nets", nets}};

  j["net_length"] = {{"nets", a.stats.n}, {"mean", a.stats.mean()}, {"stddev", a.stats.stddev()}};

  const metrics::Heatmap& h = a.matrix.heatmap;
  Json cols = Json::array();
  for (std::size_t c = 0; c < h.counts.size(); ++c) {
    Json cells = Json::array();
    for (std::size_t b = 0; b < h.counts[c].size(); ++b)
      cells.push_back({{"sigma_bin", h.sigma_label(b)}, {"count", h.counts[c][b]}, {"fraction", h.fractions[c][b]}});
    cols.push_back({{"size_bin", h.size_label(c)}, {"cells", cells}});
  }
  j["heatmap"] = {{"size_edges", h.size_edges}, {"sigma_edges", h.sigma_edges}, {"columns", cols}};

  Json via = Json::array();
  for (const attacks::AttackViability& v : a.viability.attacks) {
    Json pairs = Json::array();
    for (const attacks::ViablePair& p : v.pairs) pairs.push_back(pair_json(p));
    via.push_back({{"attack", v.attack.name},
                   {"cells", v.attack.std_cells},
                   {"sites", v.attack.placement_sites},
                   {"timing_critical", v.attack.timing_critical},
                   {"targets", v.attack.target_nets},
                   {"count", v.count},
                   {"placement", attacks::placement_name(v.placement)},
                   {"splittable", v.splittable},
                   {"pairs", pairs}});
  }
  j["viability"] = via;

  if (a.crosscheck) {
    Json layers = Json::array();
    for (const layout::CrosscheckLayer& l : a.crosscheck->layers)
      layers.push_back({{"layer", l.layer},
                        {"def_area", l.def_area},
                        {"gds_area", l.gds_area},
                        {"def_only", l.def_only},
                        {"gds_only", l.gds_only},
                        {"mismatch", l.mismatch}});
    j["crosscheck"] = {{"pass", a.crosscheck->pass}, {"layers", layers}};
  } else {
    j["crosscheck"] = nullptr;
  }
  j["warnings"] = a.warnings;
  return j;
}

inline std::string histogram_csv(const metrics::TriggerSpaceResult& r) {
  std::ostringstream o;
  o << "size,count\n";
  for (const auto& [size, count] : r.histogram) o << size << ',' << count << '\n';
  return o.str();
}

inline std::string heatmap_csv(const metrics::Heatmap& h) {
  std::ostringstream o;
  o << "size_bin,sigma_bin,fraction\n";
  for (std::size_t c = 0; c < h.fractions.size(); ++c)
    for (std::size_t b = 0; b < h.fractions[c].size(); ++b)
      o << '"' << h.size_label(c) << "\",\"" << h.sigma_label(b) << "\"," << Json(h.fractions[c][b]).dump() << '\n';
  return o.str();
}

// ---------------------------------------------------------------------------
// Reading reports back

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
  return j.at(key);
}

}  // namespace detail

/// Viability section of a report document. Throws SchemaError on anything malformed.
inline attacks::ViabilityReport read_viability(const Json& j, const std::string& source = "report") {
  using detail::field;
  try {
    if (field(j, "schema", source) != kSchema) throw SchemaError(source + ": not an analysis report");
    if (field(j, "version", source) != kVersion)
      throw SchemaError(source + ": unsupported report version " + field(j, "version", source).dump());
    const Json& via = field(j, "viability", source);
    if (!via.is_array()) throw SchemaError(source + ": 'viability' is not an array");
    attacks::ViabilityReport r;
    for (const Json& v : via) {
      attacks::AttackViability av;
      av.attack.name = field(v, "attack", source).get<std::string>();
      av.attack.std_cells = field(v, "cells", source).get<std::int64_t>();
      av.attack.placement_sites = field(v, "sites", source).get<std::int64_t>();
      av.attack.timing_critical = field(v, "timing_critical", source).get<bool>();
      av.attack.target_nets = field(v, "targets", source).get<std::vector<std::string>>();
      av.count = field(v, "count", source).get<std::int64_t>();
      for (const Json& p : field(v, "pairs", source)) {
        attacks::ViablePair vp;
        vp.net = field(p, "net", source).get<std::string>();
        vp.region = field(p, "region", source).get<int>();
        const Json& seed = field(p, "seed", source);
        if (!seed.is_array() || seed.size() != 2) throw SchemaError(source + ": 'seed' must be [col, row]");
        vp.seed_col = seed[0].get<std::int64_t>();
        vp.seed_row = seed[1].get<std::int64_t>();
        vp.region_size = field(p, "region_size", source).get<std::int64_t>();
        vp.manhattan = field(p, "manhattan", source).get<std::int64_t>();
        vp.sigma = real_of(field(p, "sigma", source));
        vp.size_ok = vp.blockage_ok = vp.timing_ok = true;
        av.pairs.push_back(std::move(vp));
      }
      if (av.count != static_cast<std::int64_t>(av.pairs.size()))
        throw SchemaError(source + ": attack '" + av.attack.name + "' count disagrees with its pairs");
      r.attacks.push_back(std::move(av));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

inline Json parse_document(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

inline Json compare_document(const std::vector<attacks::AttackDelta>& deltas) {
  Json out;
  out["schema"] = kCompareSchema;
  out["version"] = kVersion;
  Json arr = Json::array();
  for (const attacks::AttackDelta& d : deltas) {
    Json removed = Json::array(), added = Json::array();
    for (const auto& p : d.removed) removed.push_back(pair_json(p));
    for (const auto& p : d.added) added.push_back(pair_json(p));
    arr.push_back({{"attack", d.attack},
                   {"count_a", d.count_a},
                   {"count_b", d.count_b},
                   {"delta", d.delta},
                   {"removed", removed},
                   {"added", added}});
  }
  out["attacks"] = arr;
  return out;
}

}  // namespace icas::report
