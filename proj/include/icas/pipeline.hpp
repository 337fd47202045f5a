#pragma once

// End-to-end analysis: parse inputs, trace the critical cone, build the
// layout database, and run every metric plus attack viability.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icas/attacks.hpp"
#include "icas/gdsii.hpp"
#include "icas/layout.hpp"
#include "icas/lefdef.hpp"
#include "icas/metrics.hpp"
#include "icas/netlist.hpp"

namespace icas::pipeline {

struct Inputs {
  std::string lef;
  std::string def;
  std::string netlist;
  std::optional<std::string> attacks;  // absent: metrics only, no viability
  std::vector<std::uint8_t> gds;  // empty skips the cross-check
  std::string layermap;
  std::string lef_name = "lef";
  std::string def_name = "def";
  std::string netlist_name = "netlist";
  std::string attacks_name = "attacks";
};

struct Config {
  netlist::TraceConfig trace;
  metrics::BlockageConfig blockage;
  metrics::HeatmapConfig heatmap;
  double sigma_threshold = 3.0;
  unsigned threads = 1;
  std::vector<std::string> filler_prefixes = layout::default_filler_prefixes();
};

struct Analysis {
  std::shared_ptr<const lefdef::Lef> lef;
  lefdef::FloorplanDef def;
  netlist::NetGraph graph;
  netlist::CriticalSet critical;
  layout::LayoutDb db;
  std::vector<layout::AttackSpec> attacks;
  metrics::TriggerSpaceResult regions;
  metrics::BlockageResult blockage;
  metrics::NetLengthStats stats;
  metrics::RouteDistanceMatrix matrix;
  attacks::ViabilityReport viability;
  std::optional<layout::CrosscheckReport> crosscheck;
  std::vector<std::string> warnings;  // every stage's warnings, in stage order
};

inline netlist::CriticalSet trace(const Inputs& in, const Config& cfg, netlist::NetGraph* graph_out = nullptr) {
  netlist::NetGraph g = netlist::parse_netlist(in.netlist, netlist::builtin_directions(), in.netlist_name);
  netlist::CriticalSet cs = netlist::trace_fanin(g, cfg.trace);
  if (graph_out) *graph_out = std::move(g);
  return cs;
}

inline Analysis analyze(const Inputs& in, const Config& cfg) {
  Analysis a;
  auto lef = std::make_shared<lefdef::Lef>(lefdef::parse_lef(in.lef, in.lef_name));
  a.lef = lef;
  a.def = lefdef::parse_def(in.def, *lef, in.def_name);
  a.critical = trace(in, cfg, &a.graph);
  if (in.attacks) a.attacks = layout::parse_attacks(*in.attacks, in.attacks_name);
  a.db = layout::build_layout(a.lef, a.def, a.critical, cfg.filler_prefixes);
  auto add = [&](const std::vector<std::string>& w) { a.warnings.insert(a.warnings.end(), w.begin(), w.end()); };
  add(lef->warnings);
  add(a.def.warnings);
  add(a.critical.warnings);
  add(a.db.warnings);
  if (!in.attacks) a.warnings.push_back("no attack file given; viability not evaluated");

  if (!in.gds.empty()) {
    const lefdef::LayerMap map = lefdef::parse_layermap(in.layermap);
    const gds::Library lib = gds::read_gds(in.gds);
    a.crosscheck = layout::crosscheck_gds(a.db, gds::flatten(lib, lib.top_cell()), map);
    add(a.crosscheck->warnings);
  }

  metrics::BlockageConfig bc = cfg.blockage;
  bc.threads = cfg.threads;
  a.regions = metrics::trigger_spaces(a.db.grid);
  a.blockage = metrics::net_blockage(a.db, bc);
  add(a.blockage.warnings);
  a.stats = metrics::net_length_stats(a.db);
  a.matrix = metrics::route_distance(a.regions, a.blockage, a.stats, cfg.heatmap, cfg.threads);
  add(a.matrix.warnings);
  a.viability = attacks::enumerate_all(a.matrix, a.regions, a.blockage, a.db.critical, a.attacks, cfg.sigma_threshold);
  return a;
}

}  // namespace icas::pipeline
