#pragma once

// Attack viability: which (critical net, trigger space) pairs could host each
// attack, and how two such reports differ.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "icas/error.hpp"
#include "icas/layout.hpp"
#include "icas/metrics.hpp"
#include "icas/netlist.hpp"

namespace icas::attacks {

using layout::AttackSpec;

enum class Placement { Trivial, Difficult, NotPossible };

inline const char* placement_name(Placement p) {
  switch (p) {
    case Placement::Trivial: return "trivial";
    case Placement::Difficult: return "difficult";
    case Placement::NotPossible: return "not_possible";
  }
  return "?";
}

struct ViablePair {
  std::string net;
  int region = 0;
  std::int64_t seed_col = 0;
  std::int64_t seed_row = 0;
  std::int64_t region_size = 0;
  geom::Coord manhattan = 0;
  double sigma = 0;
  bool size_ok = false;
  bool blockage_ok = false;
  bool timing_ok = false;

  // Region ids are per-layout; the seed site and size identify a region across layouts.
  auto key() const { return std::tie(net, seed_col, seed_row, region_size); }
};

struct AttackViability {
  AttackSpec attack;
  std::int64_t count = 0;
  std::vector<ViablePair> pairs;  // sorted by (net, region)
  Placement placement = Placement::NotPossible;
  bool splittable = false;  // enough open sites in total, but no single region is large enough
};

struct ViabilityReport {
  std::vector<AttackViability> attacks;
};

/// Nets an attack may attach to: all critical nets, or the fan-in of the named roots.
/// A target matches a root by exact name or as the base name of a bus.
inline std::set<std::string> attack_scope(const AttackSpec& attack, const netlist::CriticalSet& critical) {
  std::set<std::string> scope;
  if (attack.target_nets.empty()) {
    for (const auto& [n, d] : critical.members) scope.insert(n);
    return scope;
  }
  for (const std::string& t : attack.target_nets) {
    bool found = false;
    for (const std::string& root : critical.roots) {
      if (root != t && root.rfind(t + "[", 0) != 0) continue;
      found = true;
      if (auto it = critical.per_root.find(root); it != critical.per_root.end()) scope.insert(it->second.begin(), it->second.end());
      scope.insert(root);
    }
    if (!found) throw Error("attack '" + attack.name + "' targets unknown critical net '" + t + "'");
  }
  return scope;
}

inline Placement classify_placement(const metrics::TriggerSpaceResult& regions, std::int64_t sites) {
  std::int64_t total = 0, largest = 0;
  for (const metrics::TriggerSpace& ts : regions.regions) {
    total += ts.size;
    largest = std::max(largest, ts.size);
  }
  if (largest >= sites) return Placement::Trivial;
  if (total >= sites) return Placement::Difficult;
  return Placement::NotPossible;
}

inline AttackViability enumerate_viable(const metrics::RouteDistanceMatrix& matrix,
                                        const metrics::TriggerSpaceResult& regions,
                                        const metrics::BlockageResult& blockage, const netlist::CriticalSet& critical,
                                        const AttackSpec& attack, double sigma_threshold = 3.0) {
  if (!(sigma_threshold > 0)) throw Error("sigma threshold must be positive");
  AttackViability out;
  out.attack = attack;
  out.placement = classify_placement(regions, attack.placement_sites);
  out.splittable = out.placement == Placement::Difficult;
  const std::set<std::string> scope = attack_scope(attack, critical);
  for (const metrics::RouteEntry& e : matrix.entries) {
    if (!scope.count(e.net)) continue;
    const metrics::TriggerSpace& ts = regions.regions.at(static_cast<std::size_t>(e.region));
    const metrics::NetBlockage* nb = blockage.find(e.net);
    ViablePair p;
    p.net = e.net;
    p.region = e.region;
    std::tie(p.seed_col, p.seed_row) = ts.seed();
    p.region_size = ts.size;
    p.manhattan = e.manhattan;
    p.sigma = e.sigma;
    p.size_ok = ts.size >= attack.placement_sites;
    p.blockage_ok = nb && nb->overall < Rational(1);
    p.timing_ok = !attack.timing_critical || e.sigma <= sigma_threshold;
    if (p.size_ok && p.blockage_ok && p.timing_ok) out.pairs.push_back(std::move(p));
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const ViablePair& a, const ViablePair& b) { return std::tie(a.net, a.region) < std::tie(b.net, b.region); });
  out.count = static_cast<std::int64_t>(out.pairs.size());
  return out;
}

inline ViabilityReport enumerate_all(const metrics::RouteDistanceMatrix& matrix, const metrics::TriggerSpaceResult& regions,
                                     const metrics::BlockageResult& blockage, const netlist::CriticalSet& critical,
                                     const std::vector<AttackSpec>& attacks, double sigma_threshold = 3.0) {
  ViabilityReport r;
  for (const AttackSpec& a : attacks) r.attacks.push_back(enumerate_viable(matrix, regions, blockage, critical, a, sigma_threshold));
  return r;
}

struct AttackDelta {
  std::string attack;
  std::int64_t count_a = 0;
  std::int64_t count_b = 0;
  std::int64_t delta = 0;  // count_b - count_a
  std::vector<ViablePair> removed;  // in a, not in b
  std::vector<ViablePair> added;    // in b, not in a
};

inline std::vector<AttackDelta> compare_reports(const ViabilityReport& a, const ViabilityReport& b) {
  std::set<std::string> na, nb;
  for (const auto& v : a.attacks) na.insert(v.attack.name);
  for (const auto& v : b.attacks) nb.insert(v.attack.name);
  if (na != nb) {
    std::string only;
    for (const auto& n : na)
      if (!nb.count(n)) only += (only.empty() ? "" : ", ") + n;
    for (const auto& n : nb)
      if (!na.count(n)) only += (only.empty() ? "" : ", ") + n;
    throw Error("reports cover different attack sets; unmatched: " + only);
  }
  auto less = [](const ViablePair& x, const ViablePair& y) { return x.key() < y.key(); };
  std::vector<AttackDelta> out;
  for (const AttackViability& va : a.attacks) {
    const AttackViability& vb =
        *std::find_if(b.attacks.begin(), b.attacks.end(), [&](const auto& v) { return v.attack.name == va.attack.name; });
    AttackDelta d;
    d.attack = va.attack.name;
    d.count_a = va.count;
    d.count_b = vb.count;
    d.delta = vb.count - va.count;
    auto pa = va.pairs, pb = vb.pairs;
    std::sort(pa.begin(), pa.end(), less);
    std::sort(pb.begin(), pb.end(), less);
    std::set_difference(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(d.removed), less);
    std::set_difference(pb.begin(), pb.end(), pa.begin(), pa.end(), std::back_inserter(d.added), less);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace icas::attacks
