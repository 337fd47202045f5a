#pragma once

// Subcommand bodies behind the `icas` executable. Each returns the process
// exit code: 0 success, 1 unreadable input, 2 parse or schema error, 3 any
// other failure. Diagnostics go to `err`.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "icas/error.hpp"
#include "icas/fixtures.hpp"
#include "icas/pipeline.hpp"
#include "icas/report.hpp"

namespace icas::cli {

namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kUnreadable = 1, kParse = 2, kFailure = 3 };

class ReadError : public Error {
public:
  using Error::Error;
};

struct RunConfig {
  std::string lef, def, gds, netlist, layermap, attacks;  // empty = not given
  std::string root_prefix = "sec_";
  int depth = 2;
  std::int64_t granularity = 1;
  std::optional<std::int64_t> extension;
  double sigma_threshold = 3.0;
  unsigned threads = 1;
  std::string out = ".";
};

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReadError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const std::string s = read_text(path);
  return {s.begin(), s.end()};
}

inline void write_file(const fs::path& p, std::string_view data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::binary);
  o.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!o) throw Error("cannot write '" + p.string() + "'");
}

/// Runs `body`, mapping the library's error classes to exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ReadError& e) {
    err << "error: " << e.what() << '\n';
    return kUnreadable;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const GdsError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const NetlistError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const report::SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

inline void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ParseError("config", 0, std::string("missing required input ") + flag);
}

inline pipeline::Config pipeline_config(const RunConfig& rc) {
  if (rc.depth < 0) throw ParseError("config", 0, "--depth must be non-negative");
  if (!(rc.sigma_threshold > 0)) throw ParseError("config", 0, "--sigma-threshold must be positive");
  if (rc.granularity < 1) throw ParseError("config", 0, "--granularity must be at least 1");
  if (rc.extension && *rc.extension < 1) throw ParseError("config", 0, "--extension must be at least 1");
  pipeline::Config c;
  c.trace.root_prefix = rc.root_prefix;
  c.trace.depth = rc.depth;
  c.blockage.g = rc.granularity;
  c.blockage.d = rc.extension;
  c.sigma_threshold = rc.sigma_threshold;
  c.threads = rc.threads ? rc.threads : 1;
  return c;
}

inline pipeline::Inputs load_inputs(const RunConfig& rc) {
  require(rc.lef, "--lef");
  require(rc.def, "--def");
  require(rc.netlist, "--netlist");
  if (!rc.gds.empty() && rc.layermap.empty()) throw ParseError("config", 0, "--gds needs --layermap");
  pipeline::Inputs in;
  in.lef = read_text(rc.lef);
  in.def = read_text(rc.def);
  in.netlist = read_text(rc.netlist);
  in.lef_name = rc.lef;
  in.def_name = rc.def;
  in.netlist_name = rc.netlist;
  if (!rc.attacks.empty()) {
    in.attacks = read_text(rc.attacks);
    in.attacks_name = rc.attacks;
  }
  if (!rc.gds.empty()) {
    in.gds = read_bytes(rc.gds);
    in.layermap = read_text(rc.layermap);
  }
  return in;
}

inline report::ConfigEcho echo(const RunConfig& rc) {
  report::ConfigEcho e;
  e.lef = rc.lef;
  e.def = rc.def;
  e.gds = rc.gds;
  e.netlist = rc.netlist;
  e.layermap = rc.layermap;
  e.attacks = rc.attacks;
  e.root_prefix = rc.root_prefix;
  e.depth = rc.depth;
  e.granularity = rc.granularity;
  e.extension = rc.extension;
  e.sigma_threshold = rc.sigma_threshold;
  return e;
}

/// Writes critical.dot and critical_nets.txt under `out`.
inline int cmd_trace(const RunConfig& rc, std::ostream& err) {
  return guarded(err, [&] {
    require(rc.netlist, "--netlist");
    const pipeline::Config cfg = pipeline_config(rc);
    pipeline::Inputs in;
    in.netlist = read_text(rc.netlist);
    in.netlist_name = rc.netlist;
    netlist::NetGraph g;
    const netlist::CriticalSet cs = pipeline::trace(in, cfg, &g);
    for (const std::string& w : cs.warnings) err << "warning: " << w << '\n';
    std::string list;
    for (const auto& [n, d] : cs.members) list += n + '\n';
    write_file(fs::path(rc.out) / "critical.dot", netlist::emit_dot(cs, g));
    write_file(fs::path(rc.out) / "critical_nets.txt", list);
    return static_cast<int>(kOk);
  });
}

inline const char* kReportFiles[] = {"report.json", "histogram.csv", "heatmap.csv"};

/// Full pipeline; writes report.json, histogram.csv and heatmap.csv under `out`.
/// On failure none of the three is left behind.
inline int cmd_analyze(const RunConfig& rc, std::ostream& err) {
  const int code = guarded(err, [&] {
    const pipeline::Config cfg = pipeline_config(rc);
    const pipeline::Analysis a = pipeline::analyze(load_inputs(rc), cfg);
    for (const std::string& w : a.warnings) err << "warning: " << w << '\n';
    const std::string json = report::build(a, echo(rc)).dump(2) + "\n";
    const fs::path out(rc.out);
    write_file(out / "report.json", json);
    write_file(out / "histogram.csv", report::histogram_csv(a.regions));
    write_file(out / "heatmap.csv", report::heatmap_csv(a.matrix.heatmap));
    return static_cast<int>(kOk);
  });
  if (code != kOk) {
    std::error_code ec;
    for (const char* f : kReportFiles) fs::remove(fs::path(rc.out) / f, ec);
  }
  return code;
}

/// Differences between two reports; `out_path` empty writes to `out`.
inline int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& out_path,
                       std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto a = report::read_viability(report::parse_document(read_text(a_path), a_path), a_path);
    const auto b = report::read_viability(report::parse_document(read_text(b_path), b_path), b_path);
    std::vector<attacks::AttackDelta> d;
    try {
      d = attacks::compare_reports(a, b);
    } catch (const Error& e) {
      throw report::SchemaError(e.what());
    }
    const std::string doc = report::compare_document(d).dump(2) + "\n";
    if (out_path.empty()) out << doc;
    else write_file(out_path, doc);
    return static_cast<int>(kOk);
  });
}

inline report::Json expected_json(const fixtures::Expected& ex) {
  report::Json j;
  j["seed"] = ex.seed;
  j["depth"] = ex.depth;
  j["planted_sizes"] = ex.planted_sizes;
  report::Json hist = report::Json::array();
  for (const auto& [s, c] : ex.histogram) hist.push_back({{"size", s}, {"count", c}});
  j["histogram"] = hist;
  j["sites"] = {{"total", ex.total_sites}, {"occupied", ex.occupied_sites}, {"filler", ex.filler_sites}};
  j["regular_nets"] = ex.regular_nets;
  j["polygons"] = ex.polygons;
  report::Json crit = report::Json::array();
  for (const fixtures::ExpectedNet& n : ex.critical)
    crit.push_back({{"net", n.name},
                    {"recipe", fixtures::recipe_name(n.recipe)},
                    {"depth", n.depth},
                    {"same_layer", report::rational(n.same_layer)},
                    {"adjacent_layer", report::rational(n.adjacent_layer)},
                    {"overall", report::rational(n.overall)},
                    {"length", n.length}});
  j["critical"] = crit;
  j["net_length"] = {{"mean", ex.mean_length}, {"stddev", ex.stddev_length}};
  report::Json via = report::Json::array();
  for (const auto& [name, count] : ex.viable) via.push_back({{"attack", name}, {"count", count}});
  j["viability"] = via;
  return j;
}

inline std::optional<fixtures::FixtureSpec> preset(const std::string& name) {
  if (name == "demo") return fixtures::demo_spec();
  if (name == "scale") return fixtures::scale_spec();
  return std::nullopt;
}

/// Writes a generated fixture set: <design>.lef/.def/.v/.gds/.layermap, attacks.txt, expected.json.
inline int cmd_generate(const std::string& preset_name, std::optional<std::uint64_t> seed, double fill_fraction,
                        const std::string& out, std::ostream& err) {
  return guarded(err, [&] {
    std::optional<fixtures::FixtureSpec> spec = preset(preset_name);
    if (!spec) throw ParseError("config", 0, "unknown preset '" + preset_name + "' (expected demo or scale)");
    if (seed) spec->seed = *seed;
    spec->fill_fraction = fill_fraction;
    const fixtures::Fixture fx = fixtures::generate(*spec);
    const fs::path dir(out);
    const std::string base = spec->design;
    write_file(dir / (base + ".lef"), fx.lef);
    write_file(dir / (base + ".def"), fx.def);
    write_file(dir / (base + ".v"), fx.netlist);
    write_file(dir / (base + ".gds"), std::string(fx.gds.begin(), fx.gds.end()));
    write_file(dir / (base + ".layermap"), fx.layermap);
    write_file(dir / "attacks.txt", fx.attacks);
    write_file(dir / "expected.json", expected_json(fx.expected).dump(2) + "\n");
    return static_cast<int>(kOk);
  });
}

/// Directed filling around the traced critical nets; writes the new DEF to `out_def`.
inline int cmd_fill(const RunConfig& rc, double fraction, const std::string& macro, const std::string& out_def,
                    std::ostream& err) {
  return guarded(err, [&] {
    require(rc.lef, "--lef");
    require(rc.def, "--def");
    require(rc.netlist, "--netlist");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ParseError("config", 0, "--fraction must lie in [0, 1]");
    const pipeline::Config cfg = pipeline_config(rc);
    pipeline::Inputs in;
    in.netlist = read_text(rc.netlist);
    in.netlist_name = rc.netlist;
    const netlist::CriticalSet cs = pipeline::trace(in, cfg);
    const lefdef::Lef lef = lefdef::parse_lef(read_text(rc.lef), rc.lef);
    const std::string def_text = read_text(rc.def);
    std::vector<std::string> nets;
    for (const auto& [n, d] : cs.members) nets.push_back(n);
    write_file(out_def, fraction == 0.0 ? def_text : fixtures::apply_filling(lef, def_text, nets, fraction, macro));
    return static_cast<int>(kOk);
  });
}

}  // namespace icas::cli
