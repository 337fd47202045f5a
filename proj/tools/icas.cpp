// icas: trace, analyze, compare, generate, fill.
//
// Every run flag can also come from an ICAS_* environment variable
// (ICAS_LEF, ICAS_DEF, ..., ICAS_SIGMA_THRESHOLD, ICAS_THREADS, ICAS_OUT).
// A flag on the command line wins over the environment, which wins over the default.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "icas/cli.hpp"

namespace {

using icas::cli::RunConfig;

void add_inputs(CLI::App* app, RunConfig& rc, bool full) {
  app->add_option("--netlist", rc.netlist, "gate-level Verilog netlist")->envname("ICAS_NETLIST");
  app->add_option("--prefix", rc.root_prefix, "name prefix of security-critical nets")
      ->envname("ICAS_PREFIX")
      ->capture_default_str();
  app->add_option("--depth", rc.depth, "fan-in depth traced from each critical net")
      ->envname("ICAS_DEPTH")
      ->capture_default_str();
  if (!full) return;
  app->add_option("--lef", rc.lef, "technology and cell library LEF")->envname("ICAS_LEF");
  app->add_option("--def", rc.def, "placed and routed DEF")->envname("ICAS_DEF");
}

void add_run(CLI::App* app, RunConfig& rc, std::optional<std::int64_t>& ext) {
  app->add_option("--gds", rc.gds, "GDSII stream to cross-check against the DEF")->envname("ICAS_GDS");
  app->add_option("--layermap", rc.layermap, "LEF layer to GDSII layer map")->envname("ICAS_LAYERMAP");
  app->add_option("--attacks", rc.attacks, "attack description file")->envname("ICAS_ATTACKS");
  app->add_option("--granularity", rc.granularity, "perimeter sampling step, dbu")
      ->envname("ICAS_GRANULARITY")
      ->capture_default_str();
  app->add_option("--extension", ext, "perimeter offset from each wire, dbu (default: layer pitch)")
      ->envname("ICAS_EXTENSION");
  app->add_option("--sigma-threshold", rc.sigma_threshold, "timing limit for timing-critical attacks")
      ->envname("ICAS_SIGMA_THRESHOLD")
      ->capture_default_str();
  app->add_option("--threads", rc.threads, "worker threads")->envname("ICAS_THREADS")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layout security analysis: open placement space, net blockage and route distance per attack"};
  app.require_subcommand(1);

  RunConfig rc;
  std::optional<std::int64_t> extension;

  auto* trace = app.add_subcommand("trace", "trace the fan-in of critical nets; writes critical.dot and critical_nets.txt");
  add_inputs(trace, rc, false);
  trace->add_option("--out", rc.out, "output directory")->envname("ICAS_OUT")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "run all metrics; writes report.json, histogram.csv and heatmap.csv");
  add_inputs(analyze, rc, true);
  add_run(analyze, rc, extension);
  analyze->add_option("--out", rc.out, "output directory")->envname("ICAS_OUT")->capture_default_str();

  std::string report_a, report_b, compare_out;
  auto* compare = app.add_subcommand("compare", "difference between two analysis reports");
  compare->add_option("report_a", report_a, "baseline report.json")->required();
  compare->add_option("report_b", report_b, "report.json to compare")->required();
  compare->add_option("--out", compare_out, "output file (default: standard output)");

  std::string preset = "demo", gen_out = "generated";
  std::optional<std::uint64_t> seed;
  double gen_fill = 0.0;
  auto* generate = app.add_subcommand("generate", "write a synthetic fixture with its expected results");
  generate->add_option("--preset", preset, "demo or scale")->capture_default_str();
  generate->add_option("--seed", seed, "override the preset seed");
  generate->add_option("--fill-fraction", gen_fill, "directed filling around critical nets")->capture_default_str();
  generate->add_option("--out", gen_out, "output directory")->capture_default_str();

  double fraction = 0.5;
  std::string macro = "BISA1", fill_out;
  auto* fill = app.add_subcommand("fill", "occupy the open sites nearest the critical nets");
  add_inputs(fill, rc, true);
  fill->add_option("--fraction", fraction, "fraction of open sites to occupy")->capture_default_str();
  fill->add_option("--macro", macro, "one-site cell used for filling")->capture_default_str();
  fill->add_option("--out", fill_out, "output DEF")->required();

  CLI11_PARSE(app, argc, argv);
  rc.extension = extension;

  if (*trace) return icas::cli::cmd_trace(rc, std::cerr);
  if (*analyze) return icas::cli::cmd_analyze(rc, std::cerr);
  if (*compare) return icas::cli::cmd_compare(report_a, report_b, compare_out, std::cout, std::cerr);
  if (*generate) return icas::cli::cmd_generate(preset, seed, gen_fill, gen_out, std::cerr);
  return icas::cli::cmd_fill(rc, fraction, macro, fill_out, std::cerr);
}
