#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sentiflow/config.hpp"
#include "sentiflow/fixture.hpp"
#include "sentiflow/pipeline.hpp"

namespace {

using namespace sentiflow;

struct Overrides {
  std::string config;
  std::string out;
  std::string resample;
  std::optional<std::size_t> sg_window;
  std::optional<std::size_t> sg_poly;
  std::string sg_edge;
  bool no_sg = false;
  std::optional<std::size_t> keep_harmonics;
  std::string bands;
  bool disjoint = false;
  std::string extrema = "strict";
  std::string report;
  std::string macro;
  bool quiet = false;
};

std::vector<std::size_t> parse_bands(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = try_parse_double(trim(item));
    if (!v || *v < 1 || *v != std::floor(*v))
      fail(ErrorKind::Config, fmt::format("--bands expects positive integers, got '{}'", item));
    out.push_back(static_cast<std::size_t>(*v));
  }
  if (out.empty()) fail(ErrorKind::Config, "--bands is empty");
  return out;
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "Run configuration (YAML)");
  app->add_option("-o,--out", o.out, "Run directory (overrides $SENTIFLOW_OUTPUT_ROOT and config)");
  app->add_option("--resample", o.resample, "linear | fourier | none");
  app->add_option("--sg-window", o.sg_window, "Savitzky-Golay window (odd)");
  app->add_option("--sg-poly", o.sg_poly, "Savitzky-Golay polynomial order");
  app->add_option("--sg-edge", o.sg_edge, "wrap | mirror");
  app->add_flag("--no-sg", o.no_sg, "Skip smoothing");
  app->add_option("--keep-harmonics", o.keep_harmonics, "Harmonics kept by fourier resampling");
  app->add_option("--bands", o.bands, "Comma-separated harmonic cutoffs, e.g. 3,6,12");
  app->add_flag("--disjoint", o.disjoint, "Also report band-pass differences between cutoffs");
  app->add_option("--extrema", o.extrema, "Extremum rule (strict)")->check(CLI::IsMember({"strict"}));
  app->add_option("--report", o.report, "signed | abs | both");
  app->add_option("--macro", o.macro, "Macro table (overrides inputs.macro)");
  app->add_flag("-q,--quiet", o.quiet, "Suppress progress lines");
}

RunConfig load(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.resample.empty()) cfg.indexer.resample = parse_resample(o.resample);
  if (o.no_sg) cfg.indexer.sg.reset();
  if (o.sg_window || o.sg_poly || !o.sg_edge.empty()) {
    if (o.no_sg) fail(ErrorKind::Config, "--no-sg conflicts with --sg-* options");
    auto p = cfg.indexer.sg.value_or(indexer::SGParams{});
    if (o.sg_window) p.window = *o.sg_window;
    if (o.sg_poly) p.polyorder = *o.sg_poly;
    if (!o.sg_edge.empty()) p.edge = parse_edge(o.sg_edge);
    cfg.indexer.sg = p;
  }
  if (o.keep_harmonics) cfg.indexer.keep_harmonics = *o.keep_harmonics;
  if (!o.bands.empty()) cfg.bands = parse_bands(o.bands);
  if (o.disjoint) cfg.disjoint = true;
  if (!o.report.empty()) cfg.report = parse_report_mode(o.report);
  if (!o.macro.empty()) cfg.macro = InputPath{o.macro, fs::current_path()};
  return cfg;
}

std::optional<fs::path> out_flag(const Overrides& o) {
  return o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out);
}

int run_stages(const Overrides& o, const std::vector<pipeline::Stage>& stages, bool skip_unconfigured) {
  auto cfg = load(o);
  auto out = resolve_output(cfg, out_flag(o));
  pipeline::Runner runner(cfg, out, [&](std::string_view msg) {
    if (!o.quiet) std::cerr << msg << "\n";
  });
  runner.execute(stages, skip_unconfigured);
  if (!o.quiet) std::cerr << fmt::format("done: {} (config digest {})\n", out.string(), runner.digest());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentiflow: sentiment indices, bounded-rationality expectations and spectral lead-lag"};
  app.set_version_flag("--version", std::string(sentiflow::kVersion));
  app.require_subcommand(1);

  Overrides o;
  auto* run = app.add_subcommand("run", "Run every configured stage");
  add_common(run, o);

  std::vector<std::pair<CLI::App*, sentiflow::pipeline::Stage>> single;
  for (auto stage : sentiflow::pipeline::kAllStages) {
    if (stage == sentiflow::pipeline::Stage::LeadLag) continue;
    auto* sub = app.add_subcommand(std::string(sentiflow::pipeline::to_string(stage)),
                                   fmt::format("Run the {} stage from prior artifacts", to_string(stage)));
    add_common(sub, o);
    single.emplace_back(sub, stage);
  }

  std::string x_path, y_path;
  auto* leadlag = app.add_subcommand("leadlag", "Lead-lag stage, or a standalone run with --x/--y");
  add_common(leadlag, o);
  leadlag->add_option("--x", x_path, "Standalone x series (month or date, value)");
  leadlag->add_option("--y", y_path, "Standalone y series (month or date, value)");

  std::string fixture_dir;
  std::uint64_t seed = sentiflow::fixture::kDefaultSeed;
  auto* fixture = app.add_subcommand("fixture", "Write the seeded synthetic fixture");
  fixture->add_option("dir", fixture_dir, "Destination directory")->required();
  fixture->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_stages(o, {sentiflow::pipeline::kAllStages.begin(), sentiflow::pipeline::kAllStages.end()},
                                true);
    for (const auto& [sub, stage] : single)
      if (*sub) return run_stages(o, {stage}, false);
    if (*leadlag) {
      if (x_path.empty() != y_path.empty())
        sentiflow::fail(sentiflow::ErrorKind::Config, "standalone lead-lag needs both --x and --y");
      if (x_path.empty()) return run_stages(o, {sentiflow::pipeline::Stage::LeadLag}, false);
      auto cfg = load(o);
      auto out = sentiflow::resolve_output(cfg, out_flag(o));
      sentiflow::pipeline::RunLock lock(out);
      auto st = sentiflow::pipeline::standalone_leadlag(x_path, y_path, cfg.band_specs(), cfg.report);
      st.commit(out, sentiflow::pipeline::Stage::LeadLag);
      if (!o.quiet) std::cerr << fmt::format("done: {}\n", (out / "leadlag").string());
      return 0;
    }
    if (*fixture) {
      auto m = sentiflow::fixture::generate(fixture_dir, seed);
      std::cerr << fmt::format("fixture written to {} (seed {})\n", fixture_dir, m["seed"].get<std::uint64_t>());
      return 0;
    }
  } catch (const sentiflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sentiflow::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
