#pragma once

// Run configuration: a YAML tree, command-line overrides and a canonical
// digest used to stamp every output table.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "sentiflow/econometrics.hpp"
#include "sentiflow/error.hpp"
#include "sentiflow/indexer.hpp"
#include "sentiflow/table.hpp"

#ifndef SENTIFLOW_DATA_DIR
#define SENTIFLOW_DATA_DIR "data"
#endif

namespace sentiflow {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr const char* kOutputRootEnv = "SENTIFLOW_OUTPUT_ROOT";

using json = nlohmann::json;

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Dependency, "SHA-256 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_text_file(path)); }

enum class ReportMode { Signed, Abs, Both };

inline std::string_view to_string(ReportMode m) {
  switch (m) {
    case ReportMode::Signed: return "signed";
    case ReportMode::Abs: return "abs";
    case ReportMode::Both: return "both";
  }
  return "both";
}

inline ReportMode parse_report_mode(std::string_view s) {
  if (s == "signed") return ReportMode::Signed;
  if (s == "abs") return ReportMode::Abs;
  if (s == "both") return ReportMode::Both;
  fail(ErrorKind::Config, fmt::format("report mode must be signed, abs or both, got '{}'", s));
}

inline indexer::Resample parse_resample(std::string_view s) {
  if (s == "linear") return indexer::Resample::Linear;
  if (s == "fourier") return indexer::Resample::Fourier;
  if (s == "none") return indexer::Resample::None;
  fail(ErrorKind::Config, fmt::format("resample must be linear, fourier or none, got '{}'", s));
}

inline std::string_view to_string(indexer::Resample r) {
  switch (r) {
    case indexer::Resample::Linear: return "linear";
    case indexer::Resample::Fourier: return "fourier";
    case indexer::Resample::None: return "none";
  }
  return "linear";
}

inline indexer::EdgeMode parse_edge(std::string_view s) {
  if (s == "wrap") return indexer::EdgeMode::Wrap;
  if (s == "mirror") return indexer::EdgeMode::Mirror;
  fail(ErrorKind::Config, fmt::format("SG edge mode must be wrap or mirror, got '{}'", s));
}

inline std::string_view to_string(indexer::EdgeMode e) {
  return e == indexer::EdgeMode::Wrap ? "wrap" : "mirror";
}

/// An input path as written in the configuration plus the directory it is
/// relative to. The written form enters the digest, so digests do not depend
/// on where a checkout lives.
struct InputPath {
  std::string written;
  fs::path base;

  fs::path resolved() const {
    fs::path p = written;
    return p.is_relative() ? (base / p).lexically_normal() : p;
  }
};

struct RunConfig {
  std::optional<InputPath> corpus;
  std::optional<InputPath> polarity_lexicon;
  std::optional<InputPath> valence_lexicon;
  std::optional<InputPath> keywords;
  std::optional<InputPath> concentrated;
  std::optional<InputPath> external_scores;
  bool strict_external_dates = false;
  std::optional<InputPath> macro;
  std::optional<InputPath> futures;

  fs::path output = "out";

  std::vector<std::string> methods;  // empty selects every available series
  std::vector<std::string> scm_members;
  std::string scm_label = "SCm";
  indexer::Settings indexer;

  std::vector<int> variants = {1, 2, 3};
  int bounded_variant = 1;
  int sentiment_lag = 1;
  std::string pi_column = "HCPI";
  std::string output_gap_column = "y";
  std::optional<std::string> expectation_column;
  econometrics::CalibratedParams params;
  std::vector<double> m_grid = {0.8, 0.85, 0.9};

  std::vector<std::size_t> bands = {3, 6, 12};
  bool disjoint = false;
  ReportMode report = ReportMode::Both;
  std::vector<std::string> leadlag_indices;  // empty selects every index

  /// Built-in word lists used when the configuration names none.
  static InputPath default_keywords() { return {"inflation_keywords.txt", SENTIFLOW_DATA_DIR}; }
  static InputPath default_concentrated() { return {"negative_concentrated_default.txt", SENTIFLOW_DATA_DIR}; }

  std::vector<spectral::BandSpec> band_specs() const {
    auto b = spectral::bands_from_cutoffs(bands);
    return disjoint ? spectral::with_disjoint_bands(std::move(b)) : b;
  }

  void validate() const {
    try {
      params.validate();
    } catch (const Error& e) {
      fail(ErrorKind::Config, e.what());
    }
    for (int v : variants)
      if (v < 1 || v > 3) fail(ErrorKind::Config, fmt::format("model variant must be 1, 2 or 3, got {}", v));
    if (bounded_variant < 1 || bounded_variant > 3)
      fail(ErrorKind::Config, fmt::format("bounded variant must be 1, 2 or 3, got {}", bounded_variant));
    if (sentiment_lag < 0) fail(ErrorKind::Config, "sentiment lag must be nonnegative");
    for (double m : m_grid)
      if (!(m > 0.0 && m <= 1.05)) fail(ErrorKind::Config, fmt::format("m grid value {} outside (0, 1.05]", m));
    if (indexer.sg) {
      try {
        indexer.sg->validate();
      } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
      }
    }
    if (indexer.resample == indexer::Resample::Fourier && indexer.keep_harmonics == 0)
      fail(ErrorKind::Config, "keep_harmonics must be positive");
    for (std::size_t c : bands)
      if (c == 0) fail(ErrorKind::Config, "band cutoffs must be positive");
    if (scm_members.size() == 1) fail(ErrorKind::Config, "composite index needs at least two members");
    const std::pair<const char*, const std::optional<InputPath>*> inputs[] = {
        {"corpus", &corpus},     {"polarity_lexicon", &polarity_lexicon}, {"valence_lexicon", &valence_lexicon},
        {"keywords", &keywords}, {"concentrated", &concentrated},         {"external_scores", &external_scores},
        {"macro", &macro},       {"futures", &futures}};
    for (const auto& [key, p] : inputs)
      if (*p && !fs::exists((*p)->resolved()))
        fail(ErrorKind::Config,
             fmt::format("input '{}' not found: {}", key, (*p)->resolved().string()));
    if (corpus && (!polarity_lexicon || !valence_lexicon))
      fail(ErrorKind::Config, "scoring a corpus needs both polarity_lexicon and valence_lexicon");
  }

  /// Canonical form of everything that influences table contents. The output
  /// location is deliberately absent.
  json canonical() const {
    auto path = [](const std::optional<InputPath>& p) -> json { return p ? json(p->written) : json(nullptr); };
    json j;
    j["inputs"] = {{"corpus", path(corpus)},
                   {"polarity_lexicon", path(polarity_lexicon)},
                   {"valence_lexicon", path(valence_lexicon)},
                   {"keywords", path(keywords)},
                   {"concentrated", path(concentrated)},
                   {"external_scores", path(external_scores)},
                   {"strict_external_dates", strict_external_dates},
                   {"macro", path(macro)},
                   {"futures", path(futures)}};
    j["methods"] = methods;
    j["scm"] = {{"members", scm_members}, {"label", scm_label}};
    json sg = nullptr;
    if (indexer.sg)
      sg = {{"window", indexer.sg->window},
            {"polyorder", indexer.sg->polyorder},
            {"deriv", indexer.sg->deriv},
            {"delta", indexer.sg->delta},
            {"edge", to_string(indexer.sg->edge)}};
    j["indexer"] = {{"resample", to_string(indexer.resample)},
                    {"keep_harmonics", indexer.keep_harmonics},
                    {"sg", sg},
                    {"standardize", indexer.standardize}};
    j["econometrics"] = {{"variants", variants},
                         {"bounded_variant", bounded_variant},
                         {"sentiment_lag", sentiment_lag},
                         {"pi_column", pi_column},
                         {"output_gap_column", output_gap_column},
                         {"expectation_column", expectation_column ? json(*expectation_column) : json(nullptr)},
                         {"m", params.m},
                         {"beta", params.beta},
                         {"kappa", params.kappa},
                         {"m_grid", m_grid}};
    j["spectral"] = {{"bands", bands},
                     {"disjoint", disjoint},
                     {"report", to_string(report)},
                     {"indices", leadlag_indices}};
    return j;
  }

  std::string digest() const { return sha256_hex(canonical().dump()); }
};

namespace detail {

template <typename T>
T yaml_as(const YAML::Node& node, std::string_view key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorKind::Config, fmt::format("config key '{}' has an invalid value", key));
  }
}

inline void check_keys(const YAML::Node& node, std::string_view section,
                       std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) fail(ErrorKind::Config, fmt::format("config section '{}' must be a mapping", section));
  for (const auto& kv : node) {
    auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(ErrorKind::Config, fmt::format("unknown config key '{}{}{}'", section, section.empty() ? "" : ".", key));
  }
}

}  // namespace detail

/// Parses a configuration document; relative input paths resolve against `base`.
inline RunConfig parse_config(std::string_view text, const fs::path& base) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::Config, fmt::format("malformed config: {}", e.what()));
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  detail::check_keys(root, "", {"inputs", "output", "methods", "scm", "indexer", "econometrics", "spectral"});

  if (auto in = root["inputs"]) {
    detail::check_keys(in, "inputs",
                       {"corpus", "polarity_lexicon", "valence_lexicon", "keywords", "concentrated",
                        "external_scores", "strict_external_dates", "macro", "futures"});
    auto path = [&](const char* key, std::optional<InputPath>& dst) {
      if (in[key] && !in[key].IsNull()) dst = InputPath{detail::yaml_as<std::string>(in[key], key), base};
    };
    path("corpus", cfg.corpus);
    path("polarity_lexicon", cfg.polarity_lexicon);
    path("valence_lexicon", cfg.valence_lexicon);
    path("keywords", cfg.keywords);
    path("concentrated", cfg.concentrated);
    path("external_scores", cfg.external_scores);
    path("macro", cfg.macro);
    path("futures", cfg.futures);
    if (in["strict_external_dates"])
      cfg.strict_external_dates = detail::yaml_as<bool>(in["strict_external_dates"], "strict_external_dates");
  }
  if (auto out = root["output"]) {
    fs::path p = detail::yaml_as<std::string>(out, "output");
    cfg.output = p.is_relative() ? base / p : p;
  }
  if (auto m = root["methods"]) cfg.methods = detail::yaml_as<std::vector<std::string>>(m, "methods");
  if (auto scm = root["scm"]) {
    detail::check_keys(scm, "scm", {"members", "label"});
    if (scm["members"]) cfg.scm_members = detail::yaml_as<std::vector<std::string>>(scm["members"], "scm.members");
    if (scm["label"]) cfg.scm_label = detail::yaml_as<std::string>(scm["label"], "scm.label");
  }
  if (auto ix = root["indexer"]) {
    detail::check_keys(ix, "indexer", {"resample", "keep_harmonics", "sg", "standardize"});
    if (ix["resample"]) cfg.indexer.resample = parse_resample(detail::yaml_as<std::string>(ix["resample"], "resample"));
    if (ix["keep_harmonics"])
      cfg.indexer.keep_harmonics = detail::yaml_as<std::size_t>(ix["keep_harmonics"], "keep_harmonics");
    if (ix["standardize"]) cfg.indexer.standardize = detail::yaml_as<bool>(ix["standardize"], "standardize");
    if (auto sg = ix["sg"]) {
      if (sg.IsScalar() && !detail::yaml_as<bool>(sg, "indexer.sg")) {
        cfg.indexer.sg.reset();
      } else {
        detail::check_keys(sg, "indexer.sg", {"window", "polyorder", "deriv", "delta", "edge"});
        indexer::SGParams p;
        if (sg["window"]) p.window = detail::yaml_as<std::size_t>(sg["window"], "sg.window");
        if (sg["polyorder"]) p.polyorder = detail::yaml_as<std::size_t>(sg["polyorder"], "sg.polyorder");
        if (sg["deriv"]) p.deriv = detail::yaml_as<std::size_t>(sg["deriv"], "sg.deriv");
        if (sg["delta"]) p.delta = detail::yaml_as<double>(sg["delta"], "sg.delta");
        if (sg["edge"]) p.edge = parse_edge(detail::yaml_as<std::string>(sg["edge"], "sg.edge"));
        cfg.indexer.sg = p;
      }
    }
  }
  if (auto ec = root["econometrics"]) {
    detail::check_keys(ec, "econometrics",
                       {"variants", "bounded_variant", "sentiment_lag", "pi_column", "output_gap_column",
                        "expectation_column", "m", "beta", "kappa", "m_grid"});
    if (ec["variants"]) cfg.variants = detail::yaml_as<std::vector<int>>(ec["variants"], "variants");
    if (ec["bounded_variant"]) cfg.bounded_variant = detail::yaml_as<int>(ec["bounded_variant"], "bounded_variant");
    if (ec["sentiment_lag"]) cfg.sentiment_lag = detail::yaml_as<int>(ec["sentiment_lag"], "sentiment_lag");
    if (ec["pi_column"]) cfg.pi_column = detail::yaml_as<std::string>(ec["pi_column"], "pi_column");
    if (ec["output_gap_column"])
      cfg.output_gap_column = detail::yaml_as<std::string>(ec["output_gap_column"], "output_gap_column");
    if (ec["expectation_column"] && !ec["expectation_column"].IsNull())
      cfg.expectation_column = detail::yaml_as<std::string>(ec["expectation_column"], "expectation_column");
    if (ec["m"]) cfg.params.m = detail::yaml_as<double>(ec["m"], "m");
    if (ec["beta"]) cfg.params.beta = detail::yaml_as<double>(ec["beta"], "beta");
    if (ec["kappa"]) cfg.params.kappa = detail::yaml_as<double>(ec["kappa"], "kappa");
    if (ec["m_grid"]) cfg.m_grid = detail::yaml_as<std::vector<double>>(ec["m_grid"], "m_grid");
  }
  if (auto sp = root["spectral"]) {
    detail::check_keys(sp, "spectral", {"bands", "disjoint", "report", "indices"});
    if (sp["bands"]) cfg.bands = detail::yaml_as<std::vector<std::size_t>>(sp["bands"], "bands");
    if (sp["disjoint"]) cfg.disjoint = detail::yaml_as<bool>(sp["disjoint"], "disjoint");
    if (sp["report"]) cfg.report = parse_report_mode(detail::yaml_as<std::string>(sp["report"], "report"));
    if (sp["indices"]) cfg.leadlag_indices = detail::yaml_as<std::vector<std::string>>(sp["indices"], "indices");
  }
  return cfg;
}

inline RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::Config, fmt::format("config file not found: {}", path.string()));
  return parse_config(read_text_file(path), fs::absolute(path).parent_path());
}

/// Output root precedence: explicit flag, then environment, then config.
inline fs::path resolve_output(const RunConfig& cfg, const std::optional<fs::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return cfg.output;
}

}  // namespace sentiflow
