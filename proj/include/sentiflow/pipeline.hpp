#pragma once

// Stage orchestration: score -> index -> regress -> bounded -> leadlag ->
// report. Each stage reads the previous stages' tables from the run
// directory, stages its own files, and commits them atomically; a failing
// stage leaves its partial files under quarantine/.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "sentiflow/config.hpp"
#include "sentiflow/corpus.hpp"
#include "sentiflow/econometrics.hpp"
#include "sentiflow/indexer.hpp"
#include "sentiflow/sentiment.hpp"
#include "sentiflow/spectral.hpp"
#include "sentiflow/svg.hpp"
#include "sentiflow/table.hpp"

namespace sentiflow::pipeline {

enum class Stage { Score, Index, Regress, Bounded, LeadLag, Report };

inline constexpr std::array<Stage, 6> kAllStages = {Stage::Score,   Stage::Index,   Stage::Regress,
                                                    Stage::Bounded, Stage::LeadLag, Stage::Report};

inline std::string_view to_string(Stage s) {
  constexpr std::array<std::string_view, 6> names = {"score", "index", "regress", "bounded", "leadlag", "report"};
  return names[static_cast<std::size_t>(s)];
}

namespace files {
inline constexpr std::string_view kSentenceScores = "score/sentence_scores.csv";
inline constexpr std::string_view kMeetingScores = "score/meeting_scores.csv";
inline constexpr std::string_view kMonthlyIndex = "index/monthly_index.csv";
inline constexpr std::string_view kAlpha = "regress/table5_alpha.csv";
inline constexpr std::string_view kBounded = "bounded/table6_bounded.csv";
inline constexpr std::string_view kGapSeries = "bounded/gap_series.csv";
inline constexpr std::string_view kRobustness = "bounded/robustness.csv";
inline constexpr std::string_view kLeadLag = "leadlag/table8_leadlag.csv";
inline constexpr std::string_view kPairs = "leadlag/pairs.csv";
inline constexpr std::string_view kBandSeries = "leadlag/band_series.csv";
inline constexpr std::string_view kSummary = "report/summary.md";
inline constexpr std::string_view kManifest = "run_manifest.json";
}  // namespace files

/// Error raised inside a stage, carrying the stage name.
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& inner)
      : Error(inner.kind(), fmt::format("stage '{}' failed: {}", to_string(stage), inner.what())), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

/// Exclusive advisory lock on <dir>/.lock, held for the object's lifetime.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) {
    fs::create_directories(dir);
    path_ = dir / ".lock";
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) fail(ErrorKind::Io, fmt::format("cannot open lock file '{}'", path_.string()));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      fail(ErrorKind::Config, fmt::format("run directory '{}' is locked by another run", dir.string()));
    }
  }
  ~RunLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

/// Files produced by one stage, held in memory until the stage completes.
class Staging {
 public:
  void add(std::string_view rel, std::string content, std::optional<std::size_t> rows = std::nullopt) {
    files_[std::string(rel)] = std::move(content);
    if (rows) rows_[std::string(rel)] = *rows;
  }
  void add(std::string_view rel, const TableWriter& t) { add(rel, t.str(), t.data_rows()); }

  const std::map<std::string, std::string>& files() const { return files_; }
  const std::map<std::string, std::size_t>& rows() const { return rows_; }

  /// Writes into <out>/.staging/<stage>, then swaps that tree into place.
  void commit(const fs::path& out, Stage stage) const {
    const fs::path stage_dir = out / to_string(stage);
    const fs::path tmp = out / ".staging" / to_string(stage);
    fs::remove_all(tmp);
    write_tree(tmp, stage);
    fs::remove_all(stage_dir);
    fs::rename(tmp, stage_dir);
    fs::remove(out / ".staging");
  }

  /// Partial outputs of a failed stage plus the error text.
  void quarantine(const fs::path& out, Stage stage, std::string_view error) const {
    const fs::path dir = out / "quarantine" / to_string(stage);
    fs::remove_all(dir);
    write_tree(dir, stage);
    write_text_file(dir / "error.txt", fmt::format("{}\n", error));
    fs::remove_all(out / ".staging");
  }

 private:
  void write_tree(const fs::path& root, Stage stage) const {
    const std::string prefix = std::string(to_string(stage)) + "/";
    fs::create_directories(root);
    for (const auto& [rel, content] : files_) {
      std::string sub = rel.rfind(prefix, 0) == 0 ? rel.substr(prefix.size()) : rel;
      write_text_file(root / sub, content);
    }
  }

  std::map<std::string, std::string> files_;
  std::map<std::string, std::size_t> rows_;
};

namespace detail {

inline std::string num(double v) { return std::isfinite(v) ? format_exact(v) : std::string(); }

inline std::string opt_num(const std::optional<double>& v) { return v ? format_exact(*v) : std::string(); }

inline DelimitedTable require_table(const fs::path& out, std::string_view rel, Stage needed_by) {
  const fs::path p = out / rel;
  if (!fs::exists(p))
    fail(ErrorKind::Dependency,
         fmt::format("missing upstream artifact '{}' needed by '{}'; run the earlier stage first", p.string(),
                     to_string(needed_by)));
  return read_delimited(p);
}

inline std::size_t col(const DelimitedTable& t, std::string_view name) {
  auto c = t.column(name);
  if (!c) fail(ErrorKind::Format, fmt::format("{}: missing column '{}'", t.source, name));
  return *c;
}

inline double cell_double(const DelimitedTable& t, std::size_t r, std::size_t c) {
  auto v = try_parse_double(t.rows[r][c]);
  if (!v)
    fail(ErrorKind::Format, fmt::format("{}:{}: non-numeric value '{}'", t.source, t.line_numbers[r], t.rows[r][c]));
  return *v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Artifact readers

inline std::vector<sentiment::MeetingSeries> read_meeting_scores(const DelimitedTable& t) {
  auto cm = detail::col(t, "method"), cd = detail::col(t, "date"), cv = detail::col(t, "value");
  std::vector<sentiment::MeetingSeries> out;
  std::map<std::string, std::size_t> pos;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& m = t.rows[r][cm];
    auto [it, fresh] = pos.emplace(m, out.size());
    if (fresh) out.push_back({m, {}});
    out[it->second].points.emplace_back(parse_date(t.rows[r][cd]), detail::cell_double(t, r, cv));
  }
  for (const auto& s : out) s.validate();
  return out;
}

/// Wide monthly table: first column 'month', one column per series.
inline std::vector<MonthlySeries> read_monthly_table(const DelimitedTable& t) {
  if (t.header.empty() || t.header.front() != "month")
    fail(ErrorKind::Format, fmt::format("{}: first column must be 'month'", t.source));
  if (t.rows.empty()) fail(ErrorKind::Format, fmt::format("{}: no rows", t.source));
  std::vector<MonthlySeries> out;
  YearMonth start = parse_month(t.rows.front()[0]);
  for (std::size_t c = 1; c < t.header.size(); ++c) out.push_back({t.header[c], start, {}});
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (parse_month(t.rows[r][0]) != start.plus(static_cast<int>(r)))
      fail(ErrorKind::Format, fmt::format("{}:{}: months are not contiguous", t.source, t.line_numbers[r]));
    for (std::size_t c = 1; c < t.header.size(); ++c) out[c - 1].values.push_back(detail::cell_double(t, r, c));
  }
  return out;
}

/// Two-column monthly file (month or date, value) for standalone lead-lag runs.
inline MonthlySeries read_value_series(const fs::path& path) {
  auto t = read_delimited(path);
  if (t.header.size() < 2) fail(ErrorKind::Format, fmt::format("{}: expected a date and a value column", t.source));
  if (t.rows.empty()) fail(ErrorKind::Format, fmt::format("{}: no rows", t.source));
  MonthlySeries s{t.header[1], parse_month(t.rows.front()[0]), {}};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (parse_month(t.rows[r][0]) != s.month(r))
      fail(ErrorKind::Alignment,
           fmt::format("{}:{}: expected month {}, found '{}'", t.source, t.line_numbers[r], format_month(s.month(r)),
                       t.rows[r][0]));
    s.values.push_back(detail::cell_double(t, r, 1));
  }
  return s;
}

struct AlphaRow {
  std::string method;
  int variant = 1;
  double alpha = 0;
};

inline std::vector<AlphaRow> read_alpha_table(const DelimitedTable& t) {
  auto cm = detail::col(t, "method"), cv = detail::col(t, "variant"), ca = detail::col(t, "alpha");
  std::vector<AlphaRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({t.rows[r][cm], static_cast<int>(detail::cell_double(t, r, cv)), detail::cell_double(t, r, ca)});
  return out;
}

// ---------------------------------------------------------------------------
// Stage computations

struct ScoreResult {
  std::vector<sentiment::ScoredSentence> sentences;
  std::vector<sentiment::MeetingSeries> series;
};

inline ScoreResult compute_scores(const RunConfig& cfg) {
  ScoreResult res;
  std::optional<std::vector<Date>> meeting_dates;
  if (cfg.corpus) {
    auto docs = corpus::load_corpus(cfg.corpus->resolved());
    sentiment::ScoringResources r;
    r.keywords = sentiment::load_word_list(cfg.keywords.value_or(RunConfig::default_keywords()).resolved());
    r.concentrated =
        sentiment::load_word_list(cfg.concentrated.value_or(RunConfig::default_concentrated()).resolved());
    r.lexicon = sentiment::load_lexicon(cfg.polarity_lexicon->resolved());
    r.lexicon.merge(sentiment::load_lexicon(cfg.valence_lexicon->resolved()));
    auto scored = sentiment::score_corpus(docs, r);
    res.sentences = std::move(scored.sentences);
    res.series = std::move(scored.meetings);
    meeting_dates.emplace();
    for (const auto& d : docs) meeting_dates->push_back(d.meeting_date);
  }
  if (cfg.external_scores) {
    std::optional<std::vector<Date>> strict;
    if (cfg.strict_external_dates) {
      if (!meeting_dates) fail(ErrorKind::Config, "strict_external_dates needs a corpus to align against");
      strict = meeting_dates;
    }
    for (auto& s : sentiment::ingest_external_scores(cfg.external_scores->resolved(), strict)) {
      for (const auto& existing : res.series)
        if (existing.method == s.method)
          fail(ErrorKind::Format, fmt::format("external score column '{}' duplicates a built-in method", s.method));
      res.series.push_back(std::move(s));
    }
  }
  if (res.series.empty()) fail(ErrorKind::Config, "nothing to score: configure inputs.corpus or inputs.external_scores");
  return res;
}

inline Staging score_tables(const ScoreResult& res, const std::string& digest) {
  Staging st;
  TableWriter sent("sentence_scores", "score per sentence; Word0 in keyword counts, others unitless", digest);
  sent.header({"date", "ordinal", "tokens", "Word0", "Word1", "Word2", "Word3", "Word4"});
  for (const auto& s : res.sentences)
    sent.row({format_date(s.meeting_date), std::to_string(s.ordinal), std::to_string(s.token_count),
              format_exact(s.scores.word0), format_exact(s.scores.word1), format_exact(s.scores.word2),
              format_exact(s.scores.word3), format_exact(s.scores.word4)});
  TableWriter meet("meeting_scores", "mean sentence score per meeting", digest);
  meet.header({"method", "date", "value"});
  for (const auto& s : res.series)
    for (const auto& [d, v] : s.points) meet.row({s.method, format_date(d), format_exact(v)});
  if (!res.sentences.empty()) st.add(files::kSentenceScores, sent);
  st.add(files::kMeetingScores, meet);
  return st;
}

inline std::vector<MonthlyIndex> compute_indices(const RunConfig& cfg,
                                                 const std::vector<sentiment::MeetingSeries>& all) {
  std::vector<sentiment::MeetingSeries> chosen;
  if (cfg.methods.empty()) {
    chosen = all;
  } else {
    for (const auto& name : cfg.methods) {
      auto it = std::find_if(all.begin(), all.end(), [&](const auto& s) { return s.method == name; });
      if (it == all.end()) fail(ErrorKind::Config, fmt::format("selected method '{}' has no scores", name));
      chosen.push_back(*it);
    }
  }
  return indexer::build_indices(chosen, cfg.indexer, cfg.scm_members, cfg.scm_label);
}

inline std::string monthly_table(const std::vector<MonthlySeries>& series, std::string_view name,
                                 std::string_view units, const std::string& digest, std::size_t* rows = nullptr) {
  TableWriter t(name, units, digest);
  std::vector<std::string> header = {"month"};
  for (const auto& s : series) header.push_back(s.label);
  t.header(header);
  for (std::size_t i = 0; i < series.front().size(); ++i) {
    std::vector<std::string> row = {format_month(series.front().month(i))};
    for (const auto& s : series) row.push_back(format_exact(s.values[i]));
    t.row(row);
  }
  if (rows) *rows = t.data_rows();
  return t.str();
}

/// Inputs for the regression and bounded-model stages.
inline econometrics::BoundedInputs assemble_dataset(const RunConfig& cfg, const std::vector<MonthlyIndex>& indices) {
  if (!cfg.macro) fail(ErrorKind::Config, "this stage needs inputs.macro");
  auto macro = corpus::load_macro(cfg.macro->resolved());
  econometrics::BoundedInputs in;
  in.pi = macro.series(cfg.pi_column);
  in.output_gap = macro.series(cfg.output_gap_column);
  in.expected_next = cfg.expectation_column ? macro.series(*cfg.expectation_column)
                                            : econometrics::perfect_foresight(in.pi);
  auto [from, to] = common_range({&in.pi, &in.expected_next});
  if (!(from < to)) fail(ErrorKind::Alignment, "inflation and expectation series share no months");
  auto phi = econometrics::rational_gap(in.pi.slice(from, to), in.expected_next.slice(from, to));
  in.data["phi"] = phi;
  for (const auto& c : macro.columns) in.data[c] = macro.series(c);
  for (const auto& idx : indices) {
    if (in.data.count(idx.label))
      fail(ErrorKind::Config, fmt::format("index '{}' collides with a macro column of the same name", idx.label));
    in.data[idx.label] = idx;
  }
  return in;
}

inline Staging regress_tables(const RunConfig& cfg, const std::vector<MonthlyIndex>& indices,
                              const std::string& digest) {
  auto in = assemble_dataset(cfg, indices);
  const auto all_controls = econometrics::control_columns(econometrics::ModelVariant::ExtendedControls);
  TableWriter t("table5_alpha", "coefficients on phi in inflation units per s.d.; controls z-scored", digest);
  std::vector<std::string> header = {"method", "variant", "alpha", "std_error", "t_stat", "p_value", "stars",
                                     "pattern", "r_squared", "n", "first_month", "last_month", "const"};
  header.insert(header.end(), all_controls.begin(), all_controls.end());
  t.header(header);
  econometrics::AlphaOptions opts;
  opts.sentiment_lag = cfg.sentiment_lag;
  for (const auto& idx : indices) {
    for (int v : cfg.variants) {
      auto variant = econometrics::variant_from_int(v);
      for (const auto& c : econometrics::control_columns(variant))
        if (!in.data.count(c)) fail(ErrorKind::Format, fmt::format("macro table lacks control column '{}'", c));
      auto fit = econometrics::estimate_alpha(in.data, idx.label, variant, opts);
      const auto& a = fit.get(idx.label);
      std::vector<std::string> row = {idx.label,
                                      std::to_string(v),
                                      format_exact(a.estimate),
                                      format_exact(a.std_error),
                                      detail::num(a.t_stat),
                                      format_exact(a.p_value),
                                      std::string(econometrics::significance_stars(a.p_value)),
                                      std::string(econometrics::to_string(
                                          econometrics::sign_structure_check(a.estimate, -1.0).pattern)),
                                      format_exact(fit.r_squared),
                                      std::to_string(fit.n),
                                      format_month(fit.first_month),
                                      format_month(fit.first_month.plus(static_cast<int>(fit.n) - 1)),
                                      fit.has("const") ? format_exact(fit.get("const").estimate) : ""};
      for (const auto& c : all_controls) row.push_back(fit.has(c) ? format_exact(fit.get(c).estimate) : "");
      t.row(row);
    }
  }
  Staging st;
  st.add(files::kAlpha, t);
  return st;
}

inline Staging bounded_tables(const RunConfig& cfg, const std::vector<MonthlyIndex>& indices,
                              const std::vector<AlphaRow>& alphas, const std::string& digest) {
  auto in = assemble_dataset(cfg, indices);
  TableWriter t6("table6_bounded", "inflation units (E_BR, pi_BR, gap = pi - pi_BR)", digest);
  t6.header({"panel", "method", "alpha", "m", "mean", "median", "max", "min", "range"});
  TableWriter gaps("gap_series", "inflation units per month", digest);
  gaps.header({"method", "month", "E_BR", "pi_BR", "gap"});
  std::vector<econometrics::BoundedPath> paths;
  std::vector<std::string> methods;
  for (const auto& idx : indices) {
    auto it = std::find_if(alphas.begin(), alphas.end(), [&](const AlphaRow& a) {
      return a.method == idx.label && a.variant == cfg.bounded_variant;
    });
    if (it == alphas.end())
      fail(ErrorKind::Dependency, fmt::format("no alpha for '{}' under variant {} in {}; rerun the regress stage",
                                              idx.label, cfg.bounded_variant, files::kAlpha));
    paths.push_back(econometrics::bounded_path(idx.label, it->alpha, in.pi, in.expected_next, idx, in.output_gap,
                                               cfg.params));
    methods.push_back(idx.label);
  }
  const std::array<std::pair<const char*, const MonthlySeries econometrics::BoundedPath::*>, 3> panels = {
      {{"E_BR", &econometrics::BoundedPath::e_br},
       {"pi_BR", &econometrics::BoundedPath::pi_br},
       {"gap", &econometrics::BoundedPath::gap}}};
  for (const auto& [panel, member] : panels) {
    for (const auto& p : paths) {
      auto s = econometrics::summarize((p.*member).values);
      t6.row({panel, p.method, format_exact(p.alpha), format_exact(p.m), format_exact(s.mean), format_exact(s.median),
              format_exact(s.max), format_exact(s.min), format_exact(s.range)});
    }
  }
  for (const auto& p : paths)
    for (std::size_t i = 0; i < p.gap.size(); ++i)
      gaps.row({p.method, format_month(p.gap.month(i)), format_exact(p.e_br.values[i]),
                format_exact(p.pi_br.values[i]), format_exact(p.gap.values[i])});

  TableWriter rob("robustness", "inflation units; one row per (m, method)", digest);
  rob.header({"m", "method", "alpha", "E_BR_mean", "pi_BR_mean", "gap_mean", "gap_median", "gap_max", "gap_min",
              "gap_range"});
  econometrics::AlphaOptions opts;
  opts.sentiment_lag = cfg.sentiment_lag;
  auto rows = econometrics::robustness_sweep(cfg.m_grid, methods, econometrics::variant_from_int(cfg.bounded_variant),
                                             in, cfg.params, opts);
  for (const auto& r : rows)
    rob.row({format_exact(r.m), r.method, format_exact(r.path.alpha), format_exact(r.e_br.mean),
             format_exact(r.pi_br.mean), format_exact(r.gap.mean), format_exact(r.gap.median), format_exact(r.gap.max),
             format_exact(r.gap.min), format_exact(r.gap.range)});
  Staging st;
  st.add(files::kBounded, t6);
  st.add(files::kGapSeries, gaps);
  st.add(files::kRobustness, rob);
  return st;
}

struct LeadLagInput {
  std::vector<MonthlySeries> xs;
  std::vector<MonthlySeries> ys;
};

inline Staging leadlag_tables(const LeadLagInput& in, const std::vector<spectral::BandSpec>& bands,
                              ReportMode mode, const std::string& digest) {
  TableWriter t8("table8_leadlag", "months; delta = t_x - t_y, positive means x leads y", digest);
  std::vector<std::string> header = {"band", "kind", "x", "y", "count"};
  if (mode != ReportMode::Abs) header.push_back("signed_mean");
  if (mode != ReportMode::Signed) header.push_back("abs_mean");
  t8.header(header);
  TableWriter pairs("leadlag_pairs", "month indices and months", digest);
  pairs.header({"band", "kind", "x", "y", "t_x", "t_y", "month_x", "month_y", "delta"});
  TableWriter series("band_series", "band-limited reconstructions on the aligned grid", digest);
  series.header({"band", "x", "y", "month", "x_value", "y_value"});

  for (const auto& x : in.xs) {
    for (const auto& y : in.ys) {
      auto [from, to] = common_range({&x, &y});
      if (!(from < to))
        fail(ErrorKind::Alignment, fmt::format("lead-lag series '{}' and '{}' share no months", x.label, y.label));
      auto xw = x.slice(from, to), yw = y.slice(from, to);
      if (!xw.all_finite() || !yw.all_finite())
        fail(ErrorKind::InsufficientData,
             fmt::format("lead-lag series '{}' or '{}' has missing months in the common window", x.label, y.label));
      auto report = spectral::leadlag_report(xw.values, yw.values, bands);
      for (const auto& b : report.bands) {
        for (const auto& [kind, cell] : {std::pair<const char*, const spectral::LeadLagCell*>{"minima", &b.minima},
                                         {"maxima", &b.maxima}}) {
          std::vector<std::string> row = {b.band.label, kind, x.label, y.label, std::to_string(cell->count)};
          if (mode != ReportMode::Abs) row.push_back(detail::opt_num(cell->signed_mean));
          if (mode != ReportMode::Signed) row.push_back(detail::opt_num(cell->abs_mean));
          t8.row(row);
          for (const auto& p : cell->pairs)
            pairs.row({b.band.label, kind, x.label, y.label, std::to_string(p.t_x), std::to_string(p.t_y),
                       format_month(xw.month(p.t_x)), format_month(xw.month(p.t_y)), std::to_string(p.delta)});
        }
        for (std::size_t i = 0; i < b.x_band.size(); ++i)
          series.row({b.band.label, x.label, y.label, format_month(xw.month(i)), format_exact(b.x_band[i]),
                      format_exact(b.y_band[i])});
      }
    }
  }
  Staging st;
  st.add(files::kLeadLag, t8);
  st.add(files::kPairs, pairs);
  st.add(files::kBandSeries, series);
  return st;
}

inline LeadLagInput leadlag_inputs(const RunConfig& cfg, const std::vector<MonthlyIndex>& indices) {
  if (!cfg.futures) fail(ErrorKind::Config, "the leadlag stage needs inputs.futures");
  LeadLagInput in;
  if (cfg.leadlag_indices.empty()) {
    in.xs = indices;
  } else {
    for (const auto& name : cfg.leadlag_indices) {
      auto it = std::find_if(indices.begin(), indices.end(), [&](const auto& s) { return s.label == name; });
      if (it == indices.end()) fail(ErrorKind::Config, fmt::format("lead-lag index '{}' is not in the monthly index", name));
      in.xs.push_back(*it);
    }
  }
  auto fut = corpus::load_macro(cfg.futures->resolved());
  for (const auto& c : fut.columns) in.ys.push_back(fut.series(c));
  return in;
}

// ---------------------------------------------------------------------------
// Report: summary and plots rebuilt purely from the stage tables on disk.

namespace detail {

inline std::string markdown_table(const DelimitedTable& t) {
  std::string out = "|";
  for (const auto& h : t.header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& c : row) {
      auto v = try_parse_double(c);
      bool integral = c.find_first_of(".eE") == std::string::npos;
      out += " " + (v && !integral ? fmt::format("{:.4f}", *v) : c) + " |";
    }
    out += "\n";
  }
  return out;
}

inline std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
  return out;
}

}  // namespace detail

inline Staging report_tables(const fs::path& out, const std::string& digest) {
  Staging st;
  std::string md = fmt::format("# Sentiment and inflation expectations report\n\nconfig digest: `{}`\n", digest);
  bool any = false;

  if (fs::exists(out / files::kAlpha)) {
    any = true;
    md += "\n## Sentiment discount factors (alpha)\n\n" + detail::markdown_table(read_delimited(out / files::kAlpha));
  }
  if (fs::exists(out / files::kBounded)) {
    any = true;
    md += "\n## Bounded-rationality inflation\n\n" + detail::markdown_table(read_delimited(out / files::kBounded));
  }
  if (fs::exists(out / files::kRobustness)) {
    md += "\n## Cognitive discount sweep\n\n" + detail::markdown_table(read_delimited(out / files::kRobustness));
  }
  if (fs::exists(out / files::kGapSeries)) {
    auto t = read_delimited(out / files::kGapSeries);
    auto cm = detail::col(t, "method"), cmo = detail::col(t, "month"), cg = detail::col(t, "gap");
    std::vector<std::string> months;
    std::map<std::string, std::size_t> month_pos;
    for (const auto& row : t.rows)
      if (month_pos.emplace(row[cmo], 0).second) months.push_back(row[cmo]);
    std::sort(months.begin(), months.end());
    for (std::size_t i = 0; i < months.size(); ++i) month_pos[months[i]] = i;
    svg::Panel panel{"pi - pi_BR", {}, {}, {}};
    std::map<std::string, std::size_t> line_pos;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      auto [it, fresh] = line_pos.emplace(t.rows[r][cm], panel.lines.size());
      if (fresh) panel.lines.push_back({t.rows[r][cm], std::vector<double>(months.size(), std::nan(""))});
      panel.lines[it->second].y[month_pos[t.rows[r][cmo]]] = detail::cell_double(t, r, cg);
    }
    st.add("report/fig_gap.svg", svg::line_chart("Gap between realized and bounded-rational inflation", months, {panel}));
    md += "\n![gap](fig_gap.svg)\n";
  }
  if (fs::exists(out / files::kLeadLag)) {
    any = true;
    auto t8 = read_delimited(out / files::kLeadLag);
    md += "\n## Lead-lag distances between turning points\n\n" + detail::markdown_table(t8);

    // Bars: mean absolute (or signed) distance per index, one chart per band.
    auto value_col = t8.column("abs_mean") ? t8.column("abs_mean") : t8.column("signed_mean");
    auto cb = detail::col(t8, "band"), ck = detail::col(t8, "kind"), cx = detail::col(t8, "x"),
         cy = detail::col(t8, "y");
    std::vector<std::string> band_order;
    for (const auto& row : t8.rows)
      if (std::find(band_order.begin(), band_order.end(), row[cb]) == band_order.end()) band_order.push_back(row[cb]);
    for (const auto& band : band_order) {
      std::vector<std::string> series_names;
      std::vector<svg::BarGroup> groups;
      for (std::size_t r = 0; r < t8.rows.size(); ++r) {
        const auto& row = t8.rows[r];
        if (row[cb] != band) continue;
        std::string sname = row[cy] + " " + row[ck];
        auto sit = std::find(series_names.begin(), series_names.end(), sname);
        std::size_t si = static_cast<std::size_t>(sit - series_names.begin());
        if (sit == series_names.end()) series_names.push_back(sname);
        auto git = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.label == row[cx]; });
        if (git == groups.end()) {
          groups.push_back({row[cx], {}});
          git = groups.end() - 1;
        }
        if (git->values.size() <= si) git->values.resize(si + 1, std::nan(""));
        auto v = try_parse_double(row[*value_col]);
        git->values[si] = v.value_or(std::nan(""));
      }
      auto name = fmt::format("report/fig_bars_{}.svg", detail::safe_name(band));
      st.add(name, svg::bar_chart(fmt::format("Lead-lag distance, {} band", band),
                                  fmt::format("{} (months)", t8.header[*value_col]), series_names, groups));
    }
  }
  if (fs::exists(out / files::kBandSeries) && fs::exists(out / files::kPairs)) {
    auto bs = read_delimited(out / files::kBandSeries);
    auto pr = read_delimited(out / files::kPairs);
    auto cb = detail::col(bs, "band"), cx = detail::col(bs, "x"), cy = detail::col(bs, "y"), cm = detail::col(bs, "month"),
         cxv = detail::col(bs, "x_value"), cyv = detail::col(bs, "y_value");
    struct Overlay {
      std::vector<std::string> months;
      std::vector<svg::Panel> panels;
      std::map<std::string, std::size_t> panel_pos;
    };
    std::map<std::pair<std::string, std::string>, Overlay> overlays;
    std::vector<std::pair<std::string, std::string>> order;
    for (std::size_t r = 0; r < bs.rows.size(); ++r) {
      const auto& row = bs.rows[r];
      auto key = std::make_pair(row[cx], row[cy]);
      auto [oit, fresh] = overlays.try_emplace(key);
      if (fresh) order.push_back(key);
      auto& ov = oit->second;
      auto [pit, pfresh] = ov.panel_pos.emplace(row[cb], ov.panels.size());
      if (pfresh) ov.panels.push_back({row[cb] + " band", {{row[cx], {}}, {row[cy], {}}}, {}, {}});
      auto& panel = ov.panels[pit->second];
      if (pit->second == 0) ov.months.push_back(row[cm]);
      panel.lines[0].y.push_back(detail::cell_double(bs, r, cxv));
      panel.lines[1].y.push_back(detail::cell_double(bs, r, cyv));
    }
    auto pb = detail::col(pr, "band"), px = detail::col(pr, "x"), py = detail::col(pr, "y"), ptx = detail::col(pr, "t_x"),
         pty = detail::col(pr, "t_y"), pk = detail::col(pr, "kind");
    for (std::size_t r = 0; r < pr.rows.size(); ++r) {
      const auto& row = pr.rows[r];
      if (row[pk] != "minima") continue;
      auto it = overlays.find({row[px], row[py]});
      if (it == overlays.end()) continue;
      auto pit = it->second.panel_pos.find(row[pb]);
      if (pit == it->second.panel_pos.end()) continue;
      auto& panel = it->second.panels[pit->second];
      auto tx = static_cast<std::size_t>(detail::cell_double(pr, r, ptx));
      auto ty = static_cast<std::size_t>(detail::cell_double(pr, r, pty));
      if (tx >= panel.lines[0].y.size() || ty >= panel.lines[1].y.size()) continue;
      double vx = panel.lines[0].y[tx], vy = panel.lines[1].y[ty];
      panel.markers.push_back({tx, vx, 0});
      panel.markers.push_back({ty, vy, 1});
      panel.connectors.push_back({tx, ty, vx, vy});
    }
    for (const auto& key : order) {
      const auto& ov = overlays.at(key);
      auto name = fmt::format("report/fig_leadlag_{}_{}.svg", detail::safe_name(key.first), detail::safe_name(key.second));
      st.add(name, svg::line_chart(fmt::format("{} vs {}: band reconstructions with matched minima", key.first, key.second),
                                   ov.months, ov.panels));
    }
  }
  if (!any)
    fail(ErrorKind::Dependency,
         fmt::format("report needs at least one of '{}', '{}' or '{}' in '{}'", files::kAlpha, files::kBounded,
                     files::kLeadLag, out.string()));
  st.add(files::kSummary, md);
  return st;
}

// ---------------------------------------------------------------------------
// Runner

struct StageRecord {
  Stage stage;
  std::string status;  // ok, skipped, failed
  std::map<std::string, std::size_t> rows;
  std::string note;
};

class Runner {
 public:
  using Log = std::function<void(std::string_view)>;

  Runner(RunConfig cfg, fs::path out, Log log = {})
      : cfg_(std::move(cfg)), out_(std::move(out)), digest_(cfg_.digest()), log_(std::move(log)) {}

  const std::string& digest() const { return digest_; }
  const fs::path& out() const { return out_; }
  const std::vector<StageRecord>& records() const { return records_; }

  /// Runs the requested stages in order. With `skip_unconfigured`, stages whose
  /// optional inputs are absent are recorded as skipped instead of failing.
  void execute(const std::vector<Stage>& stages, bool skip_unconfigured) {
    cfg_.validate();
    RunLock lock(out_);
    const auto t0 = std::chrono::steady_clock::now();
    for (Stage s : stages) {
      if (skip_unconfigured) {
        if (auto why = unconfigured(s)) {
          records_.push_back({s, "skipped", {}, *why});
          say(fmt::format("[{}] skipped: {}", to_string(s), *why));
          continue;
        }
      }
      run_stage(s);
    }
    wall_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest();
  }

 private:
  std::optional<std::string> unconfigured(Stage s) const {
    switch (s) {
      case Stage::Regress:
      case Stage::Bounded:
        if (!cfg_.macro) return "no inputs.macro configured";
        break;
      case Stage::LeadLag:
        if (!cfg_.futures) return "no inputs.futures configured";
        break;
      default: break;
    }
    return std::nullopt;
  }

  void say(std::string_view msg) const {
    if (log_) log_(msg);
  }

  std::vector<MonthlyIndex> cached_indices(Stage s) const {
    return read_monthly_table(detail::require_table(out_, files::kMonthlyIndex, s));
  }

  Staging compute(Stage s) const {
    switch (s) {
      case Stage::Score: return score_tables(compute_scores(cfg_), digest_);
      case Stage::Index: {
        auto series = read_meeting_scores(detail::require_table(out_, files::kMeetingScores, s));
        std::size_t rows = 0;
        auto idx = compute_indices(cfg_, series);
        Staging st;
        auto text = monthly_table(idx, "monthly_index", "z-score per month (sample s.d.)", digest_, &rows);
        st.add(files::kMonthlyIndex, std::move(text), rows);
        return st;
      }
      case Stage::Regress: return regress_tables(cfg_, cached_indices(s), digest_);
      case Stage::Bounded: {
        auto idx = cached_indices(s);
        auto alphas = read_alpha_table(detail::require_table(out_, files::kAlpha, s));
        return bounded_tables(cfg_, idx, alphas, digest_);
      }
      case Stage::LeadLag:
        return leadlag_tables(leadlag_inputs(cfg_, cached_indices(s)), cfg_.band_specs(), cfg_.report, digest_);
      case Stage::Report: return report_tables(out_, digest_);
    }
    fail(ErrorKind::Config, "unknown stage");
  }

  void run_stage(Stage s) {
    say(fmt::format("[{}] running", to_string(s)));
    Staging st;
    try {
      st = compute(s);
    } catch (const Error& e) {
      StageError err(s, e);
      st.quarantine(out_, s, err.what());
      records_.push_back({s, "failed", {}, e.what()});
      wall_seconds_ = 0;
      write_manifest();
      throw err;
    } catch (const std::exception& e) {
      StageError err(s, Error(ErrorKind::Io, e.what()));
      st.quarantine(out_, s, err.what());
      records_.push_back({s, "failed", {}, e.what()});
      write_manifest();
      throw err;
    }
    st.commit(out_, s);
    records_.push_back({s, "ok", st.rows(), ""});
    for (const auto& [f, n] : st.rows()) say(fmt::format("[{}] {} ({} rows)", to_string(s), f, n));
  }

  void write_manifest() const {
    json m;
    m["tool"] = "sentiflow";
    m["version"] = kVersion;
    m["config_digest"] = digest_;
    m["config"] = cfg_.canonical();
    json inputs = json::object();
    auto add = [&](const char* key, const std::optional<InputPath>& p) {
      if (!p) return;
      auto path = p->resolved();
      if (fs::is_regular_file(path)) inputs[key] = {{"path", p->written}, {"sha256", sha256_file(path)}};
      else if (fs::is_directory(path)) {
        json dir = json::object();
        std::vector<fs::path> entries;
        for (const auto& e : fs::recursive_directory_iterator(path))
          if (e.is_regular_file()) entries.push_back(e.path());
        std::sort(entries.begin(), entries.end());
        for (const auto& e : entries) dir[fs::relative(e, path).generic_string()] = sha256_file(e);
        inputs[key] = {{"path", p->written}, {"files", dir}};
      }
    };
    add("corpus", cfg_.corpus);
    add("polarity_lexicon", cfg_.polarity_lexicon);
    add("valence_lexicon", cfg_.valence_lexicon);
    add("keywords", cfg_.keywords.value_or(RunConfig::default_keywords()));
    add("concentrated", cfg_.concentrated.value_or(RunConfig::default_concentrated()));
    add("external_scores", cfg_.external_scores);
    add("macro", cfg_.macro);
    add("futures", cfg_.futures);
    m["inputs"] = inputs;
    json stages = json::array();
    for (const auto& r : records_) {
      json j = {{"stage", to_string(r.stage)}, {"status", r.status}, {"rows", r.rows}};
      if (!r.note.empty()) j["note"] = r.note;
      stages.push_back(j);
    }
    m["stages"] = stages;
    m["wall_time_seconds"] = wall_seconds_;
    write_text_file(out_ / files::kManifest, m.dump(2) + "\n");
  }

  RunConfig cfg_;
  fs::path out_;
  std::string digest_;
  Log log_;
  std::vector<StageRecord> records_;
  double wall_seconds_ = 0;
};

/// Lead-lag between two user-supplied monthly series, without any corpus.
inline Staging standalone_leadlag(const fs::path& x_path, const fs::path& y_path,
                                  const std::vector<spectral::BandSpec>& bands, ReportMode mode) {
  LeadLagInput in;
  in.xs.push_back(read_value_series(x_path));
  in.ys.push_back(read_value_series(y_path));
  json spec = {{"x", sha256_file(x_path)}, {"y", sha256_file(y_path)}, {"report", to_string(mode)}};
  json b = json::array();
  for (const auto& band : bands)
    b.push_back({{"label", band.label}, {"cutoff", band.cutoff}, {"lower", band.lower ? json(*band.lower) : json(nullptr)}});
  spec["bands"] = b;
  return leadlag_tables(in, bands, mode, sha256_hex(spec.dump()));
}

}  // namespace sentiflow::pipeline
