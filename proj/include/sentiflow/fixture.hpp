#pragma once

// Seeded synthetic fixture with planted structure:
//  * BERTk2 external scores are one pure harmonic, so its monthly index is an
//    exact harmonic after linear resampling, wrap-edge smoothing and z-scoring;
//  * futures column ES is that index circularly delayed by `shift` months;
//  * HCPI is built so that pi_t - pi_{t+1} = intercept + alpha * BERTk2_{t-1},
//    with controls carrying no effect.
// The corpus is template text whose tone drifts with a slow cycle.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "sentiflow/calendar.hpp"
#include "sentiflow/config.hpp"
#include "sentiflow/corpus.hpp"
#include "sentiflow/indexer.hpp"
#include "sentiflow/sentiment.hpp"
#include "sentiflow/table.hpp"

namespace sentiflow::fixture {

struct Planted {
  double alpha = 0.3;
  double intercept = -0.02;
  int shift = 3;
  std::size_t harmonic = 2;
  double phase = 7.0;
  int first_year = 2019;
  int years = 5;
};

inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr std::array<unsigned, 8> kMeetingMonths = {1, 3, 4, 6, 7, 9, 11, 12};

/// Platform-stable draws from a 64-bit Mersenne Twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  double normal() {
    double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }

 private:
  std::mt19937_64 gen_;
};

struct Vocabulary {
  std::vector<std::string> adj_pos = {"strong", "solid", "robust", "favorable", "stable", "improved"};
  std::vector<std::string> adj_neg = {"weak", "subdued", "volatile", "uncertain", "adverse", "elevated"};
  std::vector<std::string> noun_pos = {"gains", "improvement", "progress", "expansion", "recovery"};
  std::vector<std::string> noun_neg = {"losses", "concerns", "uncertainty", "pressures", "slowdown", "decline"};
  std::vector<std::string> shocks = {"crisis", "recession", "stress", "downturn", "collapse", "shortfall",
                                     "contraction"};
  std::vector<std::string> sectors = {"housing",          "manufacturing",       "energy", "the labor market",
                                      "consumer spending", "business investment", "trade"};
};

inline std::string polarity_lexicon_text() {
  Vocabulary v;
  std::string out = "word,category\n";
  for (const auto& w : v.adj_pos) out += w + ",positive\n";
  for (const auto& w : v.noun_pos) out += w + ",positive\n";
  for (const auto& w : {"weak", "subdued", "volatile", "uncertain", "adverse"}) out += std::string(w) + ",negative\n";
  for (const auto& w : v.noun_neg) out += w + ",negative\n";
  for (const auto& w : {"crisis", "recession", "stress", "downturn"}) out += std::string(w) + ",negative\n";
  return out;
}

inline std::string valence_lexicon_text() {
  const std::vector<std::pair<const char*, double>> entries = {
      {"strong", 2.3},       {"solid", 1.6},      {"robust", 1.8},     {"favorable", 2.1}, {"stable", 1.2},
      {"improved", 2.0},     {"gains", 1.4},      {"improvement", 1.9}, {"progress", 1.7}, {"expansion", 1.1},
      {"recovery", 1.5},     {"weak", -1.9},      {"subdued", -0.8},   {"volatile", -1.5}, {"uncertain", -1.4},
      {"adverse", -1.9},     {"elevated", -0.6},  {"losses", -1.7},    {"concerns", -1.4}, {"uncertainty", -1.4},
      {"pressures", -1.0},   {"slowdown", -1.2},  {"decline", -1.3},   {"crisis", -3.1},   {"recession", -2.6},
      {"stress", -1.8},      {"downturn", -1.9},  {"collapse", -2.9},  {"shortfall", -1.5}, {"contraction", -1.2}};
  std::string out = "word,valence\n";
  for (const auto& [w, v] : entries) out += fmt::format("{},{}\n", w, v);
  return out;
}

/// One sentence whose wording leans positive with probability `p_pos`.
inline std::string make_sentence(Rng& rng, double p_pos, const Vocabulary& v) {
  auto adj = [&] { return rng.uniform() < p_pos ? rng.pick(v.adj_pos) : rng.pick(v.adj_neg); };
  auto noun = [&] { return rng.uniform() < p_pos ? rng.pick(v.noun_pos) : rng.pick(v.noun_neg); };
  switch (rng.index(10)) {
    case 0: return fmt::format("Participants observed that activity in {} had been {}.", rng.pick(v.sectors), adj());
    case 1:
      return fmt::format("Several members noted that readings on {} were not {}.", rng.pick(v.sectors), adj());
    case 2:
      return fmt::format("The staff projection pointed to {} in {} over the coming year.", noun(),
                         rng.pick(v.sectors));
    case 3:
      return fmt::format("Members judged that inflation risks for the U.S. economy remained {}.", adj());
    case 4:
      return fmt::format("Some participants cited the possibility of a {} as a source of {} for the outlook.",
                         rng.pick(v.shocks), noun());
    case 5:
      return fmt::format("Recent data on {} were {}, and overall {} was reported by business contacts.",
                         rng.pick(v.sectors), adj(), noun());
    case 6: return fmt::format("Participants did not expect {} in {} to persist in the near term.", noun(),
                               rng.pick(v.sectors));
    case 7:
      return fmt::format("In their discussion of {}, members saw {} {} and continued uncertainty.",
                         rng.pick(v.sectors), adj(), noun());
    case 8: return fmt::format("Longer-term inflation expectations were described as {}.", adj());
    default:
      return fmt::format("Conditions in financial markets were {} amid {} in {}.", adj(), noun(),
                         rng.pick(v.sectors));
  }
}

inline std::vector<Date> meeting_dates(const Planted& p, Rng& rng) {
  std::vector<Date> out;
  for (int y = p.first_year; y < p.first_year + p.years; ++y)
    for (unsigned m : kMeetingMonths) {
      unsigned day = 10 + static_cast<unsigned>(rng.index(18));
      out.push_back(Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{day}});
    }
  return out;
}

/// Minutes text for one meeting; every sentence keeps Word2 + Word3 within [-1, 1].
inline std::string make_document(Rng& rng, double tone, const sentiment::ScoringResources& res) {
  Vocabulary v;
  const double p_pos = 0.5 + 0.4 * tone;
  const std::size_t n = 8 + rng.index(6);
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (;;) {
      s = make_sentence(rng, p_pos, v);
      auto sc = sentiment::score_sentence(corpus::tokenize(s), res);
      if (sc.word2 + sc.word3 >= -1.0 && sc.word2 + sc.word3 <= 1.0) break;
    }
    text += s;
    text += (i % 4 == 3 || i + 1 == n) ? "\n\n" : " ";
  }
  return text;
}

inline std::string month_table(const std::vector<std::string>& cols, YearMonth start,
                               const std::vector<std::vector<double>>& values) {
  std::string out = "month";
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < values.front().size(); ++i) {
    out += format_month(start.plus(static_cast<int>(i)));
    for (const auto& col : values) out += "," + format_exact(col[i]);
    out += "\n";
  }
  return out;
}

inline constexpr std::string_view kConfigYaml = R"(# Synthetic fixture run configuration.
inputs:
  corpus: corpus
  polarity_lexicon: lexicon_polarity.csv
  valence_lexicon: lexicon_valence.csv
  external_scores: external_scores.csv
  macro: macro.csv
  futures: futures.csv
output: out
scm:
  members: [Word2, BERTk2]
  label: SCm
indexer:
  resample: linear
  sg:
    window: 5
    polyorder: 2
    edge: wrap
  standardize: true
econometrics:
  variants: [1, 2, 3]
  bounded_variant: 1
  sentiment_lag: 1
  pi_column: HCPI
  output_gap_column: y
  m: 0.85
  beta: 0.985
  kappa: -0.25
  m_grid: [0.8, 0.85, 0.9]
spectral:
  bands: [3, 6, 12]
  disjoint: false
  report: both
  indices: [BERTk2]
)";

/// Writes the fixture into `dir` and returns its manifest.
inline json generate(const fs::path& dir, std::uint64_t seed = kDefaultSeed, const Planted& p = {}) {
  Rng rng(seed);
  fs::create_directories(dir / "corpus");
  const std::size_t months = static_cast<std::size_t>(12 * p.years);
  const YearMonth start{p.first_year, 1};

  write_text_file(dir / "lexicon_polarity.csv", polarity_lexicon_text());
  write_text_file(dir / "lexicon_valence.csv", valence_lexicon_text());
  sentiment::ScoringResources res;
  res.lexicon = sentiment::parse_lexicon(polarity_lexicon_text(), "polarity");
  res.lexicon.merge(sentiment::parse_lexicon(valence_lexicon_text(), "valence"));
  res.keywords = sentiment::load_word_list(RunConfig::default_keywords().resolved());
  res.concentrated = sentiment::load_word_list(RunConfig::default_concentrated().resolved());

  auto dates = meeting_dates(p, rng);
  for (const auto& d : dates) {
    double t = static_cast<double>(months_between(start, YearMonth::of(d)));
    double tone = 0.8 * std::cos(2.0 * std::numbers::pi * t / 24.0) + 0.2 * (2.0 * rng.uniform() - 1.0);
    write_text_file(dir / "corpus" / (format_date(d) + ".txt"), make_document(rng, tone, res));
  }

  // External scores on the 15th of every month, formatted then parsed back so
  // the index below sees exactly what the pipeline will read.
  std::string ext = "date,BERTk2\n";
  sentiment::MeetingSeries bert{"BERTk2", {}};
  for (std::size_t t = 0; t < months; ++t) {
    double v = 0.4 * std::cos(2.0 * std::numbers::pi * static_cast<double>(p.harmonic) *
                              (static_cast<double>(t) - p.phase) / static_cast<double>(months)) -
               0.1;
    auto text = format_exact(v);
    YearMonth ym = start.plus(static_cast<int>(t));
    Date d{std::chrono::year{ym.year}, std::chrono::month{ym.month}, std::chrono::day{15}};
    ext += format_date(d) + "," + text + "\n";
    bert.points.emplace_back(d, *try_parse_double(text));
  }
  write_text_file(dir / "external_scores.csv", ext);

  indexer::Settings settings;
  settings.sg = indexer::SGParams{};
  auto sc = indexer::build_indices({bert}, settings).front();

  std::vector<double> futures(months);
  for (std::size_t t = 0; t < months; ++t)
    futures[(t + static_cast<std::size_t>(p.shift)) % months] = sc.values[t];
  write_text_file(dir / "futures.csv", month_table({"ES"}, start, {futures}));

  // pi_{t+1} = pi_t - phi_t with phi_t = intercept + alpha * SC_{t-1}.
  std::vector<double> pi(months);
  pi[0] = 2.0;
  for (std::size_t t = 0; t + 1 < months; ++t) {
    double phi = t == 0 ? p.intercept : p.intercept + p.alpha * sc.values[t - 1];
    pi[t + 1] = pi[t] - phi;
  }
  const std::vector<std::string> cols = {"HCPI", "y", "GDP", "MBAS", "FEDIR", "EXC", "UNEM", "PCE", "COIL"};
  const std::vector<std::pair<double, double>> level_scale = {{0.0, 0.5},  {2.0, 1.0},  {5.0, 0.8}, {1.5, 0.4},
                                                              {1.0, 0.05}, {4.5, 0.3}, {2.2, 0.4}, {70.0, 8.0}};
  std::vector<std::vector<double>> values = {pi};
  for (const auto& [level, scale] : level_scale) {
    std::vector<double> col(months);
    for (auto& x : col) x = level + scale * rng.normal();
    values.push_back(std::move(col));
  }
  write_text_file(dir / "macro.csv", month_table(cols, start, values));
  write_text_file(dir / "config.yaml", kConfigYaml);

  json manifest = {{"generator", "sentiflow fixture"},
                   {"version", kVersion},
                   {"seed", seed},
                   {"planted",
                    {{"alpha", p.alpha},
                     {"intercept", p.intercept},
                     {"shift_months", p.shift},
                     {"harmonic", p.harmonic},
                     {"phase", p.phase},
                     {"index", "BERTk2"},
                     {"futures_column", "ES"}}},
                   {"documents", dates.size()},
                   {"months", months}};
  write_text_file(dir / "fixture_manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace sentiflow::fixture
