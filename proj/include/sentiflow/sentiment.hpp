#pragma once

// Word-level sentiment scorers, meeting aggregation, external model scores and
// the composite index.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "sentiflow/calendar.hpp"
#include "sentiflow/corpus.hpp"
#include "sentiflow/error.hpp"
#include "sentiflow/series.hpp"
#include "sentiflow/table.hpp"

namespace sentiflow::sentiment {

/// Polarity sets feed Word1, the valence map feeds Word2.
struct Lexicon {
  std::set<std::string, std::less<>> positive;
  std::set<std::string, std::less<>> negative;
  std::map<std::string, double, std::less<>> valence;
  std::string source;

  void merge(const Lexicon& other) {
    for (const auto& w : other.positive) add_polarity(w, true);
    for (const auto& w : other.negative) add_polarity(w, false);
    for (const auto& [w, v] : other.valence) valence[w] = v;
    if (source.empty()) source = other.source;
    else if (!other.source.empty()) source += "+" + other.source;
  }

  void add_polarity(const std::string& word, bool is_positive) {
    auto& mine = is_positive ? positive : negative;
    const auto& theirs = is_positive ? negative : positive;
    if (theirs.contains(word))
      fail(ErrorKind::Format, fmt::format("lexicon word '{}' is both positive and negative", word));
    mine.insert(word);
  }
};

namespace detail {

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

inline void require_lowercase(std::string_view word, std::string_view source, std::size_t line) {
  for (char c : word)
    if (std::isupper(static_cast<unsigned char>(c)))
      fail(ErrorKind::Format, fmt::format("{}:{}: entry '{}' is not lowercase", source, line, word));
}

}  // namespace detail

/// Each line is `word,category` (positive/negative) or `word,valence` (signed
/// real). A header line and '#' comments are allowed.
inline Lexicon parse_lexicon(std::string_view text, std::string source) {
  Lexicon lex;
  lex.source = source;
  auto lines = detail::lines_of(text);
  bool first = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    char delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
    auto fields = split_fields(line, delim);
    if (fields.size() != 2)
      fail(ErrorKind::Format, fmt::format("{}:{}: expected 'word{}value'", source, n + 1, delim));
    std::string word = fields[0];
    std::string value = to_lower(fields[1]);
    bool was_first = std::exchange(first, false);
    if (value == "positive" || value == "negative") {
      detail::require_lowercase(word, source, n + 1);
      lex.add_polarity(word, value == "positive");
    } else if (auto v = try_parse_double(value)) {
      detail::require_lowercase(word, source, n + 1);
      lex.valence[word] = *v;
    } else if (!was_first) {
      fail(ErrorKind::Format, fmt::format("{}:{}: bad lexicon value '{}'", source, n + 1, fields[1]));
    }
  }
  return lex;
}

inline Lexicon load_lexicon(const fs::path& path) {
  return parse_lexicon(read_text_file(path), path.filename().string());
}

/// Ordered word list with optional multi-word phrases ("laid off").
struct WordList {
  std::vector<std::string> entries;
  std::set<std::string, std::less<>> singles;
  std::vector<std::vector<std::string>> phrases;  // longest first

  static WordList from_entries(std::vector<std::string> words, std::string_view source = "<list>") {
    WordList list;
    std::set<std::string, std::less<>> seen;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto& w = words[i];
      detail::require_lowercase(w, source, i + 1);
      if (!seen.insert(w).second)
        fail(ErrorKind::Format, fmt::format("{}: duplicate entry '{}'", source, w));
      auto parts = corpus::tokenize(w);
      if (parts.empty()) fail(ErrorKind::Format, fmt::format("{}: entry '{}' has no letters", source, w));
      if (parts.size() == 1) list.singles.insert(parts.front());
      else list.phrases.push_back(std::move(parts));
      list.entries.push_back(w);
    }
    std::stable_sort(list.phrases.begin(), list.phrases.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return list;
  }

  bool empty() const { return entries.empty(); }

  /// Non-overlapping occurrences, phrases matched before single words.
  std::size_t count_hits(std::span<const std::string> tokens) const {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < tokens.size();) {
      std::size_t advance = 0;
      for (const auto& p : phrases) {
        if (i + p.size() <= tokens.size() && std::equal(p.begin(), p.end(), tokens.begin() + i)) {
          advance = p.size();
          break;
        }
      }
      if (!advance && singles.contains(tokens[i])) advance = 1;
      if (advance) {
        ++hits;
        i += advance;
      } else {
        ++i;
      }
    }
    return hits;
  }
};

/// One lowercase entry per line; '#' starts a comment.
inline WordList parse_word_list(std::string_view text, std::string_view source) {
  std::vector<std::string> words;
  for (auto line : detail::lines_of(text)) {
    auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) words.emplace_back(line);
  }
  return WordList::from_entries(std::move(words), source);
}

inline WordList load_word_list(const fs::path& path) {
  return parse_word_list(read_text_file(path), path.filename().string());
}

using KeywordList = WordList;
using NegativeConcentratedList = WordList;

enum class Method { Word0, Word1, Word2, Word3, Word4 };

inline constexpr std::array<Method, 5> kWordMethods = {Method::Word0, Method::Word1, Method::Word2,
                                                       Method::Word3, Method::Word4};

inline std::string_view to_string(Method m) {
  constexpr std::array<std::string_view, 5> names = {"Word0", "Word1", "Word2", "Word3", "Word4"};
  return names[static_cast<std::size_t>(m)];
}

struct SentenceScores {
  double word0 = 0, word1 = 0, word2 = 0, word3 = 0, word4 = 0;

  double get(Method m) const {
    switch (m) {
      case Method::Word0: return word0;
      case Method::Word1: return word1;
      case Method::Word2: return word2;
      case Method::Word3: return word3;
      case Method::Word4: return word4;
    }
    return 0;
  }
};

/// Negative count of inflation-keyword occurrences.
inline double score_word0(std::span<const std::string> tokens, const KeywordList& keywords) {
  return 0.0 - static_cast<double>(keywords.count_hits(tokens));
}

/// (positive hits - negative hits) / token count.
inline double score_word1(std::span<const std::string> tokens, const Lexicon& lex) {
  long net = 0;
  for (const auto& t : tokens) {
    if (lex.positive.contains(t)) ++net;
    else if (lex.negative.contains(t)) --net;
  }
  return static_cast<double>(net) / static_cast<double>(std::max<std::size_t>(1, tokens.size()));
}

inline constexpr double kNegationScalar = -0.74;
inline constexpr double kCompoundAlpha = 15.0;
inline constexpr std::size_t kNegationWindow = 3;

inline bool is_negator(std::string_view t) {
  static const std::set<std::string_view> words = {
      "not",    "no",     "never",  "cannot", "nt",      "dont",   "doesnt", "didnt",
      "isnt",   "arent",  "wasnt",  "werent", "cant",    "couldnt", "shouldnt", "wouldnt",
      "wont",   "hasnt",  "havent", "hadnt",  "aint",    "neednt", "mustnt", "mightnt",
      "darent", "shant",
  };
  return words.contains(t);
}

/// Compound valence score in [-1, 1]: s / sqrt(s^2 + 15), where a valence term
/// is multiplied by -0.74 when a negator occurs in the three tokens before it.
inline double score_word2(std::span<const std::string> tokens, const Lexicon& lex) {
  double s = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = lex.valence.find(tokens[i]);
    if (it == lex.valence.end()) continue;
    any = true;
    double v = it->second;
    std::size_t from = i >= kNegationWindow ? i - kNegationWindow : 0;
    for (std::size_t j = from; j < i; ++j) {
      if (is_negator(tokens[j])) {
        v *= kNegationScalar;
        break;
      }
    }
    s += v;
  }
  if (!any) return 0.0;
  return s / std::sqrt(s * s + kCompoundAlpha);
}

/// -(concentrated hits / token count), floored at -1.
inline double score_word3(std::span<const std::string> tokens, const NegativeConcentratedList& list) {
  double hits = static_cast<double>(list.count_hits(tokens));
  double n = static_cast<double>(std::max<std::size_t>(1, tokens.size()));
  return 0.0 - std::min(1.0, hits / n);
}

inline double score_word4(double word2, double word3) {
  return std::clamp(word2 + word3, -1.0, 1.0);
}

struct ScoringResources {
  KeywordList keywords;
  Lexicon lexicon;
  NegativeConcentratedList concentrated;
};

inline SentenceScores score_sentence(std::span<const std::string> tokens, const ScoringResources& res) {
  SentenceScores s;
  s.word0 = score_word0(tokens, res.keywords);
  s.word1 = score_word1(tokens, res.lexicon);
  s.word2 = score_word2(tokens, res.lexicon);
  s.word3 = score_word3(tokens, res.concentrated);
  s.word4 = score_word4(s.word2, s.word3);
  return s;
}

/// Sentiment values at meeting dates, dates strictly increasing.
struct MeetingSeries {
  std::string method;
  std::vector<std::pair<Date, double>> points;

  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!std::isfinite(points[i].second))
        fail(ErrorKind::Format, fmt::format("series '{}' has a non-finite value at {}", method,
                                            format_date(points[i].first)));
      if (i > 0 && std::chrono::sys_days{points[i].first} <= std::chrono::sys_days{points[i - 1].first})
        fail(ErrorKind::Format, fmt::format("series '{}' dates not strictly increasing at {}",
                                            method, format_date(points[i].first)));
    }
  }
};

inline double aggregate_meeting(std::span<const double> sentence_scores) {
  if (sentence_scores.empty())
    fail(ErrorKind::Aggregation, "cannot aggregate a document with zero sentences");
  double sum = 0.0;
  for (double v : sentence_scores) sum += v;
  return sum / static_cast<double>(sentence_scores.size());
}

struct ScoredSentence {
  Date meeting_date;
  std::size_t ordinal = 0;
  std::size_t token_count = 0;
  SentenceScores scores;
};

struct CorpusScores {
  std::vector<ScoredSentence> sentences;
  std::vector<MeetingSeries> meetings;  // one per word method, in kWordMethods order
};

/// Sentences without any word token carry no signal and are skipped.
inline CorpusScores score_corpus(const std::vector<corpus::MinutesDocument>& docs,
                                 const ScoringResources& res) {
  CorpusScores out;
  for (Method m : kWordMethods) out.meetings.push_back(MeetingSeries{std::string(to_string(m)), {}});
  for (const auto& doc : docs) {
    std::array<std::vector<double>, 5> per_method;
    for (const auto& sent : corpus::segment(doc)) {
      if (sent.tokens.empty()) continue;
      ScoredSentence row{doc.meeting_date, sent.ordinal, sent.tokens.size(),
                         score_sentence(sent.tokens, res)};
      for (Method m : kWordMethods) per_method[static_cast<std::size_t>(m)].push_back(row.scores.get(m));
      out.sentences.push_back(row);
    }
    for (Method m : kWordMethods) {
      auto idx = static_cast<std::size_t>(m);
      if (per_method[idx].empty())
        fail(ErrorKind::Aggregation,
             fmt::format("document '{}' has no scorable sentences", doc.source));
      out.meetings[idx].points.emplace_back(doc.meeting_date, aggregate_meeting(per_method[idx]));
    }
  }
  return out;
}

/// Reads precomputed model scores: header `date,<method...>`, one row per
/// meeting. Empty cells are skipped per method. With `strict_meetings`, every
/// date must be one of the given meeting dates.
inline std::vector<MeetingSeries> ingest_external_scores(
    const DelimitedTable& table, const std::optional<std::vector<Date>>& strict_meetings = std::nullopt) {
  if (table.header.empty() || to_lower(table.header.front()) != "date")
    fail(ErrorKind::Format, fmt::format("{}: first column must be 'date'", table.source));
  if (table.header.size() < 2)
    fail(ErrorKind::Format, fmt::format("{}: no method columns", table.source));
  std::set<std::string> seen_methods;
  for (std::size_t c = 1; c < table.header.size(); ++c)
    if (table.header[c].empty() || !seen_methods.insert(table.header[c]).second)
      fail(ErrorKind::Format, fmt::format("{}: empty or duplicate method column '{}'", table.source,
                                          table.header[c]));

  std::vector<std::size_t> order(table.rows.size());
  std::vector<Date> dates;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    order[r] = r;
    dates.push_back(parse_date(table.rows[r][0]));
    if (strict_meetings &&
        std::find(strict_meetings->begin(), strict_meetings->end(), dates.back()) == strict_meetings->end())
      fail(ErrorKind::Alignment, fmt::format("{}:{}: date {} matches no corpus meeting", table.source,
                                             table.line_numbers[r], table.rows[r][0]));
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::chrono::sys_days{dates[a]} < std::chrono::sys_days{dates[b]};
  });

  std::vector<MeetingSeries> out;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    MeetingSeries s{table.header[c], {}};
    for (std::size_t r : order) {
      const auto& cell = table.rows[r][c];
      if (is_missing_marker(cell)) continue;
      auto v = try_parse_double(cell);
      if (!v)
        fail(ErrorKind::Format, fmt::format("{}:{}: non-numeric score '{}' for '{}'", table.source,
                                            table.line_numbers[r], cell, table.header[c]));
      s.points.emplace_back(dates[r], *v);
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<MeetingSeries> ingest_external_scores(
    const fs::path& path, const std::optional<std::vector<Date>>& strict_meetings = std::nullopt) {
  return ingest_external_scores(read_delimited(path), strict_meetings);
}

/// Per-month mean of the selected member indices over their common months.
inline MonthlyIndex compose_scm(const std::vector<MonthlyIndex>& indices,
                                const std::vector<std::string>& members,
                                std::string label = "SCm") {
  if (members.size() < 2)
    fail(ErrorKind::InsufficientData, "composite index needs at least two members");
  std::vector<const MonthlyIndex*> chosen;
  for (const auto& name : members) {
    auto it = std::find_if(indices.begin(), indices.end(), [&](const auto& s) { return s.label == name; });
    if (it == indices.end())
      fail(ErrorKind::Alignment, fmt::format("composite member '{}' not available", name));
    chosen.push_back(&*it);
  }
  auto [from, to] = common_range(chosen);
  if (!(from < to)) fail(ErrorKind::Alignment, "composite members share no months");
  MonthlyIndex out{std::move(label), from, std::vector<double>(static_cast<std::size_t>(months_between(from, to)), 0.0)};
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sum = 0.0;
    for (const auto* s : chosen) sum += s->at(out.month(i));
    out.values[i] = sum / static_cast<double>(chosen.size());
  }
  return out;
}

}  // namespace sentiflow::sentiment
