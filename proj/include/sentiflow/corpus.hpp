#pragma once

// Minutes documents, sentence segmentation, tokenization and macro tables.

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "sentiflow/calendar.hpp"
#include "sentiflow/error.hpp"
#include "sentiflow/series.hpp"
#include "sentiflow/table.hpp"

namespace sentiflow::corpus {

/// Minutes are published three weeks after the meeting unless stated otherwise.
inline constexpr int kDefaultPublicationLagDays = 21;

struct MinutesDocument {
  Date meeting_date;
  Date publication_date;
  std::string raw_text;
  std::string source;

  std::string key() const { return format_date(meeting_date); }
};

struct SentenceRecord {
  std::string document_key;
  std::size_t ordinal = 0;
  std::string text;
  std::vector<std::string> tokens;
};

namespace detail {

inline bool is_ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> list = {
      "u.s.", "u.k.", "e.u.", "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "sr.",  "jr.",
      "st.",  "no.",  "nos.", "vs.",   "etc.",  "e.g.",  "i.e.",  "inc.",  "co.",  "corp.",
      "ltd.", "jan.", "feb.", "mar.",  "apr.",  "jun.",  "jul.",  "aug.",  "sep.", "sept.",
      "oct.", "nov.", "dec.", "approx.", "fig.", "vol.", "gov.", "govt.",
  };
  return list;
}

/// Word ending at `dot` (inclusive) guards against a split when it is a known
/// abbreviation or a dotted initialism such as "u.s." or "a.m.".
inline bool is_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  std::string word = to_lower(text.substr(b, dot - b + 1));
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\''))
    word.erase(word.begin());
  if (abbreviations().contains(word)) return true;
  // dotted initialism: letter '.' letter '.' ...
  if (word.size() >= 4 && word.size() % 2 == 0) {
    for (std::size_t i = 0; i < word.size(); ++i) {
      bool want_dot = (i % 2) == 1;
      if (want_dot != (word[i] == '.')) return false;
      if (!want_dot && !is_ascii_alpha(static_cast<unsigned char>(word[i]))) return false;
    }
    return true;
  }
  return false;
}

/// Length of a dash (ASCII hyphen, en dash, em dash) starting at i, or 0.
inline std::size_t dash_length(std::string_view s, std::size_t i) {
  if (s[i] == '-') return 1;
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
      static_cast<unsigned char>(s[i + 1]) == 0x80 &&
      (static_cast<unsigned char>(s[i + 2]) == 0x93 || static_cast<unsigned char>(s[i + 2]) == 0x94))
    return 3;
  return 0;
}

}  // namespace detail

/// Lowercase ASCII word tokens. Whitespace and dashes separate tokens; every
/// other non-letter (punctuation, digits, apostrophes, non-ASCII bytes) is
/// deleted, so "staff's" becomes "staffs" and "don't" becomes "dont".
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (detail::is_ascii_alpha(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (detail::is_space(text[i])) {
      flush();
    } else if (std::size_t n = detail::dash_length(text, i)) {
      flush();
      i += n - 1;
    }
  }
  flush();
  return tokens;
}

/// Splits on '.', '!' or '?' followed by whitespace and an uppercase letter,
/// and on blank lines. Terminators are dropped from sentence text.
inline std::vector<SentenceRecord> segment(const MinutesDocument& doc) {
  std::string_view text = doc.raw_text;
  std::vector<SentenceRecord> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    std::string_view s = trim(text.substr(b, e - b));
    while (!s.empty() && detail::is_terminator(s.back())) s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) return;
    SentenceRecord rec;
    rec.document_key = doc.key();
    rec.ordinal = out.size();
    rec.text = std::string(s);
    rec.tokens = tokenize(s);
    out.push_back(std::move(rec));
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (detail::is_terminator(c)) {
      std::size_t j = i;
      while (j < text.size() && detail::is_terminator(text[j])) ++j;
      std::size_t k = j;
      while (k < text.size() && detail::is_space(text[k])) ++k;
      bool boundary = k > j && k < text.size() && std::isupper(static_cast<unsigned char>(text[k]));
      if (boundary && c == '.' && j == i + 1 && detail::is_abbreviation(text, i)) boundary = false;
      if (boundary) {
        emit(start, i);
        start = k;
        i = k;
        continue;
      }
      i = j;
      continue;
    }
    if (c == '\n') {
      std::size_t k = i + 1;
      bool blank = false;
      while (k < text.size() && detail::is_space(text[k])) {
        if (text[k] == '\n') blank = true;
        ++k;
      }
      if (blank) {
        emit(start, i);
        start = k;
        i = k;
        continue;
      }
    }
    ++i;
  }
  emit(start, text.size());
  return out;
}

namespace detail {

inline MinutesDocument read_document(const fs::path& file, Date meeting,
                                     std::optional<Date> publication) {
  MinutesDocument doc;
  doc.meeting_date = meeting;
  doc.publication_date = publication.value_or(add_days(meeting, kDefaultPublicationLagDays));
  doc.source = file.string();
  doc.raw_text = read_text_file(file);
  if (trim(doc.raw_text).empty())
    fail(ErrorKind::Format, fmt::format("document '{}' is empty", file.string()));
  if (std::chrono::sys_days{doc.publication_date} < std::chrono::sys_days{doc.meeting_date})
    fail(ErrorKind::Format, fmt::format("document '{}' is published before its meeting date",
                                        file.string()));
  return doc;
}

}  // namespace detail

/// Loads a directory of YYYY-MM-DD.txt files or a manifest table with columns
/// meeting_date, path and optionally publication_date. Result is sorted by
/// meeting date.
inline std::vector<MinutesDocument> load_corpus(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::Io, fmt::format("corpus path '{}' does not exist", path.string()));
  std::vector<MinutesDocument> docs;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
      Date meeting = parse_date(entry.path().stem().string());
      docs.push_back(detail::read_document(entry.path(), meeting, std::nullopt));
    }
  } else {
    auto table = read_delimited(path);
    auto c_meeting = table.column("meeting_date");
    auto c_path = table.column("path");
    auto c_pub = table.column("publication_date");
    if (!c_meeting || !c_path)
      fail(ErrorKind::Format,
           fmt::format("manifest '{}' needs 'meeting_date' and 'path' columns", path.string()));
    for (const auto& row : table.rows) {
      Date meeting = parse_date(row[*c_meeting]);
      std::optional<Date> pub;
      if (c_pub && !trim(row[*c_pub]).empty()) pub = parse_date(row[*c_pub]);
      fs::path file = row[*c_path];
      if (file.is_relative()) file = path.parent_path() / file;
      docs.push_back(detail::read_document(file, meeting, pub));
    }
  }
  if (docs.empty()) fail(ErrorKind::EmptyCorpus, fmt::format("no documents found in '{}'", path.string()));
  std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) {
    return std::chrono::sys_days{a.meeting_date} < std::chrono::sys_days{b.meeting_date};
  });
  for (std::size_t i = 1; i < docs.size(); ++i)
    if (docs[i].meeting_date == docs[i - 1].meeting_date)
      fail(ErrorKind::Format, fmt::format("duplicate meeting date {} ('{}', '{}')",
                                          docs[i].key(), docs[i - 1].source, docs[i].source));
  return docs;
}

/// Monthly macro data on a contiguous grid; months absent from the file are
/// present here as missing values.
struct MacroTable {
  YearMonth start;
  std::size_t months = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> data;  // [column][month]

  YearMonth month(std::size_t i) const { return start.plus(static_cast<int>(i)); }

  bool has(std::string_view name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }

  const std::vector<std::optional<double>>& column(std::string_view name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
      fail(ErrorKind::Format, fmt::format("macro table has no column '{}'", name));
    return data[static_cast<std::size_t>(it - columns.begin())];
  }

  MonthlySeries series(std::string_view name) const {
    const auto& col = column(name);
    MonthlySeries s{std::string(name), start, {}};
    s.values.reserve(col.size());
    for (const auto& v : col) s.values.push_back(v.value_or(std::numeric_limits<double>::quiet_NaN()));
    return s;
  }
};

inline MacroTable parse_macro(const DelimitedTable& table) {
  if (table.header.empty() || to_lower(table.header.front()) != "month")
    fail(ErrorKind::Format, fmt::format("{}: first column must be 'month'", table.source));
  if (table.rows.empty()) fail(ErrorKind::Format, fmt::format("{}: no data rows", table.source));

  std::map<int, std::size_t> by_month;  // month index -> row
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    YearMonth ym = parse_month(table.rows[r][0]);
    if (!by_month.emplace(ym.index(), r).second)
      fail(ErrorKind::Format, fmt::format("{}:{}: duplicate month {}", table.source,
                                          table.line_numbers[r], format_month(ym)));
  }

  MacroTable out;
  out.start = YearMonth::from_index(by_month.begin()->first);
  out.months = static_cast<std::size_t>(by_month.rbegin()->first - by_month.begin()->first + 1);
  out.columns.assign(table.header.begin() + 1, table.header.end());
  out.data.assign(out.columns.size(), std::vector<std::optional<double>>(out.months));
  for (const auto& [idx, r] : by_month) {
    auto m = static_cast<std::size_t>(idx - out.start.index());
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
      const std::string& cell = table.rows[r][c + 1];
      if (is_missing_marker(cell)) continue;
      auto v = try_parse_double(cell);
      if (!v)
        fail(ErrorKind::Format, fmt::format("{}:{}: non-numeric value '{}' in column '{}'",
                                            table.source, table.line_numbers[r], cell,
                                            out.columns[c]));
      out.data[c][m] = *v;
    }
  }
  return out;
}

inline MacroTable load_macro(const fs::path& path) { return parse_macro(read_delimited(path)); }

}  // namespace sentiflow::corpus
