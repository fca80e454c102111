#pragma once

// Delimited-text reading and writing shared by every module that touches disk.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "sentiflow/error.hpp"

namespace sentiflow {

namespace fs = std::filesystem;

inline std::string_view trim(std::string_view s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return b < e ? std::string_view(&*b, static_cast<std::size_t>(e - b)) : std::string_view{};
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, fmt::format("cannot read file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, fmt::format("error while reading '{}'", path.string()));
  return ss.str();
}

/// Writes through a sibling temp file so readers never observe a half-written table.
inline void write_text_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, fmt::format("cannot write file '{}'", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::Io, fmt::format("error while writing '{}'", path.string()));
  }
  fs::rename(tmp, path);
}

inline std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

struct DelimitedTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

/// Blank lines and lines starting with '#' are skipped. The delimiter is a tab
/// when the header line contains one, a comma otherwise.
inline DelimitedTable parse_delimited(std::string_view text, std::string source) {
  DelimitedTable table;
  table.source = std::move(source);
  char delim = ',';
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (table.header.empty()) {
      if (raw.find('\t') != std::string_view::npos) delim = '\t';
      table.header = split_fields(raw, delim);
      continue;
    }
    auto fields = split_fields(raw, delim);
    if (fields.size() != table.header.size())
      fail(ErrorKind::Format,
           fmt::format("{}:{}: expected {} fields, found {}", table.source, line_no,
                       table.header.size(), fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty())
    fail(ErrorKind::Format, fmt::format("{}: missing header row", table.source));
  return table;
}

inline DelimitedTable read_delimited(const fs::path& path) {
  return parse_delimited(read_text_file(path), path.string());
}

inline std::optional<double> try_parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline bool is_missing_marker(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "." || s == "NULL";
}

/// Shortest decimal that round-trips; used for every machine-readable number.
inline std::string format_exact(double v) { return fmt::format("{}", v); }

/// Builds a delimited output table whose first line is a comment naming the
/// table, its units and the digest of the configuration that produced it.
class TableWriter {
 public:
  TableWriter(std::string_view name, std::string_view units, std::string_view config_digest) {
    out_ = fmt::format("# table={} units={} config_digest={}\n", name, units, config_digest);
  }

  TableWriter& header(const std::vector<std::string>& cols) { return row(cols); }

  TableWriter& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_.push_back(',');
      out_ += escape(cells[i]);
    }
    out_.push_back('\n');
    ++rows_;
    return *this;
  }

  const std::string& str() const { return out_; }
  std::size_t data_rows() const { return rows_ > 0 ? rows_ - 1 : 0; }

  void write(const fs::path& path) const { write_text_file(path, out_); }

 private:
  static std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string q = "\"";
    for (char c : cell) {
      if (c == '"') q.push_back('"');
      q.push_back(c);
    }
    q.push_back('"');
    return q;
  }

  std::string out_;
  std::size_t rows_ = 0;
};

}  // namespace sentiflow
