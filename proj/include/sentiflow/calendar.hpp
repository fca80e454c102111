#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "sentiflow/error.hpp"

namespace sentiflow {

using Date = std::chrono::year_month_day;

namespace detail {

inline bool parse_fixed_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Strict YYYY-MM-DD.
inline Date parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  bool ok = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
            detail::parse_fixed_int(text.substr(0, 4), y) &&
            detail::parse_fixed_int(text.substr(5, 2), m) &&
            detail::parse_fixed_int(text.substr(8, 2), d);
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!ok || !date.ok())
    fail(ErrorKind::Format, fmt::format("unparseable date '{}'", text));
  return date;
}

inline std::string format_date(const Date& d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

inline Date add_days(const Date& d, int days) {
  return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

/// Calendar month, ordered by a dense month index.
struct YearMonth {
  int year = 1970;
  unsigned month = 1;

  constexpr int index() const { return year * 12 + static_cast<int>(month) - 1; }

  static constexpr YearMonth from_index(int idx) {
    int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    return YearMonth{y, static_cast<unsigned>(idx - y * 12 + 1)};
  }

  static YearMonth of(const Date& d) {
    return YearMonth{static_cast<int>(d.year()), static_cast<unsigned>(d.month())};
  }

  constexpr YearMonth plus(int months) const { return from_index(index() + months); }

  friend constexpr bool operator==(YearMonth a, YearMonth b) { return a.index() == b.index(); }
  friend constexpr auto operator<=>(YearMonth a, YearMonth b) { return a.index() <=> b.index(); }
};

/// Signed number of months from `a` to `b`.
constexpr int months_between(YearMonth a, YearMonth b) { return b.index() - a.index(); }

inline std::string format_month(YearMonth ym) {
  return fmt::format("{:04d}-{:02d}", ym.year, ym.month);
}

/// Accepts YYYY-MM, and also YYYY-MM-DD (the day is ignored).
inline YearMonth parse_month(std::string_view text) {
  int y = 0, m = 0;
  bool ok = (text.size() == 7 || text.size() == 10) && text[4] == '-' &&
            detail::parse_fixed_int(text.substr(0, 4), y) &&
            detail::parse_fixed_int(text.substr(5, 2), m) && m >= 1 && m <= 12;
  if (ok && text.size() == 10) {
    parse_date(text);
  }
  if (!ok) fail(ErrorKind::Format, fmt::format("unparseable month '{}'", text));
  return YearMonth{y, static_cast<unsigned>(m)};
}

}  // namespace sentiflow
