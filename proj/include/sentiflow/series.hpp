#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sentiflow/calendar.hpp"
#include "sentiflow/error.hpp"

namespace sentiflow {

/// A contiguous monthly series. NaN marks a missing observation; a
/// MonthlyIndex produced by the indexer never contains one.
struct MonthlySeries {
  std::string label;
  YearMonth start;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  YearMonth month(std::size_t i) const { return start.plus(static_cast<int>(i)); }
  /// One past the last month.
  YearMonth stop() const { return start.plus(static_cast<int>(values.size())); }

  bool covers(YearMonth ym) const { return ym >= start && ym < stop(); }

  double at(YearMonth ym) const {
    if (!covers(ym))
      fail(ErrorKind::Alignment, fmt::format("series '{}' has no value for {}", label,
                                             format_month(ym)));
    return values[static_cast<std::size_t>(months_between(start, ym))];
  }

  /// Months [from, to) as a new series.
  MonthlySeries slice(YearMonth from, YearMonth to) const {
    if (from < start || to > stop() || to < from)
      fail(ErrorKind::Alignment,
           fmt::format("series '{}' ({}..{}) does not cover {}..{}", label, format_month(start),
                       format_month(stop().plus(-1)), format_month(from), format_month(to.plus(-1))));
    auto b = values.begin() + months_between(start, from);
    return MonthlySeries{label, from, std::vector<double>(b, b + months_between(from, to))};
  }

  /// Value at month t becomes the value of month t + k (x_{t-k} in lag notation).
  MonthlySeries lagged(int k) const { return MonthlySeries{label, start.plus(k), values}; }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
};

using MonthlyIndex = MonthlySeries;

inline bool same_grid(const MonthlySeries& a, const MonthlySeries& b) {
  return a.start == b.start && a.size() == b.size();
}

inline void require_same_grid(const MonthlySeries& a, const MonthlySeries& b) {
  if (!same_grid(a, b))
    fail(ErrorKind::Alignment,
         fmt::format("grid mismatch: '{}' starts {} with {} months, '{}' starts {} with {} months",
                     a.label, format_month(a.start), a.size(), b.label, format_month(b.start),
                     b.size()));
}

/// Common month range [from, to) of all series; `to <= from` means disjoint.
inline std::pair<YearMonth, YearMonth> common_range(const std::vector<const MonthlySeries*>& all) {
  if (all.empty()) fail(ErrorKind::Alignment, "no series to align");
  YearMonth from = all.front()->start, to = all.front()->stop();
  for (const auto* s : all) {
    from = std::max(from, s->start);
    to = std::min(to, s->stop());
  }
  return {from, to};
}

}  // namespace sentiflow
