#pragma once

// Meeting-frequency sentiment to a monthly index: resampling, Savitzky-Golay
// smoothing and z-standardization.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "sentiflow/calendar.hpp"
#include "sentiflow/error.hpp"
#include "sentiflow/sentiment.hpp"
#include "sentiflow/series.hpp"
#include "sentiflow/spectral.hpp"

namespace sentiflow::indexer {

using sentiment::MeetingSeries;

namespace detail {

/// Meeting values keyed by meeting month; meetings sharing a month are averaged.
inline std::vector<std::pair<YearMonth, double>> by_month(const MeetingSeries& series) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& [date, v] : series.points) {
    auto& slot = acc[YearMonth::of(date).index()];
    slot.first += v;
    slot.second += 1;
  }
  std::vector<std::pair<YearMonth, double>> out;
  for (const auto& [idx, sum_n] : acc)
    out.emplace_back(YearMonth::from_index(idx), sum_n.first / sum_n.second);
  return out;
}

}  // namespace detail

/// Linear interpolation between meeting months. With an explicit [from, to)
/// grid, months outside the meeting span take the nearest endpoint value.
inline MonthlyIndex to_monthly_linear(const MeetingSeries& series,
                                      std::optional<std::pair<YearMonth, YearMonth>> grid = std::nullopt) {
  auto pts = detail::by_month(series);
  if (pts.size() < 2)
    fail(ErrorKind::InsufficientData,
         fmt::format("series '{}' needs at least 2 meeting months for interpolation", series.method));
  YearMonth from = grid ? grid->first : pts.front().first;
  YearMonth to = grid ? grid->second : pts.back().first.plus(1);
  MonthlyIndex out{series.method, from, {}};
  std::size_t seg = 0;
  for (YearMonth m = from; m < to; m = m.plus(1)) {
    if (m <= pts.front().first) {
      out.values.push_back(pts.front().second);
    } else if (m >= pts.back().first) {
      out.values.push_back(pts.back().second);
    } else {
      while (pts[seg + 1].first < m) ++seg;
      const auto& [m0, v0] = pts[seg];
      const auto& [m1, v1] = pts[seg + 1];
      double w = static_cast<double>(months_between(m0, m)) / months_between(m0, m1);
      out.values.push_back(m == m1 ? v1 : v0 + w * (v1 - v0));
    }
  }
  return out;
}

/// Each month carries the most recent meeting value.
inline MonthlyIndex step_fill(const MeetingSeries& series) {
  auto pts = detail::by_month(series);
  if (pts.empty()) fail(ErrorKind::InsufficientData, fmt::format("series '{}' is empty", series.method));
  MonthlyIndex out{series.method, pts.front().first, {}};
  std::size_t j = 0;
  for (YearMonth m = pts.front().first; m <= pts.back().first; m = m.plus(1)) {
    while (j + 1 < pts.size() && pts[j + 1].first <= m) ++j;
    out.values.push_back(pts[j].second);
  }
  return out;
}

/// Step-fill to months, then keep only harmonics 0..keep_harmonics.
inline MonthlyIndex to_monthly_fourier(const MeetingSeries& series, std::size_t keep_harmonics) {
  if (series.points.size() < 4)
    fail(ErrorKind::InsufficientData,
         fmt::format("series '{}' needs at least 4 meetings for Fourier resampling", series.method));
  if (keep_harmonics == 0) fail(ErrorKind::Parameter, "keep_harmonics must be positive");
  MonthlyIndex filled = step_fill(series);
  filled.values = spectral::idft(spectral::lowpass(spectral::dft(filled.values), keep_harmonics));
  return filled;
}

/// Meeting months must already form a contiguous monthly grid.
inline MonthlyIndex to_monthly_direct(const MeetingSeries& series) {
  auto pts = detail::by_month(series);
  if (pts.empty()) fail(ErrorKind::InsufficientData, fmt::format("series '{}' is empty", series.method));
  MonthlyIndex out{series.method, pts.front().first, {}};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].first != out.month(i))
      fail(ErrorKind::Alignment, fmt::format("series '{}' has no value for {} and resampling is off",
                                             series.method, format_month(out.month(i))));
    out.values.push_back(pts[i].second);
  }
  return out;
}

enum class EdgeMode { Wrap, Mirror };

struct SGParams {
  std::size_t window = 5;
  std::size_t polyorder = 2;
  std::size_t deriv = 0;
  double delta = 1.0;
  EdgeMode edge = EdgeMode::Wrap;

  void validate() const {
    if (window == 0 || window % 2 == 0)
      fail(ErrorKind::Parameter, fmt::format("SG window must be odd and positive, got {}", window));
    if (polyorder >= window)
      fail(ErrorKind::Parameter,
           fmt::format("SG polyorder {} must be less than window {}", polyorder, window));
    if (deriv > polyorder)
      fail(ErrorKind::Parameter, fmt::format("SG derivative {} exceeds polyorder {}", deriv, polyorder));
    if (!(delta > 0.0)) fail(ErrorKind::Parameter, "SG sample spacing must be positive");
  }
};

/// Convolution weights: the derivative of the local least-squares polynomial
/// at the window centre, as a linear functional of the window samples.
/// weights[j] multiplies the sample at offset j - window/2.
inline std::vector<double> sg_coefficients(const SGParams& p) {
  p.validate();
  const auto half = static_cast<int>(p.window / 2);
  Eigen::MatrixXd vander(p.window, p.polyorder + 1);
  for (int i = 0; i < static_cast<int>(p.window); ++i) {
    double z = i - half, pw = 1.0;
    for (std::size_t j = 0; j <= p.polyorder; ++j, pw *= z) vander(i, static_cast<Eigen::Index>(j)) = pw;
  }
  Eigen::MatrixXd pinv =
      vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(vander.rows(), vander.rows()));
  double fact = 1.0;
  for (std::size_t k = 2; k <= p.deriv; ++k) fact *= static_cast<double>(k);
  const double scale = fact / std::pow(p.delta, static_cast<double>(p.deriv));
  std::vector<double> w(p.window);
  for (std::size_t i = 0; i < p.window; ++i)
    w[i] = scale * pinv(static_cast<Eigen::Index>(p.deriv), static_cast<Eigen::Index>(i));
  return w;
}

inline std::vector<double> sg_filter(std::span<const double> values, const SGParams& params = {}) {
  params.validate();
  const std::size_t n = values.size();
  if (n < params.window)
    fail(ErrorKind::InsufficientData,
         fmt::format("SG filter needs at least {} samples, got {}", params.window, n));
  const auto w = sg_coefficients(params);
  const auto half = static_cast<long>(params.window / 2);
  const auto sn = static_cast<long>(n);
  auto sample = [&](long idx) {
    if (params.edge == EdgeMode::Wrap) {
      idx %= sn;
      if (idx < 0) idx += sn;
    } else if (n > 1) {
      while (idx < 0 || idx >= sn) idx = idx < 0 ? -idx : 2 * (sn - 1) - idx;
    } else {
      idx = 0;
    }
    return values[static_cast<std::size_t>(idx)];
  };
  std::vector<double> out(n);
  for (long t = 0; t < sn; ++t) {
    double acc = 0.0;
    for (long j = -half; j <= half; ++j) acc += w[static_cast<std::size_t>(j + half)] * sample(t + j);
    out[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

/// Mean 0, sample standard deviation 1.
inline std::vector<double> standardize(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) fail(ErrorKind::InsufficientData, "standardization needs at least 2 values");
  double mean = 0.0, scale = 0.0;
  for (double v : values) {
    mean += v;
    scale = std::max(scale, std::abs(v));
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 1e-14 * scale))
    fail(ErrorKind::DegenerateSeries, "cannot standardize a series with zero variance");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

enum class Resample { Linear, Fourier, None };

struct Settings {
  Resample resample = Resample::Linear;
  std::size_t keep_harmonics = 6;
  std::optional<SGParams> sg = SGParams{};
  bool standardize = true;
};

inline MonthlyIndex resample(const MeetingSeries& series, const Settings& s) {
  switch (s.resample) {
    case Resample::Linear: return to_monthly_linear(series);
    case Resample::Fourier: return to_monthly_fourier(series, s.keep_harmonics);
    case Resample::None: return to_monthly_direct(series);
  }
  return to_monthly_linear(series);
}

/// Resamples every series, trims all of them to their common months, then
/// smooths and standardizes each. With at least two composite members the
/// mean of those (standardized) members is appended as `scm_label`, itself
/// standardized.
inline std::vector<MonthlyIndex> build_indices(const std::vector<MeetingSeries>& series,
                                               const Settings& settings,
                                               const std::vector<std::string>& scm_members = {},
                                               const std::string& scm_label = "SCm") {
  if (series.empty()) fail(ErrorKind::InsufficientData, "no sentiment series to index");
  std::vector<MonthlyIndex> monthly;
  for (const auto& s : series) monthly.push_back(resample(s, settings));
  std::vector<const MonthlySeries*> ptrs;
  for (const auto& m : monthly) ptrs.push_back(&m);
  auto [from, to] = common_range(ptrs);
  if (!(from < to)) fail(ErrorKind::Alignment, "sentiment series share no common months");
  std::vector<MonthlyIndex> out;
  for (const auto& m : monthly) {
    MonthlyIndex idx = m.slice(from, to);
    if (settings.sg) idx.values = sg_filter(idx.values, *settings.sg);
    if (settings.standardize) {
      try {
        idx.values = standardize(idx.values);
      } catch (const Error& e) {
        fail(e.kind(), fmt::format("index '{}': {}", idx.label, e.what()));
      }
    }
    out.push_back(std::move(idx));
  }
  if (!scm_members.empty()) {
    MonthlyIndex scm = sentiment::compose_scm(out, scm_members, scm_label);
    if (settings.standardize) scm.values = standardize(scm.values);
    out.push_back(std::move(scm));
  }
  return out;
}

}  // namespace sentiflow::indexer
