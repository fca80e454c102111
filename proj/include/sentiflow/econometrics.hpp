#pragma once

// OLS estimation of sentiment discount factors and the bounded-rationality
// inflation model.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "sentiflow/calendar.hpp"
#include "sentiflow/error.hpp"
#include "sentiflow/indexer.hpp"
#include "sentiflow/series.hpp"

namespace sentiflow::econometrics {

struct CalibratedParams {
  double m = 0.85;      // cognitive discount
  double beta = 0.985;  // time discount
  double kappa = -0.25; // Phillips-curve slope

  void validate() const {
    if (!(m > 0.0 && m <= 1.0))
      fail(ErrorKind::Parameter, fmt::format("cognitive discount m={} outside (0, 1]", m));
    if (!(beta > 0.0 && beta < 1.05))
      fail(ErrorKind::Parameter, fmt::format("discount factor beta={} outside (0, 1.05)", beta));
    if (!std::isfinite(kappa)) fail(ErrorKind::Parameter, "kappa must be finite");
  }
};

struct Regressor {
  std::string label;
  int lag = 0;
  bool standardize = false;  // z-score over the estimation window
};

struct RegressionSpec {
  std::string dependent;
  std::vector<Regressor> regressors;
  bool intercept = true;
  /// Inclusive month bounds; unset bounds default to the widest common range.
  std::optional<YearMonth> first;
  std::optional<YearMonth> last;
};

struct Coefficient {
  std::string name;
  double estimate = 0;
  double std_error = 0;
  double t_stat = 0;
  double p_value = 1;
};

/// *** p<0.01, ** p<0.05, * p<0.1.
inline std::string_view significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

struct RegressionFit {
  std::vector<Coefficient> coefficients;
  double r_squared = 0;
  std::size_t n = 0;
  std::size_t df = 0;
  std::vector<double> residuals;
  YearMonth first_month;

  const Coefficient& get(std::string_view name) const {
    for (const auto& c : coefficients)
      if (c.name == name) return c;
    fail(ErrorKind::Parameter, fmt::format("fit has no coefficient '{}'", name));
  }

  bool has(std::string_view name) const {
    return std::any_of(coefficients.begin(), coefficients.end(),
                       [&](const auto& c) { return c.name == name; });
  }
};

inline constexpr std::string_view kInterceptName = "const";

/// Two-sided p value of a t statistic with `df` degrees of freedom.
inline double two_sided_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

/// Classical homoskedastic OLS on an explicit design matrix.
inline RegressionFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const std::vector<std::string>& names, bool has_intercept) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (n <= p)
    fail(ErrorKind::InsufficientData,
         fmt::format("regression has {} observations for {} parameters", n, p));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < p)
    fail(ErrorKind::SingularDesign,
         fmt::format("design matrix has rank {} < {} columns", qr.rank(), p));

  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd resid = y - x * beta;
  const double rss = resid.squaredNorm();
  const std::size_t df = n - p;
  const double sigma2 = rss / static_cast<double>(df);

  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  Eigen::MatrixXd r = qr.matrixR().topLeftCorner(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))
                          .triangularView<Eigen::Upper>();
  Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  Eigen::MatrixXd perm = qr.colsPermutation();
  Eigen::MatrixXd xtx_inv = perm * (rinv * rinv.transpose()) * perm.transpose();

  RegressionFit fit;
  fit.n = n;
  fit.df = df;
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  for (std::size_t j = 0; j < p; ++j) {
    Coefficient c;
    c.name = names[j];
    c.estimate = beta(static_cast<Eigen::Index>(j));
    c.std_error = std::sqrt(std::max(0.0, sigma2 * xtx_inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))));
    if (c.std_error > 0.0) {
      c.t_stat = c.estimate / c.std_error;
    } else {
      c.t_stat = c.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
    }
    c.p_value = two_sided_p(c.t_stat, static_cast<double>(df));
    fit.coefficients.push_back(std::move(c));
  }

  double tss = 0.0;
  if (has_intercept) {
    const double mean = y.mean();
    tss = (y.array() - mean).square().sum();
  } else {
    tss = y.squaredNorm();
  }
  fit.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;
  return fit;
}

/// Monthly series keyed by label: the dependent variable, indices and controls.
using Dataset = std::map<std::string, MonthlySeries, std::less<>>;

inline const MonthlySeries& lookup(const Dataset& data, std::string_view label) {
  auto it = data.find(label);
  if (it == data.end()) fail(ErrorKind::Format, fmt::format("no series named '{}'", label));
  return it->second;
}

/// Aligns lags, trims to the estimation window and fits. Missing values inside
/// the window are an error, never silently dropped.
inline RegressionFit ols_fit(const RegressionSpec& spec, const Dataset& data) {
  std::vector<MonthlySeries> cols;
  cols.push_back(lookup(data, spec.dependent));
  for (const auto& r : spec.regressors) {
    if (r.lag < 0) fail(ErrorKind::Parameter, fmt::format("negative lag for '{}'", r.label));
    cols.push_back(lookup(data, r.label).lagged(r.lag));
  }
  std::vector<const MonthlySeries*> ptrs;
  for (const auto& c : cols) ptrs.push_back(&c);
  auto [from, to] = common_range(ptrs);
  if (spec.first) {
    if (*spec.first < from)
      fail(ErrorKind::Alignment, fmt::format("window start {} precedes available data {}",
                                             format_month(*spec.first), format_month(from)));
    from = *spec.first;
  }
  if (spec.last) {
    if (spec.last->plus(1) > to)
      fail(ErrorKind::Alignment, fmt::format("window end {} beyond available data {}",
                                             format_month(*spec.last), format_month(to.plus(-1))));
    to = spec.last->plus(1);
  }
  if (!(from < to)) fail(ErrorKind::InsufficientData, "regression window is empty");

  const auto n = static_cast<std::size_t>(months_between(from, to));
  const std::size_t offset = spec.intercept ? 1 : 0;
  const std::size_t p = spec.regressors.size() + offset;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  std::vector<std::string> names;
  if (spec.intercept) names.emplace_back(kInterceptName);
  for (const auto& r : spec.regressors) names.push_back(r.label);

  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto window = cols[c].slice(from, to);
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(window.values[i]))
        fail(ErrorKind::InsufficientData,
             fmt::format("missing value for '{}' at {} inside the estimation window", cols[c].label,
                         format_month(window.month(i))));
    if (c > 0 && spec.regressors[c - 1].standardize) window.values = indexer::standardize(window.values);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = static_cast<Eigen::Index>(i);
      if (c == 0) y(row) = window.values[i];
      else x(row, static_cast<Eigen::Index>(c - 1 + offset)) = window.values[i];
    }
  }
  if (spec.intercept) x.col(0).setOnes();

  RegressionFit fit = ols(x, y, names, spec.intercept);
  fit.first_month = from;
  return fit;
}

/// phi_t = pi_t - E_t[pi_{t+1}].
inline MonthlySeries rational_gap(const MonthlySeries& pi, const MonthlySeries& expected_next) {
  require_same_grid(pi, expected_next);
  MonthlySeries out{"phi", pi.start, std::vector<double>(pi.size())};
  for (std::size_t i = 0; i < pi.size(); ++i) out.values[i] = pi.values[i] - expected_next.values[i];
  return out;
}

/// Perfect-foresight proxy E_t[pi_{t+1}] = pi_{t+1}; one month shorter than pi.
inline MonthlySeries perfect_foresight(const MonthlySeries& pi) {
  if (pi.size() < 2) fail(ErrorKind::InsufficientData, "perfect-foresight proxy needs 2 months");
  return MonthlySeries{"E_pi_next", pi.start, std::vector<double>(pi.values.begin() + 1, pi.values.end())};
}

enum class ModelVariant { LaggedSentiment = 1, MacroControls = 2, ExtendedControls = 3 };

inline std::vector<std::string> control_columns(ModelVariant v) {
  switch (v) {
    case ModelVariant::LaggedSentiment: return {};
    case ModelVariant::MacroControls: return {"GDP", "MBAS", "FEDIR", "EXC"};
    case ModelVariant::ExtendedControls: return {"GDP", "MBAS", "FEDIR", "EXC", "UNEM", "PCE", "COIL"};
  }
  return {};
}

inline ModelVariant variant_from_int(int v) {
  if (v < 1 || v > 3) fail(ErrorKind::Parameter, fmt::format("model variant must be 1, 2 or 3, got {}", v));
  return static_cast<ModelVariant>(v);
}

struct AlphaOptions {
  std::string dependent = "phi";
  int sentiment_lag = 1;
  bool intercept = true;
  std::optional<YearMonth> first;
  std::optional<YearMonth> last;
};

/// Regresses phi_t on SC_{k,t-1} and the variant's controls. Controls are
/// z-standardized over the window; the index is used as supplied (the
/// indexer already standardized it).
inline RegressionFit estimate_alpha(const Dataset& data, const std::string& method, ModelVariant variant,
                                    const AlphaOptions& opts = {}) {
  RegressionSpec spec;
  spec.dependent = opts.dependent;
  spec.intercept = opts.intercept;
  spec.first = opts.first;
  spec.last = opts.last;
  spec.regressors.push_back({method, opts.sentiment_lag, false});
  for (const auto& c : control_columns(variant)) spec.regressors.push_back({c, 0, true});
  return ols_fit(spec, data);
}

/// E_BR_t = m * E_t[pi_{t+1}] + alpha * SC_{k,t-1}; `sc_lagged` is already shifted.
inline MonthlySeries bounded_expectation(const MonthlySeries& expected_next, const MonthlySeries& sc_lagged,
                                         double alpha, double m) {
  require_same_grid(expected_next, sc_lagged);
  MonthlySeries out{"E_BR", expected_next.start, std::vector<double>(expected_next.size())};
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = m * expected_next.values[i] + alpha * sc_lagged.values[i];
  return out;
}

/// pi_BR_t = beta * E_BR_t + kappa * y_t (fitted value, no shock).
inline MonthlySeries bounded_inflation(const MonthlySeries& e_br, const MonthlySeries& output_gap,
                                       const CalibratedParams& params) {
  require_same_grid(e_br, output_gap);
  MonthlySeries out{"pi_BR", e_br.start, std::vector<double>(e_br.size())};
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = params.beta * e_br.values[i] + params.kappa * output_gap.values[i];
  return out;
}

inline MonthlySeries bounded_gap(const MonthlySeries& pi, const MonthlySeries& pi_br) {
  require_same_grid(pi, pi_br);
  MonthlySeries out{"gap", pi.start, std::vector<double>(pi.size())};
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = pi.values[i] - pi_br.values[i];
  return out;
}

struct BoundedPath {
  std::string method;
  double alpha = 0;
  double m = 0;
  MonthlySeries e_br;
  MonthlySeries pi_br;
  MonthlySeries gap;
};

/// Bounded expectation, inflation and gap for one index over the months where
/// pi, the expectation proxy, the output gap and the lagged index all exist.
inline BoundedPath bounded_path(const std::string& method, double alpha, const MonthlySeries& pi,
                                const MonthlySeries& expected_next, const MonthlySeries& sc,
                                const MonthlySeries& output_gap, const CalibratedParams& params,
                                std::optional<double> m_override = std::nullopt) {
  const double m = m_override.value_or(params.m);
  MonthlySeries sc_lag = sc.lagged(1);
  auto [from, to] = common_range({&pi, &expected_next, &sc_lag, &output_gap});
  if (!(from < to))
    fail(ErrorKind::Alignment, fmt::format("no common months for bounded path of '{}'", method));
  auto pi_w = pi.slice(from, to), e_w = expected_next.slice(from, to), sc_w = sc_lag.slice(from, to),
       y_w = output_gap.slice(from, to);
  for (const auto* s : {&pi_w, &e_w, &sc_w, &y_w})
    if (!s->all_finite())
      fail(ErrorKind::InsufficientData,
           fmt::format("missing value in '{}' inside the bounded-path window", s->label));
  BoundedPath path;
  path.method = method;
  path.alpha = alpha;
  path.m = m;
  path.e_br = bounded_expectation(e_w, sc_w, alpha, m);
  path.pi_br = bounded_inflation(path.e_br, y_w, params);
  path.gap = bounded_gap(pi_w, path.pi_br);
  return path;
}

struct SummaryStats {
  double mean = 0, median = 0, max = 0, min = 0, range = 0;
};

/// Even-length medians are the mean of the two central order statistics.
inline SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::InsufficientData, "cannot summarize an empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const std::size_t n = sorted.size();
  s.mean = sum / static_cast<double>(n);
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.min = sorted.front();
  s.max = sorted.back();
  s.range = s.max - s.min;
  return s;
}

enum class SignPattern { Expert, NonExpert, Neutral };

inline std::string_view to_string(SignPattern p) {
  switch (p) {
    case SignPattern::Expert: return "expert";
    case SignPattern::NonExpert: return "non-expert";
    case SignPattern::Neutral: return "neutral";
  }
  return "neutral";
}

struct SignedContribution {
  double value = 0;
  int sign = 0;
  SignPattern pattern = SignPattern::Neutral;
};

/// alpha * SC. A negative alpha is the expert reading (concern lowers expected
/// inflation, so alpha<0 with SC<0 adds to it); a positive alpha the
/// non-expert reading.
inline SignedContribution sign_structure_check(double alpha, double sc) {
  SignedContribution c;
  c.value = alpha * sc;
  c.sign = (c.value > 0) - (c.value < 0);
  if (alpha == 0.0 || sc == 0.0) c.pattern = SignPattern::Neutral;
  else c.pattern = alpha < 0.0 ? SignPattern::Expert : SignPattern::NonExpert;
  return c;
}

struct BoundedInputs {
  MonthlySeries pi;
  MonthlySeries expected_next;
  MonthlySeries output_gap;
  Dataset data;  // must hold "phi", the indices and the controls
};

struct SweepRow {
  double m = 0;
  std::string method;
  RegressionFit fit;
  BoundedPath path;
  SummaryStats e_br, pi_br, gap;
};

/// One bounded path per (m, method), ordered by m then by method order. Alpha
/// is estimated once per method since the regression does not involve m.
inline std::vector<SweepRow> robustness_sweep(std::span<const double> m_grid,
                                              const std::vector<std::string>& methods, ModelVariant variant,
                                              const BoundedInputs& in, const CalibratedParams& params,
                                              const AlphaOptions& opts = {}) {
  for (double m : m_grid)
    if (!(m > 0.0 && m <= 1.05))
      fail(ErrorKind::Parameter, fmt::format("sweep value m={} outside (0, 1.05]", m));
  std::vector<RegressionFit> fits;
  for (const auto& k : methods) fits.push_back(estimate_alpha(in.data, k, variant, opts));
  std::vector<double> grid(m_grid.begin(), m_grid.end());
  std::sort(grid.begin(), grid.end());
  std::vector<SweepRow> rows;
  for (double m : grid) {
    for (std::size_t i = 0; i < methods.size(); ++i) {
      SweepRow row;
      row.m = m;
      row.method = methods[i];
      row.fit = fits[i];
      row.path = bounded_path(methods[i], fits[i].get(methods[i]).estimate, in.pi, in.expected_next,
                              lookup(in.data, methods[i]), in.output_gap, params, m);
      row.e_br = summarize(row.path.e_br.values);
      row.pi_br = summarize(row.path.pi_br.values);
      row.gap = summarize(row.path.gap.values);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace sentiflow::econometrics
