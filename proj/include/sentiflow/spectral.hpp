#pragma once

// DFT band decomposition and lead-lag measurement between turning points.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "sentiflow/error.hpp"

namespace sentiflow::spectral {

using cplx = std::complex<double>;
using WarningSink = std::function<void(std::string_view)>;

struct Spectrum {
  std::vector<cplx> coeffs;

  std::size_t size() const { return coeffs.size(); }
  const cplx& operator[](std::size_t k) const { return coeffs[k]; }
  cplx& operator[](std::size_t k) { return coeffs[k]; }
};

namespace detail {

inline bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place iterative radix-2 FFT with the e^{-i...} sign convention.
inline void fft_pow2(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // twiddles computed once per stage size from the full-length table
  std::vector<cplx> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k)
    tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2, step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + half] * tw[k * step];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

/// Bluestein chirp-z: arbitrary-length DFT through a power-of-two convolution.
inline void fft_bluestein(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small and exact
    auto k2 = static_cast<unsigned long long>(k) * k % (2ULL * n);
    chirp[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
  }
  std::vector<cplx> u(m), v(m);
  for (std::size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
  v[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) v[k] = v[m - k] = std::conj(chirp[k]);
  fft_pow2(u);
  fft_pow2(v);
  for (std::size_t k = 0; k < m; ++k) u[k] *= v[k];
  // inverse via conjugation
  for (auto& z : u) z = std::conj(z);
  fft_pow2(u);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = std::conj(u[k]) * scale * chirp[k];
}

inline void forward(std::vector<cplx>& a) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size())) fft_pow2(a);
  else fft_bluestein(a);
}

}  // namespace detail

/// X_k = sum_t x_t e^{-i 2 pi k t / N}.
inline Spectrum dft(std::span<const double> values) {
  if (values.size() < 2) fail(ErrorKind::InsufficientData, "DFT needs at least 2 samples");
  Spectrum s;
  s.coeffs.assign(values.begin(), values.end());
  detail::forward(s.coeffs);
  return s;
}

inline double max_symmetry_defect(const Spectrum& s) {
  const std::size_t n = s.size();
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    worst = std::max(worst, std::abs(s[k] - std::conj(s[(n - k) % n])));
  return worst;
}

inline bool is_conjugate_symmetric(const Spectrum& s, double rel_tol = 1e-9) {
  double scale = 1.0;
  for (const auto& z : s.coeffs) scale = std::max(scale, std::abs(z));
  return max_symmetry_defect(s) <= rel_tol * scale;
}

/// Inverse transform with 1/N normalization; imaginary parts are discarded.
/// A spectrum that is not conjugate-symmetric triggers a warning.
inline std::vector<double> idft(const Spectrum& spectrum, const WarningSink& warn = {}) {
  const std::size_t n = spectrum.size();
  if (n == 0) return {};
  if (warn && !is_conjugate_symmetric(spectrum))
    warn(fmt::format("idft: spectrum of length {} is not conjugate-symmetric (defect {:.3g}); "
                     "returning the real part",
                     n, max_symmetry_defect(spectrum)));
  std::vector<cplx> a(n);
  for (std::size_t k = 0; k < n; ++k) a[k] = std::conj(spectrum[k]);
  detail::forward(a);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = a[t].real() * scale;
  return out;
}

/// Zeroes every harmonic whose distance from DC, min(k, N-k), exceeds `cutoff`.
inline Spectrum lowpass(Spectrum s, std::size_t cutoff) {
  const std::size_t n = s.size();
  for (std::size_t k = 0; k < n; ++k)
    if (std::min(k, n - k) > cutoff) s[k] = cplx{0.0, 0.0};
  return s;
}

/// Cutoffs count cycles over the whole sample window. A band with a `lower`
/// cutoff is the band-pass difference lowpass(cutoff) - lowpass(lower).
struct BandSpec {
  std::string label;
  std::size_t cutoff = 0;
  std::optional<std::size_t> lower;
};

inline std::vector<BandSpec> default_bands() {
  return {{"long", 3, std::nullopt}, {"mid", 6, std::nullopt}, {"short", 12, std::nullopt}};
}

inline std::vector<BandSpec> bands_from_cutoffs(std::span<const std::size_t> cutoffs) {
  static const std::vector<std::string> names = {"long", "mid", "short"};
  std::vector<BandSpec> out;
  for (std::size_t i = 0; i < cutoffs.size(); ++i)
    out.push_back({i < names.size() ? names[i] : fmt::format("band{}", i + 1), cutoffs[i], std::nullopt});
  return out;
}

/// Adds band-pass differences between consecutive nested bands.
inline std::vector<BandSpec> with_disjoint_bands(std::vector<BandSpec> nested) {
  const std::size_t n = nested.size();
  for (std::size_t i = 1; i < n; ++i)
    nested.push_back({nested[i].label + "-only", nested[i].cutoff, nested[i - 1].cutoff});
  return nested;
}

inline std::vector<double> band_reconstruct(std::span<const double> values, const BandSpec& band) {
  if (values.size() <= 2 * band.cutoff)
    fail(ErrorKind::InsufficientData,
         fmt::format("band '{}' cutoff {} needs more than {} samples, got {}", band.label, band.cutoff,
                     2 * band.cutoff, values.size()));
  Spectrum full = dft(values);
  auto recon = idft(lowpass(full, band.cutoff));
  if (band.lower) {
    auto base = idft(lowpass(full, *band.lower));
    for (std::size_t t = 0; t < recon.size(); ++t) recon[t] -= base[t];
  }
  return recon;
}

struct ExtremaSet {
  std::vector<std::size_t> minima;
  std::vector<std::size_t> maxima;
};

/// Relative noise floor below which neighbouring samples count as equal, so
/// floating-point ripple on a flat reconstruction never yields turning points.
inline constexpr double kExtremaTieTolerance = 1e-10;

/// Strict interior extrema: x_t above (below) both neighbours. Plateaus and
/// endpoints never qualify. The tie tolerance is relative to the larger of
/// max|x| and `reference_scale`, so a band reconstruction can be judged against
/// the amplitude of the series it came from.
inline ExtremaSet find_extrema(std::span<const double> x, double rel_tol = kExtremaTieTolerance,
                               double reference_scale = 0.0) {
  if (x.size() < 3) fail(ErrorKind::InsufficientData, "extrema detection needs at least 3 samples");
  double scale = std::abs(reference_scale);
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double tol = rel_tol * scale;
  ExtremaSet out;
  for (std::size_t t = 1; t + 1 < x.size(); ++t) {
    double dl = x[t] - x[t - 1], dr = x[t] - x[t + 1];
    if (dl > tol && dr > tol) out.maxima.push_back(t);
    else if (dl < -tol && dr < -tol) out.minima.push_back(t);
  }
  return out;
}

struct MatchedPair {
  std::size_t t_x = 0;
  std::size_t t_y = 0;
  long delta = 0;  // t_x - t_y; positive means x leads y
};

/// For each x extremum the nearest y extremum; ties go to the earlier y, and a
/// y extremum may serve several x extrema. Both lists must be ascending.
inline std::vector<MatchedPair> match_nearest(std::span<const std::size_t> x_ext,
                                              std::span<const std::size_t> y_ext) {
  std::vector<MatchedPair> pairs;
  if (x_ext.empty() || y_ext.empty()) return pairs;
  for (std::size_t tx : x_ext) {
    auto it = std::lower_bound(y_ext.begin(), y_ext.end(), tx);
    std::size_t best;
    if (it == y_ext.end()) {
      best = y_ext.back();
    } else if (it == y_ext.begin()) {
      best = *it;
    } else {
      std::size_t after = *it, before = *(it - 1);
      best = (after - tx < tx - before) ? after : before;
    }
    pairs.push_back({tx, best, static_cast<long>(tx) - static_cast<long>(best)});
  }
  return pairs;
}

struct LeadLagCell {
  std::size_t count = 0;
  std::optional<double> signed_mean;
  std::optional<double> abs_mean;
  std::vector<MatchedPair> pairs;
};

inline LeadLagCell leadlag(std::vector<MatchedPair> pairs) {
  LeadLagCell cell;
  cell.count = pairs.size();
  if (!pairs.empty()) {
    double s = 0.0, a = 0.0;
    for (const auto& p : pairs) {
      s += static_cast<double>(p.delta);
      a += std::abs(static_cast<double>(p.delta));
    }
    cell.signed_mean = s / static_cast<double>(pairs.size());
    cell.abs_mean = a / static_cast<double>(pairs.size());
  }
  cell.pairs = std::move(pairs);
  return cell;
}

struct BandResult {
  BandSpec band;
  LeadLagCell minima;
  LeadLagCell maxima;
  std::vector<double> x_band;
  std::vector<double> y_band;
  ExtremaSet x_extrema;
  ExtremaSet y_extrema;
};

struct LeadLagSummary {
  std::vector<BandResult> bands;
};

/// Largest deviation from the mean; the amplitude band reconstructions are judged against.
inline double fluctuation_scale(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v - mean));
  return scale;
}

inline LeadLagSummary leadlag_report(std::span<const double> x, std::span<const double> y,
                                     const std::vector<BandSpec>& bands) {
  if (x.size() != y.size())
    fail(ErrorKind::Alignment,
         fmt::format("lead-lag series lengths differ: {} vs {}", x.size(), y.size()));
  const double x_scale = fluctuation_scale(x), y_scale = fluctuation_scale(y);
  LeadLagSummary out;
  for (const auto& band : bands) {
    BandResult r;
    r.band = band;
    r.x_band = band_reconstruct(x, band);
    r.y_band = band_reconstruct(y, band);
    r.x_extrema = find_extrema(r.x_band, kExtremaTieTolerance, x_scale);
    r.y_extrema = find_extrema(r.y_band, kExtremaTieTolerance, y_scale);
    r.minima = leadlag(match_nearest(r.x_extrema.minima, r.y_extrema.minima));
    r.maxima = leadlag(match_nearest(r.x_extrema.maxima, r.y_extrema.maxima));
    out.bands.push_back(std::move(r));
  }
  return out;
}

}  // namespace sentiflow::spectral
