// Lead-lag between a harmonic and a delayed copy of it.
// usage: leadlag_demo [delay_months]

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "sentiflow/spectral.hpp"

int main(int argc, char** argv) {
  using namespace sentiflow;
  const int delay = argc > 1 ? std::atoi(argv[1]) : 3;
  const std::size_t n = 120;
  std::vector<double> x(n), y(n);
  for (std::size_t t = 0; t < n; ++t) {
    double tt = static_cast<double>(t);
    x[t] = std::cos(2 * std::numbers::pi * 3 * (tt - 11) / n) + 0.3 * std::cos(2 * std::numbers::pi * 9 * tt / n);
    double ty = tt - delay;
    y[t] = std::cos(2 * std::numbers::pi * 3 * (ty - 11) / n) + 0.3 * std::cos(2 * std::numbers::pi * 9 * ty / n);
  }
  auto bands = spectral::with_disjoint_bands(spectral::default_bands());
  auto report = spectral::leadlag_report(x, y, bands);
  std::cout << "band\tkind\tcount\tsigned\tabs\n";
  for (const auto& b : report.bands)
    for (const auto& [kind, cell] : {std::pair{"minima", &b.minima}, std::pair{"maxima", &b.maxima}})
      std::cout << fmt::format("{}\t{}\t{}\t{}\t{}\n", b.band.label, kind, cell->count,
                               cell->signed_mean ? fmt::format("{:.3f}", *cell->signed_mean) : "-",
                               cell->abs_mean ? fmt::format("{:.3f}", *cell->abs_mean) : "-");
  return 0;
}
