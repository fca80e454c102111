// Bounded-rationality expectation, inflation and gap for a toy path.

#include <iostream>

#include <fmt/format.h>

#include "sentiflow/econometrics.hpp"

int main() {
  using namespace sentiflow;
  using namespace sentiflow::econometrics;
  const YearMonth start{2022, 1};
  MonthlySeries pi{"pi", start, {3.1, 3.4, 3.9, 4.2, 4.0, 3.6}};
  MonthlySeries expected{"E", start, {3.3, 3.7, 4.0, 4.1, 3.8, 3.5}};
  MonthlySeries sc{"SC", start, {-0.2, -0.8, -1.3, -0.9, -0.4, 0.1}};
  MonthlySeries gap{"y", start, {0.4, 0.3, 0.1, -0.1, -0.2, -0.2}};
  CalibratedParams params;
  for (double alpha : {-0.152, 0.312}) {
    auto path = bounded_path("SC", alpha, pi, expected, sc, gap, params);
    std::cout << fmt::format("alpha = {:+.3f}, m = {}\nmonth    E_BR    pi_BR   gap\n", alpha, path.m);
    for (std::size_t i = 0; i < path.gap.size(); ++i)
      std::cout << fmt::format("{}  {:6.3f}  {:6.3f}  {:6.3f}\n", format_month(path.gap.month(i)),
                               path.e_br.values[i], path.pi_br.values[i], path.gap.values[i]);
    auto s = summarize(path.gap.values);
    std::cout << fmt::format("gap mean {:.4f}, range {:.4f}\n\n", s.mean, s.range);
  }
  return 0;
}
