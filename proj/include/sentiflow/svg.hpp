#pragma once

// Minimal standalone SVG charts: line panels with optional markers and
// connectors, and grouped bar charts. Output is byte-stable for equal input.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace sentiflow::svg {

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Line {
  std::string label;
  std::vector<double> y;  // NaN breaks the polyline
};

struct Marker {
  std::size_t x = 0;
  double y = 0;
  std::size_t series = 0;  // index into the panel's lines, for colour
};

struct Connector {
  std::size_t x0 = 0, x1 = 0;
  double y0 = 0, y1 = 0;
};

struct Panel {
  std::string title;
  std::vector<Line> lines;
  std::vector<Marker> markers;
  std::vector<Connector> connectors;
};

struct Frame {
  double left, top, width, height;
};

namespace detail {

inline std::string num(double v) { return fmt::format("{:.2f}", v); }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

inline void axes(std::string& out, const Frame& f, const Range& r, const std::string& title,
                 const std::vector<std::string>& x_labels) {
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
                     num(f.left), num(f.top), num(f.width), num(f.height));
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"13\">{}</text>\n", num(f.left), num(f.top - 6),
                     escape(title));
  for (int i = 0; i <= 4; ++i) {
    double v = r.lo + (r.hi - r.lo) * i / 4.0;
    double y = f.top + f.height - f.height * i / 4.0;
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.2f}</text>\n",
                       num(f.left - 4), num(y + 3), v);
  }
  if (r.lo < 0 && r.hi > 0) {
    double y0 = f.top + f.height * (r.hi / (r.hi - r.lo));
    out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>\n",
                       num(f.left), num(y0), num(f.left + f.width), num(y0));
  }
  const std::size_t n = x_labels.size();
  if (n > 0) {
    std::size_t step = std::max<std::size_t>(1, n / 6);
    for (std::size_t i = 0; i < n; i += step) {
      double x = f.left + (n > 1 ? f.width * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
      out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n", num(x),
                         num(f.top + f.height + 14), escape(x_labels[i]));
    }
  }
}

}  // namespace detail

/// Vertically stacked line panels sharing one x axis of `x_labels`.
inline std::string line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                              const std::vector<Panel>& panels) {
  const double width = 900, panel_h = 220, margin_top = 50, gap = 60, left = 70, plot_w = 700;
  const double height = margin_top + static_cast<double>(panels.size()) * (panel_h + gap);
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", width,
      height, width, height);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"16\" font-weight=\"bold\">{}</text>\n", left,
                     escape(title));
  const std::size_t n = x_labels.size();
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    Frame f{left, margin_top + static_cast<double>(p) * (panel_h + gap) + 20, plot_w, panel_h};
    detail::Range r;
    for (const auto& l : panel.lines)
      for (double v : l.y) r.add(v);
    r.finish();
    detail::axes(out, f, r, panel.title, x_labels);
    auto px = [&](std::size_t i) {
      return f.left + (n > 1 ? f.width * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
    };
    auto py = [&](double v) { return f.top + f.height * (r.hi - v) / (r.hi - r.lo); };
    for (const auto& c : panel.connectors)
      out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\" stroke-width=\"1\"/>\n",
                         detail::num(px(c.x0)), detail::num(py(c.y0)), detail::num(px(c.x1)),
                         detail::num(py(c.y1)));
    for (std::size_t li = 0; li < panel.lines.size(); ++li) {
      const auto& line = panel.lines[li];
      const auto& color = palette()[li % palette().size()];
      std::string pts;
      auto flush = [&] {
        if (!pts.empty())
          out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color,
                             pts);
        pts.clear();
      };
      for (std::size_t i = 0; i < line.y.size(); ++i) {
        if (!std::isfinite(line.y[i])) {
          flush();
          continue;
        }
        if (!pts.empty()) pts.push_back(' ');
        pts += detail::num(px(i)) + "," + detail::num(py(line.y[i]));
      }
      flush();
      double ly = f.top + 14 + 14 * static_cast<double>(li);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                         detail::num(f.left + f.width + 12), detail::num(ly - 9), color);
      out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n",
                         detail::num(f.left + f.width + 26), detail::num(ly), escape(line.label));
    }
    for (const auto& m : panel.markers)
      out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n", detail::num(px(m.x)),
                         detail::num(py(m.y)), palette()[m.series % palette().size()]);
  }
  out += "</svg>\n";
  return out;
}

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series; NaN draws nothing
};

/// Grouped vertical bars; `series` names the bars inside each group.
inline std::string bar_chart(const std::string& title, const std::string& y_label,
                             const std::vector<std::string>& series, const std::vector<BarGroup>& groups) {
  const double width = 900, height = 420, left = 70, top = 50, plot_w = 680, plot_h = 300;
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", width,
      height, width, height);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"16\" font-weight=\"bold\">{}</text>\n", left,
                     escape(title));
  detail::Range r;
  r.add(0.0);
  for (const auto& g : groups)
    for (double v : g.values) r.add(v);
  r.finish();
  Frame f{left, top, plot_w, plot_h};
  detail::axes(out, f, r, y_label, {});
  auto py = [&](double v) { return f.top + f.height * (r.hi - v) / (r.hi - r.lo); };
  const double group_w = groups.empty() ? plot_w : plot_w / static_cast<double>(groups.size());
  const double bar_w = series.empty() ? group_w : 0.8 * group_w / static_cast<double>(series.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double gx = f.left + group_w * static_cast<double>(g) + 0.1 * group_w;
    for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
      double v = groups[g].values[s];
      if (!std::isfinite(v)) continue;
      double y0 = py(0.0), y1 = py(v);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                         detail::num(gx + bar_w * static_cast<double>(s)), detail::num(std::min(y0, y1)),
                         detail::num(bar_w * 0.9), detail::num(std::abs(y1 - y0)),
                         palette()[s % palette().size()]);
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                       detail::num(f.left + group_w * (static_cast<double>(g) + 0.5)),
                       detail::num(f.top + f.height + 14), escape(groups[g].label));
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    double ly = f.top + 14 + 14 * static_cast<double>(s);
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                       detail::num(f.left + f.width + 12), detail::num(ly - 9), palette()[s % palette().size()]);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n", detail::num(f.left + f.width + 26),
                       detail::num(ly), escape(series[s]));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sentiflow::svg
