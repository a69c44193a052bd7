#pragma once
// Hand-emitted static SVG charts: multi-curve line plots of sweep results and
// two-configuration drawings. No plotting library; every file is a fixed
// 1400x600 canvas of plain shapes, valid standalone XML.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/kpi.hpp"

namespace singdist {

/// One named curve of a line chart. Points are drawn in order; a non-finite y
/// breaks the line (a solve gap), and isolated points render as dots.
struct SvgSeries {
  std::string label;
  std::string color;  ///< CSS color; empty picks from the default palette
  std::vector<Vec2> points;
};

namespace detail {

inline constexpr double kSvgW = 1400, kSvgH = 600;
// Plot rectangle inside the canvas; the right margin hosts the legend.
inline constexpr double kPlotL = 70, kPlotR = 1210, kPlotT = 45, kPlotB = 545;

inline constexpr const char* kSvgPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf",
                                              "#bcbd22", "#7f7f7f", "#393b79", "#ad494a"};
inline constexpr int kSvgPaletteSize = 12;

inline std::string svg_num(double v) {
  char b[48];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

inline std::string svg_tick_label(double v) {
  char b[48];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '"')
      out += "&quot;";
    else
      out += c;
  }
  return out;
}

/// Round tick positions (1/2/5 steps) covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double range = hi - lo;
  const double rough = range / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(rough)));
  const double norm = rough / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * range; v += step)
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

inline void svg_open(std::string& out) {
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out +=
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1400 600\" "
      "font-family=\"Helvetica, Arial, sans-serif\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"1400\" height=\"600\" fill=\"white\"/>\n";
}

inline void svg_text(std::string& out, double x, double y, const std::string& body, int size,
                     const std::string& anchor, const std::string& extra = "") {
  out += "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" font-size=\"" + std::to_string(size) +
         "\" text-anchor=\"" + anchor + "\" fill=\"#333\"" + extra + ">" + xml_escape(body) + "</text>\n";
}

inline void svg_line(std::string& out, double x1, double y1, double x2, double y2, const std::string& stroke,
                     double width, const std::string& extra = "") {
  out += "<line x1=\"" + svg_num(x1) + "\" y1=\"" + svg_num(y1) + "\" x2=\"" + svg_num(x2) + "\" y2=\"" +
         svg_num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + svg_num(width) + "\"" + extra + "/>\n";
}

inline void svg_legend(std::string& out, std::span<const SvgSeries> series) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y0 = kPlotT + 12 + 24.0 * static_cast<double>(i);
    if (y0 > kPlotB) break;
    const std::string& color =
        series[i].color.empty() ? kSvgPalette[i % kSvgPaletteSize] : series[i].color;
    svg_line(out, 1224, y0, 1254, y0, color, 3);
    svg_text(out, 1260, y0 + 5, series[i].label, 15, "start");
  }
}

}  // namespace detail

/// Multi-curve line chart on the fixed canvas: framed plot area, 1/2/5 grid
/// ticks, axis captions, and a right-hand legend naming every curve. Each
/// curve with contiguous finite samples is a single polyline.
inline std::string svg_line_chart(std::span<const SvgSeries> series, const std::string& x_label,
                                  const std::string& y_label, const std::string& title = "") {
  using namespace detail;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const SvgSeries& s : series)
    for (const Vec2& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y);
      yhi = std::max(yhi, p.y);
    }
  if (!(xlo <= xhi)) {
    xlo = 0;
    xhi = 1;
    ylo = 0;
    yhi = 1;
  }
  if (xhi == xlo) {
    xlo -= 1;
    xhi += 1;
  }
  if (yhi == ylo) {
    const double pad = std::max(1.0, std::abs(ylo) * 0.1);
    ylo -= pad;
    yhi += pad;
  } else {
    const double pad = 0.05 * (yhi - ylo);
    ylo -= pad;
    yhi += pad;
  }
  const auto px = [&](double x) { return kPlotL + (x - xlo) / (xhi - xlo) * (kPlotR - kPlotL); };
  const auto py = [&](double y) { return kPlotB - (y - ylo) / (yhi - ylo) * (kPlotB - kPlotT); };

  std::string out;
  svg_open(out);
  if (!title.empty()) svg_text(out, (kPlotL + kPlotR) / 2, 26, title, 20, "middle");

  for (double t : nice_ticks(xlo, xhi, 8)) {
    svg_line(out, px(t), kPlotT, px(t), kPlotB, "#e0e0e0", 1);
    svg_text(out, px(t), kPlotB + 22, svg_tick_label(t), 15, "middle");
  }
  for (double t : nice_ticks(ylo, yhi, 6)) {
    svg_line(out, kPlotL, py(t), kPlotR, py(t), "#e0e0e0", 1);
    svg_text(out, kPlotL - 8, py(t) + 5, svg_tick_label(t), 15, "end");
  }
  out += "<rect x=\"" + svg_num(kPlotL) + "\" y=\"" + svg_num(kPlotT) + "\" width=\"" +
         svg_num(kPlotR - kPlotL) + "\" height=\"" + svg_num(kPlotB - kPlotT) +
         "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  svg_text(out, (kPlotL + kPlotR) / 2, kPlotB + 48, x_label, 18, "middle");
  svg_text(out, 22, (kPlotT + kPlotB) / 2, y_label, 18, "middle",
           " transform=\"rotate(-90 22 " + svg_num((kPlotT + kPlotB) / 2) + ")\"");

  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string& color =
        series[i].color.empty() ? kSvgPalette[i % kSvgPaletteSize] : series[i].color;
    std::vector<Vec2> run;
    const auto flush = [&] {
      if (run.size() >= 2) {
        out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"";
        for (std::size_t j = 0; j < run.size(); ++j) {
          if (j) out += ' ';
          out += svg_num(run[j].x) + "," + svg_num(run[j].y);
        }
        out += "\"/>\n";
      } else if (run.size() == 1) {
        out += "<circle cx=\"" + svg_num(run[0].x) + "\" cy=\"" + svg_num(run[0].y) +
               "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
      }
      run.clear();
    };
    for (const Vec2& p : series[i].points) {
      if (std::isfinite(p.x) && std::isfinite(p.y))
        run.push_back({px(p.x), py(p.y)});
      else
        flush();
    }
    flush();
  }
  svg_legend(out, series);
  out += "</svg>\n";
  return out;
}

/// Drawing of a query configuration (green) and its closest degenerate mate
/// (red): fixed-side triangle dashed, moving-side triangle lightly filled,
/// legs solid, every anchor dotted and the query's anchors labeled k1..k6.
inline std::string svg_config_drawing(const std::array<Vec2, 6>& query, const std::array<Vec2, 6>& mate,
                                      const std::string& title = "") {
  using namespace detail;
  const double kL = 50, kR = 1150, kT = 50, kB = 560;
  double xlo = query[0].x, xhi = xlo, ylo = query[0].y, yhi = ylo;
  for (const auto* cfg : {&query, &mate})
    for (const Vec2& p : *cfg) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y);
      yhi = std::max(yhi, p.y);
    }
  const double spanx = std::max(xhi - xlo, 1e-9), spany = std::max(yhi - ylo, 1e-9);
  const double scale = 0.92 * std::min((kR - kL) / spanx, (kB - kT) / spany);
  const double cx = (xlo + xhi) / 2, cy = (ylo + yhi) / 2;
  const auto px = [&](double x) { return (kL + kR) / 2 + (x - cx) * scale; };
  const auto py = [&](double y) { return (kT + kB) / 2 - (y - cy) * scale; };  // y up

  std::string out;
  svg_open(out);
  if (!title.empty()) svg_text(out, (kL + kR) / 2, 30, title, 20, "middle");

  const auto draw = [&](const std::array<Vec2, 6>& k, const std::string& color, bool label) {
    const auto tri = [&](int a, int b, int c, const std::string& style) {
      out += "<polygon points=\"" + svg_num(px(k[a].x)) + "," + svg_num(py(k[a].y)) + " " +
             svg_num(px(k[b].x)) + "," + svg_num(py(k[b].y)) + " " + svg_num(px(k[c].x)) + "," +
             svg_num(py(k[c].y)) + "\" stroke=\"" + color + "\" stroke-width=\"2\" " + style + "/>\n";
    };
    tri(0, 1, 2, "fill=\"none\" stroke-dasharray=\"7 5\"");
    tri(3, 4, 5, "fill=\"" + color + "\" fill-opacity=\"0.12\"");
    for (int i = 0; i < 3; ++i) svg_line(out, px(k[i].x), py(k[i].y), px(k[3 + i].x), py(k[3 + i].y), color, 2);
    for (int i = 0; i < 6; ++i) {
      out += "<circle cx=\"" + svg_num(px(k[i].x)) + "\" cy=\"" + svg_num(py(k[i].y)) +
             "\" r=\"5\" fill=\"" + color + "\"/>\n";
      if (label) svg_text(out, px(k[i].x) + 9, py(k[i].y) - 9, "k" + std::to_string(i + 1), 15, "start");
    }
  };
  draw(mate, "#c62828", false);
  draw(query, "#1a7f37", true);

  svg_line(out, 1180, 70, 1210, 70, "#1a7f37", 3);
  svg_text(out, 1216, 75, "query configuration", 15, "start");
  svg_line(out, 1180, 94, 1210, 94, "#c62828", 3);
  svg_text(out, 1216, 99, "closest degenerate", 15, "start");
  out += "</svg>\n";
  return out;
}

/// Chart series of a comparison-index sweep. Scaling happens here, in the
/// plot layer only: M and the raw carrier determinant are min-max scaled to
/// [0,1] over the sweep (their native scales dwarf the unit-bounded indices)
/// and CN is magnified five-fold; every other curve is the raw CSV value.
inline std::vector<SvgSeries> kpi_plot_series(std::span<const KpiRow> rows) {
  const auto minmax_scaled = [&](auto get) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const KpiRow& r : rows) {
      const double v = get(r.kpi);
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::vector<Vec2> pts;
    for (const KpiRow& r : rows) {
      const double v = get(r.kpi);
      pts.push_back({r.phi, hi > lo ? (v - lo) / (hi - lo) : 0.0});
    }
    return pts;
  };
  const auto raw = [&](auto get, double factor) {
    std::vector<Vec2> pts;
    for (const KpiRow& r : rows) pts.push_back({r.phi, factor * get(r.kpi)});
    return pts;
  };
  std::vector<SvgSeries> s;
  s.push_back({"M (min-max)", "", minmax_scaled([](const KpiVector& k) { return k.M; })});
  s.push_back({"V raw (min-max)", "", minmax_scaled([](const KpiVector& k) { return k.V_raw; })});
  s.push_back({"IR", "", raw([](const KpiVector& k) { return k.IR; }, 1)});
  s.push_back({"TI", "", raw([](const KpiVector& k) { return k.TI; }, 1)});
  s.push_back({"MTI", "", raw([](const KpiVector& k) { return k.MTI; }, 1)});
  s.push_back({"DS", "", raw([](const KpiVector& k) { return k.DS; }, 1)});
  s.push_back({"MDS", "", raw([](const KpiVector& k) { return k.MDS; }, 1)});
  s.push_back({"CN x5", "", raw([](const KpiVector& k) { return k.CN; }, 5)});
  s.push_back({"MCN", "", raw([](const KpiVector& k) { return k.MCN; }, 1)});
  s.push_back({"orientation dist", "", raw([](const KpiVector& k) { return k.orientation_dist; }, 1)});
  s.push_back({"position dist", "", raw([](const KpiVector& k) { return k.position_dist; }, 1)});
  return s;
}

}  // namespace singdist
