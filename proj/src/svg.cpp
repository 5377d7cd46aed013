#include "olod/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "olod/errors.hpp"
#include "olod/util.hpp"

namespace olod {

namespace {

constexpr double kW = 720, kH = 480;
constexpr double kL = 80, kR = 170, kT = 50, kB = 60;  // margins

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  // Fixed, short coordinate formatting keeps files small and stable.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string render_svg(const LineChart& chart) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto tx = [&](double x) { return chart.logX ? std::log10(x) : x; };
  auto ty = [&](double y) { return chart.logY ? std::log10(y) : y; };
  for (const auto& s : chart.series)
    for (auto [x, y] : s.points) {
      if ((chart.logX && x <= 0) || (chart.logY && y <= 0))
        throw Error("log-scale chart requires positive data");
      xmin = std::min(xmin, tx(x));
      xmax = std::max(xmax, tx(x));
      ymin = std::min(ymin, ty(y));
      ymax = std::max(ymax, ty(y));
    }
  if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
  if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }

  auto px = [&](double x) {
    return kL + (tx(x) - xmin) / (xmax - xmin) * (kW - kL - kR);
  };
  auto py = [&](double y) {
    return kH - kB - (ty(y) - ymin) / (ymax - ymin) * (kH - kT - kB);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << chart.title << "</text>\n";

  // Axes.
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\""
      << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
      << "\" y2=\"" << kH - kB << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const int nTicks = 5;
  for (int i = 0; i <= nTicks; ++i) {
    double fx = xmin + (xmax - xmin) * i / nTicks;
    double fy = ymin + (ymax - ymin) * i / nTicks;
    double vx = chart.logX ? std::pow(10.0, fx) : fx;
    double vy = chart.logY ? std::pow(10.0, fy) : fy;
    double sx = kL + (kW - kL - kR) * i / nTicks;
    double sy = kH - kB - (kH - kT - kB) * i / nTicks;
    out << "<line x1=\"" << fmt(sx) << "\" y1=\"" << kH - kB << "\" x2=\""
        << fmt(sx) << "\" y2=\"" << kH - kB + 5
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(sx) << "\" y=\"" << kH - kB + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_tick(vx) << "</text>\n"
        << "<line x1=\"" << kL - 5 << "\" y1=\"" << fmt(sy) << "\" x2=\""
        << kL << "\" y2=\"" << fmt(sy) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kL - 8 << "\" y=\"" << fmt(sy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_tick(vy) << "</text>\n";
  }
  out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << chart.xlabel << "</text>\n"
      << "<text x=\"20\" y=\"" << (kT + kH - kB) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 20 "
      << (kT + kH - kB) / 2 << ")\">" << chart.ylabel << "</text>\n";

  // Series.
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
    const auto& pts = chart.series[s].points;
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : pts) out << fmt(px(x)) << "," << fmt(py(y)) << " ";
    out << "\"/>\n";
    for (auto [x, y] : pts)
      out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    double ly = kT + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << kW - kR + 10 << "\" y1=\"" << fmt(ly + 11)
        << "\" x2=\"" << kW - kR + 30 << "\" y2=\"" << fmt(ly + 11)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kW - kR + 35 << "\" y=\"" << fmt(ly + 15)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << chart.series[s].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg(const LineChart& chart, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write chart to " + path);
  f << render_svg(chart);
}

}  // namespace olod
