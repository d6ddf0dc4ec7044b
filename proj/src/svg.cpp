#include "spinsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spinsim/error.hpp"
#include "spinsim/text_io.hpp"

namespace spinsim {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr int kTicks = 5;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Pixel coordinates, rounded so the document does not depend on the last bits.
std::string px(double v) {
  std::ostringstream ss;
  ss.precision(2);
  ss << std::fixed << v;
  return ss.str();
}

std::string tick_label(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

struct Range {
  double lo, hi;
  void pad() {
    if (hi == lo) {
      const double d = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  if (spec.points.empty()) throw Error(ErrorKind::kEmptyInput, "nothing to plot");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : spec.points) {
    double x = 0.0;
    double y = 0.0;
    if (!parse_double(p.x_text, x) || !parse_double(p.y_text, y) || !std::isfinite(x) || !std::isfinite(y)) {
      throw Error(ErrorKind::kInvalidArgument, "plot point (" + p.x_text + ", " + p.y_text + ") is not numeric");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  Range xr{*std::min_element(xs.begin(), xs.end()), *std::max_element(xs.begin(), xs.end())};
  Range yr{*std::min_element(ys.begin(), ys.end()), *std::max_element(ys.begin(), ys.end())};
  xr.pad();

  std::vector<std::pair<double, double>> curve;
  if (spec.curve) {
    const int n = std::max(spec.curve_samples, 2);
    for (int i = 0; i < n; ++i) {
      const double x = xr.lo + (xr.hi - xr.lo) * i / (n - 1);
      const double y = spec.curve(x);
      if (!std::isfinite(y)) continue;
      curve.emplace_back(x, y);
      yr.lo = std::min(yr.lo, y);
      yr.hi = std::max(yr.hi, y);
    }
  }
  yr.pad();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto sy = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    out << "<text class=\"title\" x=\"" << px(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << escape(spec.title) << "</text>\n";
  }

  out << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\"" << px(kLeft + plot_w)
      << "\" y2=\"" << px(kTop + plot_h) << "\"/>\n";
  out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop) << "\" x2=\"" << px(kLeft) << "\" y2=\""
      << px(kTop + plot_h) << "\"/>\n";
  for (int i = 0; i < kTicks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / (kTicks - 1);
    const double fy = yr.lo + (yr.hi - yr.lo) * i / (kTicks - 1);
    out << "<line x1=\"" << px(sx(fx)) << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\"" << px(sx(fx)) << "\" y2=\""
        << px(kTop + plot_h + 5) << "\"/>\n";
    out << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(sy(fy)) << "\" x2=\"" << px(kLeft) << "\" y2=\""
        << px(sy(fy)) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<g class=\"tick-labels\" font-size=\"11\" fill=\"black\">\n";
  for (int i = 0; i < kTicks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / (kTicks - 1);
    const double fy = yr.lo + (yr.hi - yr.lo) * i / (kTicks - 1);
    out << "<text x=\"" << px(sx(fx)) << "\" y=\"" << px(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
        << tick_label(fx) << "</text>\n";
    out << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(sy(fy) + 4) << "\" text-anchor=\"end\">"
        << tick_label(fy) << "</text>\n";
  }
  out << "</g>\n";
  out << "<text class=\"x-label\" x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(spec.x_label) << "</text>\n";
  out << "<text class=\"y-label\" x=\"18\" y=\"" << px(kTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << px(kTop + plot_h / 2) << ")\">"
      << escape(spec.y_label) << "</text>\n";

  if (!curve.empty()) {
    out << "<path class=\"fit\" fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\" d=\"";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      out << (i == 0 ? "M" : " L") << px(sx(curve[i].first)) << ',' << px(sy(curve[i].second));
    }
    out << "\"/>\n";
  }

  out << "<g class=\"data\" fill=\"steelblue\">\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << "<circle class=\"marker\" cx=\"" << px(sx(xs[i])) << "\" cy=\"" << px(sy(ys[i])) << "\" r=\"3\" data-x=\""
        << escape(spec.points[i].x_text) << "\" data-y=\"" << escape(spec.points[i].y_text) << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace spinsim
