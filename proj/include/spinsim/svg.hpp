#pragma once

#include <functional>
#include <string>
#include <vector>

namespace spinsim {

/// One marker; the text is written verbatim into data-x / data-y so the
/// plot carries exactly the numbers in the matching CSV row.
struct PlotPoint {
  std::string x_text;
  std::string y_text;
};

struct PlotSpec {
  std::string title;
  std::string x_label;  // include units, e.g. "detuning (Hz)"
  std::string y_label;
  std::vector<PlotPoint> points;
  // Optional model curve drawn as a single path across the x range.
  std::function<double(double)> curve;
  int curve_samples = 400;
};

/// Standalone SVG document. Throws kEmptyInput without points and
/// kInvalidArgument if a coordinate text is not a finite number.
std::string render_svg(const PlotSpec& spec);

}  // namespace spinsim
