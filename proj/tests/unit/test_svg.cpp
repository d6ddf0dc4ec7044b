#include <gtest/gtest.h>

#include <regex>

#include "spinsim/error.hpp"
#include "spinsim/ramsey.hpp"
#include "spinsim/svg.hpp"
#include "spinsim/text_io.hpp"

using namespace spinsim;

namespace {

std::size_t count(const std::string& s, const std::string& part) {
  std::size_t n = 0;
  for (auto pos = s.find(part); pos != std::string::npos; pos = s.find(part, pos + 1)) ++n;
  return n;
}

PlotSpec fringe_plot() {
  PlotSpec spec;
  spec.x_label = "detuning (Hz)";
  spec.y_label = "P(F=2) (population)";
  for (double d : linspace(-2500.0, 2500.0, 41)) {
    spec.points.push_back({format_double(d), format_double(0.5 + 0.5 * std::cos(kTwoPi * d * 1e-3))});
  }
  return spec;
}

}  // namespace

TEST(Svg, OneMarkerPerPointWithExactText) {
  const PlotSpec spec = fringe_plot();
  const std::string svg = render_svg(spec);
  EXPECT_EQ(count(svg, "class=\"marker\""), 41u);
  EXPECT_EQ(count(svg, "<path"), 0u);
  std::regex marker("data-x=\"([^\"]*)\" data-y=\"([^\"]*)\"");
  std::size_t i = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), marker); it != std::sregex_iterator(); ++it, ++i) {
    ASSERT_LT(i, spec.points.size());
    EXPECT_EQ((*it)[1].str(), spec.points[i].x_text);
    EXPECT_EQ((*it)[2].str(), spec.points[i].y_text);
  }
  EXPECT_EQ(i, 41u);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, OverlayIsOnePath) {
  PlotSpec spec = fringe_plot();
  spec.curve = [](double d) { return 0.5 + 0.5 * std::cos(kTwoPi * d * 1e-3); };
  const std::string svg = render_svg(spec);
  EXPECT_EQ(count(svg, "<path"), 1u);
  EXPECT_EQ(count(svg, "class=\"marker\""), 41u);
}

TEST(Svg, AxisLabelsCarryUnits) {
  const std::string svg = render_svg(fringe_plot());
  EXPECT_NE(svg.find(">detuning (Hz)</text>"), std::string::npos);
  EXPECT_NE(svg.find("(population)</text>"), std::string::npos);
}

TEST(Svg, EscapesText) {
  PlotSpec spec = fringe_plot();
  spec.title = "a < b & c";
  const std::string svg = render_svg(spec);
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
}

TEST(Svg, RejectsEmptyOrNonNumericData) {
  PlotSpec spec;
  try {
    render_svg(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyInput);
  }
  spec.points.push_back({"1", "abc"});
  EXPECT_THROW(render_svg(spec), Error);
}

TEST(Svg, SinglePointDoesNotDivideByZero) {
  PlotSpec spec;
  spec.points.push_back({"0", "0"});
  const std::string svg = render_svg(spec);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(count(svg, "class=\"marker\""), 1u);
}
