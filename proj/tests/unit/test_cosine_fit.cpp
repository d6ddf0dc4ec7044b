#include <gtest/gtest.h>

#include <random>

#include "spinsim/cosine_fit.hpp"
#include "spinsim/error.hpp"
#include "spinsim/phase_analysis.hpp"
#include "spinsim/ramsey.hpp"

using namespace spinsim;

namespace {

std::vector<double> model(const std::vector<double>& x, double c, double a, double f, double phi) {
  std::vector<double> y;
  for (double v : x) y.push_back(c + a * std::cos(kTwoPi * f * v + phi));
  return y;
}

}  // namespace

TEST(CosineFit, RecoversNoiselessModel) {
  const auto x = linspace(-2500.0, 2500.0, 41);
  for (double phi : {0.0, kPi, 1.0, -2.0}) {
    const auto fit = fit_cosine(x, model(x, 0.5, 0.5, 1e-3, phi), 1e-3);
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit.amplitude, 0.5, 1e-6);
    EXPECT_NEAR(fit.offset, 0.5, 1e-6);
    EXPECT_NEAR(fit.frequency, 1e-3, 1e-6 * 1e-3);
    EXPECT_NEAR(std::abs(wrap_phase(fit.phase - phi)), 0.0, 1e-6);
  }
}

TEST(CosineFit, UnguidedGridFindsFrequency) {
  const auto x = linspace(0.0, 400e-6, 161);
  const auto fit = fit_cosine(x, model(x, 0.5, 0.5, 12.2e3, 0.0), 0.0);
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.frequency, 12.2e3, 1e-6 * 12.2e3);
}

TEST(CosineFit, NoiseCoverage) {
  const auto x = linspace(-2500.0, 2500.0, 41);
  const auto clean = model(x, 0.5, 0.45, 1e-3, 0.7);
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> noise(0.0, 0.02);
  int covered = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> y = clean;
    for (double& v : y) v += noise(rng);
    const auto fit = fit_cosine(x, y, 1e-3);
    ASSERT_TRUE(fit.converged);
    if (std::abs(wrap_phase(fit.phase - 0.7)) <= 3.0 * fit.sigma_phase) ++covered;
  }
  EXPECT_GE(covered, 190);
}

TEST(CosineFit, RejectsBadInput) {
  const std::vector<double> x{0, 1, 2, 3};
  EXPECT_THROW(fit_cosine(x, x, 1.0), Error);
  const std::vector<double> x5{0, 1, 2, 3, 4};
  const std::vector<double> y4{0, 1, 2, 3};
  EXPECT_THROW(fit_cosine(x5, y4, 1.0), Error);
  const std::vector<double> same{1, 1, 1, 1, 1};
  EXPECT_THROW(fit_cosine(same, x5, 1.0), Error);
}
