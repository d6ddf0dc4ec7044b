#pragma once

#include <span>

namespace spinsim {

/// Least-squares fit of y = offset + amplitude cos(2 pi frequency x + phase).
///
/// The frequency is seeded by a grid search (linear least squares in offset
/// and quadrature amplitudes at each trial frequency), then all four
/// parameters are refined by Levenberg-Marquardt. `converged` is set when an
/// accepted step changes every parameter by less than 1e-8 relative within
/// 200 iterations; otherwise the best parameters seen are returned with
/// `converged = false`.
struct CosineFit {
  double offset = 0.0;
  double amplitude = 0.0;  // >= 0
  double frequency = 0.0;
  double phase = 0.0;  // (-pi, pi]

  // 1-sigma from rss / (n - 4) times the inverse normal matrix.
  double sigma_offset = 0.0;
  double sigma_amplitude = 0.0;
  double sigma_frequency = 0.0;
  double sigma_phase = 0.0;

  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// `frequency_guess` > 0 centres the grid search on [0.5, 1.5] x guess;
/// otherwise the grid spans one cycle over the data up to the Nyquist limit.
CosineFit fit_cosine(std::span<const double> x, std::span<const double> y, double frequency_guess);

}  // namespace spinsim
