#include "spinsim/cosine_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "spinsim/error.hpp"
#include "spinsim/phase_analysis.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

namespace {

constexpr int kGridPoints = 4000;
constexpr int kMaxIterations = 200;
constexpr double kRelativeStep = 1e-8;

struct LinearFit {
  double offset, c, s, rss;
};

// Offset plus quadrature amplitudes at a fixed frequency.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, double f) {
  Eigen::Matrix3d n = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double th = kTwoPi * f * x[i];
    const Eigen::Vector3d row(1.0, std::cos(th), std::sin(th));
    n += row * row.transpose();
    b += row * y[i];
  }
  const Eigen::Vector3d p = n.ldlt().solve(b);
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double th = kTwoPi * f * x[i];
    const double r = y[i] - (p[0] + p[1] * std::cos(th) + p[2] * std::sin(th));
    rss += r * r;
  }
  return {p[0], p[1], p[2], rss};
}

}  // namespace

CosineFit fit_cosine(std::span<const double> x, std::span<const double> y, double frequency_guess) {
  if (x.size() != y.size()) throw Error(ErrorKind::kDimensionMismatch, "x and y lengths differ");
  if (x.size() < 5) throw Error(ErrorKind::kInvalidArgument, "cosine fit needs at least 5 points");
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double span = *xmax_it - *xmin_it;
  if (!(span > 0.0)) throw Error(ErrorKind::kInvalidArgument, "cosine fit needs distinct abscissae");

  double f_lo = 0.0;
  double f_hi = 0.0;
  if (frequency_guess > 0.0) {
    f_lo = 0.5 * frequency_guess;
    f_hi = 1.5 * frequency_guess;
  } else {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    double dx = span;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] > sorted[i - 1]) dx = std::min(dx, sorted[i] - sorted[i - 1]);
    }
    f_lo = 1.0 / span;
    f_hi = 0.5 / dx;
  }

  double best_f = f_lo;
  LinearFit best{0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (int k = 0; k < kGridPoints; ++k) {
    const double f = f_lo + (f_hi - f_lo) * k / (kGridPoints - 1);
    const LinearFit lf = linear_fit(x, y, f);
    if (lf.rss < best.rss) {
      best = lf;
      best_f = f;
    }
  }

  // q = (offset, amplitude, frequency / f_scale, phase)
  const double f_scale = best_f;
  std::array<double, 4> q{best.offset, std::hypot(best.c, best.s), 1.0, std::atan2(-best.s, best.c)};
  const double y_range = *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
  const std::array<double, 4> scale{std::max(y_range, 1e-300), std::max(y_range, 1e-300), 1.0, 1.0};

  auto residuals = [&](const std::array<double, 4>& p, Eigen::VectorXd& r) {
    r.resize(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = y[i] - (p[0] + p[1] * std::cos(kTwoPi * f_scale * p[2] * x[i] + p[3]));
    }
    return r.squaredNorm();
  };
  auto jacobian = [&](const std::array<double, 4>& p) {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(x.size()), 4);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double th = kTwoPi * f_scale * p[2] * x[i] + p[3];
      const auto row = static_cast<Eigen::Index>(i);
      j(row, 0) = 1.0;
      j(row, 1) = std::cos(th);
      j(row, 2) = -p[1] * std::sin(th) * kTwoPi * f_scale * x[i];
      j(row, 3) = -p[1] * std::sin(th);
    }
    return j;
  };

  CosineFit fit;
  Eigen::VectorXd r;
  double rss = residuals(q, r);
  double lambda = 1e-3;
  Eigen::MatrixXd j = jacobian(q);
  int it = 0;
  for (; it < kMaxIterations && !fit.converged; ++it) {
    const Eigen::Matrix4d normal = j.transpose() * j;
    const Eigen::Vector4d grad = j.transpose() * r;
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix4d damped = normal;
      for (int d = 0; d < 4; ++d) damped(d, d) += lambda * std::max(normal(d, d), 1e-300);
      const Eigen::Vector4d step = damped.ldlt().solve(grad);
      std::array<double, 4> trial = q;
      double rel = 0.0;
      for (int d = 0; d < 4; ++d) {
        trial[d] += step[d];
        rel = std::max(rel, std::abs(step[d]) / std::max(std::abs(q[d]), scale[d]));
      }
      Eigen::VectorXd r_trial;
      const double rss_trial = residuals(trial, r_trial);
      if (std::isfinite(rss_trial) && rss_trial <= rss) {
        q = trial;
        r = std::move(r_trial);
        rss = rss_trial;
        j = jacobian(q);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (rel < kRelativeStep) fit.converged = true;
      } else {
        lambda *= 10.0;
        // Damping this heavy means no step can lower the residual: the
        // iterate is stationary to working precision.
        if (lambda > 1e16) {
          fit.converged = rel < kRelativeStep || rss == 0.0;
          break;
        }
      }
    }
    if (!accepted) break;
  }
  fit.iterations = it;

  fit.offset = q[0];
  fit.amplitude = q[1];
  fit.frequency = q[2] * f_scale;
  fit.phase = q[3];
  if (fit.amplitude < 0.0) {
    fit.amplitude = -fit.amplitude;
    fit.phase += kPi;
  }
  fit.phase = wrap_phase(fit.phase);
  fit.rss = rss;

  const auto dof = static_cast<double>(x.size()) - 4.0;
  if (dof > 0.0) {
    const Eigen::Matrix4d normal = j.transpose() * j;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(normal);
    if (lu.isInvertible()) {
      const Eigen::Matrix4d cov = (rss / dof) * lu.inverse();
      fit.sigma_offset = std::sqrt(std::max(cov(0, 0), 0.0));
      fit.sigma_amplitude = std::sqrt(std::max(cov(1, 1), 0.0));
      fit.sigma_frequency = f_scale * std::sqrt(std::max(cov(2, 2), 0.0));
      fit.sigma_phase = std::sqrt(std::max(cov(3, 3), 0.0));
    }
  }
  return fit;
}

}  // namespace spinsim
