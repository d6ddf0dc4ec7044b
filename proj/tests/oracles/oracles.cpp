#include "oracles.hpp"

#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using spinsim::Complex;

ComplexMatrix taylor_unitary(const ComplexMatrix& h, double dt) {
  const ComplexMatrix a = Complex(0.0, -dt) * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scaled = norm;
  while (scaled > 0.5) {
    scaled *= 0.5;
    ++squarings;
  }
  const ComplexMatrix x = a / std::pow(2.0, squarings);
  const auto n = h.rows();
  ComplexMatrix term = ComplexMatrix::Identity(n, n);
  ComplexMatrix sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

ComplexVector fixed_step_evolve(const ComplexVector& psi0, const std::function<ComplexMatrix(double)>& h, double t0,
                                double t1, double dt) {
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
  const double step = (t1 - t0) / static_cast<double>(steps);
  ComplexVector psi = psi0;
  for (long k = 0; k < steps; ++k) {
    const double tm = t0 + (static_cast<double>(k) + 0.5) * step;
    const ComplexMatrix a = Complex(0.0, -step) * h(tm);
    psi = a.exp() * psi;
  }
  return psi;
}

ComplexVector fixed_step_ramsey(const spinsim::ClockModel& model, const spinsim::RamseySequence& seq, double dt) {
  ComplexVector psi = spinsim::prepare_initial_state(model).amplitudes;
  const auto pulse = [&](double duration, spinsim::FieldVector b) {
    const ComplexMatrix a = Complex(0.0, -duration) * model.hamiltonian(b, true);
    psi = a.exp() * psi;
  };
  pulse(seq.pulse1_duration, spinsim::field_at(seq.schedule, seq.free_start()));
  psi = fixed_step_evolve(
      psi, [&](double t) { return model.hamiltonian(spinsim::field_at(seq.schedule, t), false); }, seq.free_start(),
      seq.free_end(), dt);
  pulse(seq.pulse2_duration, spinsim::field_at(seq.schedule, seq.free_end()));
  return psi;
}

double dense_min_field(const spinsim::FieldSchedule& s, double t0, double t1, int samples) {
  double best = INFINITY;
  for (int i = 0; i <= samples; ++i) {
    const double t = t0 + (t1 - t0) * i / samples;
    best = std::min(best, spinsim::field_at(s, t).magnitude());
  }
  return best;
}

namespace {

// exp(-i t [[0, g], [g, -2 pi d]]) in closed form.
Eigen::Matrix2cd two_level_step(double d_hz, double g, double t) {
  const double shift = -M_PI * d_hz;  // trace / 2
  const double half_split = M_PI * d_hz;
  const double w = std::sqrt(half_split * half_split + g * g);
  const Complex global = std::polar(1.0, -shift * t);
  Eigen::Matrix2cd u;
  if (w == 0.0) {
    u.setIdentity();
    return global * u;
  }
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  u(0, 0) = Complex(c, -s * half_split / w);
  u(1, 1) = Complex(c, s * half_split / w);
  u(0, 1) = Complex(0.0, -s * g / w);
  u(1, 0) = u(0, 1);
  return global * u;
}

}  // namespace

double two_level_ramsey(double detuning_hz, double rabi_hz, double pulse1, double free_time, double pulse2) {
  const double g = M_PI * rabi_hz;
  Eigen::Vector2cd psi(0.0, 1.0);  // (|1,0>, |2,0>)
  psi = two_level_step(detuning_hz, g, pulse1) * psi;
  psi = two_level_step(detuning_hz, 0.0, free_time) * psi;
  psi = two_level_step(detuning_hz, g, pulse2) * psi;
  return std::norm(psi[1]);
}

}  // namespace oracle
