#include "spinsim/phase_analysis.hpp"

#include <cmath>
#include <limits>

#include "spinsim/error.hpp"

namespace spinsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double p_prev = 1.0;
  double p = x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    p_prev = p;
    p = next;
  }
  return p;
}

}  // namespace

double wrap_phase(double phi) {
  if (!std::isfinite(phi)) return phi;
  double w = std::remainder(phi, kTwoPi);  // [-pi, pi]
  if (w <= -kPi) w += kTwoPi;
  return w;
}

std::string to_string(PhaseClass c) {
  switch (c) {
    case PhaseClass::kTrivial: return "trivial";
    case PhaseClass::kPi: return "pi";
    case PhaseClass::kUndefined: return "undefined";
  }
  return "unknown";
}

PhaseDecomposition total_phase(const StateVector& initial, const EvolutionResult& result) {
  const Complex amp = overlap(initial, result.final_state);
  PhaseDecomposition p;
  p.return_fidelity = std::abs(amp);
  p.defined = p.return_fidelity >= kUndefinedOverlap;
  p.total_phase = p.defined ? wrap_phase(std::arg(amp)) : kNaN;
  p.dynamical_phase = kNaN;
  p.geometric_phase = kNaN;
  return p;
}

double dynamical_phase(const EvolutionResult& result) {
  const auto& e = result.energy_record;
  double integral = 0.0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    integral += 0.5 * (e[i].energy + e[i - 1].energy) * (e[i].t - e[i - 1].t);
  }
  return wrap_phase(-integral);
}

double geometric_phase(double total, double dynamical) {
  if (std::isnan(total) || std::isnan(dynamical)) return kNaN;
  return wrap_phase(total - dynamical);
}

PhaseDecomposition decompose_phase(const StateVector& initial, const EvolutionResult& result) {
  PhaseDecomposition p = total_phase(initial, result);
  p.dynamical_phase = dynamical_phase(result);
  p.geometric_phase = p.defined ? geometric_phase(p.total_phase, p.dynamical_phase) : kNaN;
  return p;
}

TopologicalClass snap_phase(double phase) {
  TopologicalClass c;
  c.fidelity = kNaN;
  if (std::isnan(phase)) {
    c.residual = kNaN;
    return c;
  }
  const double w = wrap_phase(phase);
  const double to_zero = std::abs(w);
  const double to_pi = kPi - std::abs(w);
  c.residual = std::min(to_zero, to_pi);
  if (c.residual < kSnapTolerance) c.phase_class = to_zero <= to_pi ? PhaseClass::kTrivial : PhaseClass::kPi;
  return c;
}

TopologicalClass topological_class(const PhaseDecomposition& p) {
  TopologicalClass c = snap_phase(p.defined ? p.geometric_phase : kNaN);
  c.fidelity = p.return_fidelity;
  if (!p.defined || p.return_fidelity < kFidelityFloor) c.phase_class = PhaseClass::kUndefined;
  return c;
}

double y_f0(int f, double theta) {
  if (f < 0) throw Error(ErrorKind::kInvalidArgument, "F must be >= 0");
  if (!(theta >= 0.0 && theta <= kPi)) throw Error(ErrorKind::kInvalidArgument, "theta must lie in [0, pi]");
  return std::sqrt((2.0 * f + 1.0) / (4.0 * kPi)) * legendre(f, std::cos(theta));
}

double y_f0(SpinQuantumNumber f, double theta) {
  if (!f.is_integer()) {
    throw Error(ErrorKind::kHalfIntegerSpin, "Y_F0 needs integer F, got 2F = " + std::to_string(f.two_f()));
  }
  return y_f0(f.two_f() / 2, theta);
}

int parity_factor(int f, int n_theta_samples) {
  if (f < 0) throw Error(ErrorKind::kInvalidArgument, "F must be >= 0");
  if (n_theta_samples < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one theta sample");
  int sign = 0;
  int used = 0;
  for (int k = 0; k < n_theta_samples; ++k) {
    // Open interval (0, pi/2); the mirror point pi - theta covers the other half.
    const double theta = 0.5 * kPi * (k + 0.5) / n_theta_samples;
    const double a = y_f0(f, theta);
    const double b = y_f0(f, kPi - theta);
    if (std::abs(a) < 1e-8) continue;  // near a node of P_F
    const double ratio = b / a;
    const int s = ratio > 0.0 ? 1 : -1;
    if (std::abs(std::abs(ratio) - 1.0) > 1e-9 || (sign != 0 && s != sign)) {
      throw Error(ErrorKind::kInconsistentParity, "Y_F0 shows no single parity for F = " + std::to_string(f));
    }
    sign = s;
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::kInconsistentParity, "every theta sample fell on a node");
  const int expected = (f % 2 == 0) ? 1 : -1;
  if (sign != expected) {
    throw Error(ErrorKind::kInconsistentParity, "measured parity disagrees with (-1)^F for F = " + std::to_string(f));
  }
  return sign;
}

}  // namespace spinsim
