#include "spinsim/dynamics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <ostream>

#include "spinsim/error.hpp"
#include "spinsim/text_io.hpp"

namespace spinsim {

namespace {

constexpr double kMinStep = 1e-12;

// Fourth-order commutator-free Magnus: nodes at the Gauss-Legendre points,
// weights (3 +- 2 sqrt 3) / 12.
const double kSqrt3 = std::sqrt(3.0);
const double kNode1 = 0.5 - kSqrt3 / 6.0;
const double kNode2 = 0.5 + kSqrt3 / 6.0;
const double kWeightHi = 0.25 + kSqrt3 / 6.0;
const double kWeightLo = 0.25 - kSqrt3 / 6.0;

ComplexVector cf4_step(const HamiltonianFn& hamiltonian, double t, double dt, const ComplexVector& psi) {
  const ComplexMatrix h1 = hamiltonian(t + kNode1 * dt);
  const ComplexMatrix h2 = hamiltonian(t + kNode2 * dt);
  const ComplexMatrix first = kWeightHi * h1 + kWeightLo * h2;
  const ComplexMatrix second = kWeightLo * h1 + kWeightHi * h2;
  return unitary_from_hamiltonian(second, dt) * (unitary_from_hamiltonian(first, dt) * psi);
}

}  // namespace

void EvolutionConfig::validate() const {
  if (!(target_error > 0.0 && target_error <= 1e-3)) {
    throw Error(ErrorKind::kInvalidArgument, "target_error must lie in (0, 1e-3]");
  }
  if (!(dt_init > 0.0 && dt_max > 0.0 && dt_init <= dt_max)) {
    throw Error(ErrorKind::kInvalidArgument, "require 0 < dt_init <= dt_max");
  }
  if (!(record_interval > 0.0)) throw Error(ErrorKind::kInvalidArgument, "record_interval must be > 0");
}

ComplexMatrix zeeman_hamiltonian(const SpinOperatorSet& ops, ZeemanParams z, FieldVector b) {
  const double w = kTwoPi * z.gamma_hz_per_gauss;
  return (w * b.bx) * ops.fx + (w * b.by) * ops.fy + (w * b.bz) * ops.fz;
}

double expectation_energy(const StateVector& state, const ComplexMatrix& h) {
  if (h.rows() != state.dim() || h.cols() != state.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "Hamiltonian and state dimensions differ");
  }
  const Complex e = state.amplitudes.dot(h * state.amplitudes);
  // Rounding in psi^dagger (H psi) scales with the operator norm.
  const double scale = std::max(1.0, max_abs_entry(h) * static_cast<double>(h.rows()));
  if (std::abs(e.imag()) >= 1e-10 * scale) {
    throw Error(ErrorKind::kNonHermitian, "<H> has imaginary part " + std::to_string(e.imag()));
  }
  return e.real();
}

EvolutionResult evolve(const StateVector& initial, const HamiltonianFn& hamiltonian, double t0, double t1,
                       const EvolutionConfig& cfg, std::span<const double> breakpoints) {
  cfg.validate();
  if (!(t0 < t1) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw Error(ErrorKind::kInvalidArgument, "evolve requires finite t0 < t1");
  }
  if (std::abs(initial.norm() - 1.0) > 1e-10) {
    throw Error(ErrorKind::kInvalidArgument, "initial state is not normalised");
  }

  const double span = t1 - t0;
  const double floor_tol = 16.0 * DBL_EPSILON * std::sqrt(static_cast<double>(initial.dim()));

  EvolutionResult r;
  ComplexVector psi = initial.amplitudes;
  StateVector probe{psi, initial.labels};
  auto record_energy = [&](double t) {
    probe.amplitudes = psi;
    r.energy_record.push_back({t, expectation_energy(probe, hamiltonian(t))});
  };
  r.trajectory.push_back({t0, psi});
  record_energy(t0);
  double next_record = t0 + cfg.record_interval;

  std::vector<double> stops;
  for (double b : breakpoints) {
    if (b > t0 && b < t1) stops.push_back(b);
  }
  std::sort(stops.begin(), stops.end());
  stops.push_back(t1);
  auto stop = stops.begin();

  double t = t0;
  double dt = std::min(cfg.dt_init, span);
  while (t < t1) {
    bool last = false;
    if (dt >= *stop - t) {
      dt = *stop - t;
      last = true;
    }
    const ComplexVector full = cf4_step(hamiltonian, t, dt, psi);
    const ComplexVector half = cf4_step(hamiltonian, t + 0.5 * dt, 0.5 * dt, cf4_step(hamiltonian, t, 0.5 * dt, psi));
    const double err = (full - half).norm();
    const double tol = std::max(cfg.target_error * dt / span, floor_tol);
    const double ratio = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;

    if (err <= tol) {
      psi = half;
      if (last) {
        t = *stop;
        if (stop + 1 != stops.end()) ++stop;
      } else {
        t += dt;
      }
      ++r.steps_taken;
      r.max_norm_defect = std::max(r.max_norm_defect, std::abs(psi.norm() - 1.0));
      record_energy(t);
      if (t >= next_record || t == t1) {
        r.trajectory.push_back({t, psi});
        while (next_record <= t) next_record += cfg.record_interval;
      }
      dt = std::min(dt * std::clamp(ratio, 0.2, 4.0), cfg.dt_max);
    } else {
      ++r.steps_rejected;
      dt *= std::clamp(ratio, 0.1, 0.9);
      if (dt < kMinStep) {
        throw Error(ErrorKind::kStiffness,
                    "schedule varies faster than resolvable: step fell below 1e-12 s at t = " + std::to_string(t));
      }
    }
  }
  r.final_state = StateVector{psi, initial.labels};
  return r;
}

EvolutionResult evolve(const StateVector& initial, const SpinOperatorSet& ops, ZeemanParams z,
                       const FieldSchedule& schedule, double t0, double t1, const EvolutionConfig& cfg) {
  if (initial.dim() != ops.f.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "state dimension does not match spin operators");
  }
  if (!(t0 >= schedule.t_start() && t1 <= schedule.t_end())) {
    throw Error(ErrorKind::kOutOfDomain, "evolution interval exceeds schedule domain");
  }
  HamiltonianFn h = [&](double t) { return zeeman_hamiltonian(ops, z, field_at(schedule, t)); };
  return evolve(initial, h, t0, t1, cfg, schedule.breakpoints());
}

void write_trajectory_csv(std::ostream& out, const EvolutionResult& result) {
  const int dim = result.final_state.dim();
  out << "t_s";
  for (int i = 0; i < dim; ++i) out << ",re_c" << i << ",im_c" << i;
  out << '\n';
  for (const auto& s : result.trajectory) {
    out << format_double(s.t);
    for (int i = 0; i < dim; ++i) {
      out << ',' << format_double(s.amplitudes[i].real()) << ',' << format_double(s.amplitudes[i].imag());
    }
    out << '\n';
  }
}

}  // namespace spinsim
