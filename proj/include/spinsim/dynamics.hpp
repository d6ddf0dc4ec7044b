#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "spinsim/field_schedule.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

/// Signed gyromagnetic ratio g_F mu_B / h of one hyperfine manifold.
struct ZeemanParams {
  double gamma_hz_per_gauss = kGammaF2HzPerGauss;
};

struct EvolutionConfig {
  double target_error = 1e-9;     // global state-error budget over [t0, t1]
  double dt_init = 1e-8;          // s
  double dt_max = 1e-5;           // s
  double record_interval = 1e-6;  // s of simulated time between trajectory samples

  void validate() const;
  friend bool operator==(const EvolutionConfig&, const EvolutionConfig&) = default;
};

struct TrajectorySample {
  double t = 0.0;
  ComplexVector amplitudes;
};

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;  // <H> in rad/s
};

struct EvolutionResult {
  StateVector final_state;
  std::vector<TrajectorySample> trajectory;
  std::vector<EnergySample> energy_record;  // one entry per accepted step boundary
  long steps_taken = 0;
  long steps_rejected = 0;
  double max_norm_defect = 0.0;
};

using HamiltonianFn = std::function<ComplexMatrix(double t)>;

/// H = 2 pi gamma (bx Fx + by Fy + bz Fz) in rad/s.
ComplexMatrix zeeman_hamiltonian(const SpinOperatorSet& ops, ZeemanParams z, FieldVector b);

/// Integrates i d(psi)/dt = H(t) psi with a fourth-order commutator-free
/// Magnus step (two exponentials at the Gauss points) and step-doubling
/// control: a step of length dt is accepted when the one-step and two-half-
/// step results differ by less than target_error * dt / (t1 - t0). The
/// two-half-step result is propagated. Steps end exactly on each of the
/// given breakpoints, where H(t) may have a kink.
EvolutionResult evolve(const StateVector& initial, const HamiltonianFn& hamiltonian, double t0, double t1,
                       const EvolutionConfig& cfg = {}, std::span<const double> breakpoints = {});

EvolutionResult evolve(const StateVector& initial, const SpinOperatorSet& ops, ZeemanParams z,
                       const FieldSchedule& schedule, double t0, double t1, const EvolutionConfig& cfg = {});

/// Real <psi|H|psi> in rad/s. Throws kNonHermitian if the imaginary part is
/// not at rounding level.
double expectation_energy(const StateVector& state, const ComplexMatrix& h);

/// CSV `t_s,re_c0,im_c0,...`, one row per trajectory sample.
void write_trajectory_csv(std::ostream& out, const EvolutionResult& result);

}  // namespace spinsim
