#pragma once

#include <string>

#include "spinsim/dynamics.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

inline constexpr double kFidelityFloor = 0.9;
inline constexpr double kSnapTolerance = 0.3;       // rad
inline constexpr double kUndefinedOverlap = 1e-6;  // |<psi0|psiT>| below this has no phase

/// Wraps to (-pi, pi]; pi itself is the representative of the +-pi class.
double wrap_phase(double phi);

/// Pancharatnam decomposition of the phase acquired along one evolution.
/// When `defined` is false the phase fields are NaN.
struct PhaseDecomposition {
  double total_phase = 0.0;
  double dynamical_phase = 0.0;
  double geometric_phase = 0.0;
  double return_fidelity = 0.0;
  bool defined = false;
};

PhaseDecomposition total_phase(const StateVector& initial, const EvolutionResult& result);

/// -integral <H> dt by trapezoidal quadrature over the energy record, wrapped.
double dynamical_phase(const EvolutionResult& result);

double geometric_phase(double total, double dynamical);

/// Total, dynamical and geometric parts together.
PhaseDecomposition decompose_phase(const StateVector& initial, const EvolutionResult& result);

enum class PhaseClass { kTrivial, kPi, kUndefined };
std::string to_string(PhaseClass c);

struct TopologicalClass {
  PhaseClass phase_class = PhaseClass::kUndefined;
  double residual = 0.0;  // distance to the nearest of {0, pi}
  double fidelity = 0.0;
};

/// Nearest of {0, pi} by distance alone; undefined beyond the snap tolerance.
TopologicalClass snap_phase(double phase);

/// Snap plus the fidelity floor.
TopologicalClass topological_class(const PhaseDecomposition& p);

/// sqrt((2F+1)/4pi) P_F(cos theta).
double y_f0(int f, double theta);
/// Rejects half-integer F with kHalfIntegerSpin.
double y_f0(SpinQuantumNumber f, double theta);

/// Sign s with Y_F0(pi - theta) = s Y_F0(theta) across sampled theta.
int parity_factor(int f, int n_theta_samples = 64);

}  // namespace spinsim
