#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spinsim/cosine_fit.hpp"
#include "spinsim/dynamics.hpp"
#include "spinsim/field_schedule.hpp"
#include "spinsim/phase_analysis.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

inline constexpr double kNominalRabiHz = 12.2e3;
inline constexpr double kDefaultBiasGauss = 0.2;
inline constexpr double kDefaultInterrogationSeconds = 1e-3;
inline constexpr double kDefaultGuardSeconds = 100e-6;
inline constexpr double kDrivenDecaySeconds = 0.4e-3;
inline constexpr double kFreeDecaySeconds = 5.5e-3;

/// Rotating-frame model of the 87Rb clock pseudospin: the F=1 (3 levels) and
/// F=2 (5 levels) manifolds, microwave coupling only |1,0> <-> |2,0>.
struct ClockModel {
  double rabi_hz = kNominalRabiHz;
  double detuning_hz = 0.0;  // microwave minus hyperfine frequency
  ZeemanParams f1{kGammaF1HzPerGauss};
  ZeemanParams f2{kGammaF2HzPerGauss};
  SpinOperatorSet f1_ops;
  SpinOperatorSet f2_ops;
  std::vector<BasisLabel> labels;
  int clock_lower = 1;  // index of |1,0>
  int clock_upper = 5;  // index of |2,0>

  /// H_Z(F=1) + H_Z(F=2) - 2 pi Delta P_{F=2} [+ pi Omega (|1,0><2,0| + h.c.)], rad/s.
  ComplexMatrix hamiltonian(FieldVector b, bool microwave_on) const;
  /// Pi/2 pulse length 1 / (4 Omega).
  double quarter_period() const { return 0.25 / rabi_hz; }
};

ClockModel build_clock_model(double rabi_hz, double detuning_hz, double gamma_f1 = kGammaF1HzPerGauss,
                             double gamma_f2 = kGammaF2HzPerGauss);

StateVector prepare_initial_state(const ClockModel& model);
/// |F=2, m=0> in the default clock basis.
StateVector prepare_initial_state();

using ModelFactory = std::function<ClockModel(double detuning_hz)>;

/// Factory that copies everything except the detuning from `base`.
ModelFactory detuning_factory(const ClockModel& base);

struct RabiPoint {
  double duration = 0.0;
  double p_f2 = 0.0;
};

struct RabiScan {
  std::vector<RabiPoint> points;
};

/// Continuous drive at a constant bias. With `decay_tau` the contrast is
/// damped as p -> 1/2 + (p - 1/2) exp(-tau / decay_tau).
RabiScan simulate_rabi(const ClockModel& model, std::span<const double> durations, FieldVector b_bias,
                       std::optional<double> decay_tau = std::nullopt);

/// Timeline: pulse 1 on [0, pulse1], free evolution under `schedule`, pulse 2.
/// interrogation_time is the centre-to-centre pulse separation, so the
/// microwave-off window lasts interrogation_time - (pulse1 + pulse2) / 2.
/// During each pulse the field is held at the schedule value at the adjacent
/// window edge.
struct RamseySequence {
  double pulse1_duration = 0.0;
  double pulse2_duration = 0.0;
  double interrogation_time = kDefaultInterrogationSeconds;
  FieldSchedule schedule = make_constant({0.0, 0.0, kDefaultBiasGauss});
  EvolutionConfig numerics;
  std::optional<double> free_decay_tau;

  double free_start() const { return pulse1_duration; }
  double free_duration() const { return interrogation_time - 0.5 * (pulse1_duration + pulse2_duration); }
  double free_end() const { return free_start() + free_duration(); }
  void validate() const;
};

RamseySequence make_ramsey_sequence(const ClockModel& model, double interrogation_time, FieldSchedule schedule);

/// Constant bias along z for the whole sequence.
RamseySequence baseline_sequence(const ClockModel& model, double interrogation_time, double b0);

/// Smooth reversal of duration delta_tau centred in a free window of
/// delta_tau + 2 guard; interrogation_time is sized to match.
RamseySequence smooth_reversal_sequence(const ClockModel& model, double b0, double b_min, double delta_tau,
                                        double guard = kDefaultGuardSeconds);

/// Sudden reversal centred in the free window of a sequence of the given
/// interrogation time.
RamseySequence sudden_reversal_sequence(const ClockModel& model, double interrogation_time, double b0,
                                        double residual_transverse, double ramp = kDefaultSuddenRampSeconds);

struct RamseyOutcome {
  double p_f2 = 0.0;
  StateVector final_state;
  double max_population_defect = 0.0;  // |sum p - 1| over all stages
  double max_norm_defect = 0.0;        // from the interrogation integrator
  double off_clock_population = 0.0;   // population outside |1,0>, |2,0>
};

RamseyOutcome run_ramsey_detailed(const ClockModel& model, const RamseySequence& seq);
double run_ramsey(const ClockModel& model, const RamseySequence& seq);

struct FringePoint {
  double detuning_hz = 0.0;
  double p_f2 = 0.0;
};

struct FringeScan {
  std::vector<FringePoint> points;
  double interrogation_time = 0.0;
  double max_norm_defect = 0.0;
};

/// One run_ramsey per detuning; order-preserving and bitwise identical for
/// any worker count.
FringeScan scan_ramsey(const ModelFactory& factory, std::span<const double> detunings, const RamseySequence& seq,
                       int workers = 1);

/// Fitted p(Delta) = C + A cos(2 pi Delta T_eff + phi0).
struct FringeFit {
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double t_eff = 0.0;
  double fringe_period_hz = 0.0;
  double visibility = 0.0;  // A / C, NaN when C <= 0
  double sigma_amplitude = 0.0;
  double sigma_phase = 0.0;
  double sigma_offset = 0.0;
  double sigma_t_eff = 0.0;
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Requires at least 8 points spanning one fringe period of t_eff_init.
FringeFit fit_fringe(const FringeScan& scan, double t_eff_init);

struct PhaseShift {
  double shift = 0.0;  // wrap(phi0_a - phi0_b)
  double uncertainty = 0.0;
};

/// Throws kNotConverged if either fit failed, kPeriodMismatch if the fringe
/// periods differ by more than 5 %.
PhaseShift phase_shift(const FringeFit& a, const FringeFit& b);

struct VisibilityPoint {
  double b_min = 0.0;
  double visibility = 0.0;
  double phase_shift = 0.0;  // relative to the constant-bias baseline
  TopologicalClass phase_class;
  FringeFit fit;
  FringeScan scan;
};

/// For each b_min, rebuilds the template's smooth reversal with that minimum
/// field, scans and fits it, and compares its phase with a constant-bias
/// baseline of the same timing.
std::vector<VisibilityPoint> visibility_vs_gap(const ModelFactory& factory, const RamseySequence& seq_template,
                                               std::span<const double> b_min_list,
                                               std::span<const double> detunings, int workers = 1);

std::vector<double> linspace(double start, double stop, int count);

}  // namespace spinsim
