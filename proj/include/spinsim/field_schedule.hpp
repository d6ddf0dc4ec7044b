#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace spinsim {

// Bohr magneton over Planck's constant.
inline constexpr double kBohrMagnetonHzPerGauss = 1.399625e6;
// 87Rb ground state, linear Zeeman regime, nuclear g-factor neglected.
inline constexpr double kGammaF1HzPerGauss = -0.5 * kBohrMagnetonHzPerGauss;
inline constexpr double kGammaF2HzPerGauss = +0.5 * kBohrMagnetonHzPerGauss;

inline constexpr double kDefaultSuddenRampSeconds = 2e-6;
inline constexpr int kDefaultGapSamples = 10000;

// Classification thresholds on delta_tau * DeltaE / hbar.
inline constexpr double kAdiabaticRatioAbove = 10.0;
inline constexpr double kSuddenRatioBelow = 0.1;

/// Magnetic field in gauss.
struct FieldVector {
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  double magnitude() const;
  friend bool operator==(const FieldVector&, const FieldVector&) = default;
};

enum class ScheduleKind { kConstant, kSmoothReversal, kSuddenReversal, kSampledTrace, kPerturbed };

std::string to_string(ScheduleKind kind);

struct ConstantParams {
  FieldVector field;
};

/// bz = b0 cos(pi s), bx = b_min sin(pi s) on s in [0, 1] across a window of
/// length delta_tau centred on t_center; (0, 0, +-b0) outside it.
struct SmoothReversalParams {
  double b0 = 0.0;
  double b_min = 0.0;
  double delta_tau = 0.0;
  double t_center = 0.0;

  double window_start() const { return t_center - 0.5 * delta_tau; }
  double window_end() const { return t_center + 0.5 * delta_tau; }
};

/// bz ramps linearly from +b0 to -b0 over `ramp` seconds centred on t_flip;
/// bx holds the residual transverse field throughout.
struct SuddenReversalParams {
  double b0 = 0.0;
  double t_flip = 0.0;
  double residual_transverse = 0.0;
  double ramp = kDefaultSuddenRampSeconds;
};

struct TraceSample {
  double t = 0.0;
  FieldVector field;
};

struct SampledTraceParams {
  std::vector<TraceSample> samples;
};

// One term amplitude * sin(pi s) * sin(harmonic * pi s + phase) added to a
// single Cartesian component (0 = x, 1 = y, 2 = z) inside the window.
struct PerturbationMode {
  int component = 0;
  int harmonic = 1;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct PerturbedParams {
  SmoothReversalParams base;
  std::vector<PerturbationMode> modes;
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  double min_field = 0.0;  // min |B| over the window, found at construction
};

/// Time-parameterised field path B(t), an immutable value.
class FieldSchedule {
 public:
  using Params = std::variant<ConstantParams, SmoothReversalParams, SuddenReversalParams,
                              SampledTraceParams, PerturbedParams>;

  FieldSchedule(Params params, double t_start, double t_end);

  ScheduleKind kind() const;
  const Params& params() const { return params_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }

  /// Same path on the narrower domain [t0, t1].
  FieldSchedule restricted(double t0, double t1) const;

  /// Interval where the field actually changes (reversal window, ramp, or
  /// the trace span). Empty for constant schedules.
  std::optional<std::pair<double, double>> active_interval() const;

  /// Times inside the domain where B(t) has a kink (ramp corners, window
  /// edges, trace samples), sorted. Integrators must not step across them.
  std::vector<double> breakpoints() const;

  /// Reversal time scale used by the adiabaticity report, if the kind has one.
  std::optional<double> reversal_time_scale() const;

 private:
  Params params_;
  double t_start_;
  double t_end_;
};

FieldSchedule make_constant(FieldVector field);
FieldSchedule make_smooth_reversal(double b0, double b_min, double delta_tau, double t_flip_center);
FieldSchedule make_sudden_reversal(double b0, double t_flip, double residual_transverse,
                                   double ramp = kDefaultSuddenRampSeconds);
FieldSchedule make_sampled_trace(std::vector<TraceSample> samples);

/// CSV with header `t_s,bx_g,by_g,bz_g`, strictly increasing t, at least two rows.
FieldSchedule parse_trace_csv(std::istream& in);
FieldSchedule load_trace_csv(const std::string& path);

FieldVector field_at(const FieldSchedule& schedule, double t);

/// Minimum |B(t)| over the active interval: uniform sampling refined by
/// golden-section search around the best sample.
double min_field_magnitude(const FieldSchedule& schedule, int n_samples = kDefaultGapSamples);

/// Minimum m=0 to m=+-1 splitting |gamma| |B| in Hz.
double min_zeeman_gap(const FieldSchedule& schedule, double gamma_hz_per_gauss,
                      int n_samples = kDefaultGapSamples);

enum class Adiabaticity { kAdiabatic, kMarginal, kSudden };
std::string to_string(Adiabaticity a);

struct AdiabaticityReport {
  double delta_tau = 0.0;
  double min_gap_hz = 0.0;
  double ratio = 0.0;  // 2 pi min_gap_hz delta_tau
  Adiabaticity classification = Adiabaticity::kSudden;
};

AdiabaticityReport classify_adiabaticity(double delta_tau, double min_gap_hz);
AdiabaticityReport adiabaticity_ratio(const FieldSchedule& schedule, double gamma_hz_per_gauss);

/// Adds seeded random-phase sinusoids (vanishing at the window edges) to a
/// smooth reversal. Throws kGapClosed if min |B| drops below 0.1 b_min.
FieldSchedule perturb_schedule(const FieldSchedule& schedule, std::uint64_t seed, double amplitude,
                               int n_modes);

}  // namespace spinsim
