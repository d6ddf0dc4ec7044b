#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spinsim/dynamics.hpp"
#include "spinsim/field_schedule.hpp"
#include "spinsim/ramsey.hpp"

namespace spinsim {

enum class ExperimentKind {
  kRabi,
  kRamseyScan,
  kReversalPhase,
  kAdiabaticityReport,
  kVisibilitySweep,
  kRobustnessSuite,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_from_string(std::string_view name);

enum class ScheduleSpecKind { kConstant, kSmoothReversal, kSuddenReversal, kSampledTrace };

std::string to_string(ScheduleSpecKind kind);

/// Field path used during interrogation (or the bare reversal).
struct ScheduleSpec {
  ScheduleSpecKind kind = ScheduleSpecKind::kSmoothReversal;
  double b_min_g = kDefaultBiasGauss;
  double delta_tau_s = 2e-3;
  double guard_s = kDefaultGuardSeconds;
  double residual_transverse_g = 1e-3;
  double ramp_s = kDefaultSuddenRampSeconds;
  std::string trace_path;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct PhysicsConfig {
  std::vector<int> manifolds{1, 2};
  double gamma_f1_hz_per_g = kGammaF1HzPerGauss;
  double gamma_f2_hz_per_g = kGammaF2HzPerGauss;
  double rabi_hz = kNominalRabiHz;
  double detuning_hz = 0.0;
  double interrogation_time_s = kDefaultInterrogationSeconds;
  double b0_g = kDefaultBiasGauss;
  std::optional<double> driven_decay_s;
  std::optional<double> free_decay_s;

  friend bool operator==(const PhysicsConfig&, const PhysicsConfig&) = default;
};

struct ScanConfig {
  double detuning_start_hz = -2500.0;
  double detuning_stop_hz = 2500.0;
  int detuning_count = 41;
  double duration_start_s = 0.0;
  double duration_stop_s = 400e-6;
  int duration_count = 161;

  friend bool operator==(const ScanConfig&, const ScanConfig&) = default;
};

struct SweepConfig {
  std::vector<double> b_min_list_g{0.2, 0.02, 0.004};
  // Absent: one fringe period 1 / T either side of resonance.
  std::optional<double> detuning_half_width_hz;
  int detuning_count = 41;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct RobustnessConfig {
  int trials = 20;
  double amplitude_fraction = 0.2;  // of b_min
  int modes = 3;

  friend bool operator==(const RobustnessConfig&, const RobustnessConfig&) = default;
};

struct AdiabaticityCase {
  std::string label;
  double delta_tau_s = 0.0;
  double gap_hz = 0.0;

  friend bool operator==(const AdiabaticityCase&, const AdiabaticityCase&) = default;
};

std::vector<AdiabaticityCase> default_adiabaticity_cases();

struct OutputConfig {
  std::string dir = "out";

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kRamseyScan;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  PhysicsConfig physics;
  ScheduleSpec schedule;
  ScanConfig scan;
  SweepConfig sweep;
  RobustnessConfig robustness;
  std::vector<AdiabaticityCase> adiabaticity_cases = default_adiabaticity_cases();
  EvolutionConfig numerics;
  OutputConfig output;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

using EnvOverrides = std::vector<std::pair<std::string, std::string>>;

struct ParseOptions {
  // Entries named SPINSIM_<SECTION>__<KEY> (or SPINSIM_<KEY> at top level)
  // override the document; values are parsed as JSON, else taken as strings.
  EnvOverrides env;
  // Used when the document has no `experiment`; a conflicting one is an error.
  std::optional<ExperimentKind> experiment;
};

/// JSON document; absent keys take defaults, unknown or duplicate keys are
/// rejected. Errors are kConfig and name the offending key path.
ExperimentConfig parse_config(std::string_view text, const ParseOptions& opts = {});
ExperimentConfig load_config(const std::string& path, const ParseOptions& opts = {});

/// SPINSIM_* entries of the process environment.
EnvOverrides environment_overrides();

/// Full document with every field written out; parse_config inverts it.
std::string serialize_config(const ExperimentConfig& cfg);

/// Physical and numerical checks, including building the schedule.
void validate_config(const ExperimentConfig& cfg);

/// FNV-1a over everything that can change the produced data (output
/// location and worker count excluded).
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace spinsim
