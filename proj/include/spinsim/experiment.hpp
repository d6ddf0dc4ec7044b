#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spinsim/config.hpp"
#include "spinsim/field_schedule.hpp"
#include "spinsim/ramsey.hpp"

namespace spinsim {

extern const char* const kToolVersion;

struct RunManifest {
  std::string config_hash;  // hex FNV-1a, see config_hash()
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601
  ExperimentKind experiment = ExperimentKind::kRamseyScan;
  std::vector<std::string> outputs;  // file names inside the output directory
  bool fits_converged = true;
};

/// Ordered `key = value` lines.
using Report = std::vector<std::pair<std::string, std::string>>;

std::string format_report(const Report& report);
std::string format_manifest(const RunManifest& manifest);

/// Clock model with the configured Rabi frequency, gammas and detuning.
ClockModel model_from_config(const ExperimentConfig& cfg);

/// Ramsey sequence for the configured schedule; smooth reversals size the
/// interrogation time to hold the window plus guards.
RamseySequence sequence_from_config(const ExperimentConfig& cfg, const ClockModel& model);

/// The schedule alone, for bare-state evolution: smooth reversals start
/// after one guard time, sudden ones flip mid-way through the interrogation
/// time. Returns the schedule and the interval to evolve over.
struct BareReversal {
  FieldSchedule schedule;
  double t0 = 0.0;
  double t1 = 0.0;
};
BareReversal bare_reversal_from_config(const ExperimentConfig& cfg);

/// Detuning grid for ramsey_scan.
std::vector<double> detunings_from_config(const ExperimentConfig& cfg);

/// Runs the configured experiment and writes CSV, report, SVG, the effective
/// config and manifest.txt into cfg.output.dir. Deterministic for a fixed
/// config apart from the manifest timestamp. On failure every file written
/// so far is removed and the error is rethrown naming the experiment.
RunManifest run_experiment(const ExperimentConfig& cfg);

}  // namespace spinsim
