#include "spinsim/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include "spinsim/cosine_fit.hpp"
#include "spinsim/dynamics.hpp"
#include "spinsim/error.hpp"
#include "spinsim/phase_analysis.hpp"
#include "spinsim/svg.hpp"
#include "spinsim/text_io.hpp"

#ifndef SPINSIM_VERSION
#define SPINSIM_VERSION "0.0.0"
#endif

namespace spinsim {

const char* const kToolVersion = SPINSIM_VERSION;

namespace fs = std::filesystem;

namespace {

std::string yes_no(bool b) { return b ? "true" : "false"; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Files written so far; remove_all() undoes them.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    if (!fs::exists(dir_, ec)) {
      if (!fs::create_directories(dir_, ec) || ec) {
        throw Error(ErrorKind::kIo, "cannot create output directory " + dir_.string());
      }
      created_dir_ = true;
    }
  }

  void write(const std::string& name, const std::string& contents) {
    const fs::path path = dir_ / name;
    written_.push_back(name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
    out.close();
    if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
  }

  const std::vector<std::string>& names() const { return written_; }

  void remove_all() noexcept {
    std::error_code ec;
    for (const auto& name : written_) fs::remove(dir_ / name, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
  bool created_dir_ = false;
};

struct Csv {
  std::string header;
  std::vector<std::vector<std::string>> rows;

  std::string text() const {
    std::string out = header + "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += r[i];
      }
      out += '\n';
    }
    return out;
  }

  std::vector<PlotPoint> points(std::size_t xcol, std::size_t ycol) const {
    std::vector<PlotPoint> pts;
    for (const auto& r : rows) pts.push_back({r[xcol], r[ycol]});
    return pts;
  }
};

Csv fringe_csv(const FringeScan& scan) {
  Csv csv{"detuning_hz,p_f2", {}};
  for (const auto& p : scan.points) csv.rows.push_back({format_double(p.detuning_hz), format_double(p.p_f2)});
  return csv;
}

std::string fringe_svg(const Csv& csv, const FringeFit& fit, const std::string& title) {
  PlotSpec spec;
  spec.title = title;
  spec.x_label = "detuning (Hz)";
  spec.y_label = "P(F=2) (population)";
  spec.points = csv.points(0, 1);
  if (fit.converged) {
    spec.curve = [fit](double d) { return fit.offset + fit.amplitude * std::cos(kTwoPi * d * fit.t_eff + fit.phase); };
  }
  return render_svg(spec);
}

void add_fringe_fit(Report& r, const std::string& prefix, const FringeFit& fit) {
  r.emplace_back(prefix + "A", format_double(fit.amplitude));
  r.emplace_back(prefix + "phi0_rad", format_double(fit.phase));
  r.emplace_back(prefix + "C", format_double(fit.offset));
  r.emplace_back(prefix + "t_eff_s", format_double(fit.t_eff));
  r.emplace_back(prefix + "visibility", format_double(fit.visibility));
  r.emplace_back(prefix + "fringe_period_hz", format_double(fit.fringe_period_hz));
  r.emplace_back(prefix + "sigma_phi0_rad", format_double(fit.sigma_phase));
  r.emplace_back(prefix + "converged", yes_no(fit.converged));
}

// Deterministic parallel map: task i runs on worker i % workers.
template <typename T>
std::vector<T> parallel_map(int count, int workers, const std::function<T(int)>& task) {
  std::vector<T> out(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto run = [&](int w, int stride) {
    for (int i = w; i < count; i += stride) {
      try {
        out[static_cast<std::size_t>(i)] = task(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min(workers, count));
  std::vector<std::thread> threads;
  for (int w = 1; w < n; ++w) threads.emplace_back(run, w, n);
  run(0, n);
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

SpinOperatorSet ops_for(int f) { return build_spin_operators(SpinQuantumNumber::from_integer(f)); }

double gamma_for(const ExperimentConfig& cfg, int f) {
  return f == 1 ? cfg.physics.gamma_f1_hz_per_g : cfg.physics.gamma_f2_hz_per_g;
}

PhaseClass expected_class(int f) { return f % 2 == 0 ? PhaseClass::kTrivial : PhaseClass::kPi; }

std::string manifold_key(int f) { return "f" + std::to_string(f); }

bool run_rabi(const ExperimentConfig& cfg, OutputSet& out) {
  const ClockModel model = model_from_config(cfg);
  const auto durations = linspace(cfg.scan.duration_start_s, cfg.scan.duration_stop_s, cfg.scan.duration_count);
  const RabiScan scan = simulate_rabi(model, durations, {0.0, 0.0, cfg.physics.b0_g}, cfg.physics.driven_decay_s);

  Csv csv{"duration_s,p_f2", {}};
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : scan.points) {
    csv.rows.push_back({format_double(p.duration), format_double(p.p_f2)});
    x.push_back(p.duration);
    y.push_back(p.p_f2);
  }
  const CosineFit fit = fit_cosine(x, y, cfg.physics.rabi_hz);

  Report r;
  r.emplace_back("experiment", "rabi");
  r.emplace_back("A", format_double(fit.amplitude));
  r.emplace_back("phi0_rad", format_double(fit.phase));
  r.emplace_back("C", format_double(fit.offset));
  r.emplace_back("visibility", format_double(fit.offset > 0.0 ? fit.amplitude / fit.offset : NAN));
  r.emplace_back("rabi_frequency_hz", format_double(fit.frequency));
  r.emplace_back("sigma_rabi_frequency_hz", format_double(fit.sigma_frequency));
  r.emplace_back("configured_rabi_hz", format_double(cfg.physics.rabi_hz));
  r.emplace_back("relative_error", format_double(fit.frequency / cfg.physics.rabi_hz - 1.0));
  r.emplace_back("converged", yes_no(fit.converged));

  PlotSpec spec;
  spec.title = "Rabi oscillation";
  spec.x_label = "pulse duration (s)";
  spec.y_label = "P(F=2) (population)";
  spec.points = csv.points(0, 1);
  if (fit.converged) {
    spec.curve = [fit](double t) { return fit.offset + fit.amplitude * std::cos(kTwoPi * fit.frequency * t + fit.phase); };
  }
  out.write("rabi.csv", csv.text());
  out.write("report.txt", format_report(r));
  out.write("rabi.svg", render_svg(spec));
  return fit.converged;
}

bool run_ramsey_scan(const ExperimentConfig& cfg, OutputSet& out) {
  const ClockModel model = model_from_config(cfg);
  const ModelFactory factory = detuning_factory(model);
  const RamseySequence seq = sequence_from_config(cfg, model);
  const auto detunings = detunings_from_config(cfg);

  const FringeScan scan = scan_ramsey(factory, detunings, seq, cfg.workers);
  const FringeFit fit = fit_fringe(scan, seq.interrogation_time);
  const Csv csv = fringe_csv(scan);

  Report r;
  r.emplace_back("experiment", "ramsey_scan");
  r.emplace_back("schedule", to_string(cfg.schedule.kind));
  r.emplace_back("interrogation_time_s", format_double(seq.interrogation_time));
  r.emplace_back("max_norm_defect", format_double(scan.max_norm_defect));
  add_fringe_fit(r, "", fit);
  bool converged = fit.converged;

  out.write("ramsey.csv", csv.text());
  out.write("ramsey.svg", fringe_svg(csv, fit, "Ramsey fringes (" + to_string(cfg.schedule.kind) + ")"));

  if (cfg.schedule.kind != ScheduleSpecKind::kConstant) {
    RamseySequence base = baseline_sequence(model, seq.interrogation_time, cfg.physics.b0_g);
    base.numerics = seq.numerics;
    base.free_decay_tau = seq.free_decay_tau;
    const FringeScan bscan = scan_ramsey(factory, detunings, base, cfg.workers);
    const FringeFit bfit = fit_fringe(bscan, base.interrogation_time);
    const Csv bcsv = fringe_csv(bscan);
    add_fringe_fit(r, "baseline.", bfit);
    converged = converged && bfit.converged;
    out.write("baseline.csv", bcsv.text());
    out.write("baseline.svg", fringe_svg(bcsv, bfit, "Ramsey fringes (constant bias)"));
    if (converged) {
      const PhaseShift shift = phase_shift(fit, bfit);
      r.emplace_back("phase_shift_rad", format_double(shift.shift));
      r.emplace_back("phase_shift_sigma_rad", format_double(shift.uncertainty));
      r.emplace_back("class", to_string(snap_phase(shift.shift).phase_class));
    }
  }
  out.write("report.txt", format_report(r));
  return converged;
}

bool run_reversal_phase(const ExperimentConfig& cfg, OutputSet& out) {
  const BareReversal bare = bare_reversal_from_config(cfg);
  Report r;
  r.emplace_back("experiment", "reversal_phase");
  r.emplace_back("schedule", to_string(cfg.schedule.kind));
  for (int f : cfg.physics.manifolds) {
    const SpinOperatorSet ops = ops_for(f);
    const StateVector psi0 = basis_state(ops.f, 0);
    const ZeemanParams z{gamma_for(cfg, f)};
    const EvolutionResult res = evolve(psi0, ops, z, bare.schedule, bare.t0, bare.t1, cfg.numerics);
    const PhaseDecomposition d = decompose_phase(psi0, res);
    const TopologicalClass cls = topological_class(d);

    Csv csv{"t_s,re_overlap,im_overlap,p_m0", {}};
    const int m0 = psi0.index_of({ops.f.two_f(), 0});
    for (const auto& s : res.trajectory) {
      const Complex a = s.amplitudes[m0];
      csv.rows.push_back({format_double(s.t), format_double(a.real()), format_double(a.imag()), format_double(std::norm(a))});
    }
    const std::string k = manifold_key(f);
    r.emplace_back(k + ".total_phase_rad", format_double(d.total_phase));
    r.emplace_back(k + ".dynamical_phase_rad", format_double(d.dynamical_phase));
    r.emplace_back(k + ".geometric_phase_rad", format_double(d.geometric_phase));
    r.emplace_back(k + ".fidelity", format_double(d.return_fidelity));
    r.emplace_back(k + ".class", to_string(cls.phase_class));
    r.emplace_back(k + ".expected_class", to_string(expected_class(f)));
    r.emplace_back(k + ".max_norm_defect", format_double(res.max_norm_defect));
    r.emplace_back(k + ".steps", std::to_string(res.steps_taken));
    if (cfg.physics.manifolds.size() == 1) r.emplace_back("class", to_string(cls.phase_class));

    PlotSpec spec;
    spec.title = "m=0 amplitude during reversal, F=" + std::to_string(f);
    spec.x_label = "time (s)";
    spec.y_label = "Re <m=0|psi(t)> (amplitude)";
    spec.points = csv.points(0, 1);
    out.write("reversal_" + k + ".csv", csv.text());
    out.write("reversal_" + k + ".svg", render_svg(spec));
  }
  out.write("report.txt", format_report(r));
  return true;
}

bool run_adiabaticity(const ExperimentConfig& cfg, OutputSet& out) {
  Csv csv{"label,delta_tau_s,gap_hz,ratio,class", {}};
  auto add = [&](const std::string& label, const AdiabaticityReport& a) {
    csv.rows.push_back({label, format_double(a.delta_tau), format_double(a.min_gap_hz), format_double(a.ratio),
                        to_string(a.classification)});
  };
  for (const auto& c : cfg.adiabaticity_cases) add(c.label, classify_adiabaticity(c.delta_tau_s, c.gap_hz));
  if (cfg.schedule.kind != ScheduleSpecKind::kConstant) {
    const BareReversal bare = bare_reversal_from_config(cfg);
    for (int f : cfg.physics.manifolds) {
      add("schedule_" + manifold_key(f), adiabaticity_ratio(bare.schedule, gamma_for(cfg, f)));
    }
  }
  Report r;
  r.emplace_back("experiment", "adiabaticity_report");
  for (const auto& row : csv.rows) {
    r.emplace_back(row[0] + ".ratio", row[3]);
    r.emplace_back(row[0] + ".class", row[4]);
  }
  PlotSpec spec;
  spec.title = "Adiabaticity ratio";
  spec.x_label = "minimum gap (Hz)";
  spec.y_label = "delta_tau x gap (rad)";
  spec.points = csv.points(2, 3);
  out.write("adiabaticity.csv", csv.text());
  out.write("report.txt", format_report(r));
  out.write("adiabaticity.svg", render_svg(spec));
  return true;
}

bool run_visibility_sweep(const ExperimentConfig& cfg, OutputSet& out) {
  const ClockModel model = model_from_config(cfg);
  const RamseySequence seq = sequence_from_config(cfg, model);
  const double half = cfg.sweep.detuning_half_width_hz.value_or(1.0 / seq.interrogation_time);
  const auto detunings = linspace(-half, half, cfg.sweep.detuning_count);
  const auto points = visibility_vs_gap(detuning_factory(model), seq, cfg.sweep.b_min_list_g, detunings, cfg.workers);

  Csv csv{"b_min_g,visibility,phase_shift_rad,class", {}};
  Report r;
  r.emplace_back("experiment", "visibility_sweep");
  r.emplace_back("interrogation_time_s", format_double(seq.interrogation_time));
  bool converged = true;
  bool decreasing = true;
  bool all_pi = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    csv.rows.push_back({format_double(p.b_min), format_double(p.visibility), format_double(p.phase_shift),
                        to_string(p.phase_class.phase_class)});
    const std::string k = "b_min_" + std::to_string(i);
    r.emplace_back(k + ".b_min_g", format_double(p.b_min));
    add_fringe_fit(r, k + ".", p.fit);
    r.emplace_back(k + ".phase_shift_rad", format_double(p.phase_shift));
    r.emplace_back(k + ".class", to_string(p.phase_class.phase_class));
    converged = converged && p.fit.converged;
    all_pi = all_pi && p.phase_class.phase_class == PhaseClass::kPi;
    if (i > 0 && !(p.visibility < points[i - 1].visibility)) decreasing = false;
    const Csv fcsv = fringe_csv(p.scan);
    out.write("fringe_" + std::to_string(i) + ".csv", fcsv.text());
  }
  r.emplace_back("visibility_strictly_decreasing", yes_no(decreasing));
  r.emplace_back("all_class_pi", yes_no(all_pi));
  r.emplace_back("converged", yes_no(converged));

  PlotSpec spec;
  spec.title = "Fringe visibility against minimum field";
  spec.x_label = "b_min (G)";
  spec.y_label = "visibility (A/C)";
  spec.points = csv.points(0, 1);
  out.write("sweep.csv", csv.text());
  out.write("report.txt", format_report(r));
  out.write("sweep.svg", render_svg(spec));
  return converged;
}

struct RobustnessRow {
  int f = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double geometric_phase = NAN;
  double fidelity = NAN;
  std::string cls;
  bool preserved = false;
};

bool run_robustness(const ExperimentConfig& cfg, OutputSet& out) {
  const BareReversal bare = bare_reversal_from_config(cfg);
  const double amplitude = cfg.robustness.amplitude_fraction * cfg.schedule.b_min_g;
  const int trials = cfg.robustness.trials;
  const int total = trials * static_cast<int>(cfg.physics.manifolds.size());

  const std::function<RobustnessRow(int)> task = [&](int i) {
    RobustnessRow row;
    row.f = cfg.physics.manifolds[static_cast<std::size_t>(i / trials)];
    row.trial = i % trials;
    row.seed = splitmix64(*cfg.seed + static_cast<std::uint64_t>(row.trial));
    FieldSchedule path = bare.schedule;
    try {
      path = perturb_schedule(bare.schedule, row.seed, amplitude, cfg.robustness.modes);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kGapClosed) throw;
      row.cls = "gap_closed";
      return row;
    }
    const SpinOperatorSet ops = ops_for(row.f);
    const StateVector psi0 = basis_state(ops.f, 0);
    const EvolutionResult res = evolve(psi0, ops, ZeemanParams{gamma_for(cfg, row.f)}, path, bare.t0, bare.t1,
                                       cfg.numerics);
    const PhaseDecomposition d = decompose_phase(psi0, res);
    const TopologicalClass cls = topological_class(d);
    row.geometric_phase = d.geometric_phase;
    row.fidelity = d.return_fidelity;
    row.cls = to_string(cls.phase_class);
    row.preserved = cls.phase_class == expected_class(row.f);
    return row;
  };
  const auto rows = parallel_map<RobustnessRow>(total, cfg.workers, task);

  Csv csv{"f,trial,seed,geometric_phase_rad,fidelity,class", {}};
  for (const auto& row : rows) {
    csv.rows.push_back({std::to_string(row.f), std::to_string(row.trial), std::to_string(row.seed),
                        format_double(row.geometric_phase), format_double(row.fidelity), row.cls});
  }
  Report r;
  r.emplace_back("experiment", "robustness_suite");
  r.emplace_back("seed", std::to_string(*cfg.seed));
  r.emplace_back("amplitude_g", format_double(amplitude));
  r.emplace_back("modes", std::to_string(cfg.robustness.modes));
  for (int f : cfg.physics.manifolds) {
    int kept = 0;
    for (const auto& row : rows) kept += (row.f == f && row.preserved) ? 1 : 0;
    r.emplace_back(manifold_key(f) + ".expected_class", to_string(expected_class(f)));
    r.emplace_back(manifold_key(f) + ".preserved", std::to_string(kept) + "/" + std::to_string(trials));
  }

  PlotSpec spec;
  spec.title = "Geometric phase of perturbed reversals";
  spec.x_label = "trial (index)";
  spec.y_label = "geometric phase (rad)";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::isfinite(rows[i].geometric_phase)) spec.points.push_back({csv.rows[i][1], csv.rows[i][3]});
  }
  out.write("robustness.csv", csv.text());
  out.write("report.txt", format_report(r));
  if (!spec.points.empty()) out.write("robustness.svg", render_svg(spec));
  return true;
}

}  // namespace

std::string format_report(const Report& report) {
  std::string out;
  for (const auto& [k, v] : report) out += k + " = " + v + "\n";
  return out;
}

std::string format_manifest(const RunManifest& m) {
  Report r;
  r.emplace_back("config_hash", m.config_hash);
  r.emplace_back("tool_version", m.tool_version);
  r.emplace_back("timestamp", m.timestamp);
  r.emplace_back("experiment", to_string(m.experiment));
  r.emplace_back("fits_converged", yes_no(m.fits_converged));
  for (const auto& o : m.outputs) r.emplace_back("output", o);
  return format_report(r);
}

ClockModel model_from_config(const ExperimentConfig& cfg) {
  return build_clock_model(cfg.physics.rabi_hz, cfg.physics.detuning_hz, cfg.physics.gamma_f1_hz_per_g,
                           cfg.physics.gamma_f2_hz_per_g);
}

RamseySequence sequence_from_config(const ExperimentConfig& cfg, const ClockModel& model) {
  const auto& p = cfg.physics;
  const auto& s = cfg.schedule;
  RamseySequence seq;
  switch (s.kind) {
    case ScheduleSpecKind::kConstant:
      seq = baseline_sequence(model, p.interrogation_time_s, p.b0_g);
      break;
    case ScheduleSpecKind::kSmoothReversal:
      seq = smooth_reversal_sequence(model, p.b0_g, s.b_min_g, s.delta_tau_s, s.guard_s);
      break;
    case ScheduleSpecKind::kSuddenReversal:
      seq = sudden_reversal_sequence(model, p.interrogation_time_s, p.b0_g, s.residual_transverse_g, s.ramp_s);
      break;
    case ScheduleSpecKind::kSampledTrace:
      seq = make_ramsey_sequence(model, p.interrogation_time_s, load_trace_csv(s.trace_path));
      break;
  }
  seq.numerics = cfg.numerics;
  seq.free_decay_tau = p.free_decay_s;
  seq.validate();
  return seq;
}

BareReversal bare_reversal_from_config(const ExperimentConfig& cfg) {
  const auto& p = cfg.physics;
  const auto& s = cfg.schedule;
  switch (s.kind) {
    case ScheduleSpecKind::kSmoothReversal: {
      const double span = s.delta_tau_s + 2.0 * s.guard_s;
      return {make_smooth_reversal(p.b0_g, s.b_min_g, s.delta_tau_s, 0.5 * span), 0.0, span};
    }
    case ScheduleSpecKind::kSuddenReversal:
      return {make_sudden_reversal(p.b0_g, 0.5 * p.interrogation_time_s, s.residual_transverse_g, s.ramp_s), 0.0,
              p.interrogation_time_s};
    case ScheduleSpecKind::kSampledTrace: {
      FieldSchedule trace = load_trace_csv(s.trace_path);
      return {trace, trace.t_start(), trace.t_end()};
    }
    case ScheduleSpecKind::kConstant:
      break;
  }
  throw Error(ErrorKind::kNoReversalWindow, "a constant schedule has no reversal");
}

std::vector<double> detunings_from_config(const ExperimentConfig& cfg) {
  return linspace(cfg.scan.detuning_start_hz, cfg.scan.detuning_stop_hz, cfg.scan.detuning_count);
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  RunManifest m;
  m.config_hash = hex64(config_hash(cfg));
  m.tool_version = kToolVersion;
  m.experiment = cfg.experiment;

  OutputSet out(cfg.output.dir);
  try {
    out.write("config.json", serialize_config(cfg));
    switch (cfg.experiment) {
      case ExperimentKind::kRabi: m.fits_converged = run_rabi(cfg, out); break;
      case ExperimentKind::kRamseyScan: m.fits_converged = run_ramsey_scan(cfg, out); break;
      case ExperimentKind::kReversalPhase: m.fits_converged = run_reversal_phase(cfg, out); break;
      case ExperimentKind::kAdiabaticityReport: m.fits_converged = run_adiabaticity(cfg, out); break;
      case ExperimentKind::kVisibilitySweep: m.fits_converged = run_visibility_sweep(cfg, out); break;
      case ExperimentKind::kRobustnessSuite: m.fits_converged = run_robustness(cfg, out); break;
    }
    m.outputs = out.names();
    m.outputs.push_back("manifest.txt");
    m.timestamp = utc_timestamp();
    out.write("manifest.txt", format_manifest(m));
  } catch (const Error& e) {
    out.remove_all();
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw Error(e.kind(), to_string(cfg.experiment) + ": " + msg);
  } catch (...) {
    out.remove_all();
    throw;
  }
  return m;
}

}  // namespace spinsim
