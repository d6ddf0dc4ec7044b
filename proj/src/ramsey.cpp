#include "spinsim/ramsey.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "spinsim/error.hpp"

namespace spinsim {

namespace {

double total_population(const ComplexVector& psi) { return psi.squaredNorm(); }

double damp(double p, double elapsed, std::optional<double> tau) {
  if (!tau) return p;
  return 0.5 + (p - 0.5) * std::exp(-elapsed / *tau);
}

}  // namespace

ComplexMatrix ClockModel::hamiltonian(FieldVector b, bool microwave_on) const {
  const std::array<LabelledBlock, 2> blocks{
      LabelledBlock{zeeman_hamiltonian(f1_ops, f1, b), {}},
      LabelledBlock{zeeman_hamiltonian(f2_ops, f2, b), {}},
  };
  ComplexMatrix h = embed_direct_sum(blocks);
  const double detuning = kTwoPi * detuning_hz;
  for (int i = f1_ops.f.dim(); i < h.rows(); ++i) h(i, i) -= detuning;
  if (microwave_on) {
    h(clock_lower, clock_upper) += kPi * rabi_hz;
    h(clock_upper, clock_lower) += kPi * rabi_hz;
  }
  return h;
}

ClockModel build_clock_model(double rabi_hz, double detuning_hz, double gamma_f1, double gamma_f2) {
  if (!(rabi_hz > 0.0) || !std::isfinite(rabi_hz)) {
    throw Error(ErrorKind::kInvalidArgument, "Rabi frequency must be positive");
  }
  if (!std::isfinite(detuning_hz)) throw Error(ErrorKind::kInvalidArgument, "detuning must be finite");
  if (!(gamma_f1 != 0.0 && gamma_f2 != 0.0 && std::isfinite(gamma_f1) && std::isfinite(gamma_f2))) {
    throw Error(ErrorKind::kInvalidArgument, "gyromagnetic ratios must be finite and nonzero");
  }
  const auto f1 = SpinQuantumNumber::from_integer(1);
  const auto f2 = SpinQuantumNumber::from_integer(2);
  ClockModel m{rabi_hz,
               detuning_hz,
               {gamma_f1},
               {gamma_f2},
               build_spin_operators(f1),
               build_spin_operators(f2),
               {},
               0,
               0};
  m.labels = manifold_labels(f1);
  const auto upper = manifold_labels(f2);
  m.labels.insert(m.labels.end(), upper.begin(), upper.end());
  StateVector probe{ComplexVector::Zero(8), m.labels};
  m.clock_lower = probe.index_of({2, 0});
  m.clock_upper = probe.index_of({4, 0});
  return m;
}

StateVector prepare_initial_state(const ClockModel& model) { return basis_state(model.labels, BasisLabel{4, 0}); }

StateVector prepare_initial_state() { return prepare_initial_state(build_clock_model(kNominalRabiHz, 0.0)); }

ModelFactory detuning_factory(const ClockModel& base) {
  return [base](double detuning_hz) {
    ClockModel m = base;
    m.detuning_hz = detuning_hz;
    return m;
  };
}

RabiScan simulate_rabi(const ClockModel& model, std::span<const double> durations, FieldVector b_bias,
                       std::optional<double> decay_tau) {
  const ComplexMatrix h = model.hamiltonian(b_bias, true);
  const StateVector psi0 = prepare_initial_state(model);
  RabiScan scan;
  scan.points.reserve(durations.size());
  for (double tau : durations) {
    if (!(tau >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "Rabi durations must be non-negative");
    const ComplexVector psi = unitary_from_hamiltonian(h, tau) * psi0.amplitudes;
    scan.points.push_back({tau, damp(std::norm(psi[model.clock_upper]), tau, decay_tau)});
  }
  return scan;
}

void RamseySequence::validate() const {
  if (!(pulse1_duration > 0.0 && pulse2_duration > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "pulse durations must be positive");
  }
  if (!(free_duration() > 0.0)) {
    throw Error(ErrorKind::kWindowMismatch, "interrogation time leaves no microwave-off window");
  }
  numerics.validate();
  if (!(schedule.t_start() <= free_start() && schedule.t_end() >= free_end())) {
    throw Error(ErrorKind::kWindowMismatch, "schedule domain does not cover the interrogation window");
  }
  const auto kind = schedule.kind();
  if (kind != ScheduleKind::kConstant && kind != ScheduleKind::kSampledTrace) {
    const auto active = schedule.active_interval();
    const double slack = 1e-12;
    if (!active || active->first < free_start() - slack || active->second > free_end() + slack) {
      throw Error(ErrorKind::kWindowMismatch, "field reversal is not contained in the microwave-off window");
    }
  }
}

RamseySequence make_ramsey_sequence(const ClockModel& model, double interrogation_time, FieldSchedule schedule) {
  RamseySequence seq;
  seq.pulse1_duration = model.quarter_period();
  seq.pulse2_duration = model.quarter_period();
  seq.interrogation_time = interrogation_time;
  seq.schedule = std::move(schedule);
  return seq;
}

RamseySequence baseline_sequence(const ClockModel& model, double interrogation_time, double b0) {
  return make_ramsey_sequence(model, interrogation_time, make_constant({0.0, 0.0, b0}));
}

RamseySequence smooth_reversal_sequence(const ClockModel& model, double b0, double b_min, double delta_tau,
                                        double guard) {
  if (!(guard >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "guard time must be >= 0");
  const double pulse = model.quarter_period();
  const double free = delta_tau + 2.0 * guard;
  const double centre = pulse + 0.5 * free;
  return make_ramsey_sequence(model, free + pulse, make_smooth_reversal(b0, b_min, delta_tau, centre));
}

RamseySequence sudden_reversal_sequence(const ClockModel& model, double interrogation_time, double b0,
                                        double residual_transverse, double ramp) {
  const double pulse = model.quarter_period();
  const double centre = pulse + 0.5 * (interrogation_time - pulse);
  return make_ramsey_sequence(model, interrogation_time, make_sudden_reversal(b0, centre, residual_transverse, ramp));
}

RamseyOutcome run_ramsey_detailed(const ClockModel& model, const RamseySequence& seq) {
  seq.validate();
  RamseyOutcome out;
  auto track = [&out](const ComplexVector& psi) {
    out.max_population_defect = std::max(out.max_population_defect, std::abs(total_population(psi) - 1.0));
  };

  const StateVector psi0 = prepare_initial_state(model);
  const double t_open = seq.free_start();
  const double t_close = seq.free_end();

  ComplexVector psi = unitary_from_hamiltonian(model.hamiltonian(field_at(seq.schedule, t_open), true),
                                               seq.pulse1_duration) *
                      psi0.amplitudes;
  track(psi);

  HamiltonianFn free_h = [&](double t) { return model.hamiltonian(field_at(seq.schedule, t), false); };
  const EvolutionResult free =
      evolve(StateVector{psi, model.labels}, free_h, t_open, t_close, seq.numerics, seq.schedule.breakpoints());
  psi = free.final_state.amplitudes;
  out.max_norm_defect = free.max_norm_defect;
  track(psi);

  psi = unitary_from_hamiltonian(model.hamiltonian(field_at(seq.schedule, t_close), true), seq.pulse2_duration) * psi;
  track(psi);

  out.final_state = StateVector{psi, model.labels};
  const double p_upper = std::norm(psi[model.clock_upper]);
  for (int i = 0; i < psi.size(); ++i) {
    if (i != model.clock_lower && i != model.clock_upper) out.off_clock_population += std::norm(psi[i]);
  }
  out.p_f2 = damp(p_upper, seq.free_duration(), seq.free_decay_tau);
  return out;
}

double run_ramsey(const ClockModel& model, const RamseySequence& seq) { return run_ramsey_detailed(model, seq).p_f2; }

FringeScan scan_ramsey(const ModelFactory& factory, std::span<const double> detunings, const RamseySequence& seq,
                       int workers) {
  if (detunings.empty()) throw Error(ErrorKind::kEmptyInput, "detuning list is empty");
  seq.validate();
  const std::size_t n = detunings.size();
  std::vector<RamseyOutcome> results(n);
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](int id) {
    for (std::size_t i = static_cast<std::size_t>(id); i < n; i += static_cast<std::size_t>(w)) {
      try {
        results[i] = run_ramsey_detailed(factory(detunings[i]), seq);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (w == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int id = 0; id < w; ++id) pool.emplace_back(work, id);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  FringeScan scan;
  scan.interrogation_time = seq.interrogation_time;
  scan.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    scan.points.push_back({detunings[i], results[i].p_f2});
    scan.max_norm_defect = std::max(scan.max_norm_defect, results[i].max_norm_defect);
  }
  return scan;
}

FringeFit fit_fringe(const FringeScan& scan, double t_eff_init) {
  if (scan.points.size() < 8) throw Error(ErrorKind::kInvalidArgument, "fringe fit needs at least 8 points");
  if (!(t_eff_init > 0.0)) throw Error(ErrorKind::kInvalidArgument, "t_eff_init must be positive");
  std::vector<double> x, y;
  x.reserve(scan.points.size());
  y.reserve(scan.points.size());
  for (const auto& p : scan.points) {
    x.push_back(p.detuning_hz);
    y.push_back(p.p_f2);
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if ((*hi - *lo) * t_eff_init < 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "detuning grid spans less than one fringe period");
  }
  const CosineFit c = fit_cosine(x, y, t_eff_init);
  FringeFit f;
  f.amplitude = c.amplitude;
  f.phase = c.phase;
  f.offset = c.offset;
  f.t_eff = c.frequency;
  f.fringe_period_hz = 1.0 / c.frequency;
  f.visibility = c.offset > 0.0 ? c.amplitude / c.offset : std::numeric_limits<double>::quiet_NaN();
  f.sigma_amplitude = c.sigma_amplitude;
  f.sigma_phase = c.sigma_phase;
  f.sigma_offset = c.sigma_offset;
  f.sigma_t_eff = c.sigma_frequency;
  f.rss = c.rss;
  f.iterations = c.iterations;
  f.converged = c.converged;
  return f;
}

PhaseShift phase_shift(const FringeFit& a, const FringeFit& b) {
  if (!a.converged || !b.converged) throw Error(ErrorKind::kNotConverged, "phase shift needs two converged fits");
  if (std::abs(a.fringe_period_hz - b.fringe_period_hz) > 0.05 * std::abs(b.fringe_period_hz)) {
    throw Error(ErrorKind::kPeriodMismatch, "fringe periods differ by more than 5 %");
  }
  return {wrap_phase(a.phase - b.phase), std::hypot(a.sigma_phase, b.sigma_phase)};
}

std::vector<VisibilityPoint> visibility_vs_gap(const ModelFactory& factory, const RamseySequence& seq_template,
                                               std::span<const double> b_min_list,
                                               std::span<const double> detunings, int workers) {
  if (seq_template.schedule.kind() != ScheduleKind::kSmoothReversal) {
    throw Error(ErrorKind::kInvalidArgument, "visibility sweep needs a smooth_reversal template");
  }
  const auto& base = std::get<SmoothReversalParams>(seq_template.schedule.params());
  for (double b_min : b_min_list) {
    if (!(b_min > 0.0)) throw Error(ErrorKind::kInvalidArgument, "b_min values must be positive");
  }

  RamseySequence baseline = seq_template;
  baseline.schedule = make_constant({0.0, 0.0, base.b0});
  const FringeFit reference = fit_fringe(scan_ramsey(factory, detunings, baseline, workers),
                                         seq_template.interrogation_time);

  std::vector<VisibilityPoint> out;
  out.reserve(b_min_list.size());
  for (double b_min : b_min_list) {
    RamseySequence seq = seq_template;
    seq.schedule = make_smooth_reversal(base.b0, b_min, base.delta_tau, base.t_center);
    VisibilityPoint v;
    v.b_min = b_min;
    v.scan = scan_ramsey(factory, detunings, seq, workers);
    v.fit = fit_fringe(v.scan, seq.interrogation_time);
    v.visibility = v.fit.visibility;
    v.phase_shift = phase_shift(v.fit, reference).shift;
    v.phase_class = snap_phase(v.phase_shift);
    out.push_back(v);
  }
  return out;
}

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "linspace needs count >= 1");
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = start;
    return v;
  }
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
  return v;
}

}  // namespace spinsim
