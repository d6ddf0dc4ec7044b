#include "spinsim/field_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "spinsim/error.hpp"
#include "spinsim/spin_algebra.hpp"

namespace spinsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kInvalidArgument, what);
}

bool finite(const FieldVector& b) {
  return std::isfinite(b.bx) && std::isfinite(b.by) && std::isfinite(b.bz);
}

FieldVector smooth_field(const SmoothReversalParams& p, double t) {
  const double s = (t - p.window_start()) / p.delta_tau;
  if (s <= 0.0) return {0.0, 0.0, p.b0};
  if (s >= 1.0) return {0.0, 0.0, -p.b0};
  return {p.b_min * std::sin(kPi * s), 0.0, p.b0 * std::cos(kPi * s)};
}

FieldVector perturbed_field(const PerturbedParams& p, double t) {
  FieldVector b = smooth_field(p.base, t);
  const double s = (t - p.base.window_start()) / p.base.delta_tau;
  if (s <= 0.0 || s >= 1.0) return b;
  const double envelope = std::sin(kPi * s);
  double delta[3] = {0.0, 0.0, 0.0};
  for (const auto& m : p.modes) {
    delta[m.component] += m.amplitude * envelope * std::sin(m.harmonic * kPi * s + m.phase);
  }
  return {b.bx + delta[0], b.by + delta[1], b.bz + delta[2]};
}

FieldVector trace_field(const SampledTraceParams& p, double t) {
  const auto& s = p.samples;
  auto hi = std::upper_bound(s.begin(), s.end(), t, [](double v, const TraceSample& x) { return v < x.t; });
  if (hi == s.begin()) return s.front().field;
  if (hi == s.end()) return s.back().field;
  const auto lo = hi - 1;
  const double w = (t - lo->t) / (hi->t - lo->t);
  auto lerp = [w](double a, double b) { return a + w * (b - a); };
  return {lerp(lo->field.bx, hi->field.bx), lerp(lo->field.by, hi->field.by),
          lerp(lo->field.bz, hi->field.bz)};
}

FieldVector evaluate(const FieldSchedule::Params& params, double t) {
  return std::visit(
      Overloaded{
          [](const ConstantParams& p) { return p.field; },
          [t](const SmoothReversalParams& p) { return smooth_field(p, t); },
          [t](const SuddenReversalParams& p) {
            const double s = (t - (p.t_flip - 0.5 * p.ramp)) / p.ramp;
            double bz = p.b0;
            if (s >= 1.0) {
              bz = -p.b0;
            } else if (s > 0.0) {
              bz = p.b0 * (1.0 - 2.0 * s);
            }
            return FieldVector{p.residual_transverse, 0.0, bz};
          },
          [t](const SampledTraceParams& p) { return trace_field(p, t); },
          [t](const PerturbedParams& p) { return perturbed_field(p, t); },
      },
      params);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Minimum of f over [a, b] given a uniform pre-scan; golden-section refinement
// around the best sample.
template <class F>
double scan_minimum(F&& f, double a, double b, int n_samples) {
  if (!(b > a)) return f(a);
  double best = kInf;
  int best_i = 0;
  const double h = (b - a) / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) {
    const double v = f(a + i * h);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  double lo = a + std::max(0, best_i - 1) * h;
  double hi = a + std::min(n_samples - 1, best_i + 1) * h;
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  // Bracket shrinks by 0.618 per pass; 80 passes reach the rounding floor.
  for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({best, f1, f2});
}

}  // namespace

double FieldVector::magnitude() const { return std::sqrt(bx * bx + by * by + bz * bz); }

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kSmoothReversal: return "smooth_reversal";
    case ScheduleKind::kSuddenReversal: return "sudden_reversal";
    case ScheduleKind::kSampledTrace: return "sampled_trace";
    case ScheduleKind::kPerturbed: return "perturbed";
  }
  return "unknown";
}

std::string to_string(Adiabaticity a) {
  switch (a) {
    case Adiabaticity::kAdiabatic: return "adiabatic";
    case Adiabaticity::kMarginal: return "marginal";
    case Adiabaticity::kSudden: return "sudden";
  }
  return "unknown";
}

FieldSchedule::FieldSchedule(Params params, double t_start, double t_end)
    : params_(std::move(params)), t_start_(t_start), t_end_(t_end) {
  require(!(t_end < t_start), "schedule domain end precedes start");
}

ScheduleKind FieldSchedule::kind() const { return static_cast<ScheduleKind>(params_.index()); }

FieldSchedule FieldSchedule::restricted(double t0, double t1) const {
  require(t0 <= t1, "restricted domain must satisfy t0 <= t1");
  require(t0 >= t_start_ && t1 <= t_end_, "restricted domain exceeds schedule domain");
  return FieldSchedule(params_, t0, t1);
}

std::optional<std::pair<double, double>> FieldSchedule::active_interval() const {
  std::optional<std::pair<double, double>> window = std::visit(
      Overloaded{
          [](const ConstantParams&) -> std::optional<std::pair<double, double>> { return std::nullopt; },
          [](const SmoothReversalParams& p) -> std::optional<std::pair<double, double>> {
            return std::pair{p.window_start(), p.window_end()};
          },
          [](const SuddenReversalParams& p) -> std::optional<std::pair<double, double>> {
            return std::pair{p.t_flip - 0.5 * p.ramp, p.t_flip + 0.5 * p.ramp};
          },
          [](const SampledTraceParams& p) -> std::optional<std::pair<double, double>> {
            return std::pair{p.samples.front().t, p.samples.back().t};
          },
          [](const PerturbedParams& p) -> std::optional<std::pair<double, double>> {
            return std::pair{p.base.window_start(), p.base.window_end()};
          },
      },
      params_);
  if (!window) return std::nullopt;
  const double a = std::max(window->first, t_start_);
  const double b = std::min(window->second, t_end_);
  if (a > b) return std::nullopt;
  return std::pair{a, b};
}

std::vector<double> FieldSchedule::breakpoints() const {
  std::vector<double> raw = std::visit(
      Overloaded{
          [](const ConstantParams&) { return std::vector<double>{}; },
          [](const SmoothReversalParams& p) { return std::vector<double>{p.window_start(), p.window_end()}; },
          [](const SuddenReversalParams& p) {
            return std::vector<double>{p.t_flip - 0.5 * p.ramp, p.t_flip + 0.5 * p.ramp};
          },
          [](const SampledTraceParams& p) {
            std::vector<double> ts;
            for (const auto& s : p.samples) ts.push_back(s.t);
            return ts;
          },
          [](const PerturbedParams& p) { return std::vector<double>{p.base.window_start(), p.base.window_end()}; },
      },
      params_);
  std::vector<double> out;
  for (double t : raw) {
    if (t > t_start_ && t < t_end_) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<double> FieldSchedule::reversal_time_scale() const {
  return std::visit(
      Overloaded{
          [](const ConstantParams&) -> std::optional<double> { return std::nullopt; },
          [](const SmoothReversalParams& p) -> std::optional<double> { return p.delta_tau; },
          [](const SuddenReversalParams& p) -> std::optional<double> { return p.ramp; },
          [](const PerturbedParams& p) -> std::optional<double> { return p.base.delta_tau; },
          [](const SampledTraceParams& p) -> std::optional<double> {
            // 10-90 % transition time of bz, rescaled to the full swing.
            const double z0 = p.samples.front().field.bz;
            const double z1 = p.samples.back().field.bz;
            if (!(z0 * z1 < 0.0)) return std::nullopt;
            const double early = z0 + 0.1 * (z1 - z0);
            const double late = z0 + 0.9 * (z1 - z0);
            auto crossing = [&](double level, bool first) -> double {
              const auto& s = p.samples;
              double found = s.front().t;
              for (std::size_t i = 1; i < s.size(); ++i) {
                const double a = s[i - 1].field.bz - level;
                const double b = s[i].field.bz - level;
                if (a == b || (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0)) continue;
                found = s[i - 1].t + (s[i].t - s[i - 1].t) * a / (a - b);
                if (first) break;
              }
              return found;
            };
            const double t_early = crossing(early, true);
            const double t_late = crossing(late, false);
            return std::max(0.0, t_late - t_early) / 0.8;
          },
      },
      params_);
}

FieldSchedule make_constant(FieldVector field) {
  require(finite(field), "constant field must be finite");
  return FieldSchedule(ConstantParams{field}, -kInf, kInf);
}

FieldSchedule make_smooth_reversal(double b0, double b_min, double delta_tau, double t_flip_center) {
  require(b0 > 0.0 && std::isfinite(b0), "smooth reversal requires b0 > 0");
  require(b_min > 0.0 && std::isfinite(b_min), "smooth reversal requires b_min > 0 (|B(t)| must never vanish)");
  require(delta_tau > 0.0 && std::isfinite(delta_tau), "smooth reversal requires delta_tau > 0");
  require(std::isfinite(t_flip_center), "smooth reversal centre must be finite");
  return FieldSchedule(SmoothReversalParams{b0, b_min, delta_tau, t_flip_center}, -kInf, kInf);
}

FieldSchedule make_sudden_reversal(double b0, double t_flip, double residual_transverse, double ramp) {
  require(b0 > 0.0 && std::isfinite(b0), "sudden reversal requires b0 > 0");
  require(residual_transverse >= 0.0 && std::isfinite(residual_transverse),
          "sudden reversal requires residual_transverse >= 0");
  require(ramp > 0.0 && std::isfinite(ramp), "sudden reversal requires ramp > 0");
  require(std::isfinite(t_flip), "sudden reversal flip time must be finite");
  return FieldSchedule(SuddenReversalParams{b0, t_flip, residual_transverse, ramp}, -kInf, kInf);
}

FieldSchedule make_sampled_trace(std::vector<TraceSample> samples) {
  require(samples.size() >= 2, "sampled trace needs at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require(std::isfinite(samples[i].t) && finite(samples[i].field), "sampled trace values must be finite");
    if (i > 0) require(samples[i].t > samples[i - 1].t, "sampled trace times must be strictly increasing");
  }
  const double t0 = samples.front().t;
  const double t1 = samples.back().t;
  return FieldSchedule(SampledTraceParams{std::move(samples)}, t0, t1);
}

FieldSchedule parse_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kIo, "trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_s,bx_g,by_g,bz_g") {
    throw Error(ErrorKind::kIo, "trace CSV header must be 't_s,bx_g,by_g,bz_g', got '" + line + "'");
  }
  std::vector<TraceSample> samples;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    double v[4];
    char comma = 0;
    ss >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3];
    if (!ss || comma != ',') throw Error(ErrorKind::kIo, "trace CSV row " + std::to_string(row) + " malformed");
    samples.push_back({v[0], {v[1], v[2], v[3]}});
  }
  try {
    return make_sampled_trace(std::move(samples));
  } catch (const Error& e) {
    throw Error(ErrorKind::kIo, std::string("trace CSV rejected: ") + e.what());
  }
}

FieldSchedule load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open trace CSV '" + path + "'");
  return parse_trace_csv(in);
}

FieldVector field_at(const FieldSchedule& schedule, double t) {
  if (!(t >= schedule.t_start() && t <= schedule.t_end())) {
    throw Error(ErrorKind::kOutOfDomain, "t = " + std::to_string(t) + " s outside schedule domain");
  }
  return evaluate(schedule.params(), t);
}

double min_field_magnitude(const FieldSchedule& schedule, int n_samples) {
  require(n_samples >= 100, "gap search needs at least 100 samples");
  auto interval = schedule.active_interval();
  if (!interval) {
    double t = 0.0;
    if (std::isfinite(schedule.t_start())) t = schedule.t_start();
    if (schedule.kind() == ScheduleKind::kConstant || !std::isfinite(schedule.t_end())) {
      return field_at(schedule, std::clamp(t, schedule.t_start(), schedule.t_end())).magnitude();
    }
    interval = std::pair{schedule.t_start(), schedule.t_end()};
  }
  const auto& params = schedule.params();
  auto magnitude = [&params](double t) { return evaluate(params, t).magnitude(); };
  return scan_minimum(magnitude, interval->first, interval->second, n_samples);
}

double min_zeeman_gap(const FieldSchedule& schedule, double gamma_hz_per_gauss, int n_samples) {
  require(gamma_hz_per_gauss != 0.0 && std::isfinite(gamma_hz_per_gauss), "gamma must be finite and nonzero");
  return std::abs(gamma_hz_per_gauss) * min_field_magnitude(schedule, n_samples);
}

AdiabaticityReport classify_adiabaticity(double delta_tau, double min_gap_hz) {
  require(delta_tau >= 0.0 && min_gap_hz >= 0.0, "adiabaticity inputs must be non-negative");
  AdiabaticityReport r;
  r.delta_tau = delta_tau;
  r.min_gap_hz = min_gap_hz;
  r.ratio = kTwoPi * min_gap_hz * delta_tau;
  if (r.ratio > kAdiabaticRatioAbove) {
    r.classification = Adiabaticity::kAdiabatic;
  } else if (r.ratio < kSuddenRatioBelow) {
    r.classification = Adiabaticity::kSudden;
  } else {
    r.classification = Adiabaticity::kMarginal;
  }
  return r;
}

AdiabaticityReport adiabaticity_ratio(const FieldSchedule& schedule, double gamma_hz_per_gauss) {
  const auto tau = schedule.reversal_time_scale();
  if (!tau) {
    throw Error(ErrorKind::kNoReversalWindow, to_string(schedule.kind()) + " schedule has no reversal window");
  }
  return classify_adiabaticity(*tau, min_zeeman_gap(schedule, gamma_hz_per_gauss));
}

FieldSchedule perturb_schedule(const FieldSchedule& schedule, std::uint64_t seed, double amplitude, int n_modes) {
  if (schedule.kind() != ScheduleKind::kSmoothReversal) {
    throw Error(ErrorKind::kInvalidArgument, "only smooth_reversal schedules can be perturbed");
  }
  require(amplitude >= 0.0 && std::isfinite(amplitude), "perturbation amplitude must be >= 0");
  require(n_modes >= 0, "perturbation mode count must be >= 0");
  if (amplitude == 0.0 || n_modes == 0) return schedule;

  const auto& base = std::get<SmoothReversalParams>(schedule.params());
  PerturbedParams p;
  p.base = base;
  p.seed = seed;
  p.amplitude = amplitude;
  std::mt19937_64 rng(seed);
  for (int component = 0; component < 3; ++component) {
    for (int j = 0; j < n_modes; ++j) {
      const double scale = uniform01(rng);
      const double phase = kTwoPi * uniform01(rng);
      p.modes.push_back({component, j + 1, amplitude * scale, phase});
    }
  }
  FieldSchedule out(p, schedule.t_start(), schedule.t_end());
  const double min_b = min_field_magnitude(out);
  if (min_b < 0.1 * base.b_min) {
    throw Error(ErrorKind::kGapClosed, "perturbed path reaches |B| = " + std::to_string(min_b) +
                                           " G < 0.1 b_min; the reversal is no longer gapped");
  }
  p.min_field = min_b;
  return FieldSchedule(std::move(p), schedule.t_start(), schedule.t_end());
}

}  // namespace spinsim
