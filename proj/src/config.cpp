#include "spinsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spinsim/error.hpp"
#include "spinsim/text_io.hpp"

extern char** environ;

namespace spinsim {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kEnvPrefix = "SPINSIM_";

struct ExperimentName {
  ExperimentKind kind;
  const char* name;
};
constexpr ExperimentName kExperimentNames[] = {
    {ExperimentKind::kRabi, "rabi"},
    {ExperimentKind::kRamseyScan, "ramsey_scan"},
    {ExperimentKind::kReversalPhase, "reversal_phase"},
    {ExperimentKind::kAdiabaticityReport, "adiabaticity_report"},
    {ExperimentKind::kVisibilitySweep, "visibility_sweep"},
    {ExperimentKind::kRobustnessSuite, "robustness_suite"},
};

struct ScheduleName {
  ScheduleSpecKind kind;
  const char* name;
};
constexpr ScheduleName kScheduleNames[] = {
    {ScheduleSpecKind::kConstant, "constant"},
    {ScheduleSpecKind::kSmoothReversal, "smooth_reversal"},
    {ScheduleSpecKind::kSuddenReversal, "sudden_reversal"},
    {ScheduleSpecKind::kSampledTrace, "sampled_trace"},
};

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::kConfig, path + ": " + message);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Typed access to one JSON object; every key read is remembered so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_ != nullptr && !obj_->is_object()) fail(path_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    if (obj_ == nullptr) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void number(const std::string& key, double& out) {
    if (const Json* v = find(key)) out = as_number(*v, path(key));
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    const Json* v = find(key);
    if (v == nullptr) return;
    if (v->is_null()) {
      out.reset();
    } else {
      out = as_number(*v, path(key));
    }
  }

  void integer(const std::string& key, int& out) {
    if (const Json* v = find(key)) {
      const long long n = as_integer(*v, path(key));
      if (n < INT32_MIN || n > INT32_MAX) fail(path(key), "integer out of range");
      out = static_cast<int>(n);
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) fail(path(key), std::string("expected a string, got ") + v->type_name());
      out = v->get<std::string>();
    }
  }

  void number_list(const std::string& key, std::vector<double>& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) fail(path(key), std::string("expected an array, got ") + v->type_name());
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(as_number((*v)[i], path(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }

  void integer_list(const std::string& key, std::vector<int>& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) fail(path(key), std::string("expected an array, got ") + v->type_name());
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(static_cast<int>(as_integer((*v)[i], path(key) + "[" + std::to_string(i) + "]")));
      }
    }
  }

  void finish() const {
    if (obj_ == nullptr) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!seen_.count(it.key())) fail(path(it.key()), "unknown key");
    }
  }

  static double as_number(const Json& v, const std::string& path) {
    double out = 0.0;
    if (v.is_number()) {
      out = v.get<double>();
    } else if (v.is_string()) {
      // Environment overrides and quoted values arrive as text.
      if (!parse_double(v.get<std::string>(), out)) fail(path, "expected a number, got \"" + v.get<std::string>() + "\"");
    } else {
      fail(path, std::string("expected a number, got ") + v.type_name());
    }
    if (!std::isfinite(out)) fail(path, "must be finite");
    return out;
  }

  static long long as_integer(const Json& v, const std::string& path) {
    long long out = 0;
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) fail(path, "integer out of range");
      out = static_cast<long long>(u);
    } else if (v.is_number_integer()) {
      out = v.get<long long>();
    } else if (v.is_string()) {
      if (!parse_int(v.get<std::string>(), out)) fail(path, "expected an integer, got \"" + v.get<std::string>() + "\"");
    } else {
      fail(path, std::string("expected an integer, got ") + v.type_name());
    }
    return out;
  }

 private:
  const Json* obj_;
  std::string path_;
  std::set<std::string> seen_;
};

Json parse_document(std::string_view text) {
  // Open objects, innermost last, with the keys seen so far in each.
  struct Frame {
    std::set<std::string> keys;
    std::string last;
  };
  std::vector<Frame> frames;
  auto callback = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        frames.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        frames.pop_back();
        break;
      case Json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!frames.back().keys.insert(key).second) {
          std::string path;
          for (std::size_t i = 0; i + 1 < frames.size(); ++i) path = join(path, frames[i].last);
          fail(join(path, key), "duplicate key");
        }
        frames.back().last = key;
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    Json doc = Json::parse(text.begin(), text.end(), callback);
    if (!doc.is_object()) fail("<document>", "top level must be an object");
    return doc;
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kConfig, std::string("<document>: malformed JSON: ") + e.what());
  }
}

void apply_env(Json& doc, const EnvOverrides& env) {
  for (const auto& [name, value] : env) {
    if (name.rfind(kEnvPrefix, 0) != 0) continue;
    std::string rest = name.substr(kEnvPrefix.size());
    for (auto& c : rest) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::vector<std::string> parts;
    for (std::size_t pos = 0;;) {
      const auto next = rest.find("__", pos);
      parts.push_back(rest.substr(pos, next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    for (const auto& p : parts) {
      if (p.empty()) fail(name, "malformed environment override name");
    }
    Json parsed;
    try {
      parsed = Json::parse(value);
    } catch (const Json::parse_error&) {
      parsed = value;
    }
    Json* node = &doc;
    std::string path;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      path = join(path, parts[i]);
      Json& child = (*node)[parts[i]];
      if (child.is_null()) child = Json::object();
      if (!child.is_object()) fail(path, "environment override " + name + " addresses a non-object");
      node = &child;
    }
    (*node)[parts.back()] = parsed;
  }
}

template <typename Table, typename Kind>
const char* name_of(const Table& table, Kind kind) {
  for (const auto& e : table) {
    if (e.kind == kind) return e.name;
  }
  return "unknown";
}

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) fail(path, message);
}

}  // namespace

std::string to_string(ExperimentKind kind) { return name_of(kExperimentNames, kind); }

std::optional<ExperimentKind> experiment_from_string(std::string_view name) {
  for (const auto& e : kExperimentNames) {
    if (name == e.name) return e.kind;
  }
  return std::nullopt;
}

std::string to_string(ScheduleSpecKind kind) { return name_of(kScheduleNames, kind); }

std::vector<AdiabaticityCase> default_adiabaticity_cases() {
  return {
      {"gap_140khz_2ms", 2e-3, 140e3},
      {"gap_14khz_2ms", 2e-3, 14e3},
      {"gap_2.8khz_2ms", 2e-3, 2.8e3},
      {"gap_700hz_2us", 2e-6, 700.0},
  };
}

ExperimentConfig parse_config(std::string_view text, const ParseOptions& opts) {
  Json doc = parse_document(text);
  apply_env(doc, opts.env);

  ExperimentConfig cfg;
  Section top(&doc, "");

  if (const Json* v = top.find("experiment")) {
    if (!v->is_string()) fail("experiment", std::string("expected a string, got ") + v->type_name());
    auto kind = experiment_from_string(v->get<std::string>());
    if (!kind) fail("experiment", "unknown experiment \"" + v->get<std::string>() + "\"");
    if (opts.experiment && *opts.experiment != *kind) {
      fail("experiment", "document says " + to_string(*kind) + " but " + to_string(*opts.experiment) +
                             " was requested");
    }
    cfg.experiment = *kind;
  } else if (opts.experiment) {
    cfg.experiment = *opts.experiment;
  } else {
    fail("experiment", "required key missing");
  }

  if (const Json* v = top.find("seed")) {
    if (!v->is_null()) {
      if (v->is_number_unsigned()) {
        cfg.seed = v->get<std::uint64_t>();
      } else {
        const long long s = Section::as_integer(*v, "seed");
        if (s < 0) fail("seed", "must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
      }
    }
  }
  top.integer("workers", cfg.workers);

  {
    Section s(top.find("physics"), "physics");
    s.integer_list("manifolds", cfg.physics.manifolds);
    s.number("gamma_f1_hz_per_g", cfg.physics.gamma_f1_hz_per_g);
    s.number("gamma_f2_hz_per_g", cfg.physics.gamma_f2_hz_per_g);
    s.number("rabi_hz", cfg.physics.rabi_hz);
    s.number("detuning_hz", cfg.physics.detuning_hz);
    s.number("interrogation_time_s", cfg.physics.interrogation_time_s);
    s.number("b0_g", cfg.physics.b0_g);
    s.optional_number("driven_decay_s", cfg.physics.driven_decay_s);
    s.optional_number("free_decay_s", cfg.physics.free_decay_s);
    s.finish();
  }
  {
    Section s(top.find("schedule"), "schedule");
    std::string kind = to_string(cfg.schedule.kind);
    s.text("kind", kind);
    bool found = false;
    for (const auto& e : kScheduleNames) {
      if (kind == e.name) {
        cfg.schedule.kind = e.kind;
        found = true;
      }
    }
    if (!found) fail("schedule.kind", "unknown schedule kind \"" + kind + "\"");
    s.number("b_min_g", cfg.schedule.b_min_g);
    s.number("delta_tau_s", cfg.schedule.delta_tau_s);
    s.number("guard_s", cfg.schedule.guard_s);
    s.number("residual_transverse_g", cfg.schedule.residual_transverse_g);
    s.number("ramp_s", cfg.schedule.ramp_s);
    s.text("trace_path", cfg.schedule.trace_path);
    s.finish();
  }
  {
    Section s(top.find("scan"), "scan");
    s.number("detuning_start_hz", cfg.scan.detuning_start_hz);
    s.number("detuning_stop_hz", cfg.scan.detuning_stop_hz);
    s.integer("detuning_count", cfg.scan.detuning_count);
    s.number("duration_start_s", cfg.scan.duration_start_s);
    s.number("duration_stop_s", cfg.scan.duration_stop_s);
    s.integer("duration_count", cfg.scan.duration_count);
    s.finish();
  }
  {
    Section s(top.find("sweep"), "sweep");
    s.number_list("b_min_list_g", cfg.sweep.b_min_list_g);
    s.optional_number("detuning_half_width_hz", cfg.sweep.detuning_half_width_hz);
    s.integer("detuning_count", cfg.sweep.detuning_count);
    s.finish();
  }
  {
    Section s(top.find("robustness"), "robustness");
    s.integer("trials", cfg.robustness.trials);
    s.number("amplitude_fraction", cfg.robustness.amplitude_fraction);
    s.integer("modes", cfg.robustness.modes);
    s.finish();
  }
  {
    Section s(top.find("adiabaticity"), "adiabaticity");
    if (const Json* cases = s.find("cases")) {
      if (!cases->is_array()) fail("adiabaticity.cases", "expected an array");
      cfg.adiabaticity_cases.clear();
      for (std::size_t i = 0; i < cases->size(); ++i) {
        Section c(&(*cases)[i], "adiabaticity.cases[" + std::to_string(i) + "]");
        AdiabaticityCase ac;
        ac.label = "case_" + std::to_string(i);
        c.text("label", ac.label);
        c.number("delta_tau_s", ac.delta_tau_s);
        c.number("gap_hz", ac.gap_hz);
        c.finish();
        cfg.adiabaticity_cases.push_back(ac);
      }
    }
    s.finish();
  }
  {
    Section s(top.find("numerics"), "numerics");
    s.number("target_error", cfg.numerics.target_error);
    s.number("dt_init_s", cfg.numerics.dt_init);
    s.number("dt_max_s", cfg.numerics.dt_max);
    s.number("record_interval_s", cfg.numerics.record_interval);
    s.finish();
  }
  {
    Section s(top.find("output"), "output");
    s.text("dir", cfg.output.dir);
    s.finish();
  }
  top.finish();

  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), opts);
}

EnvOverrides environment_overrides() {
  EnvOverrides out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    if (entry.rfind(kEnvPrefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace_back(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  auto opt = [](const std::optional<double>& v) { return v ? OrderedJson(*v) : OrderedJson(nullptr); };
  OrderedJson doc;
  doc["experiment"] = to_string(cfg.experiment);
  doc["seed"] = cfg.seed ? OrderedJson(*cfg.seed) : OrderedJson(nullptr);
  doc["workers"] = cfg.workers;
  doc["physics"] = {
      {"manifolds", cfg.physics.manifolds},
      {"gamma_f1_hz_per_g", cfg.physics.gamma_f1_hz_per_g},
      {"gamma_f2_hz_per_g", cfg.physics.gamma_f2_hz_per_g},
      {"rabi_hz", cfg.physics.rabi_hz},
      {"detuning_hz", cfg.physics.detuning_hz},
      {"interrogation_time_s", cfg.physics.interrogation_time_s},
      {"b0_g", cfg.physics.b0_g},
      {"driven_decay_s", opt(cfg.physics.driven_decay_s)},
      {"free_decay_s", opt(cfg.physics.free_decay_s)},
  };
  doc["schedule"] = {
      {"kind", to_string(cfg.schedule.kind)},
      {"b_min_g", cfg.schedule.b_min_g},
      {"delta_tau_s", cfg.schedule.delta_tau_s},
      {"guard_s", cfg.schedule.guard_s},
      {"residual_transverse_g", cfg.schedule.residual_transverse_g},
      {"ramp_s", cfg.schedule.ramp_s},
      {"trace_path", cfg.schedule.trace_path},
  };
  doc["scan"] = {
      {"detuning_start_hz", cfg.scan.detuning_start_hz},
      {"detuning_stop_hz", cfg.scan.detuning_stop_hz},
      {"detuning_count", cfg.scan.detuning_count},
      {"duration_start_s", cfg.scan.duration_start_s},
      {"duration_stop_s", cfg.scan.duration_stop_s},
      {"duration_count", cfg.scan.duration_count},
  };
  doc["sweep"] = {
      {"b_min_list_g", cfg.sweep.b_min_list_g},
      {"detuning_half_width_hz", opt(cfg.sweep.detuning_half_width_hz)},
      {"detuning_count", cfg.sweep.detuning_count},
  };
  doc["robustness"] = {
      {"trials", cfg.robustness.trials},
      {"amplitude_fraction", cfg.robustness.amplitude_fraction},
      {"modes", cfg.robustness.modes},
  };
  OrderedJson cases = OrderedJson::array();
  for (const auto& c : cfg.adiabaticity_cases) {
    cases.push_back({{"label", c.label}, {"delta_tau_s", c.delta_tau_s}, {"gap_hz", c.gap_hz}});
  }
  doc["adiabaticity"] = {{"cases", cases}};
  doc["numerics"] = {
      {"target_error", cfg.numerics.target_error},
      {"dt_init_s", cfg.numerics.dt_init},
      {"dt_max_s", cfg.numerics.dt_max},
      {"record_interval_s", cfg.numerics.record_interval},
  };
  doc["output"] = {{"dir", cfg.output.dir}};
  return doc.dump(2) + "\n";
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& p = cfg.physics;
  require(cfg.workers >= 1, "workers", "must be >= 1");
  require(!p.manifolds.empty(), "physics.manifolds", "must not be empty");
  for (std::size_t i = 0; i < p.manifolds.size(); ++i) {
    require(p.manifolds[i] == 1 || p.manifolds[i] == 2, "physics.manifolds[" + std::to_string(i) + "]",
            "only the F=1 and F=2 ground-state manifolds are modelled");
  }
  require(p.gamma_f1_hz_per_g != 0.0, "physics.gamma_f1_hz_per_g", "must be non-zero");
  require(p.gamma_f2_hz_per_g != 0.0, "physics.gamma_f2_hz_per_g", "must be non-zero");
  require(p.rabi_hz > 0.0, "physics.rabi_hz", "must be > 0");
  require(p.b0_g > 0.0, "physics.b0_g", "must be > 0");
  const double pulse = 0.25 / p.rabi_hz;
  require(p.interrogation_time_s > pulse, "physics.interrogation_time_s",
          "must exceed the pi/2 pulse length " + format_double(pulse) + " s");
  require(!p.driven_decay_s || *p.driven_decay_s > 0.0, "physics.driven_decay_s", "must be > 0 or null");
  require(!p.free_decay_s || *p.free_decay_s > 0.0, "physics.free_decay_s", "must be > 0 or null");

  const auto& s = cfg.schedule;
  switch (s.kind) {
    case ScheduleSpecKind::kConstant:
      break;
    case ScheduleSpecKind::kSmoothReversal:
      require(s.b_min_g > 0.0, "schedule.b_min_g",
              "make_smooth_reversal requires b_min > 0, got " + format_double(s.b_min_g));
      require(s.delta_tau_s > 0.0, "schedule.delta_tau_s",
              "make_smooth_reversal requires delta_tau > 0, got " + format_double(s.delta_tau_s));
      require(s.guard_s >= 0.0, "schedule.guard_s", "must be >= 0");
      try {
        make_smooth_reversal(p.b0_g, s.b_min_g, s.delta_tau_s, 0.5 * s.delta_tau_s);
      } catch (const Error& e) {
        fail("schedule", e.what());
      }
      break;
    case ScheduleSpecKind::kSuddenReversal:
      require(s.ramp_s > 0.0, "schedule.ramp_s",
              "make_sudden_reversal requires ramp > 0, got " + format_double(s.ramp_s));
      require(s.residual_transverse_g >= 0.0, "schedule.residual_transverse_g", "must be >= 0");
      require(s.ramp_s < p.interrogation_time_s - pulse, "schedule.ramp_s",
              "ramp must fit inside the interrogation window");
      try {
        make_sudden_reversal(p.b0_g, 0.0, s.residual_transverse_g, s.ramp_s);
      } catch (const Error& e) {
        fail("schedule", e.what());
      }
      break;
    case ScheduleSpecKind::kSampledTrace:
      require(!s.trace_path.empty(), "schedule.trace_path", "required for sampled_trace");
      try {
        load_trace_csv(s.trace_path);
      } catch (const Error& e) {
        fail("schedule.trace_path", e.what());
      }
      break;
  }

  const auto& sc = cfg.scan;
  require(sc.detuning_count >= 8, "scan.detuning_count", "fringe fits need at least 8 points");
  require(sc.detuning_stop_hz > sc.detuning_start_hz, "scan.detuning_stop_hz", "must exceed detuning_start_hz");
  require(sc.duration_start_s >= 0.0, "scan.duration_start_s", "must be >= 0");
  require(sc.duration_stop_s > sc.duration_start_s, "scan.duration_stop_s", "must exceed duration_start_s");
  require(sc.duration_count >= 8, "scan.duration_count", "Rabi fits need at least 8 points");

  require(!cfg.sweep.b_min_list_g.empty(), "sweep.b_min_list_g", "must not be empty");
  for (std::size_t i = 0; i < cfg.sweep.b_min_list_g.size(); ++i) {
    require(cfg.sweep.b_min_list_g[i] > 0.0, "sweep.b_min_list_g[" + std::to_string(i) + "]",
            "make_smooth_reversal requires b_min > 0");
  }
  require(!cfg.sweep.detuning_half_width_hz || *cfg.sweep.detuning_half_width_hz > 0.0,
          "sweep.detuning_half_width_hz", "must be > 0 or null");
  require(cfg.sweep.detuning_count >= 8, "sweep.detuning_count", "fringe fits need at least 8 points");

  require(cfg.robustness.trials >= 1, "robustness.trials", "must be >= 1");
  require(cfg.robustness.amplitude_fraction >= 0.0, "robustness.amplitude_fraction", "must be >= 0");
  require(cfg.robustness.modes >= 1, "robustness.modes", "must be >= 1");

  for (std::size_t i = 0; i < cfg.adiabaticity_cases.size(); ++i) {
    const auto& c = cfg.adiabaticity_cases[i];
    const std::string path = "adiabaticity.cases[" + std::to_string(i) + "]";
    require(c.delta_tau_s > 0.0, path + ".delta_tau_s", "must be > 0");
    require(c.gap_hz > 0.0, path + ".gap_hz", "must be > 0");
  }

  try {
    cfg.numerics.validate();
  } catch (const Error& e) {
    fail("numerics", e.what());
  }

  if (cfg.experiment == ExperimentKind::kRobustnessSuite) {
    require(cfg.seed.has_value(), "seed", "required for robustness_suite");
    require(s.kind == ScheduleSpecKind::kSmoothReversal, "schedule.kind",
            "robustness_suite perturbs a smooth_reversal path");
  }
  if (cfg.experiment == ExperimentKind::kVisibilitySweep) {
    require(s.kind == ScheduleSpecKind::kSmoothReversal, "schedule.kind",
            "visibility_sweep varies b_min of a smooth_reversal path");
  }
  if (cfg.experiment == ExperimentKind::kReversalPhase) {
    require(s.kind != ScheduleSpecKind::kConstant, "schedule.kind", "reversal_phase needs a reversal schedule");
  }
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  copy.output = OutputConfig{};
  copy.workers = 1;
  return fnv1a64(serialize_config(copy));
}

}  // namespace spinsim
