#include <gtest/gtest.h>

#include <random>

#include "spinsim/config.hpp"
#include "spinsim/error.hpp"

using namespace spinsim;

namespace {

std::string config_error(const std::string& text, const ParseOptions& opts = {}) {
  try {
    parse_config(text, opts);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "config accepted: " << text;
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST(Config, MinimalRamseyScanTakesDefaults) {
  const auto cfg = parse_config(R"({"experiment": "ramsey_scan",
    "scan": {"detuning_start_hz": -2000, "detuning_stop_hz": 2000, "detuning_count": 21}})");
  EXPECT_EQ(cfg.experiment, ExperimentKind::kRamseyScan);
  EXPECT_EQ(cfg.scan.detuning_count, 21);
  EXPECT_DOUBLE_EQ(cfg.physics.rabi_hz, 12.2e3);
  EXPECT_DOUBLE_EQ(cfg.physics.interrogation_time_s, 1e-3);
  EXPECT_DOUBLE_EQ(cfg.physics.b0_g, 0.2);
  EXPECT_EQ(cfg.numerics, EvolutionConfig{});
  EXPECT_FALSE(cfg.seed);
}

TEST(Config, NegativeMinimumFieldNamesScheduleConstructor) {
  const auto msg = config_error(R"({"experiment": "ramsey_scan", "schedule": {"b_min_g": "-0.1"}})");
  EXPECT_TRUE(contains(msg, "schedule.b_min_g")) << msg;
  EXPECT_TRUE(contains(msg, "make_smooth_reversal")) << msg;
}

TEST(Config, DuplicateKeysAreRejected) {
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "experiment": "rabi"})"), "experiment: duplicate"));
  const auto msg = config_error(R"({"experiment": "rabi", "physics": {"rabi_hz": 1e4, "rabi_hz": 2e4}})");
  EXPECT_TRUE(contains(msg, "physics.rabi_hz: duplicate key")) << msg;
}

TEST(Config, DistinctDiagnostics) {
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "physics": {"rabi_hx": 1}})"),
                       "physics.rabi_hx: unknown key"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "colour": 1})"), "colour: unknown key"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "physics": {"rabi_hz": true}})"),
                       "physics.rabi_hz: expected a number"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "scan": {"detuning_count": 4.5}})"),
                       "scan.detuning_count: expected an integer"));
  EXPECT_TRUE(contains(config_error(R"({"scan": {}})"), "experiment: required key missing"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "nope"})"), "unknown experiment"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "physics": {"rabi_hz": -5}})"),
                       "physics.rabi_hz: must be > 0"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "physics": {"manifolds": [3]}})"),
                       "physics.manifolds[0]"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "numerics": {"target_error": 0}})"), "numerics"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "schedule": {"kind": "wobbly"}})"),
                       "schedule.kind"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi",)"), "malformed JSON"));
  EXPECT_TRUE(contains(config_error(R"([1, 2])"), "top level"));
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi", "schedule": {"kind": "sampled_trace"}})"),
                       "schedule.trace_path"));
}

TEST(Config, SeedIsMandatoryForRobustness) {
  EXPECT_TRUE(contains(config_error(R"({"experiment": "robustness_suite"})"), "seed: required"));
  const auto cfg = parse_config(R"({"experiment": "robustness_suite", "seed": 17})");
  ASSERT_TRUE(cfg.seed);
  EXPECT_EQ(*cfg.seed, 17u);
  EXPECT_TRUE(contains(config_error(R"({"experiment": "robustness_suite", "seed": -1})"), "seed"));
}

TEST(Config, ExperimentFromCommandLine) {
  ParseOptions opts;
  opts.experiment = ExperimentKind::kRabi;
  EXPECT_EQ(parse_config("{}", opts).experiment, ExperimentKind::kRabi);
  EXPECT_TRUE(contains(config_error(R"({"experiment": "ramsey_scan"})", opts), "was requested"));
}

TEST(Config, EnvironmentOverrides) {
  ParseOptions opts;
  opts.env = {{"SPINSIM_PHYSICS__RABI_HZ", "10000"},
              {"SPINSIM_SCHEDULE__KIND", "sudden_reversal"},
              {"SPINSIM_SEED", "99"},
              {"SPINSIM_OUTPUT__DIR", "results"},
              {"HOME", "/ignored"}};
  const auto cfg = parse_config(R"({"experiment": "ramsey_scan", "physics": {"rabi_hz": 5000}})", opts);
  EXPECT_DOUBLE_EQ(cfg.physics.rabi_hz, 10000.0);
  EXPECT_EQ(cfg.schedule.kind, ScheduleSpecKind::kSuddenReversal);
  EXPECT_EQ(*cfg.seed, 99u);
  EXPECT_EQ(cfg.output.dir, "results");

  ParseOptions bad;
  bad.env = {{"SPINSIM_PHYSICS__RABBI_HZ", "1"}};
  EXPECT_TRUE(contains(config_error(R"({"experiment": "rabi"})", bad), "physics.rabbi_hz: unknown key"));
}

TEST(Config, RoundTripDefaults) {
  for (const auto* kind : {"rabi", "ramsey_scan", "reversal_phase", "adiabaticity_report", "visibility_sweep"}) {
    const auto cfg = parse_config(std::string(R"({"experiment": ")") + kind + "\"}");
    EXPECT_EQ(parse_config(serialize_config(cfg)), cfg) << kind;
  }
}

TEST(Config, RoundTripRandomised) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::kRobustnessSuite;
    cfg.seed = rng();
    cfg.workers = 1 + static_cast<int>(rng() % 8);
    cfg.physics.manifolds = trial % 2 ? std::vector<int>{2} : std::vector<int>{1, 2};
    cfg.physics.rabi_hz = 1e3 + 2e4 * u(rng);
    cfg.physics.detuning_hz = -500.0 + 1000.0 * u(rng);
    cfg.physics.interrogation_time_s = 1e-3 * (1.0 + u(rng));
    cfg.physics.b0_g = 0.05 + u(rng);
    if (trial % 3 == 0) cfg.physics.free_decay_s = 1e-3 + u(rng);
    cfg.schedule.b_min_g = 1e-3 + u(rng) * 0.3;
    cfg.schedule.delta_tau_s = 1e-4 + u(rng) * 3e-3;
    cfg.schedule.guard_s = u(rng) * 1e-4;
    cfg.scan.detuning_start_hz = -1000.0 - 2000.0 * u(rng);
    cfg.scan.detuning_count = 8 + static_cast<int>(rng() % 60);
    cfg.sweep.b_min_list_g = {u(rng) + 1e-3, u(rng) + 1e-3};
    if (trial % 2 == 0) cfg.sweep.detuning_half_width_hz = 100.0 + 900.0 * u(rng);
    cfg.robustness.amplitude_fraction = u(rng) * 0.3;
    cfg.adiabaticity_cases.push_back({"extra \"quoted\"", u(rng), 1.0 + u(rng) * 1e5});
    cfg.numerics.target_error = 1e-10 + u(rng) * 1e-8;
    cfg.numerics.dt_init = 1e-9 + u(rng) * 1e-8;
    cfg.output.dir = "out/" + std::to_string(trial);
    validate_config(cfg);
    EXPECT_EQ(parse_config(serialize_config(cfg)), cfg) << serialize_config(cfg);
  }
}

TEST(Config, HashTracksPhysicsAndNumericsOnly) {
  const ExperimentConfig base = parse_config(R"({"experiment": "ramsey_scan"})");
  const auto h = config_hash(base);
  ExperimentConfig same = base;
  same.output.dir = "elsewhere";
  same.workers = 7;
  EXPECT_EQ(config_hash(same), h);

  std::vector<std::function<void(ExperimentConfig&)>> edits{
      [](ExperimentConfig& c) { c.physics.rabi_hz *= 1.0 + 1e-15; },
      [](ExperimentConfig& c) { c.physics.detuning_hz = 1.0; },
      [](ExperimentConfig& c) { c.physics.interrogation_time_s = 2e-3; },
      [](ExperimentConfig& c) { c.physics.b0_g = 0.3; },
      [](ExperimentConfig& c) { c.physics.gamma_f1_hz_per_g = -0.6996e6; },
      [](ExperimentConfig& c) { c.physics.manifolds = {1}; },
      [](ExperimentConfig& c) { c.physics.free_decay_s = kFreeDecaySeconds; },
      [](ExperimentConfig& c) { c.schedule.b_min_g = 0.02; },
      [](ExperimentConfig& c) { c.schedule.guard_s = 0.0; },
      [](ExperimentConfig& c) { c.scan.detuning_count = 43; },
      [](ExperimentConfig& c) { c.sweep.b_min_list_g.push_back(0.1); },
      [](ExperimentConfig& c) { c.robustness.modes = 2; },
      [](ExperimentConfig& c) { c.numerics.target_error = 1e-10; },
      [](ExperimentConfig& c) { c.numerics.dt_max = 1e-6; },
      [](ExperimentConfig& c) { c.numerics.record_interval = 1e-5; },
  };
  for (std::size_t i = 0; i < edits.size(); ++i) {
    ExperimentConfig c = base;
    edits[i](c);
    EXPECT_NE(config_hash(c), h) << "edit " << i;
  }
}

#ifdef SPINSIM_CONFIG_DIR
#include <filesystem>

TEST(Config, ShippedExamplesValidate) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SPINSIM_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++n;
    EXPECT_NO_THROW(validate_config(load_config(entry.path().string()))) << entry.path();
  }
  EXPECT_GE(n, 6);
}
#endif
