#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spinsim/config.hpp"
#include "spinsim/error.hpp"
#include "spinsim/experiment.hpp"

namespace {

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace spinsim;

  CLI::App app{"Spin-F reversal and Ramsey fringe simulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  app.add_option("--config", config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed for stochastic experiments (overrides seed)");
  app.add_option("--workers", workers, "scan worker threads")->check(CLI::PositiveNumber);

  const std::pair<const char*, ExperimentKind> commands[] = {
      {"rabi", ExperimentKind::kRabi},
      {"ramsey", ExperimentKind::kRamseyScan},
      {"reverse", ExperimentKind::kReversalPhase},
      {"adiabaticity", ExperimentKind::kAdiabaticityReport},
      {"sweep", ExperimentKind::kVisibilitySweep},
      {"robustness", ExperimentKind::kRobustnessSuite},
  };
  const std::pair<const char*, const char*> help[] = {
      {"rabi", "Rabi oscillation scan and frequency fit"},
      {"ramsey", "Ramsey fringe scan, with a constant-bias baseline for reversal schedules"},
      {"reverse", "bare-state reversal phase per F"},
      {"adiabaticity", "adiabaticity ratios and classification"},
      {"sweep", "fringe visibility against minimum field"},
      {"robustness", "seeded perturbed reversal paths"},
  };
  std::optional<ExperimentKind> chosen;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i].second);
    const ExperimentKind kind = commands[i].second;
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    ParseOptions opts;
    opts.experiment = chosen;
    opts.env = environment_overrides();
    if (out_dir) opts.env.emplace_back("SPINSIM_OUTPUT__DIR", json_quote(*out_dir));
    if (seed) opts.env.emplace_back("SPINSIM_SEED", std::to_string(*seed));
    if (workers) opts.env.emplace_back("SPINSIM_WORKERS", std::to_string(*workers));

    const ExperimentConfig cfg = config_path.empty() ? parse_config("{}", opts) : load_config(config_path, opts);
    const RunManifest manifest = run_experiment(cfg);
    std::cout << format_manifest(manifest);
    if (!manifest.fits_converged) {
      std::cerr << "error: at least one fit did not converge\n";
      return 2;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
