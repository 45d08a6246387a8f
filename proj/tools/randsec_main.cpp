// randsec: run the experiments of the randsec library from a JSON config.
//
//   randsec equidist --config cfg.json [--seed N] [--workers N] [--out DIR] [--cache DIR]
//   randsec replay --config cfg.json --p 50 --ensemble gaussian --trial 7
//
// Exit status: 0 when every verdict passes, 2 when a verdict fails, 1 on error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "randsec/error.hpp"
#include "randsec/experiments.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::string cache;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "master seed (overrides the config)");
  app->add_option("--workers", o.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app->add_option("--out", o.out, "output directory (overrides the config)");
  app->add_option("--cache", o.cache, "basis cache directory");
}

randsec::ExperimentConfig resolve(const CommonOptions& o) {
  randsec::ExperimentConfig cfg = randsec::load_config(o.config);
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.cache.empty()) cfg.cache_dir = o.cache;
  return cfg;
}

int run(randsec::ExperimentKind kind, const CommonOptions& o) {
  randsec::ExperimentConfig cfg = resolve(o);
  if (cfg.kind != kind) {
    throw randsec::InvalidConfiguration("config describes a '" + randsec::to_string(cfg.kind) +
                                        "' experiment, not '" + randsec::to_string(kind) + "'");
  }
  if (cfg.output_dir.empty()) cfg.output_dir = "randsec_out";
  const randsec::ExperimentReport report = randsec::run_experiment(cfg);
  randsec::write_outputs(report, cfg.output_dir);
  for (const randsec::Verdict& v : report.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
  }
  std::cout << "report: " << (cfg.output_dir / "report.json").string() << " ("
            << report.runtime_seconds << " s)\n";
  return report.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randsec: zeros of random holomorphic sections on P^1"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(RANDSEC_VERSION));

  CommonOptions common;
  struct Sub {
    const char* name;
    const char* help;
    randsec::ExperimentKind kind;
  };
  const Sub subs[] = {
      {"equidist", "zero equidistribution along the p-grid", randsec::ExperimentKind::Equidistribution},
      {"universality", "compare zero statistics across ensembles", randsec::ExperimentKind::Universality},
      {"bergman-diag", "Bergman function vs curvature density", randsec::ExperimentKind::BergmanDiagonal},
      {"bergman-decay", "off-diagonal decay of the Bergman kernel", randsec::ExperimentKind::BergmanDecay},
      {"moments", "log-moment constants of the ensembles", randsec::ExperimentKind::MomentCertify},
  };
  std::vector<std::pair<CLI::App*, randsec::ExperimentKind>> commands;
  for (const Sub& s : subs) {
    CLI::App* c = app.add_subcommand(s.name, s.help);
    add_common(c, common);
    commands.emplace_back(c, s.kind);
  }

  CLI::App* replay = app.add_subcommand("replay", "recompute one trial from its seed chain");
  add_common(replay, common);
  int p = 0;
  std::string ensemble;
  std::optional<int> trial;
  std::optional<std::uint64_t> trial_seed;
  replay->add_option("--p", p, "level p")->required();
  replay->add_option("--ensemble", ensemble, "ensemble name, e.g. gaussian or heavy_tail(rho=4)")->required();
  auto* trial_opt = replay->add_option("--trial", trial, "trial index");
  auto* seed_opt = replay->add_option("--trial-seed", trial_seed, "explicit trial seed");
  trial_opt->excludes(seed_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [cmd, kind] : commands) {
      if (cmd->parsed()) return run(kind, common);
    }
    if (replay->parsed()) {
      if (!trial && !trial_seed) throw randsec::InvalidConfiguration("replay needs --trial or --trial-seed");
      const randsec::ExperimentConfig cfg = resolve(common);
      const randsec::TrialOutcome o =
          trial ? randsec::replay_trial(cfg, p, ensemble, *trial)
                : randsec::replay_seed(cfg, p, ensemble, *trial_seed);
      std::cout << randsec::to_json(o.record).dump() << '\n';
      if (!common.out.empty() && o.zeros) {
        const std::filesystem::path dir(common.out);
        std::filesystem::create_directories(dir);
        const std::string t = trial ? std::to_string(*trial) : "seed" + std::to_string(*trial_seed);
        randsec::write_zero_csv(*o.zeros, dir / ("zeros_p" + std::to_string(p) + "_t" + t + ".csv"));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "randsec: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
