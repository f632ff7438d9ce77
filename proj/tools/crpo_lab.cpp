#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crpo/experiment.hpp"

namespace {

// CRPO_LAB_SEED wins over --seed, which wins over the config's seed list.
void apply_seed_overrides(crpo::ExperimentConfig& cfg, bool flag_given,
                          uint64_t flag_seed) {
  if (flag_given) cfg.seeds = {flag_seed};
  if (const char* env = std::getenv("CRPO_LAB_SEED"))
    cfg.seeds = {std::stoull(env)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crpo_lab: desk-scale character role-play RL laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  std::string algorithm;
  int anchors = 0;
  double lambda = 0.0, gamma = 0.0;
  std::string out;
  bool dry_run = false;

  CLI::App* run = app.add_subcommand("run", "train and write per-seed reports");
  run->add_option("--config", config_path, "experiment config (JSON)");
  CLI::Option* o_seed =
      run->add_option("--seed", seed, "replace the config's seed list");
  CLI::Option* o_algo =
      run->add_option("--algorithm", algorithm, "crpo or grpo");
  CLI::Option* o_anchors =
      run->add_option("--anchors", anchors, "anchors per group");
  CLI::Option* o_lambda =
      run->add_option("--lambda", lambda, "task/style balance");
  CLI::Option* o_gamma =
      run->add_option("--gamma", gamma, "entropy suppression coefficient");
  CLI::Option* o_out = run->add_option("--out", out, "output directory");
  run->add_flag("--dry-run", dry_run,
                "validate and print the resolved config, do not train");

  std::vector<std::string> dirs;
  std::string compare_out = "compare.csv";
  CLI::App* compare =
      app.add_subcommand("compare", "align metrics across run directories");
  compare->add_option("dirs", dirs, "run directories")->required();
  compare->add_option("--out", compare_out, "comparison CSV path");

  std::string axis;
  std::vector<std::string> values;
  std::string sweep_out = "sweep.csv";
  std::string ab_config_path;
  uint64_t ab_seed = 0;
  CLI::App* ablate =
      app.add_subcommand("ablate", "sweep one axis or disable mechanisms");
  ablate->add_option("--config", ab_config_path, "experiment config (JSON)");
  ablate->add_option("--axis", axis,
                     "anchors, lambda, gamma, or mechanism")
      ->required();
  ablate->add_option("--values", values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  CLI::Option* o_ab_seed =
      ablate->add_option("--seed", ab_seed, "replace the config's seed list");
  ablate->add_option("--out", sweep_out, "sweep CSV path");

  std::string rollout_path;
  int index = 0;
  CLI::App* inspect =
      app.add_subcommand("inspect", "pretty-print one rollout group");
  inspect->add_option("file", rollout_path, "rollouts.jsonl path")->required();
  inspect->add_option("--index", index, "group record index");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      crpo::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = crpo::load_config(config_path);
      apply_seed_overrides(cfg, o_seed->count() > 0, seed);
      if (o_algo->count())
        cfg.train.algorithm = crpo::algorithm_from_name(algorithm);
      if (o_anchors->count()) cfg.train.anchors_per_group = anchors;
      if (o_lambda->count()) cfg.train.lambda = lambda;
      if (o_gamma->count()) cfg.train.gate.gamma = gamma;
      if (o_out->count()) cfg.out_dir = out;

      cfg.train = crpo::canonical_config(cfg.train);
      crpo::universe_from_config(cfg);  // validates universe parameters
      if (dry_run) {
        std::cout << crpo::config_to_json(cfg) << "\n";
        return 0;
      }
      crpo::run_experiment(cfg);
      std::cout << "wrote " << cfg.out_dir << " for " << cfg.seeds.size()
                << " seed(s)\n";
    } else if (compare->parsed()) {
      crpo::compare_reports(dirs, compare_out);
    } else if (ablate->parsed()) {
      crpo::ExperimentConfig cfg;
      if (!ab_config_path.empty()) cfg = crpo::load_config(ab_config_path);
      apply_seed_overrides(cfg, o_ab_seed->count() > 0, ab_seed);
      crpo::run_ablation(cfg, axis, values, sweep_out);
    } else if (inspect->parsed()) {
      crpo::inspect_rollout(rollout_path, index);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
