#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crpo/env.hpp"
#include "crpo/trainer.hpp"

namespace crpo {

// Everything a run needs: the universe recipe, the training setup, the seed
// list, and output options. Round-trips losslessly through JSON.
struct ExperimentConfig {
  uint64_t universe_seed = 7;
  int num_characters = 4;
  int vocab_size = 64;
  int markers_min = 2;
  int markers_max = 8;
  int num_queries = 10;
  int response_len = 6;
  TrainConfig train;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "out";
  bool log_rollouts = true;
  bool log_advantages = false;
};

std::string config_to_json(const ExperimentConfig& config);
// Rejects unknown keys (naming them) so config typos fail loudly; missing
// keys fall back to the defaults above.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

CharacterUniverse universe_from_config(const ExperimentConfig& config);

struct EvalResult {
  double mean_task = 0.0;
  double mean_style = 0.0;
};

// Fresh rollouts from fixed params, scored against the universe; used for
// the validation pass at the evaluation temperature.
EvalResult evaluate_policy(const PolicyParams& params,
                           const CharacterUniverse& u, double temperature,
                           uint64_t seed, int samples_per_prompt = 16);

// Writers shared between the runner and the tests, so reproducibility can
// be checked on the exact emitted bytes. Floats use the shortest
// round-trippable decimal form (%.17g).
std::string report_csv_text(const TrainReport& report);
std::string kl_control_csv_text(const TrainReport& report);

// Builds the universe, trains every seed, and writes per-seed
// report.csv / kl_control.csv / summary.json (plus rollouts.jsonl and
// advantages.csv when enabled) under out_dir.
void run_experiment(const ExperimentConfig& config);

// Aligns >= 2 run directories produced by run_experiment: per-step
// mean +- std across seeds for each metric, written to out_csv, with a
// final-step delta summary on stdout. Directories must share a universe.
void compare_reports(const std::vector<std::string>& dirs,
                     const std::string& out_csv);

// One training per (value, seed) along the chosen axis. Axes: "anchors",
// "lambda", "gamma", or "mechanism" (full / wo_dual / wo_adaptation /
// wo_anchor). All values are validated before the first run.
void run_ablation(const ExperimentConfig& config, const std::string& axis,
                  const std::vector<std::string>& values,
                  const std::string& out_csv);

// Pretty-prints one group record from a rollouts.jsonl file.
void inspect_rollout(const std::string& jsonl_path, int index);

}  // namespace crpo
