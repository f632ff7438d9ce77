#include "crpo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "crpo/rng.hpp"
#include "crpo/sampler.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace crpo {
namespace {

constexpr uint64_t kEvalTag = 0x6576616cULL;

// Shortest exact decimal form, so identical doubles give identical bytes.
std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument("unknown config key '" + item.key() +
                                  "' in " + where);
}

template <typename T>
void maybe_get(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

json train_to_json(const TrainConfig& t) {
  return json{{"algorithm", algorithm_name(t.algorithm)},
              {"group_size", t.group_size},
              {"lambda", t.lambda},
              {"gamma", t.gate.gamma},
              {"k_p", t.gate.k_p},
              {"delta_bound", t.gate.delta_bound},
              {"d_base", t.gate.d_base},
              {"clamp_min", t.gate.clamp_min},
              {"clamp_max", t.gate.clamp_max},
              {"clip_eps", t.clip_eps},
              {"lr", t.lr},
              {"steps", t.steps},
              {"rollout_batch", t.rollout_batch},
              {"anchors_per_group", t.anchors_per_group},
              {"eps", t.eps},
              {"ema_decay", t.ema_decay},
              {"temperature_train", t.temperature_train},
              {"temperature_val", t.temperature_val},
              {"beta_init", t.beta_init},
              {"init_peak", t.init_peak},
              {"dual_stream", t.dual_stream},
              {"entropy_gating", t.entropy_gating},
              {"adaptive_kl_target", t.adaptive_kl_target},
              {"anchor_renorm", t.anchor_renorm},
              {"kl_controller", t.kl_controller},
              {"train_on_anchor", t.train_on_anchor},
              {"advantage_reshaping_threshold",
               t.advantage_reshaping_threshold},
              {"boosting_coefficient", t.boosting_coefficient}};
}

TrainConfig train_from_json(const json& j) {
  reject_unknown_keys(
      j,
      {"algorithm", "group_size", "lambda", "gamma", "k_p", "delta_bound",
       "d_base", "clamp_min", "clamp_max", "clip_eps", "lr", "steps",
       "rollout_batch", "anchors_per_group", "eps", "ema_decay",
       "temperature_train", "temperature_val", "beta_init", "init_peak",
       "dual_stream", "entropy_gating", "adaptive_kl_target", "anchor_renorm",
       "kl_controller", "train_on_anchor", "advantage_reshaping_threshold",
       "boosting_coefficient"},
      "train");
  TrainConfig t;
  if (j.contains("algorithm"))
    t.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  maybe_get(j, "group_size", &t.group_size);
  maybe_get(j, "lambda", &t.lambda);
  maybe_get(j, "gamma", &t.gate.gamma);
  maybe_get(j, "k_p", &t.gate.k_p);
  maybe_get(j, "delta_bound", &t.gate.delta_bound);
  maybe_get(j, "d_base", &t.gate.d_base);
  maybe_get(j, "clamp_min", &t.gate.clamp_min);
  maybe_get(j, "clamp_max", &t.gate.clamp_max);
  maybe_get(j, "clip_eps", &t.clip_eps);
  maybe_get(j, "lr", &t.lr);
  maybe_get(j, "steps", &t.steps);
  maybe_get(j, "rollout_batch", &t.rollout_batch);
  maybe_get(j, "anchors_per_group", &t.anchors_per_group);
  maybe_get(j, "eps", &t.eps);
  maybe_get(j, "ema_decay", &t.ema_decay);
  maybe_get(j, "temperature_train", &t.temperature_train);
  maybe_get(j, "temperature_val", &t.temperature_val);
  maybe_get(j, "beta_init", &t.beta_init);
  maybe_get(j, "init_peak", &t.init_peak);
  maybe_get(j, "dual_stream", &t.dual_stream);
  maybe_get(j, "entropy_gating", &t.entropy_gating);
  maybe_get(j, "adaptive_kl_target", &t.adaptive_kl_target);
  maybe_get(j, "anchor_renorm", &t.anchor_renorm);
  maybe_get(j, "kl_controller", &t.kl_controller);
  maybe_get(j, "train_on_anchor", &t.train_on_anchor);
  maybe_get(j, "advantage_reshaping_threshold",
            &t.advantage_reshaping_threshold);
  maybe_get(j, "boosting_coefficient", &t.boosting_coefficient);
  return t;
}

std::string sanitize_label(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out.empty() ? std::string("dir") : out;
}

struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("missing CSV column " + name);
    return static_cast<int>(it - header.begin());
  }
};

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv csv;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      csv.header = cells;
      first = false;
    } else {
      std::vector<double> row;
      row.reserve(cells.size());
      for (const auto& c : cells) row.push_back(std::stod(c));
      csv.rows.push_back(std::move(row));
    }
  }
  return csv;
}

// One run directory as produced by run_experiment.
struct RunDir {
  std::string label;
  std::string algorithm;
  uint64_t universe_checksum = 0;
  std::vector<ParsedCsv> seed_reports;
};

RunDir load_run_dir(const std::string& dir) {
  RunDir run;
  run.label = sanitize_label(
      fs::path(dir).filename().empty()
          ? fs::path(dir).parent_path().filename().string()
          : fs::path(dir).filename().string());
  CharacterUniverse u = load_universe((fs::path(dir) / "universe.json").string());
  run.universe_checksum = universe_checksum(u);
  json echo = json::parse(
      read_text_file((fs::path(dir) / "config_echo.json").string()));
  run.algorithm = echo.at("train").at("algorithm").get<std::string>();

  std::vector<std::string> seed_dirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() &&
        entry.path().filename().string().rfind("seed_", 0) == 0)
      seed_dirs.push_back(entry.path().string());
  std::sort(seed_dirs.begin(), seed_dirs.end());
  for (const auto& sd : seed_dirs)
    run.seed_reports.push_back(
        parse_csv(read_text_file((fs::path(sd) / "report.csv").string())));
  if (run.seed_reports.empty())
    throw std::runtime_error("no seed_* reports under " + dir);
  return run;
}

void mean_std_across(const std::vector<double>& xs, double* mean,
                     double* sd) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  *mean = m;
  *sd = std::sqrt(v / xs.size());
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
  json j;
  j["universe"] = {{"seed", config.universe_seed},
                   {"num_characters", config.num_characters},
                   {"vocab_size", config.vocab_size},
                   {"markers_min", config.markers_min},
                   {"markers_max", config.markers_max},
                   {"num_queries", config.num_queries},
                   {"response_len", config.response_len}};
  j["train"] = train_to_json(config.train);
  j["seeds"] = config.seeds;
  j["out_dir"] = config.out_dir;
  j["log_rollouts"] = config.log_rollouts;
  j["log_advantages"] = config.log_advantages;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  reject_unknown_keys(
      j, {"universe", "train", "seeds", "out_dir", "log_rollouts",
          "log_advantages"},
      "config");
  ExperimentConfig c;
  if (j.contains("universe")) {
    const json& u = j.at("universe");
    reject_unknown_keys(u,
                        {"seed", "num_characters", "vocab_size", "markers_min",
                         "markers_max", "num_queries", "response_len"},
                        "universe");
    maybe_get(u, "seed", &c.universe_seed);
    maybe_get(u, "num_characters", &c.num_characters);
    maybe_get(u, "vocab_size", &c.vocab_size);
    maybe_get(u, "markers_min", &c.markers_min);
    maybe_get(u, "markers_max", &c.markers_max);
    maybe_get(u, "num_queries", &c.num_queries);
    maybe_get(u, "response_len", &c.response_len);
  }
  if (j.contains("train")) c.train = train_from_json(j.at("train"));
  maybe_get(j, "seeds", &c.seeds);
  maybe_get(j, "out_dir", &c.out_dir);
  maybe_get(j, "log_rollouts", &c.log_rollouts);
  maybe_get(j, "log_advantages", &c.log_advantages);
  if (c.seeds.empty()) throw std::invalid_argument("seeds must be non-empty");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_json(read_text_file(path));
}

CharacterUniverse universe_from_config(const ExperimentConfig& config) {
  return build_universe(config.universe_seed, config.num_characters,
                        config.vocab_size,
                        MarkerRange{config.markers_min, config.markers_max},
                        config.num_queries, config.response_len);
}

EvalResult evaluate_policy(const PolicyParams& params,
                           const CharacterUniverse& u, double temperature,
                           uint64_t seed, int samples_per_prompt) {
  EvalResult r;
  int n = 0;
  for (int c = 1; c < u.num_characters(); ++c) {
    for (int q = 0; q < u.num_queries(); ++q) {
      Prompt p{c, q, false};
      uint64_t key = (static_cast<uint64_t>(c) << 32) |
                     static_cast<uint32_t>(q);
      RngStream rng(mix_seed(mix_seed(seed, kEvalTag), key));
      for (int i = 0; i < samples_per_prompt; ++i) {
        TrajectorySample s = sample_response(params, p, rng, temperature);
        r.mean_task += task_reward(s, u);
        r.mean_style += style_reward(s, u);
        ++n;
      }
    }
  }
  r.mean_task /= n;
  r.mean_style /= n;
  return r;
}

std::string report_csv_text(const TrainReport& report) {
  const int num_chars = static_cast<int>(report.kl_states.size());
  std::string text = "step,mean_task,mean_style,mean_h_id,mean_style_anchor";
  for (int c = 1; c < num_chars; ++c) text += ",d_kl_c" + std::to_string(c);
  for (int c = 1; c < num_chars; ++c) text += ",beta_c" + std::to_string(c);
  text += "\n";
  for (const StepMetrics& m : report.history) {
    text += std::to_string(m.step);
    text += "," + g17(m.mean_task) + "," + g17(m.mean_style) + "," +
            g17(m.mean_h_id) + "," + g17(m.mean_style_anchor);
    for (int c = 1; c < num_chars; ++c) text += "," + g17(m.d_kl[c]);
    for (int c = 1; c < num_chars; ++c) text += "," + g17(m.beta[c]);
    text += "\n";
  }
  return text;
}

std::string kl_control_csv_text(const TrainReport& report) {
  const int num_chars = static_cast<int>(report.kl_states.size());
  std::string text = "step,character,h_c,r_h,d_targ,d_kl_observed,beta\n";
  for (const StepMetrics& m : report.history) {
    for (int c = 1; c < num_chars; ++c) {
      const CharacterKLState& st = report.kl_states[c];
      text += std::to_string(m.step) + "," + std::to_string(c) + "," +
              g17(st.h_c) + "," + g17(st.r_h) + "," + g17(st.d_targ) + "," +
              g17(m.d_kl[c]) + "," + g17(m.beta[c]) + "\n";
    }
  }
  return text;
}

namespace {

json summary_json(const ExperimentConfig& config, const TrainReport& report,
                  const CharacterUniverse& u, uint64_t seed) {
  json s;
  s["algorithm"] = algorithm_name(config.train.algorithm);
  s["seed"] = seed;
  s["steps"] = config.train.steps;
  s["universe_checksum"] = universe_checksum(u);
  s["params_checksum"] = report.params_checksum;
  s["h_global"] = report.h_global;
  json fin;
  if (!report.history.empty()) {
    const StepMetrics& m = report.history.back();
    fin = {{"mean_task", m.mean_task},
           {"mean_style", m.mean_style},
           {"mean_h_id", m.mean_h_id},
           {"mean_style_anchor", m.mean_style_anchor}};
  }
  s["final"] = fin;
  EvalResult val = evaluate_policy(report.params, u,
                                   config.train.temperature_val, seed);
  s["validation"] = {{"mean_task", val.mean_task},
                     {"mean_style", val.mean_style}};
  json chars = json::array();
  for (size_t c = 1; c < report.kl_states.size(); ++c) {
    const CharacterKLState& st = report.kl_states[c];
    json jc = {{"id", c},       {"h_c", st.h_c},       {"r_h", st.r_h},
               {"d_targ", st.d_targ}, {"beta", st.beta}};
    if (!report.history.empty())
      jc["d_kl"] = report.history.back().d_kl[c];
    chars.push_back(jc);
  }
  s["characters"] = chars;
  return s;
}

json group_record(int step, const SampleGroup& g) {
  json members = json::array();
  for (size_t i = 0; i < g.members.size(); ++i) {
    const TrajectorySample& s = g.members[i];
    members.push_back({{"tokens", s.tokens},
                       {"logp", s.logp_old},
                       {"r_task", g.rewards[i].r_task},
                       {"r_style", g.rewards[i].r_style},
                       {"is_anchor", s.is_anchor}});
  }
  return json{{"step", step},
              {"character", g.prompt.character_id},
              {"query", g.prompt.query_id},
              {"anchor_index", g.anchor_index},
              {"members", members}};
}

}  // namespace

void run_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.train = canonical_config(cfg.train);
  CharacterUniverse u = universe_from_config(cfg);

  fs::create_directories(cfg.out_dir);
  save_universe(u, (fs::path(cfg.out_dir) / "universe.json").string());
  write_text_file((fs::path(cfg.out_dir) / "config_echo.json").string(),
                  config_to_json(cfg) + "\n");

  for (uint64_t seed : cfg.seeds) {
    fs::path seed_dir =
        fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);

    TrainConfig tc = cfg.train;
    tc.seed = seed;

    std::ofstream rollout_out;
    std::ofstream adv_out;
    TrainHooks hooks;
    if (cfg.log_rollouts) {
      rollout_out.open(seed_dir / "rollouts.jsonl", std::ios::binary);
      hooks.on_group = [&rollout_out](int step, const SampleGroup& g) {
        rollout_out << group_record(step, g).dump() << "\n";
      };
    }
    if (cfg.log_advantages) {
      adv_out.open(seed_dir / "advantages.csv", std::ios::binary);
      adv_out << "step,character,a_task,a_style,a_combined,h_id,a_gated\n";
      hooks.on_advantage = [&adv_out](int step, int character,
                                      const AdvantageRecord& r) {
        adv_out << step << ',' << character << ',' << g17(r.a_task) << ','
                << g17(r.a_style) << ',' << g17(r.a_combined) << ','
                << g17(r.h_id) << ',' << g17(r.a_gated) << "\n";
      };
    }

    TrainReport report = train(u, tc, hooks);
    write_text_file((seed_dir / "report.csv").string(),
                    report_csv_text(report));
    write_text_file((seed_dir / "kl_control.csv").string(),
                    kl_control_csv_text(report));
    ExperimentConfig echo = cfg;
    echo.train = tc;
    write_text_file((seed_dir / "summary.json").string(),
                    summary_json(echo, report, u, seed).dump(2) + "\n");
  }
}

void compare_reports(const std::vector<std::string>& dirs,
                     const std::string& out_csv) {
  if (dirs.size() < 2)
    throw std::invalid_argument("need >= 2 report directories to compare");
  std::vector<RunDir> runs;
  runs.reserve(dirs.size());
  for (const auto& d : dirs) runs.push_back(load_run_dir(d));
  for (size_t i = 1; i < runs.size(); ++i)
    if (runs[i].universe_checksum != runs[0].universe_checksum)
      throw std::runtime_error(
          "universe checksum mismatch: " +
          std::to_string(runs[0].universe_checksum) + " vs " +
          std::to_string(runs[i].universe_checksum));

  size_t steps = runs[0].seed_reports[0].rows.size();
  for (const auto& run : runs)
    for (const auto& rep : run.seed_reports)
      if (rep.rows.size() != steps)
        throw std::runtime_error("report step counts differ across runs");

  const std::vector<std::pair<std::string, std::string>> metrics = {
      {"mean_task", "task"}, {"mean_style", "style"}, {"mean_h_id", "h_id"}};

  std::string text = "step";
  for (const auto& run : runs)
    for (const auto& [col, shortname] : metrics)
      text += "," + run.label + "_" + shortname + "_mean," + run.label + "_" +
              shortname + "_std";
  text += "\n";

  // per run and metric: across-seed mean and std for every step
  std::vector<std::vector<std::vector<std::pair<double, double>>>> agg(
      runs.size());
  for (size_t ri = 0; ri < runs.size(); ++ri) {
    agg[ri].resize(metrics.size());
    for (size_t mi = 0; mi < metrics.size(); ++mi) {
      int col = runs[ri].seed_reports[0].column(metrics[mi].first);
      agg[ri][mi].resize(steps);
      for (size_t s = 0; s < steps; ++s) {
        std::vector<double> xs;
        for (const auto& rep : runs[ri].seed_reports)
          xs.push_back(rep.rows[s][col]);
        mean_std_across(xs, &agg[ri][mi][s].first, &agg[ri][mi][s].second);
      }
    }
  }
  for (size_t s = 0; s < steps; ++s) {
    text += std::to_string(s);
    for (size_t ri = 0; ri < runs.size(); ++ri)
      for (size_t mi = 0; mi < metrics.size(); ++mi)
        text += "," + g17(agg[ri][mi][s].first) + "," +
                g17(agg[ri][mi][s].second);
    text += "\n";
  }
  write_text_file(out_csv, text);

  std::cout << "compared " << runs.size() << " runs over " << steps
            << " steps\n";
  if (steps > 0) {
    for (size_t ri = 0; ri < runs.size(); ++ri) {
      std::printf("  %-20s (%s): final style %.4f +- %.4f, task %.4f +- %.4f\n",
                  runs[ri].label.c_str(), runs[ri].algorithm.c_str(),
                  agg[ri][1][steps - 1].first, agg[ri][1][steps - 1].second,
                  agg[ri][0][steps - 1].first, agg[ri][0][steps - 1].second);
    }
    for (size_t ri = 1; ri < runs.size(); ++ri) {
      std::printf("  delta %s - %s: style %+.4f, task %+.4f\n",
                  runs[ri].label.c_str(), runs[0].label.c_str(),
                  agg[ri][1][steps - 1].first - agg[0][1][steps - 1].first,
                  agg[ri][0][steps - 1].first - agg[0][0][steps - 1].first);
    }
  }
  std::cout << "wrote " << out_csv << "\n";
}

void run_ablation(const ExperimentConfig& config, const std::string& axis,
                  const std::vector<std::string>& values,
                  const std::string& out_csv) {
  if (values.empty()) throw std::invalid_argument("empty ablation value list");

  // validate everything up front; no run starts on a bad value
  std::vector<std::function<void(TrainConfig&)>> appliers;
  for (const std::string& v : values) {
    if (axis == "anchors" || axis == "anchors_per_group") {
      int n = std::stoi(v);
      if (n < 0 || n >= config.train.group_size)
        throw std::invalid_argument("anchors value out of range: " + v);
      appliers.push_back([n](TrainConfig& t) { t.anchors_per_group = n; });
    } else if (axis == "lambda") {
      double x = std::stod(v);
      if (x < 0.0 || x > 1.0)
        throw std::invalid_argument("lambda value out of range: " + v);
      appliers.push_back([x](TrainConfig& t) { t.lambda = x; });
    } else if (axis == "gamma") {
      double x = std::stod(v);
      if (x < 0.0 || x > 1.0)
        throw std::invalid_argument("gamma value out of range: " + v);
      appliers.push_back([x](TrainConfig& t) { t.gate.gamma = x; });
    } else if (axis == "mechanism") {
      if (v == "full") {
        appliers.push_back([](TrainConfig&) {});
      } else if (v == "wo_dual") {
        appliers.push_back([](TrainConfig& t) { t.dual_stream = false; });
      } else if (v == "wo_adaptation") {
        appliers.push_back([](TrainConfig& t) {
          t.entropy_gating = false;
          t.adaptive_kl_target = false;
        });
      } else if (v == "wo_anchor") {
        appliers.push_back([](TrainConfig& t) {
          t.anchors_per_group = 0;
          t.anchor_renorm = false;
        });
      } else {
        throw std::invalid_argument("unknown mechanism value: " + v);
      }
    } else {
      throw std::invalid_argument(
          "unknown ablation axis: " + axis +
          " (expected anchors, lambda, gamma, or mechanism)");
    }
  }

  CharacterUniverse u = universe_from_config(config);
  std::string text = "axis,value,seed,final_task,final_style,final_h_id\n";
  for (size_t vi = 0; vi < values.size(); ++vi) {
    std::vector<double> styles;
    for (uint64_t seed : config.seeds) {
      TrainConfig tc = config.train;
      appliers[vi](tc);
      tc.seed = seed;
      TrainReport report = train(u, tc);
      double ft = 0.0, fsy = 0.0, fh = 0.0;
      if (!report.history.empty()) {
        ft = report.history.back().mean_task;
        fsy = report.history.back().mean_style;
        fh = report.history.back().mean_h_id;
      }
      styles.push_back(fsy);
      text += axis + "," + values[vi] + "," + std::to_string(seed) + "," +
              g17(ft) + "," + g17(fsy) + "," + g17(fh) + "\n";
    }
    double m = 0.0, sd = 0.0;
    mean_std_across(styles, &m, &sd);
    std::printf("  %s = %-14s final style %.4f +- %.4f over %zu seeds\n",
                axis.c_str(), values[vi].c_str(), m, sd, styles.size());
  }
  write_text_file(out_csv, text);
  std::cout << "wrote " << out_csv << "\n";
}

void inspect_rollout(const std::string& jsonl_path, int index) {
  std::ifstream in(jsonl_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + jsonl_path);
  std::string line;
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (seen++ == index) {
      json g = json::parse(line);
      std::printf("group %d: step %d, character %d, query %d\n", index,
                  g.at("step").get<int>(), g.at("character").get<int>(),
                  g.at("query").get<int>());
      int anchor_index = g.at("anchor_index").get<int>();
      const json& members = g.at("members");
      for (size_t i = 0; i < members.size(); ++i) {
        const json& m = members[i];
        double logp = 0.0;
        for (double lp : m.at("logp")) logp += lp;
        std::string toks;
        for (int t : m.at("tokens")) toks += std::to_string(t) + " ";
        std::printf("  [%zu]%s tokens [%s] r_task %.3f r_style %.3f logp %.3f\n",
                    i,
                    static_cast<int>(i) >= anchor_index && anchor_index >= 0
                        ? " anchor"
                        : "",
                    toks.substr(0, toks.size() - 1).c_str(),
                    m.at("r_task").get<double>(),
                    m.at("r_style").get<double>(), logp);
      }
      return;
    }
  }
  throw std::runtime_error("rollout index out of range: file has " +
                           std::to_string(seen) + " records");
}

}  // namespace crpo
