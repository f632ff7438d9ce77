#include "crpo/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "crpo/rng.hpp"

namespace crpo {
namespace {

constexpr uint64_t kColdStartTag = 0x636f6c64;  // pre-training EMA rollout
constexpr double kExpClamp = 50.0;

double clamped_exp(double x) {
  return std::exp(std::clamp(x, -kExpClamp, kExpClamp));
}

std::vector<Prompt> prompts_for_character(const CharacterUniverse& u, int c) {
  std::vector<Prompt> out;
  out.reserve(u.num_queries());
  for (int q = 0; q < u.num_queries(); ++q)
    out.push_back(Prompt{c, q, false});
  return out;
}

// Training sweeps every non-generic character prompt.
std::vector<Prompt> training_prompts(const CharacterUniverse& u) {
  std::vector<Prompt> out;
  for (int c = 1; c < u.num_characters(); ++c)
    for (int q = 0; q < u.num_queries(); ++q)
      out.push_back(Prompt{c, q, false});
  return out;
}

// Rotating contiguous window when a sub-batch is configured.
std::vector<Prompt> select_batch(const std::vector<Prompt>& all, int step,
                                 int batch) {
  if (batch <= 0 || batch >= static_cast<int>(all.size())) return all;
  std::vector<Prompt> out;
  out.reserve(batch);
  size_t start = (static_cast<size_t>(step) * batch) % all.size();
  for (int i = 0; i < batch; ++i)
    out.push_back(all[(start + i) % all.size()]);
  return out;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  return a == Algorithm::CRPO ? "crpo" : "grpo";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "crpo") return Algorithm::CRPO;
  if (name == "grpo") return Algorithm::GRPO;
  throw std::invalid_argument("algorithm must be 'crpo' or 'grpo', got '" +
                              name + "'");
}

TrainConfig canonical_config(const TrainConfig& config) {
  TrainConfig c = config;
  if (c.algorithm == Algorithm::GRPO) {
    c.dual_stream = false;
    c.entropy_gating = false;
    c.adaptive_kl_target = false;
    c.anchor_renorm = false;
    c.kl_controller = false;
    c.anchors_per_group = 0;
  }
  if (c.group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (c.anchors_per_group < 0 || c.anchors_per_group >= c.group_size)
    throw std::invalid_argument("anchors_per_group must be in [0, group_size)");
  if (c.lambda < 0.0 || c.lambda > 1.0)
    throw std::invalid_argument("lambda must be in [0, 1]");
  if (c.clip_eps <= 0.0 || c.clip_eps >= 1.0)
    throw std::invalid_argument("clip_eps must be in (0, 1)");
  if (c.lr <= 0.0) throw std::invalid_argument("lr must be positive");
  if (c.steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (c.eps <= 0.0) throw std::invalid_argument("eps must be positive");
  if (c.ema_decay <= 0.0 || c.ema_decay >= 1.0)
    throw std::invalid_argument("ema_decay must be in (0, 1)");
  if (c.temperature_train <= 0.0 || c.temperature_val <= 0.0)
    throw std::invalid_argument("temperatures must be positive");
  if (c.beta_init <= 0.0) throw std::invalid_argument("beta_init must be positive");
  if (c.gate.gamma < 0.0 || c.gate.gamma > 1.0)
    throw std::invalid_argument("gamma must be in [0, 1]");
  if (c.gate.d_base <= 0.0) throw std::invalid_argument("d_base must be positive");
  if (c.gate.clamp_min <= 0.0 || c.gate.clamp_min > c.gate.clamp_max)
    throw std::invalid_argument("clamp bounds must satisfy 0 < min <= max");
  return c;
}

double importance_ratio(double logp_new, double logp_old) {
  if (!std::isfinite(logp_new) || !std::isfinite(logp_old))
    throw std::invalid_argument("non-finite log-probability");
  return clamped_exp(logp_new - logp_old);
}

double clipped_term(double rho, double a, double clip_eps) {
  double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(rho * a, clipped * a);
}

double kl_penalty_estimate(double logp_theta, double logp_ref) {
  if (!std::isfinite(logp_theta) || !std::isfinite(logp_ref))
    throw std::invalid_argument("non-finite log-probability");
  double log_r = std::clamp(logp_ref - logp_theta, -kExpClamp, kExpClamp);
  return std::exp(log_r) - log_r - 1.0;
}

std::vector<AdvantageRecord> group_advantages(const SampleGroup& group,
                                              const CharacterStyleStats& stats,
                                              const PolicyParams& params,
                                              const TrainConfig& config) {
  const size_t n = group.members.size();
  if (group.rewards.size() != n)
    throw std::logic_error("group has no rewards attached");
  std::vector<AdvantageRecord> records(n);

  if (config.dual_stream) {
    std::vector<double> a_task = task_advantage(group, config.eps);
    std::vector<double> a_style =
        style_advantage_global(group, stats, config.eps);
    if (config.anchor_renorm && group.anchor_index >= 0)
      a_style = style_advantage_renorm(a_style, config.eps);
    for (size_t i = 0; i < n; ++i) {
      records[i].a_task = a_task[i];
      records[i].a_style = a_style[i];
      records[i].a_combined = combine(a_task[i], a_style[i], config.lambda);
    }
  } else {
    // single-stream baseline: one relative normalization of the summed reward
    std::vector<double> total(n);
    for (size_t i = 0; i < n; ++i)
      total[i] = group.rewards[i].r_task + group.rewards[i].r_style;
    std::vector<double> adv = grpo_advantage(total, config.eps);
    for (size_t i = 0; i < n; ++i) {
      records[i].a_task = adv[i];
      records[i].a_style = adv[i];
      records[i].a_combined = adv[i];
    }
  }

  double gamma = config.entropy_gating ? config.gate.gamma : 0.0;
  if (group.anchor_index >= 0) {
    const TrajectorySample& anchor = group.members[group.anchor_index];
    // both confidences under the character prompt and the current policy
    double logp_anchor = log_prob(params, group.prompt, anchor.tokens);
    for (size_t i = 0; i < n; ++i) {
      double logp_y = log_prob(params, group.prompt, group.members[i].tokens);
      records[i].h_id =
          identification_entropy(identification_ratio(logp_y, logp_anchor));
    }
  }
  for (auto& r : records) r.a_gated = gate_advantage(r.a_combined, r.h_id, gamma);
  return records;
}

namespace {

// Shared walk for objective_value / objective_gradient so the finite
// difference of the former is exactly the latter.
double accumulate_objective(
    std::span<const SampleGroup> groups,
    std::span<const std::vector<AdvantageRecord>> records,
    const PolicyParams& params, const PolicyParams& ref_params,
    std::span<const CharacterKLState> kl_states, const TrainConfig& config,
    std::vector<double>* grad) {
  if (records.size() != groups.size())
    throw std::invalid_argument("records do not match groups");
  if (grad) grad->assign(params.logits.size(), 0.0);

  double value = 0.0;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const SampleGroup& group = groups[gi];
    if (records[gi].size() != group.members.size())
      throw std::invalid_argument("records do not match group members");
    double beta = kl_states[group.prompt.character_id].beta;
    double inv_g = 1.0 / group.members.size();

    for (size_t i = 0; i < group.members.size(); ++i) {
      const TrajectorySample& s = group.members[i];
      if (s.is_anchor && !config.train_on_anchor) continue;
      Prompt gen = generation_prompt(s);
      double lp_new =
          log_prob(params, gen, s.tokens, config.temperature_train);
      double lp_ref =
          log_prob(ref_params, gen, s.tokens, config.temperature_train);
      double rho = importance_ratio(lp_new, logp_old_sum(s));
      double a = records[gi][i].a_gated;

      double unclipped = rho * a;
      double surrogate = std::min(
          unclipped,
          std::clamp(rho, 1.0 - config.clip_eps, 1.0 + config.clip_eps) * a);
      double k3 = kl_penalty_estimate(lp_new, lp_ref);
      value += inv_g * (surrogate - beta * k3);

      if (grad) {
        // when the min selects the clipped branch the surrogate is locally
        // constant in params; ties go to the live branch
        double coeff = unclipped <= surrogate ? unclipped : 0.0;
        double r = clamped_exp(lp_ref - lp_new);
        double total = inv_g * (coeff - beta * (1.0 - r));
        if (total != 0.0) {
          SliceGrad g =
              log_prob_grad(params, gen, s.tokens, config.temperature_train);
          double* dst = grad->data() +
                        params.offset(g.character_id, g.query_id, 0);
          for (size_t k = 0; k < g.values.size(); ++k)
            dst[k] += total * g.values[k];
        }
      }
    }
  }
  return value;
}

}  // namespace

double objective_value(std::span<const SampleGroup> groups,
                       std::span<const std::vector<AdvantageRecord>> records,
                       const PolicyParams& params,
                       const PolicyParams& ref_params,
                       std::span<const CharacterKLState> kl_states,
                       const TrainConfig& config) {
  return accumulate_objective(groups, records, params, ref_params, kl_states,
                              config, nullptr);
}

std::vector<double> objective_gradient(
    std::span<const SampleGroup> groups,
    std::span<const std::vector<AdvantageRecord>> records,
    const PolicyParams& params, const PolicyParams& ref_params,
    std::span<const CharacterKLState> kl_states, const TrainConfig& config) {
  std::vector<double> grad;
  accumulate_objective(groups, records, params, ref_params, kl_states, config,
                       &grad);
  return grad;
}

double measure_kl(const PolicyParams& params, const PolicyParams& ref_params,
                  std::span<const Prompt> prompts) {
  if (prompts.empty()) throw std::invalid_argument("empty prompt set");
  double total = 0.0;
  size_t terms = 0;
  for (const Prompt& p : prompts) {
    for (int pos = 0; pos < params.response_len; ++pos) {
      std::vector<double> cur = position_distribution(params, p, pos);
      std::vector<double> ref = position_distribution(ref_params, p, pos);
      double kl = 0.0;
      for (int v = 0; v < params.vocab_size; ++v)
        if (cur[v] > 0.0) kl += cur[v] * std::log(cur[v] / ref[v]);
      total += kl;
      ++terms;
    }
  }
  return total / terms;
}

TrainReport train(const CharacterUniverse& u, const TrainConfig& config,
                  const TrainHooks& hooks) {
  const TrainConfig cfg = canonical_config(config);
  const int num_chars = u.num_characters();

  TrainReport report;
  report.params = init_params(u, cfg.init_peak);
  report.ref_params = report.params;
  PolicyParams& params = report.params;
  const PolicyParams& ref = report.ref_params;

  std::vector<std::vector<Prompt>> char_prompts(num_chars);
  for (int c = 1; c < num_chars; ++c)
    char_prompts[c] = prompts_for_character(u, c);
  const std::vector<Prompt> all_prompts = training_prompts(u);

  // Entropy profile of the reference policy fixes each character's KL
  // target once, before any update.
  report.kl_states.assign(num_chars, CharacterKLState{});
  for (int c = 1; c < num_chars; ++c)
    report.h_global += character_entropy(ref, char_prompts[c]);
  report.h_global /= (num_chars - 1);
  for (int c = 1; c < num_chars; ++c) {
    CharacterKLState& st = report.kl_states[c];
    st.h_c = character_entropy(ref, char_prompts[c]);
    st.r_h = relative_entropy_ratio(st.h_c, report.h_global);
    st.d_targ = cfg.adaptive_kl_target
                    ? kl_target(cfg.gate.d_base, st.r_h, cfg.gate.clamp_min,
                                cfg.gate.clamp_max)
                    : cfg.gate.d_base;
    st.beta = cfg.beta_init;
  }

  std::vector<CharacterStyleStats> stats(num_chars);
  for (auto& s : stats) s.decay = cfg.ema_decay;

  // Cold start: one rollout under the initial policy seeds the per-character
  // style EMA, so step 0 already normalizes against purely historical stats.
  if (cfg.dual_stream) {
    auto groups = batch_groups(params, all_prompts, cfg.group_size,
                               cfg.anchors_per_group, cfg.temperature_train,
                               mix_seed(cfg.seed, kColdStartTag));
    std::vector<std::vector<double>> styles(num_chars);
    for (auto& g : groups) {
      attach_rewards(g, u);
      for (size_t i = 0; i < g.members.size(); ++i)
        if (!g.members[i].is_anchor)
          styles[g.prompt.character_id].push_back(g.rewards[i].r_style);
    }
    for (int c = 1; c < num_chars; ++c)
      stats[c] = update_style_stats(stats[c], styles[c]);
  }

  for (int step = 0; step < cfg.steps; ++step) {
    const PolicyParams old = params;  // snapshot pi_old
    std::vector<Prompt> batch = select_batch(all_prompts, step,
                                             cfg.rollout_batch);
    auto groups = batch_groups(old, batch, cfg.group_size,
                               cfg.anchors_per_group, cfg.temperature_train,
                               mix_seed(cfg.seed, static_cast<uint64_t>(step)));
    for (auto& g : groups) attach_rewards(g, u);

    std::vector<std::vector<AdvantageRecord>> records;
    records.reserve(groups.size());
    for (const auto& g : groups)
      records.push_back(
          group_advantages(g, stats[g.prompt.character_id], params, cfg));

    std::vector<double> grad = objective_gradient(
        groups, records, params, ref, report.kl_states, cfg);
    for (size_t i = 0; i < params.logits.size(); ++i)
      params.logits[i] += cfg.lr * grad[i];

    if (cfg.dual_stream) {
      std::vector<std::vector<double>> styles(num_chars);
      for (const auto& g : groups)
        for (size_t i = 0; i < g.members.size(); ++i)
          if (!g.members[i].is_anchor)
            styles[g.prompt.character_id].push_back(g.rewards[i].r_style);
      for (int c = 1; c < num_chars; ++c)
        if (!styles[c].empty())
          stats[c] = update_style_stats(stats[c], styles[c]);
    }

    StepMetrics m;
    m.step = step;
    m.d_kl.assign(num_chars, 0.0);
    m.beta.assign(num_chars, 0.0);
    for (int c = 1; c < num_chars; ++c) {
      CharacterKLState& st = report.kl_states[c];
      m.d_kl[c] = measure_kl(params, ref, char_prompts[c]);
      if (cfg.kl_controller)
        st.beta = pi_update_beta(st.beta, m.d_kl[c], st.d_targ,
                                 cfg.gate.delta_bound, cfg.gate.k_p);
      m.beta[c] = st.beta;
    }

    size_t n_members = 0, n_anchors = 0;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      const auto& g = groups[gi];
      for (size_t i = 0; i < g.members.size(); ++i) {
        if (g.members[i].is_anchor) {
          m.mean_style_anchor += g.rewards[i].r_style;
          ++n_anchors;
        } else {
          m.mean_task += g.rewards[i].r_task;
          m.mean_style += g.rewards[i].r_style;
          m.mean_h_id += records[gi][i].h_id;
          ++n_members;
        }
      }
      if (hooks.on_group) hooks.on_group(step, g);
      if (hooks.on_advantage)
        for (const auto& rec : records[gi])
          hooks.on_advantage(step, g.prompt.character_id, rec);
    }
    m.mean_task /= n_members;
    m.mean_style /= n_members;
    m.mean_h_id /= n_members;
    if (n_anchors > 0) m.mean_style_anchor /= n_anchors;
    report.history.push_back(std::move(m));
  }

  report.params_checksum = params_checksum(params);
  return report;
}

uint64_t params_checksum(const PolicyParams& params) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (double d : params.logits) {
    uint64_t bits = std::bit_cast<uint64_t>(d);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace crpo
