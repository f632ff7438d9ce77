#include "crpo/advantage.hpp"

#include <stdexcept>

#include "crpo/sampler.hpp"

namespace crpo {

void mean_and_pop_std(std::span<const double> xs, double* mean, double* std) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= xs.size();
  *mean = m;
  *std = std::sqrt(v);
}

std::vector<double> grpo_advantage(std::span<const double> rewards,
                                   double eps) {
  if (rewards.size() < 2)
    throw std::invalid_argument("group must have at least two members");
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  double mean = 0.0, sd = 0.0;
  mean_and_pop_std(rewards, &mean, &sd);
  std::vector<double> out(rewards.size());
  for (size_t i = 0; i < rewards.size(); ++i)
    out[i] = (rewards[i] - mean) / (sd + eps);
  return out;
}

std::vector<double> task_advantage(const SampleGroup& group, double eps) {
  std::vector<double> r(group.rewards.size());
  for (size_t i = 0; i < r.size(); ++i) r[i] = group.rewards[i].r_task;
  return grpo_advantage(r, eps);
}

std::vector<double> style_advantage_global(const SampleGroup& group,
                                           const CharacterStyleStats& stats,
                                           double eps) {
  if (!stats.initialized)
    throw std::logic_error("style stats not initialized");
  std::vector<double> out(group.rewards.size());
  double denom = stats.ema_std() + eps;
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = (group.rewards[i].r_style - stats.ema_mean) / denom;
  return out;
}

std::vector<double> style_advantage_renorm(
    std::span<const double> global_advantages, double eps) {
  return grpo_advantage(global_advantages, eps);
}

double combine(double a_task, double a_style, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("lambda outside [0, 1]");
  return lambda * a_task + (1.0 - lambda) * a_style;
}

CharacterStyleStats update_style_stats(const CharacterStyleStats& stats,
                                       std::span<const double> batch_style) {
  if (batch_style.empty()) throw std::invalid_argument("empty style batch");
  double m = 0.0, sd = 0.0;
  mean_and_pop_std(batch_style, &m, &sd);
  CharacterStyleStats next = stats;
  if (!stats.initialized) {
    next.ema_mean = m;
    next.ema_var = sd * sd;
    next.initialized = true;
  } else {
    double a = stats.decay;
    next.ema_mean = (1.0 - a) * stats.ema_mean + a * m;
    next.ema_var = (1.0 - a) * stats.ema_var + a * sd * sd;
  }
  return next;
}

}  // namespace crpo
