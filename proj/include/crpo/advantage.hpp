#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace crpo {

struct SampleGroup;  // defined in sampler.hpp

struct RewardBundle {
  double r_task = 0.0;
  double r_style = 0.0;
};

// Per-character running style statistics. We track the variance and take
// the square root where a standard deviation is needed, so the EMA update
// and the fixed-point property are both exact in variance space.
struct CharacterStyleStats {
  double ema_mean = 0.0;
  double ema_var = 0.0;
  double decay = 0.1;  // weight of the newest batch
  bool initialized = false;

  double ema_std() const { return std::sqrt(ema_var); }
};

struct AdvantageRecord {
  double a_task = 0.0;
  double a_style = 0.0;
  double a_combined = 0.0;  // lambda * a_task + (1 - lambda) * a_style
  double h_id = 0.0;        // identification entropy, in [0, 1]
  double a_gated = 0.0;     // a_combined * (1 - gamma * h_id)
};

// Group-relative baseline: (r_i - mean) / (population std + eps).
// Rejects groups smaller than 2.
std::vector<double> grpo_advantage(std::span<const double> rewards,
                                   double eps);

// Intra-group normalization of the group's task rewards; the anchor counts
// as an ordinary member.
std::vector<double> task_advantage(const SampleGroup& group, double eps);

// (r_style - ema_mean) / (ema_std + eps) per member. Uses only historical
// statistics, never this batch, so the result is batch-composition free.
// Rejects uninitialized stats.
std::vector<double> style_advantage_global(const SampleGroup& group,
                                           const CharacterStyleStats& stats,
                                           double eps);

// Second, intra-group pass over the globally normalized style advantages.
// With a low-scoring anchor in the group this lifts every other member.
std::vector<double> style_advantage_renorm(
    std::span<const double> global_advantages, double eps);

// lambda * a_task + (1 - lambda) * a_style, lambda in [0, 1].
double combine(double a_task, double a_style, double lambda);

// EMA of batch mean and population variance. The first batch seeds the
// statistics directly. Anchors must already be filtered out by the caller.
CharacterStyleStats update_style_stats(const CharacterStyleStats& stats,
                                       std::span<const double> batch_style);

// Shared by the normalizers and several tests.
void mean_and_pop_std(std::span<const double> xs, double* mean, double* std);

}  // namespace crpo
