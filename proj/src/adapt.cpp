#include "crpo/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crpo {

double identification_ratio(double logp_y, double logp_anchor) {
  if (!std::isfinite(logp_y) || !std::isfinite(logp_anchor))
    throw std::invalid_argument("non-finite log-probability");
  double d = logp_y - logp_anchor;
  // sigmoid evaluated on the negative branch only, for stability either way
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  double e = std::exp(d);
  return e / (1.0 + e);
}

double identification_entropy(double p_r) {
  if (p_r < 0.0 || p_r > 1.0)
    throw std::invalid_argument("p_r outside [0, 1]");
  double h = 0.0;
  if (p_r > 0.0) h -= p_r * std::log2(p_r);
  if (p_r < 1.0) h -= (1.0 - p_r) * std::log2(1.0 - p_r);
  return h;
}

double gate_advantage(double a, double h_id, double gamma) {
  if (gamma * h_id > 1.0)
    throw std::invalid_argument("gamma * h_id > 1 would flip the advantage");
  return a * (1.0 - gamma * h_id);
}

double character_entropy(const PolicyParams& ref_params,
                         std::span<const Prompt> prompts_for_c) {
  if (prompts_for_c.empty())
    throw std::invalid_argument("character has no prompts");
  double h = 0.0;
  for (const Prompt& p : prompts_for_c)
    h += predictive_entropy(ref_params, p);
  return h / prompts_for_c.size();
}

double relative_entropy_ratio(double h_c, double h_global) {
  if (h_global <= 0.0)
    throw std::invalid_argument("global entropy must be positive");
  return h_c / h_global;
}

double kl_target(double d_base, double r_h, double clamp_min,
                 double clamp_max) {
  if (clamp_min > clamp_max)
    throw std::invalid_argument("clamp_min > clamp_max");
  return d_base * std::clamp(r_h, clamp_min, clamp_max);
}

double pi_update_beta(double beta, double d_kl_observed, double d_targ,
                      double delta_bound, double k_p) {
  if (beta <= 0.0 || d_targ <= 0.0)
    throw std::invalid_argument("beta and d_targ must be positive");
  double e = std::clamp(d_kl_observed / d_targ - 1.0, -delta_bound,
                        delta_bound);
  return beta * (1.0 + k_p * e);
}

}  // namespace crpo
