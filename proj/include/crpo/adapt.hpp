#pragma once

#include <span>

#include "crpo/policy.hpp"

namespace crpo {

// Per-character adaptation state. h_c, r_h, and d_targ are fixed at
// initialization from the reference policy; beta moves each step under the
// proportional controller.
struct CharacterKLState {
  double h_c = 0.0;
  double r_h = 1.0;
  double d_targ = 0.1;
  double beta = 0.01;
};

// Knobs of the entropy-aware exploitation layer. gamma scales the
// identification-entropy gate; the rest drive the per-character KL target
// and the proportional beta controller.
struct GateParams {
  double gamma = 0.02;
  double k_p = 0.1;
  double delta_bound = 0.2;
  double d_base = 0.1;
  double clamp_min = 0.5;
  double clamp_max = 2.0;
};

// p_r = sigmoid(logp_y - logp_anchor), the probability mass the policy puts
// on the character response relative to the anchor response. Both log-probs
// must be same-length sequences under the same character prompt.
double identification_ratio(double logp_y, double logp_anchor);

// Binary entropy of p_r in base 2, so the result lies in [0, 1].
double identification_entropy(double p_r);

// a * (1 - gamma * h_id). Rejects gamma * h_id > 1, which would flip the
// advantage sign instead of attenuating it.
double gate_advantage(double a, double h_id, double gamma);

// Mean predictive entropy of the reference policy over one character's
// prompts (H_c).
double character_entropy(const PolicyParams& ref_params,
                         std::span<const Prompt> prompts_for_c);

// r_h = h_c / h_global.
double relative_entropy_ratio(double h_c, double h_global);

// d_base * clamp(r_h, clamp_min, clamp_max): high-entropy (hard) characters
// get a looser KL budget, low-entropy ones a tighter one.
double kl_target(double d_base, double r_h, double clamp_min,
                 double clamp_max);

// Proportional controller step: beta * (1 + k_p * e) with the error
// e = d_kl/d_targ - 1 truncated to [-delta_bound, +delta_bound].
double pi_update_beta(double beta, double d_kl_observed, double d_targ,
                      double delta_bound, double k_p);

}  // namespace crpo
