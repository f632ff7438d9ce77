#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crpo/env.hpp"

namespace crpo {

class RngStream;

// Tabular softmax sequence policy. Each (character, query) prompt owns an
// independent block of L x V logits; response positions factorize, so exact
// log-probabilities, gradients, and entropies are all closed form.
struct PolicyParams {
  int num_characters = 0;
  int num_queries = 0;
  int response_len = 0;
  int vocab_size = 0;
  std::vector<double> logits;  // [C][Q][L][V], row-major

  size_t offset(int character_id, int query_id, int pos) const {
    return ((static_cast<size_t>(character_id) * num_queries + query_id) *
                response_len +
            pos) *
           vocab_size;
  }
  std::span<const double> slice(const Prompt& p, int pos) const {
    return {logits.data() + offset(p.character_id, p.query_id, pos),
            static_cast<size_t>(vocab_size)};
  }
  std::span<double> slice_mut(const Prompt& p, int pos) {
    return {logits.data() + offset(p.character_id, p.query_id, pos),
            static_cast<size_t>(vocab_size)};
  }
};

// One sampled response. `prompt` is the prompt the sample is scored against;
// for anchors that is the original character prompt, while generation (and
// logp_old) used the stripped anchor prompt. `is_anchor` records provenance.
struct TrajectorySample {
  Prompt prompt;
  std::vector<Token> tokens;
  std::vector<double> logp_old;  // per-token log-probs at sampling time
  bool is_anchor = false;
};

inline double logp_old_sum(const TrajectorySample& s) {
  double t = 0.0;
  for (double lp : s.logp_old) t += lp;
  return t;
}

// Gradient of a per-sample scalar with respect to one (character, query)
// logit block. Dense within the block, zero elsewhere.
struct SliceGrad {
  int character_id = 0;
  int query_id = 0;
  std::vector<double> values;  // [L][V], row-major
};

// Base-model prior. Every persona starts competent at the task: the query's
// focus token (position 0) and answer token (positions 1..L-1) get a logit of
// peak * (1 - ln(difficulty) / 5), so harder personas begin less certain and
// have more of their reward left to learn. Style markers get no prior at all.
// Persona voice is latent: markers surface only as rare sampling events until
// training amplifies them, which is exactly the signal regime where style is
// easy to lose. The spread in competence sharpness is what makes initial
// predictive entropy heterogeneous across personas. peak = 0 degenerates to
// the uniform policy.
PolicyParams init_params(const CharacterUniverse& u, double init_peak);

// Softmax of the position's logit row at the given temperature.
std::vector<double> position_distribution(const PolicyParams& params,
                                          const Prompt& p, int pos,
                                          double temperature = 1.0);

// Draws L tokens position by position; logp_old is the exact sequence
// log-probability under `params` at the sampling temperature.
TrajectorySample sample_response(const PolicyParams& params, const Prompt& p,
                                 RngStream& rng, double temperature = 1.0);

// Exact sequence log-probability of `tokens` under the prompt's block.
double log_prob(const PolicyParams& params, const Prompt& p,
                std::span<const Token> tokens, double temperature = 1.0);

// d log_prob / d logits for the prompt's block: (one_hot - softmax) / T
// per position.
SliceGrad log_prob_grad(const PolicyParams& params, const Prompt& p,
                        std::span<const Token> tokens,
                        double temperature = 1.0);

// Mean over positions of the Shannon entropy (nats) of the position
// distribution at temperature 1.
double predictive_entropy(const PolicyParams& params, const Prompt& p);

// params += scale * grad, applied to the grad's block only.
void scatter_add(PolicyParams& params, const SliceGrad& grad, double scale);

}  // namespace crpo
