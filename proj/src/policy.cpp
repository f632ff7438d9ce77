#include "crpo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crpo/rng.hpp"

namespace crpo {
namespace {

void check_prompt(const PolicyParams& params, const Prompt& p) {
  if (p.character_id < 0 || p.character_id >= params.num_characters ||
      p.query_id < 0 || p.query_id >= params.num_queries)
    throw std::out_of_range("prompt outside the policy's universe");
}

// log(sum exp(z/T)) with max subtraction; also writes softmax into probs
// when probs is non-null.
double softmax_row(std::span<const double> row, double temperature,
                   std::vector<double>* probs) {
  double zmax = *std::max_element(row.begin(), row.end()) / temperature;
  double sum = 0.0;
  if (probs) probs->resize(row.size());
  for (size_t v = 0; v < row.size(); ++v) {
    double e = std::exp(row[v] / temperature - zmax);
    if (probs) (*probs)[v] = e;
    sum += e;
  }
  if (probs)
    for (double& pv : *probs) pv /= sum;
  return zmax + std::log(sum);
}

}  // namespace

PolicyParams init_params(const CharacterUniverse& u, double init_peak) {
  PolicyParams params;
  params.num_characters = u.num_characters();
  params.num_queries = u.num_queries();
  params.response_len = u.response_len;
  params.vocab_size = u.vocab_size;
  params.logits.assign(static_cast<size_t>(params.num_characters) *
                           params.num_queries * params.response_len *
                           params.vocab_size,
                       0.0);
  for (const auto& c : u.characters) {
    double competence = init_peak * (1.0 - std::log(c.difficulty) / 5.0);
    for (int q = 0; q < params.num_queries; ++q) {
      const Query& query = u.queries[q];
      for (int pos = 0; pos < params.response_len; ++pos) {
        double* row = params.logits.data() + params.offset(c.id, q, pos);
        if (pos == 0) {
          row[query.focus_token_by_character[c.id]] = competence;
        } else {
          row[query.answer_token] = competence;
        }
      }
    }
  }
  return params;
}

std::vector<double> position_distribution(const PolicyParams& params,
                                          const Prompt& p, int pos,
                                          double temperature) {
  check_prompt(params, p);
  std::vector<double> probs;
  softmax_row(params.slice(p, pos), temperature, &probs);
  return probs;
}

TrajectorySample sample_response(const PolicyParams& params, const Prompt& p,
                                 RngStream& rng, double temperature) {
  check_prompt(params, p);
  TrajectorySample s;
  s.prompt = p;
  s.tokens.resize(params.response_len);
  s.logp_old.resize(params.response_len);
  std::vector<double> probs;
  for (int pos = 0; pos < params.response_len; ++pos) {
    softmax_row(params.slice(p, pos), temperature, &probs);
    Token t = sample_categorical(probs, rng.next_uniform());
    s.tokens[pos] = t;
    s.logp_old[pos] = std::log(probs[t]);
  }
  return s;
}

double log_prob(const PolicyParams& params, const Prompt& p,
                std::span<const Token> tokens, double temperature) {
  check_prompt(params, p);
  if (static_cast<int>(tokens.size()) != params.response_len)
    throw std::invalid_argument("token count != response length");
  double lp = 0.0;
  for (int pos = 0; pos < params.response_len; ++pos) {
    auto row = params.slice(p, pos);
    double lse = softmax_row(row, temperature, nullptr);
    lp += row[tokens[pos]] / temperature - lse;
  }
  return lp;
}

SliceGrad log_prob_grad(const PolicyParams& params, const Prompt& p,
                        std::span<const Token> tokens, double temperature) {
  check_prompt(params, p);
  if (static_cast<int>(tokens.size()) != params.response_len)
    throw std::invalid_argument("token count != response length");
  SliceGrad g;
  g.character_id = p.character_id;
  g.query_id = p.query_id;
  g.values.assign(
      static_cast<size_t>(params.response_len) * params.vocab_size, 0.0);
  std::vector<double> probs;
  for (int pos = 0; pos < params.response_len; ++pos) {
    softmax_row(params.slice(p, pos), temperature, &probs);
    double* out = g.values.data() +
                  static_cast<size_t>(pos) * params.vocab_size;
    for (int v = 0; v < params.vocab_size; ++v)
      out[v] = -probs[v] / temperature;
    out[tokens[pos]] += 1.0 / temperature;
  }
  return g;
}

double predictive_entropy(const PolicyParams& params, const Prompt& p) {
  check_prompt(params, p);
  std::vector<double> probs;
  double h = 0.0;
  for (int pos = 0; pos < params.response_len; ++pos) {
    softmax_row(params.slice(p, pos), 1.0, &probs);
    for (double pv : probs)
      if (pv > 0.0) h -= pv * std::log(pv);
  }
  return h / params.response_len;
}

void scatter_add(PolicyParams& params, const SliceGrad& grad, double scale) {
  double* dst =
      params.logits.data() + params.offset(grad.character_id, grad.query_id, 0);
  for (size_t i = 0; i < grad.values.size(); ++i) dst[i] += scale * grad.values[i];
}

}  // namespace crpo
