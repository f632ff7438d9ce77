#include "crpo/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "crpo/policy.hpp"
#include "crpo/rng.hpp"
#include "json.hpp"

namespace crpo {
namespace {

// Fixed stream tags keep every random choice independent of call order.
constexpr uint64_t kMarkerStreamTag = 0x1000;
constexpr uint64_t kQueryStreamTag = 0x2000;

int range_draw(RngStream& rng, int lo, int hi) {
  // hi exclusive; rejection-free since we only need coarse uniformity
  return lo + static_cast<int>(rng.next_uniform() * (hi - lo));
}

std::vector<Token> draw_marker_set(uint64_t seed, int character_id, int size,
                                   int pool_lo, int pool_hi) {
  RngStream rng(mix_seed(seed, kMarkerStreamTag + character_id));
  std::vector<Token> pool(pool_hi - pool_lo);
  for (int i = 0; i < static_cast<int>(pool.size()); ++i) pool[i] = pool_lo + i;
  // partial Fisher-Yates: the first `size` slots become the sample
  for (int i = 0; i < size; ++i) {
    int j = i + range_draw(rng, 0, static_cast<int>(pool.size()) - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

CharacterUniverse build_universe(uint64_t seed, int num_characters,
                                 int vocab_size, MarkerRange markers,
                                 int num_queries, int response_len) {
  if (num_characters < 2)
    throw std::invalid_argument("need at least two characters (0 is generic)");
  if (num_queries < 1) throw std::invalid_argument("need at least one query");
  if (response_len < 2)
    throw std::invalid_argument("response length must be at least 2");
  if (markers.min_markers < 1 || markers.max_markers < markers.min_markers)
    throw std::invalid_argument("invalid marker range");
  if (vocab_size < 4 * markers.max_markers)
    throw std::invalid_argument(
        "vocabulary too small: answer/focus/marker ranges would overlap");

  const int answer_hi = vocab_size / 4;   // answer range [0, V/4)
  const int focus_hi = vocab_size / 2;    // focus range [V/4, V/2)
  const int pool_lo = focus_hi;           // marker pool [V/2, V)

  CharacterUniverse u;
  u.vocab_size = vocab_size;
  u.response_len = response_len;
  u.rng_seed = seed;
  u.characters.resize(num_characters);

  u.characters[0] = CharacterProfile{0, {}, 1.0};
  for (int c = 1; c < num_characters; ++c) {
    // linear span over [min, max]; midpoint when there is a single persona
    double t = num_characters > 2
                   ? static_cast<double>(c - 1) / (num_characters - 2)
                   : 0.5;
    int size = static_cast<int>(std::lround(
        markers.min_markers + t * (markers.max_markers - markers.min_markers)));
    u.characters[c].id = c;
    u.characters[c].style_markers =
        draw_marker_set(seed, c, size, pool_lo, vocab_size);
    u.characters[c].difficulty =
        static_cast<double>(size) / markers.min_markers;
  }

  RngStream qrng(mix_seed(seed, kQueryStreamTag));
  u.queries.resize(num_queries);
  for (int q = 0; q < num_queries; ++q) {
    u.queries[q].id = q;
    u.queries[q].answer_token = range_draw(qrng, 0, answer_hi);
    u.queries[q].focus_token_by_character.resize(num_characters);
    for (int c = 0; c < num_characters; ++c)
      u.queries[q].focus_token_by_character[c] =
          range_draw(qrng, answer_hi, focus_hi);
  }
  return u;
}

Prompt anchor_prompt(const Prompt& p) {
  if (p.is_anchor_prompt)
    throw std::invalid_argument("prompt is already an anchor prompt");
  return Prompt{0, p.query_id, true};
}

double task_reward(const TrajectorySample& sample,
                   const CharacterUniverse& u) {
  const auto& p = sample.prompt;
  const auto& q = u.queries.at(p.query_id);
  const auto& toks = sample.tokens;
  if (static_cast<int>(toks.size()) != u.response_len)
    throw std::invalid_argument("response length mismatch");

  double r = 0.0;
  if (toks[0] == q.focus_token_by_character.at(p.character_id)) r += 0.5;
  for (size_t i = 1; i < toks.size(); ++i) {
    if (toks[i] == q.answer_token) {
      r += 0.5;
      break;
    }
  }
  return r;
}

double style_reward(const TrajectorySample& sample,
                    const CharacterUniverse& u) {
  const auto& markers =
      u.characters.at(sample.prompt.character_id).style_markers;
  std::set<Token> toks(sample.tokens.begin(), sample.tokens.end());
  if (markers.empty()) return 0.0;

  int inter = 0;
  for (Token m : markers) inter += toks.count(m) ? 1 : 0;
  int uni = static_cast<int>(toks.size() + markers.size()) - inter;
  return static_cast<double>(inter) / uni;
}

std::string universe_to_json(const CharacterUniverse& u) {
  nlohmann::json j;
  j["vocab_size"] = u.vocab_size;
  j["response_len"] = u.response_len;
  j["rng_seed"] = u.rng_seed;
  j["characters"] = nlohmann::json::array();
  for (const auto& c : u.characters)
    j["characters"].push_back({{"id", c.id},
                               {"style_markers", c.style_markers},
                               {"difficulty", c.difficulty}});
  j["queries"] = nlohmann::json::array();
  for (const auto& q : u.queries)
    j["queries"].push_back(
        {{"id", q.id},
         {"answer_token", q.answer_token},
         {"focus_token_by_character", q.focus_token_by_character}});
  return j.dump(2);
}

CharacterUniverse universe_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CharacterUniverse u;
  u.vocab_size = j.at("vocab_size").get<int>();
  u.response_len = j.at("response_len").get<int>();
  u.rng_seed = j.at("rng_seed").get<uint64_t>();
  for (const auto& jc : j.at("characters")) {
    CharacterProfile c;
    c.id = jc.at("id").get<int>();
    c.style_markers = jc.at("style_markers").get<std::vector<Token>>();
    c.difficulty = jc.at("difficulty").get<double>();
    u.characters.push_back(std::move(c));
  }
  for (const auto& jq : j.at("queries")) {
    Query q;
    q.id = jq.at("id").get<int>();
    q.answer_token = jq.at("answer_token").get<Token>();
    q.focus_token_by_character =
        jq.at("focus_token_by_character").get<std::vector<Token>>();
    u.queries.push_back(std::move(q));
  }
  return u;
}

void save_universe(const CharacterUniverse& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << universe_to_json(u) << "\n";
}

CharacterUniverse load_universe(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return universe_from_json(text);
}

uint64_t universe_checksum(const CharacterUniverse& u) {
  const std::string text = universe_to_json(u);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace crpo
