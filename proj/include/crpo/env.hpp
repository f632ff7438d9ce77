#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crpo {

struct TrajectorySample;  // defined in policy.hpp

// Token id within [0, vocab_size).
using Token = int;

struct CharacterProfile {
  int id = 0;
  std::vector<Token> style_markers;  // sorted, disjoint from the answer range
  double difficulty = 1.0;           // scales marker breadth; > 0
};

struct Query {
  int id = 0;
  Token answer_token = 0;
  std::vector<Token> focus_token_by_character;  // indexed by character id
};

struct Prompt {
  int character_id = 0;
  int query_id = 0;
  bool is_anchor_prompt = false;
};

// Synthetic character universe. Token ids are partitioned into an answer
// range, a focus range, and a marker pool so the three roles never collide.
// Character 0 is the reserved generic persona (empty marker set) used to
// generate anchors. Immutable after construction; all operations are pure.
struct CharacterUniverse {
  std::vector<CharacterProfile> characters;  // dense ids 0..C-1
  std::vector<Query> queries;
  int vocab_size = 0;
  int response_len = 0;
  uint64_t rng_seed = 0;

  int num_characters() const { return static_cast<int>(characters.size()); }
  int num_queries() const { return static_cast<int>(queries.size()); }
};

struct MarkerRange {
  int min_markers = 1;
  int max_markers = 1;
};

// Deterministic universe construction. Marker-set sizes of characters
// 1..C-1 span [min, max] linearly, so difficulty is heterogeneous.
// Throws std::invalid_argument when the vocabulary cannot hold disjoint
// answer/focus/marker ranges (requires vocab_size >= 4 * max_markers).
CharacterUniverse build_universe(uint64_t seed, int num_characters,
                                 int vocab_size, MarkerRange markers,
                                 int num_queries, int response_len);

// Strips the persona: same query, character 0, anchor flag set.
// Pre: p is not already an anchor prompt.
Prompt anchor_prompt(const Prompt& p);

// 0.5 * [token 0 is the character's focus token for the query]
// + 0.5 * [the answer token appears anywhere in positions 1..L-1].
// Anchors are scored against the character of their stored (original) prompt.
double task_reward(const TrajectorySample& sample,
                   const CharacterUniverse& u);

// Set-Jaccard overlap between the response's token set and the prompt
// character's style markers.
double style_reward(const TrajectorySample& sample,
                    const CharacterUniverse& u);

// JSON (de)serialization for experiment reproducibility.
std::string universe_to_json(const CharacterUniverse& u);
CharacterUniverse universe_from_json(const std::string& text);
void save_universe(const CharacterUniverse& u, const std::string& path);
CharacterUniverse load_universe(const std::string& path);

// FNV-1a over the canonical JSON form; used to match report directories.
uint64_t universe_checksum(const CharacterUniverse& u);

}  // namespace crpo
