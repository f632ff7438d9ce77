#include "crpo/sampler.hpp"

#include <stdexcept>

#include "crpo/rng.hpp"

namespace crpo {

Prompt generation_prompt(const TrajectorySample& s) {
  if (s.is_anchor && !s.prompt.is_anchor_prompt)
    return anchor_prompt(s.prompt);
  return s.prompt;
}

SampleGroup build_group(const PolicyParams& old_params, const Prompt& p,
                        int group_size, int anchors, double temperature,
                        RngStream& rng) {
  if (group_size < 2)
    throw std::invalid_argument("group size must be at least 2");
  if (anchors < 0 || anchors >= group_size)
    throw std::invalid_argument(
        "anchor count must leave at least one on-policy member");
  if (p.is_anchor_prompt)
    throw std::invalid_argument("cannot build a group for an anchor prompt");

  SampleGroup g;
  g.prompt = p;
  g.members.reserve(group_size);
  for (int i = 0; i < group_size - anchors; ++i)
    g.members.push_back(sample_response(old_params, p, rng, temperature));
  if (anchors > 0) {
    g.anchor_index = group_size - anchors;
    const Prompt ap = anchor_prompt(p);
    for (int i = 0; i < anchors; ++i) {
      TrajectorySample s = sample_response(old_params, ap, rng, temperature);
      s.prompt = p;  // scored against the character it was injected for
      s.is_anchor = true;
      g.members.push_back(std::move(s));
    }
  }
  return g;
}

std::vector<SampleGroup> batch_groups(const PolicyParams& old_params,
                                      std::span<const Prompt> prompts,
                                      int group_size, int anchors,
                                      double temperature, uint64_t seed) {
  if (prompts.empty()) throw std::invalid_argument("empty prompt list");
  std::vector<SampleGroup> groups;
  groups.reserve(prompts.size());
  for (const Prompt& p : prompts) {
    uint64_t key = (static_cast<uint64_t>(p.character_id) << 32) |
                   static_cast<uint32_t>(p.query_id);
    RngStream rng(mix_seed(seed, key));
    groups.push_back(
        build_group(old_params, p, group_size, anchors, temperature, rng));
  }
  return groups;
}

void attach_rewards(SampleGroup& group, const CharacterUniverse& u) {
  group.rewards.resize(group.members.size());
  for (size_t i = 0; i < group.members.size(); ++i) {
    group.rewards[i].r_task = task_reward(group.members[i], u);
    group.rewards[i].r_style = style_reward(group.members[i], u);
  }
}

}  // namespace crpo
