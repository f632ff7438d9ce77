#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crpo/advantage.hpp"
#include "crpo/policy.hpp"

namespace crpo {

class RngStream;

// Mixed sampling group for one character prompt: on-policy members first,
// anchor members (generated with the persona stripped) at the tail.
// `rewards` runs parallel to `members` once attach_rewards has been called.
struct SampleGroup {
  Prompt prompt;
  std::vector<TrajectorySample> members;
  int anchor_index = -1;  // first anchor member, -1 when the group has none
  std::vector<RewardBundle> rewards;

  int num_anchors() const {
    return anchor_index < 0 ? 0
                            : static_cast<int>(members.size()) - anchor_index;
  }
};

// The prompt a sample's tokens were actually drawn under: the stored
// character prompt for regular members, its stripped form for anchors.
Prompt generation_prompt(const TrajectorySample& s);

// Samples group_size - anchors responses under p and `anchors` responses
// under anchor_prompt(p), all from old_params. Anchor members keep the
// original character prompt (they are scored against it) and record their
// logp_old under the anchor prompt, their true sampling distribution.
// Pre: group_size >= 2, 0 <= anchors < group_size, p not an anchor prompt.
SampleGroup build_group(const PolicyParams& old_params, const Prompt& p,
                        int group_size, int anchors, double temperature,
                        RngStream& rng);

// One group per prompt. Each prompt gets its own rng stream derived from
// (seed, character, query), so the result is independent of prompt order.
std::vector<SampleGroup> batch_groups(const PolicyParams& old_params,
                                      std::span<const Prompt> prompts,
                                      int group_size, int anchors,
                                      double temperature, uint64_t seed);

// Scores every member with the universe's task and style rewards.
void attach_rewards(SampleGroup& group, const CharacterUniverse& u);

}  // namespace crpo
