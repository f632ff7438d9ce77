#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "crpo/rng.hpp"
#include "crpo/sampler.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace crpo;

TEST_CASE("build_group shapes and member provenance") {
  auto u = testutil::tiny_universe();
  auto params = testutil::uniform_params(u);
  Prompt p{1, 0, false};

  RngStream rng(3);
  SampleGroup g = build_group(params, p, 7, 1, 1.0, rng);
  REQUIRE(g.members.size() == 7);
  CHECK(g.anchor_index == 6);
  CHECK(g.num_anchors() == 1);
  for (int i = 0; i < 6; ++i) {
    CHECK_FALSE(g.members[i].is_anchor);
    CHECK(g.members[i].prompt.character_id == 1);
    CHECK_FALSE(g.members[i].prompt.is_anchor_prompt);
  }
  // the anchor keeps the character prompt for scoring but was generated
  // under the stripped prompt
  const auto& a = g.members[6];
  CHECK(a.is_anchor);
  CHECK(a.prompt.character_id == 1);
  CHECK(generation_prompt(a).character_id == 0);
  CHECK(generation_prompt(a).is_anchor_prompt);
  CHECK(generation_prompt(g.members[0]).character_id == 1);

  for (const auto& m : g.members) {
    CHECK(m.tokens.size() == static_cast<size_t>(u.response_len));
    CHECK(m.logp_old.size() == static_cast<size_t>(u.response_len));
    for (Token t : m.tokens) {
      CHECK(t >= 0);
      CHECK(t < u.vocab_size);
    }
  }

  RngStream rng2(3);
  SampleGroup two = build_group(params, p, 2, 0, 1.0, rng2);
  CHECK(two.members.size() == 2);
  CHECK(two.anchor_index == -1);
  CHECK(two.num_anchors() == 0);

  RngStream rng3(3);
  SampleGroup multi = build_group(params, p, 5, 3, 1.0, rng3);
  CHECK(multi.anchor_index == 2);
  CHECK(multi.num_anchors() == 3);
}

TEST_CASE("build_group rejects bad arguments") {
  auto u = testutil::tiny_universe();
  auto params = testutil::uniform_params(u);
  RngStream rng(1);
  Prompt p{1, 0, false};
  CHECK_THROWS_AS(build_group(params, p, 1, 0, 1.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_group(params, p, 4, 4, 1.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_group(params, p, 4, -1, 1.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_group(params, anchor_prompt(p), 4, 1, 1.0, rng),
                  std::invalid_argument);
}

TEST_CASE("build_group is deterministic for a fixed stream") {
  auto u = testutil::tiny_universe();
  auto params = testutil::uniform_params(u);
  Prompt p{1, 1, false};
  RngStream r1(99), r2(99);
  SampleGroup a = build_group(params, p, 6, 2, 0.8, r1);
  SampleGroup b = build_group(params, p, 6, 2, 0.8, r2);
  REQUIRE(a.members.size() == b.members.size());
  for (size_t i = 0; i < a.members.size(); ++i) {
    CHECK(a.members[i].tokens == b.members[i].tokens);
    CHECK(a.members[i].logp_old == b.members[i].logp_old);
  }
}

TEST_CASE("recorded logp_old matches log_prob under the generation prompt") {
  auto u = testutil::tiny_universe();
  auto params = init_params(u, 1.5);
  Prompt p{1, 0, false};
  RngStream rng(7);
  SampleGroup g = build_group(params, p, 7, 2, 0.5, rng);
  for (const auto& m : g.members) {
    double lp = log_prob(params, generation_prompt(m), m.tokens, 0.5);
    CHECK(std::abs(logp_old_sum(m) - lp) < 1e-12);
  }
  // for an anchor, the character-prompt log-prob is generally different
  const auto& a = g.members[g.anchor_index];
  double lp_char = log_prob(params, a.prompt, a.tokens, 0.5);
  double lp_anchor = log_prob(params, generation_prompt(a), a.tokens, 0.5);
  CHECK(std::abs(logp_old_sum(a) - lp_anchor) < 1e-12);
  CHECK(lp_char != lp_anchor);
}

TEST_CASE("batch_groups covers prompts and ignores their order") {
  auto u = testutil::tiny_universe();
  auto params = testutil::uniform_params(u);
  std::vector<Prompt> prompts{{0, 0, false}, {0, 1, false},
                              {1, 0, false}, {1, 1, false}};
  auto batch = batch_groups(params, prompts, 5, 1, 1.0, 42);
  REQUIRE(batch.size() == 4);
  for (size_t i = 0; i < prompts.size(); ++i) {
    CHECK(batch[i].prompt.character_id == prompts[i].character_id);
    CHECK(batch[i].prompt.query_id == prompts[i].query_id);
  }

  std::vector<Prompt> reversed(prompts.rbegin(), prompts.rend());
  auto rev = batch_groups(params, reversed, 5, 1, 1.0, 42);
  for (size_t i = 0; i < prompts.size(); ++i) {
    const auto& a = batch[i];
    const auto& b = rev[prompts.size() - 1 - i];
    REQUIRE(a.members.size() == b.members.size());
    for (size_t m = 0; m < a.members.size(); ++m)
      CHECK(a.members[m].tokens == b.members[m].tokens);
  }

  CHECK_THROWS_AS(batch_groups(params, std::vector<Prompt>{}, 5, 1, 1.0, 42),
                  std::invalid_argument);
}

TEST_CASE("attach_rewards scores anchors against the injected character") {
  auto u = testutil::tiny_universe();
  auto params = testutil::uniform_params(u);
  Prompt p{1, 0, false};
  RngStream rng(13);
  SampleGroup g = build_group(params, p, 4, 1, 1.0, rng);
  attach_rewards(g, u);
  REQUIRE(g.rewards.size() == g.members.size());
  for (size_t i = 0; i < g.members.size(); ++i) {
    CHECK(g.rewards[i].r_task == task_reward(g.members[i], u));
    CHECK(g.rewards[i].r_style == style_reward(g.members[i], u));
    CHECK(g.rewards[i].r_task >= 0.0);
    CHECK(g.rewards[i].r_task <= 1.0);
    CHECK(g.rewards[i].r_style >= 0.0);
    CHECK(g.rewards[i].r_style <= 1.0);
  }
}

TEST_CASE("anchors from a style-trained policy score lower on style") {
  auto u = testutil::tiny_universe();
  auto params = testutil::styled_params(u, 8.0);
  Prompt p{1, 0, false};

  double member_style = 0.0, anchor_style = 0.0;
  int members = 0, anchors = 0;
  RngStream rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    SampleGroup g = build_group(params, p, 4, 1, 1.0, rng);
    attach_rewards(g, u);
    for (size_t i = 0; i < g.members.size(); ++i) {
      if (g.members[i].is_anchor) {
        anchor_style += g.rewards[i].r_style;
        ++anchors;
      } else {
        member_style += g.rewards[i].r_style;
        ++members;
      }
    }
  }
  member_style /= members;
  anchor_style /= anchors;
  CHECK(member_style > anchor_style + 0.2);
}
