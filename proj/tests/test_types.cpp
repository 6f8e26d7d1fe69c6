#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "segdst/types.hpp"

using namespace segdst;

namespace {

Event user(std::string text) { return {Speaker::kUser, std::move(text)}; }
Event agent(std::string text) { return {Speaker::kAgent, std::move(text)}; }

}  // namespace

TEST_CASE("normalize_events pairs user and agent utterances") {
  auto conv = normalize_events({user("hi"), agent("hello"), user("bye"),
                                agent("goodbye")},
                               "c1");
  REQUIRE(conv.turn_count() == 2);
  CHECK(conv.id == "c1");
  CHECK(conv.turns[0].index == 1);
  CHECK(conv.turns[0].user == "hi");
  CHECK(conv.turns[0].agent == "hello");
  CHECK(conv.turns[1].index == 2);
  CHECK(conv.turns[1].user == "bye");
  CHECK(conv.turns[1].agent == "goodbye");
}

TEST_CASE("normalize_events merges consecutive user utterances with newline") {
  auto conv = normalize_events({user("part one"), user("part two"),
                                agent("reply")});
  REQUIRE(conv.turn_count() == 1);
  CHECK(conv.turns[0].user == "part one\npart two");
  CHECK(conv.turns[0].agent == "reply");
}

TEST_CASE("normalize_events leaves a trailing user run unanswered") {
  auto conv = normalize_events({user("a"), agent("b"), user("c")});
  REQUIRE(conv.turn_count() == 2);
  CHECK(conv.turns[1].user == "c");
  CHECK_FALSE(conv.turns[1].agent.has_value());
}

TEST_CASE("normalize_events appends consecutive agent utterances to the reply") {
  auto conv = normalize_events({user("q"), agent("first"), agent("second"),
                                user("next"), agent("done")});
  REQUIRE(conv.turn_count() == 2);
  CHECK(conv.turns[0].agent == "first\nsecond");
  CHECK(conv.turns[1].agent == "done");
}

TEST_CASE("normalize_events rejects malformed sources") {
  CHECK_THROWS_AS(normalize_events({}), Error);
  CHECK_THROWS_AS(normalize_events({agent("hi")}), Error);
}

TEST_CASE("normalize_events is idempotent on its own output") {
  std::mt19937_64 rng(20240817);
  std::bernoulli_distribution flip(0.5);
  for (int round = 0; round < 50; ++round) {
    std::vector<Event> events;
    events.push_back(user("u0"));
    int n = 2 + static_cast<int>(rng() % 12);
    for (int i = 1; i < n; ++i) {
      if (flip(rng)) {
        events.push_back(user("u" + std::to_string(i)));
      } else {
        events.push_back(agent("a" + std::to_string(i)));
      }
    }
    auto once = normalize_events(events, "x");
    // Re-expanding the normalized turns and normalizing again must be a
    // fixed point.
    std::vector<Event> expanded;
    for (const auto& turn : once.turns) {
      expanded.push_back(user(turn.user));
      if (turn.agent) expanded.push_back(agent(*turn.agent));
    }
    auto twice = normalize_events(expanded, "x");
    CHECK(once == twice);
  }
}

TEST_CASE("validate_record accepts a consistent record") {
  DialogueStateRecord record;
  record.boundaries = {4, {2}};
  record.segments = {{1, 2, {}}, {3, 4, {}}};
  CHECK(validate_record(record, 4).empty());
}

TEST_CASE("validate_record reports gaps, overlaps, and boundary mismatches") {
  DialogueStateRecord gap;
  gap.boundaries = {4, {2}};
  gap.segments = {{1, 2, {}}, {4, 4, {}}};
  CHECK_FALSE(validate_record(gap, 4).empty());

  DialogueStateRecord overlap;
  overlap.boundaries = {4, {2}};
  overlap.segments = {{1, 3, {}}, {3, 4, {}}};
  CHECK_FALSE(validate_record(overlap, 4).empty());

  DialogueStateRecord mismatch;
  mismatch.boundaries = {4, {1}};
  mismatch.segments = {{1, 2, {}}, {3, 4, {}}};
  CHECK_FALSE(validate_record(mismatch, 4).empty());
}
