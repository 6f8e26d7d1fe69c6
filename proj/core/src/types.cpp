#include "segdst/types.hpp"

#include <algorithm>

namespace segdst {

Conversation normalize_events(const std::vector<Event>& events, std::string id,
                              std::map<std::string, std::string> source) {
  if (events.empty()) {
    throw Error("normalize_events: empty event list");
  }
  if (events.front().first != Speaker::kUser) {
    throw Error("normalize_events: first event must be a user utterance");
  }

  Conversation conv;
  conv.id = std::move(id);
  conv.source = std::move(source);

  std::string pending_user;
  bool have_user = false;
  for (const auto& [speaker, text] : events) {
    if (speaker == Speaker::kUser) {
      if (have_user) {
        pending_user += '\n';
        pending_user += text;
      } else {
        pending_user = text;
        have_user = true;
      }
    } else {
      if (!have_user) {
        // Consecutive agent utterances: attach to the previous turn's reply.
        if (conv.turns.empty()) {
          throw Error("normalize_events: agent utterance before any user turn");
        }
        auto& agent = conv.turns.back().agent;
        *agent += '\n';
        *agent += text;
        continue;
      }
      Turn turn;
      turn.index = static_cast<int>(conv.turns.size()) + 1;
      turn.user = std::move(pending_user);
      turn.agent = text;
      conv.turns.push_back(std::move(turn));
      pending_user.clear();
      have_user = false;
    }
  }
  if (have_user) {
    Turn turn;
    turn.index = static_cast<int>(conv.turns.size()) + 1;
    turn.user = std::move(pending_user);
    conv.turns.push_back(std::move(turn));
  }
  return conv;
}

std::vector<std::string> validate_record(const DialogueStateRecord& record,
                                         int t) {
  std::vector<std::string> violations;

  if (record.boundaries.length != t) {
    violations.push_back("boundary set length " +
                         std::to_string(record.boundaries.length) +
                         " does not match turn count " + std::to_string(t));
  }
  for (int b : record.boundaries.indices) {
    if (b < 1 || b > t - 1) {
      violations.push_back("boundary index " + std::to_string(b) +
                           " out of range [1, " + std::to_string(t - 1) + "]");
    }
  }

  if (record.segments.empty()) {
    if (t > 0) violations.push_back("no segments for a non-empty conversation");
    return violations;
  }

  int expected_start = 1;
  for (size_t i = 0; i < record.segments.size(); ++i) {
    const auto& seg = record.segments[i];
    if (seg.start > seg.end) {
      violations.push_back("segment " + std::to_string(i + 1) +
                           " has start > end");
      continue;
    }
    if (seg.start > expected_start) {
      violations.push_back("gap at turn " + std::to_string(expected_start));
    } else if (seg.start < expected_start) {
      violations.push_back("overlap at turn " + std::to_string(seg.start));
    }
    expected_start = seg.end + 1;
  }
  if (expected_start != t + 1) {
    if (expected_start < t + 1) {
      violations.push_back("gap at turn " + std::to_string(expected_start));
    } else {
      violations.push_back("segments extend past turn " + std::to_string(t));
    }
  }

  // Segment cut points must coincide with the boundary set.
  std::set<int> cuts;
  for (size_t i = 0; i + 1 < record.segments.size(); ++i) {
    cuts.insert(record.segments[i].end);
  }
  if (cuts != record.boundaries.indices) {
    violations.push_back("segment cut points do not match boundary indices");
  }

  return violations;
}

}  // namespace segdst
