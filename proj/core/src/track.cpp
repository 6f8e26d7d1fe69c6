#include "segdst/track.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "segdst/detail/text.hpp"

namespace segdst {

namespace {

/// Majority label with earliest-occurrence tie-break.
std::string majority_label(const std::vector<std::string>& labels) {
  std::map<std::string, int> counts;
  for (const auto& label : labels) ++counts[label];
  int best_count = 0;
  for (const auto& [label, count] : counts) best_count = std::max(best_count, count);
  for (const auto& label : labels) {
    if (counts[label] == best_count) return label;
  }
  return {};
}

std::optional<std::string> canonical_time(const std::string& value) {
  static const std::regex hm_re(R"(^(\d{1,2})[:.](\d{2})(?:\s*(am|pm))?$)");
  static const std::regex h_re(R"(^(\d{1,2})\s*(am|pm)$)");
  std::smatch m;
  int hour = -1;
  int minute = 0;
  std::string meridiem;
  if (std::regex_match(value, m, hm_re)) {
    hour = std::stoi(m[1].str());
    minute = std::stoi(m[2].str());
    meridiem = m[3].str();
  } else if (std::regex_match(value, m, h_re)) {
    hour = std::stoi(m[1].str());
    meridiem = m[2].str();
  } else {
    return std::nullopt;
  }
  if (minute > 59) return std::nullopt;
  if (!meridiem.empty()) {
    if (hour < 1 || hour > 12) return std::nullopt;
    if (meridiem == "am") {
      if (hour == 12) hour = 0;
    } else {
      if (hour != 12) hour += 12;
    }
  } else if (hour > 23) {
    return std::nullopt;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", hour, minute);
  return std::string(buf);
}

}  // namespace

ReconstructionResult reconstruct_segments(
    const std::vector<TurnAnnotation>& annotations,
    const std::vector<ParseNote>& failures, int t) {
  if (t <= 0) throw Error("reconstruct_segments: t must be >= 1");

  ReconstructionResult result;

  std::map<int, const TurnAnnotation*> by_index;
  for (const auto& ann : annotations) by_index[ann.turn_index] = &ann;

  std::vector<Relation> relations(static_cast<size_t>(t) + 1, Relation::kYes);
  for (int i = 1; i <= t; ++i) {
    auto it = by_index.find(i);
    if (it != by_index.end()) {
      relations[static_cast<size_t>(i)] = it->second->preceding_topical_relation;
    } else {
      // A failed turn defaults to YES: a spurious boundary corrupts two
      // segments, a missed one corrupts only its own.
      result.diagnostics.push_back("turn " + std::to_string(i) +
                                   " unparsed, relation defaulted to YES");
    }
  }
  relations[1] = Relation::kNo;

  DialogueStateRecord record;
  record.boundaries.length = t;
  for (int i = 2; i <= t; ++i) {
    if (relations[static_cast<size_t>(i)] == Relation::kNo) {
      record.boundaries.indices.insert(i - 1);
    }
  }

  int start = 1;
  for (int i = 1; i <= t; ++i) {
    bool is_last = (i == t);
    bool boundary_after = record.boundaries.indices.count(i) > 0;
    if (!is_last && !boundary_after) continue;

    SegmentState segment;
    segment.start = start;
    segment.end = i;
    std::vector<std::string> intents;
    std::vector<std::string> domains;
    for (int turn = start; turn <= i; ++turn) {
      auto it = by_index.find(turn);
      if (it == by_index.end()) continue;
      if (it->second->intent) intents.push_back(*it->second->intent);
      if (it->second->domain) domains.push_back(*it->second->domain);
    }
    if (!intents.empty()) segment.slot_values[kIntentSlot] = majority_label(intents);
    if (!domains.empty()) segment.slot_values[kDomainSlot] = majority_label(domains);
    record.segments.push_back(std::move(segment));
    start = i + 1;
  }

  result.record = std::move(record);
  return result;
}

std::vector<TurnSlotState> resolve_cumulative_state(
    const std::vector<RawTurnSlots>& raw) {
  std::vector<TurnSlotState> states;
  states.reserve(raw.size());
  for (const auto& turn : raw) {
    TurnSlotState state;
    state.turn_index = turn.turn_index;
    for (const auto& [slot, value] : turn.entries) {
      state.state[slot] = value;  // most recent value wins
    }
    states.push_back(std::move(state));
  }
  std::sort(states.begin(), states.end(),
            [](const TurnSlotState& a, const TurnSlotState& b) {
              return a.turn_index < b.turn_index;
            });
  return states;
}

NormalizeOutcome normalize_value(const SlotSpec& slot,
                                 const std::string& value) {
  NormalizeOutcome outcome;
  std::string v = detail::to_lower(detail::collapse_whitespace(value));

  static const std::set<std::string> kDontcare = {
      "dont care", "don't care", "do not care", "dontcare"};
  if (kDontcare.count(v)) v = "dontcare";

  if (auto time = canonical_time(v)) v = *time;

  if (slot.valid_values) {
    bool matched = false;
    for (const auto& valid : *slot.valid_values) {
      if (detail::iequals(valid, v)) {
        v = detail::to_lower(valid);
        matched = true;
        break;
      }
    }
    if (!matched) {
      outcome.diagnostics.push_back("value '" + v +
                                    "' not in valid values for slot " +
                                    slot.name);
    }
  }
  outcome.value = std::move(v);
  return outcome;
}

std::string normalize_value_text(const SlotSpec& slot,
                                 const std::string& value) {
  return normalize_value(slot, value).value;
}

}  // namespace segdst
