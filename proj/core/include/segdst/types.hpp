#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace segdst {

/// Thrown for configuration, IO, and contract violations. Data-level issues
/// (parse failures, invariant violations in model output) are returned as
/// values, never thrown.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class Speaker { kUser, kAgent };

struct Utterance {
  Speaker speaker;
  std::string text;  // preserved verbatim
};

/// One user utterance (possibly merged from consecutive user messages) plus
/// the agent reply that followed it. The agent reply is absent only on an
/// unanswered trailing turn.
struct Turn {
  int index = 0;  // 1-based
  std::string user;
  std::optional<std::string> agent;

  bool operator==(const Turn&) const = default;
};

struct Conversation {
  std::string id;
  std::vector<Turn> turns;
  std::map<std::string, std::string> source;  // dataset name, split, ...

  int turn_count() const { return static_cast<int>(turns.size()); }

  bool operator==(const Conversation&) const = default;
};

/// Boundary indices between adjacent turns: index i means a boundary between
/// turn i and turn i+1, so valid indices are 1..length-1.
struct BoundarySet {
  int length = 0;
  std::set<int> indices;

  bool operator==(const BoundarySet&) const = default;
};

/// Slot-value state attached to one segment [start, end]. In open-domain mode
/// intent and domain live under the reserved slot names "intent" and "domain".
struct SegmentState {
  int start = 0;
  int end = 0;
  std::map<std::string, std::string> slot_values;

  bool operator==(const SegmentState&) const = default;
};

inline constexpr const char* kIntentSlot = "intent";
inline constexpr const char* kDomainSlot = "domain";

/// The joint prediction: segment boundaries plus per-segment states. Segments
/// must partition [1..t] with cut points exactly matching the boundary set.
struct DialogueStateRecord {
  BoundarySet boundaries;
  std::vector<SegmentState> segments;

  bool operator==(const DialogueStateRecord&) const = default;
};

/// Cumulative belief state as of one turn (MWOZ mode).
struct TurnSlotState {
  int turn_index = 0;
  std::map<std::string, std::string> state;

  bool operator==(const TurnSlotState&) const = default;
};

using Event = std::pair<Speaker, std::string>;

/// Groups consecutive user utterances (joined by a single newline) into one
/// turn; each agent utterance closes the current turn. A trailing user run
/// yields a final turn with an absent agent reply.
/// Throws Error on an empty event list or when the first event is an agent
/// utterance (malformed source data).
Conversation normalize_events(const std::vector<Event>& events,
                              std::string id = {},
                              std::map<std::string, std::string> source = {});

/// Returns the list of violated invariants for a record against a t-turn
/// conversation; empty means valid.
std::vector<std::string> validate_record(const DialogueStateRecord& record,
                                         int t);

}  // namespace segdst
