#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "segdst/prompt.hpp"
#include "segdst/schema.hpp"
#include "segdst/types.hpp"

namespace segdst {

enum class Relation { kYes, kNo };

inline const char* relation_name(Relation r) {
  return r == Relation::kYes ? "YES" : "NO";
}

/// Raw per-turn parse result for the open-domain output dialects.
struct TurnAnnotation {
  int turn_index = 0;
  std::optional<std::string> summary;  // present iff the variant includes PAR
  Relation preceding_topical_relation = Relation::kNo;
  std::optional<std::string> intent;  // canonicalized to schema casing
  std::optional<std::string> domain;

  bool operator==(const TurnAnnotation&) const = default;
};

struct ParseNote {
  int turn_index = 0;
  std::string message;

  bool operator==(const ParseNote&) const = default;
};

/// Per-conversation parse outcome. Annotations and failures together cover
/// turn indices 1..t exactly once; failures are scored incorrect downstream.
struct ParseReport {
  std::vector<TurnAnnotation> annotations;
  std::vector<TurnSlotState> turn_states;  // MWOZ mode
  std::vector<ParseNote> recovered;
  std::vector<ParseNote> failures;

  bool failed(int turn_index) const;
};

/// Result of decomposing one ['{SLOT}-{value}'] list. `entries` preserves
/// order and duplicates; `values` applies the most-recent-wins rule.
struct SlotListParse {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, std::string> values;
  std::vector<std::string> failures;  // entries that did not decompose
};

/// Ordered raw slot entries for one turn, before conflict resolution.
struct RawTurnSlots {
  int turn_index = 0;
  std::vector<std::pair<std::string, std::string>> entries;
};

/// Parses the hierarchical XML output dialect. Lenient: tolerates prose and
/// code fences around the XML and case differences in label values. Turn 1 is
/// coerced to preceding_topical_relation = NO with a recovery note if the
/// model emitted YES. Duplicate turn blocks: first occurrence wins.
ParseReport parse_s3dst_output(const std::string& text, int t,
                               const LabelSchema& schema,
                               PromptVariant variant);

/// Parses IC-DST SQL rows: `T{i}. SELECT * from states WHERE
/// preceding_topical_relation = X AND intent = Y AND domain = Z;` with
/// optional quoting, keyword case differences, and a missing semicolon.
ParseReport parse_icdst_output(const std::string& text, int t,
                               const LabelSchema& schema);

/// Decomposes a bracketed, quoted ['{SLOT}-{value}'] list via longest-prefix
/// slot-name matching. Requires a schema with non-empty slots.
SlotListParse parse_slot_value_list(const std::string& text,
                                    const LabelSchema& schema);

/// Parses the MWOZ output dialect: per-turn <T{i}> blocks whose
/// <updated_slot_value> carries the cumulative slot-value list.
ParseReport parse_mwoz_output(const std::string& text, int t,
                              const LabelSchema& schema);

/// Reads conversation XML produced by render_conversation_xml back into
/// turns. Used for round-trip checks and fixture tooling.
Conversation parse_conversation_xml(const std::string& text);

/// Serializes annotations back to the variant's output dialect (compliant
/// form). Inverse of the corresponding parser on valid annotations.
std::string serialize_s3dst_output(const std::vector<TurnAnnotation>& annotations,
                                   PromptVariant variant);
std::string serialize_icdst_output(const std::vector<TurnAnnotation>& annotations);
std::string serialize_mwoz_output(const std::vector<TurnSlotState>& states,
                                  const Conversation& conv);

}  // namespace segdst
