#pragma once

#include <string>
#include <vector>

#include "segdst/parse.hpp"
#include "segdst/schema.hpp"
#include "segdst/types.hpp"

namespace segdst {

struct ReconstructionResult {
  DialogueStateRecord record;
  std::vector<std::string> diagnostics;
};

/// Derives the joint prediction from per-turn annotations: boundaries come
/// from NO labels (boundary i-1 when turn i >= 2 says NO), segments are the
/// maximal runs between boundaries, and each segment's intent/domain is the
/// majority label among its turns (ties broken by the earliest turn's label).
/// Turns listed in `failures` contribute no vote and continue the current
/// segment (relation YES) with a diagnostic.
ReconstructionResult reconstruct_segments(
    const std::vector<TurnAnnotation>& annotations,
    const std::vector<ParseNote>& failures, int t);

/// Applies the most-recent-wins rule within each turn's raw entry list and
/// orders states by turn index. Across turns the model's own cumulative list
/// is trusted as-is.
std::vector<TurnSlotState> resolve_cumulative_state(
    const std::vector<RawTurnSlots>& raw);

struct NormalizeOutcome {
  std::string value;
  std::vector<std::string> diagnostics;
};

/// Canonicalizes a slot value: lowercase, trim, collapse whitespace, map the
/// dontcare synonym set, convert matching time strings to 24-hour HH:MM, and
/// snap categorical slots to a valid value on case-insensitive match. A
/// categorical value with no match is kept verbatim with a diagnostic.
NormalizeOutcome normalize_value(const SlotSpec& slot, const std::string& value);

/// Convenience wrapper discarding diagnostics.
std::string normalize_value_text(const SlotSpec& slot, const std::string& value);

}  // namespace segdst
