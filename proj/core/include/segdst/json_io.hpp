#pragma once

// JSON (de)serialization for the canonical JSONL record shapes shared by the
// dataset loaders, the converter, and the run predictions file.

#include <json.hpp>

#include "segdst/data.hpp"
#include "segdst/types.hpp"

namespace segdst {

nlohmann::json conversation_to_json(const Conversation& conv);
Conversation conversation_from_json(const nlohmann::json& doc);

nlohmann::json boundaries_to_json(const BoundarySet& boundaries);
BoundarySet boundaries_from_json(const nlohmann::json& doc, int length);

nlohmann::json record_to_json(const DialogueStateRecord& record);
DialogueStateRecord record_from_json(const nlohmann::json& doc, int length);

nlohmann::json turn_states_to_json(const std::vector<TurnSlotState>& states);
std::vector<TurnSlotState> turn_states_from_json(const nlohmann::json& doc);

nlohmann::json gold_to_json(const Gold& gold);
Gold gold_from_json(const nlohmann::json& doc, int length);

}  // namespace segdst
