#include "segdst/json_io.hpp"

namespace segdst {

using nlohmann::json;

json conversation_to_json(const Conversation& conv) {
  json doc;
  doc["id"] = conv.id;
  doc["turns"] = json::array();
  for (const auto& turn : conv.turns) {
    json t;
    t["user"] = turn.user;
    t["agent"] = turn.agent ? json(*turn.agent) : json(nullptr);
    doc["turns"].push_back(std::move(t));
  }
  if (!conv.source.empty()) doc["source"] = conv.source;
  return doc;
}

Conversation conversation_from_json(const json& doc) {
  Conversation conv;
  conv.id = doc.at("id").get<std::string>();
  const auto& turns = doc.at("turns");
  if (!turns.is_array() || turns.empty()) {
    throw Error("conversation " + conv.id + " has no turns");
  }
  int index = 0;
  for (const auto& t : turns) {
    Turn turn;
    turn.index = ++index;
    turn.user = t.at("user").get<std::string>();
    if (turn.user.empty()) {
      throw Error("conversation " + conv.id + " turn " +
                  std::to_string(index) + " has empty user text");
    }
    if (t.contains("agent") && !t["agent"].is_null()) {
      turn.agent = t["agent"].get<std::string>();
    }
    conv.turns.push_back(std::move(turn));
  }
  for (size_t i = 0; i + 1 < conv.turns.size(); ++i) {
    if (!conv.turns[i].agent) {
      throw Error("conversation " + conv.id +
                  ": agent may be absent only on the final turn");
    }
  }
  if (doc.contains("source") && doc["source"].is_object()) {
    conv.source = doc["source"].get<std::map<std::string, std::string>>();
  }
  return conv;
}

json boundaries_to_json(const BoundarySet& boundaries) {
  return json(std::vector<int>(boundaries.indices.begin(),
                               boundaries.indices.end()));
}

BoundarySet boundaries_from_json(const json& doc, int length) {
  BoundarySet boundaries;
  boundaries.length = length;
  for (const auto& b : doc) {
    int index = b.get<int>();
    if (index < 1 || index > length - 1) {
      throw Error("boundary index " + std::to_string(index) + " out of range");
    }
    boundaries.indices.insert(index);
  }
  return boundaries;
}

json record_to_json(const DialogueStateRecord& record) {
  json doc;
  doc["boundaries"] = boundaries_to_json(record.boundaries);
  doc["segments"] = json::array();
  for (const auto& segment : record.segments) {
    doc["segments"].push_back({{"start", segment.start},
                               {"end", segment.end},
                               {"state", segment.slot_values}});
  }
  return doc;
}

DialogueStateRecord record_from_json(const json& doc, int length) {
  DialogueStateRecord record;
  record.boundaries = boundaries_from_json(doc.at("boundaries"), length);
  for (const auto& s : doc.at("segments")) {
    SegmentState segment;
    segment.start = s.at("start").get<int>();
    segment.end = s.at("end").get<int>();
    if (s.contains("state")) {
      segment.slot_values =
          s["state"].get<std::map<std::string, std::string>>();
    }
    record.segments.push_back(std::move(segment));
  }
  auto violations = validate_record(record, length);
  if (!violations.empty()) {
    throw Error("invalid gold record: " + violations.front());
  }
  return record;
}

json turn_states_to_json(const std::vector<TurnSlotState>& states) {
  json doc = json::array();
  for (const auto& state : states) doc.push_back(state.state);
  return doc;
}

std::vector<TurnSlotState> turn_states_from_json(const json& doc) {
  std::vector<TurnSlotState> states;
  int index = 0;
  for (const auto& s : doc) {
    TurnSlotState state;
    state.turn_index = ++index;
    state.state = s.get<std::map<std::string, std::string>>();
    states.push_back(std::move(state));
  }
  return states;
}

json gold_to_json(const Gold& gold) {
  json doc;
  if (const auto* record = std::get_if<DialogueStateRecord>(&gold)) {
    doc = record_to_json(*record);
    doc["kind"] = "segments";
  } else if (const auto* states = std::get_if<std::vector<TurnSlotState>>(&gold)) {
    doc["kind"] = "turn_states";
    doc["states"] = turn_states_to_json(*states);
  } else {
    doc["kind"] = "boundaries";
    doc["boundaries"] = boundaries_to_json(std::get<BoundarySet>(gold));
  }
  return doc;
}

Gold gold_from_json(const json& doc, int length) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "segments") return record_from_json(doc, length);
  if (kind == "turn_states") {
    auto states = turn_states_from_json(doc.at("states"));
    if (static_cast<int>(states.size()) != length) {
      throw Error("turn_states gold length mismatch");
    }
    return states;
  }
  if (kind == "boundaries") {
    return boundaries_from_json(doc.at("boundaries"), length);
  }
  throw Error("unknown gold kind: " + kind);
}

}  // namespace segdst
