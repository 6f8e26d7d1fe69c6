#include "segdst/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "segdst/detail/sha256.hpp"
#include "segdst/detail/text.hpp"

namespace segdst {

using nlohmann::json;

namespace {

constexpr const char* kYesDescription =
    "The current turn has **some or any** topical/subtopical relation to the "
    "preceding conversation context.";
constexpr const char* kNoDescription =
    "The current turn has **absolutely no** topical/subtopical relation to "
    "the preceding conversation context OR is the first turn in the "
    "conversation, marking the beginning of a new dialogue segment.";

void check_unique(const std::vector<std::string>& names,
                  const std::string& category,
                  std::vector<std::string>& violations) {
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) {
      violations.push_back("empty name in " + category);
      continue;
    }
    if (!seen.insert(name).second) {
      violations.push_back("duplicate " + category + " name: " + name);
    }
  }
}

}  // namespace

LabelSchema LabelSchema::with_default_segmentation_labels() {
  LabelSchema schema;
  schema.segmentation_labels = {{"YES", kYesDescription},
                                {"NO", kNoDescription}};
  return schema;
}

LabelSchema LabelSchema::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("schema: invalid JSON: ") + e.what());
  }
  LabelSchema schema = with_default_segmentation_labels();
  try {
    if (doc.contains("segmentation_labels")) {
      schema.segmentation_labels.clear();
      for (const auto& item : doc.at("segmentation_labels")) {
        schema.segmentation_labels.push_back(
            {item.at("name").get<std::string>(),
             item.at("description").get<std::string>()});
      }
    }
    if (doc.contains("intents")) {
      for (const auto& item : doc.at("intents")) {
        schema.intents.push_back({item.at("name").get<std::string>(),
                                  item.at("description").get<std::string>()});
      }
    }
    if (doc.contains("domains")) {
      for (const auto& item : doc.at("domains")) {
        schema.domains.push_back(item.get<std::string>());
      }
    }
    if (doc.contains("slots")) {
      for (const auto& item : doc.at("slots")) {
        SlotSpec slot;
        slot.name = item.at("name").get<std::string>();
        slot.description = item.value("description", std::string{});
        if (item.contains("valid_values")) {
          slot.valid_values =
              item.at("valid_values").get<std::vector<std::string>>();
        }
        schema.slots.push_back(std::move(slot));
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("schema: malformed field: ") + e.what());
  }
  return schema;
}

LabelSchema LabelSchema::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("schema: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string LabelSchema::to_json_text() const {
  json doc;
  doc["segmentation_labels"] = json::array();
  for (const auto& label : segmentation_labels) {
    doc["segmentation_labels"].push_back(
        {{"name", label.name}, {"description", label.description}});
  }
  doc["intents"] = json::array();
  for (const auto& intent : intents) {
    doc["intents"].push_back(
        {{"name", intent.name}, {"description", intent.description}});
  }
  doc["domains"] = domains;
  doc["slots"] = json::array();
  for (const auto& slot : slots) {
    json entry = {{"name", slot.name}, {"description", slot.description}};
    if (slot.valid_values) entry["valid_values"] = *slot.valid_values;
    doc["slots"].push_back(std::move(entry));
  }
  return doc.dump(2);
}

std::vector<std::string> LabelSchema::validate(SchemaMode mode) const {
  std::vector<std::string> violations;

  std::vector<std::string> seg_names;
  for (const auto& label : segmentation_labels) seg_names.push_back(label.name);
  if (seg_names != std::vector<std::string>{"YES", "NO"}) {
    violations.push_back("segmentation labels must be exactly {YES, NO}");
  }

  std::vector<std::string> intent_names;
  for (const auto& intent : intents) intent_names.push_back(intent.name);
  check_unique(intent_names, "intent", violations);
  check_unique(domains, "domain", violations);
  std::vector<std::string> slot_names;
  for (const auto& slot : slots) slot_names.push_back(slot.name);
  check_unique(slot_names, "slot", violations);

  if (mode == SchemaMode::kOpenDomain) {
    if (intents.empty()) violations.push_back("open-domain mode requires intents");
    if (domains.empty()) violations.push_back("open-domain mode requires domains");
  } else {
    if (slots.empty()) violations.push_back("MWOZ mode requires slots");
  }
  return violations;
}

std::string LabelSchema::fingerprint() const {
  // Canonical serialization: compact JSON with our own stable field order.
  json doc;
  doc["s"] = json::array();
  for (const auto& label : segmentation_labels) {
    doc["s"].push_back({label.name, label.description});
  }
  doc["i"] = json::array();
  for (const auto& intent : intents) {
    doc["i"].push_back({intent.name, intent.description});
  }
  doc["d"] = domains;
  doc["v"] = json::array();
  for (const auto& slot : slots) {
    json entry = json::array({slot.name, slot.description});
    if (slot.valid_values) entry.push_back(*slot.valid_values);
    doc["v"].push_back(std::move(entry));
  }
  return detail::Sha256::hex(doc.dump());
}

const SlotSpec* LabelSchema::find_slot(const std::string& name) const {
  for (const auto& slot : slots) {
    if (slot.name == name) return &slot;
  }
  return nullptr;
}

std::optional<std::string> LabelSchema::canonical_intent(
    const std::string& value) const {
  for (const auto& intent : intents) {
    if (detail::iequals(intent.name, value)) return intent.name;
  }
  return std::nullopt;
}

std::optional<std::string> LabelSchema::canonical_domain(
    const std::string& value) const {
  for (const auto& domain : domains) {
    if (detail::iequals(domain, value)) return domain;
  }
  return std::nullopt;
}

}  // namespace segdst
