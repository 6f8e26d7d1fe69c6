#pragma once

#include <optional>
#include <string>
#include <vector>

#include "segdst/types.hpp"

namespace segdst {

struct LabeledName {
  std::string name;
  std::string description;

  bool operator==(const LabeledName&) const = default;
};

/// MWOZ-style slot: name is "{domain}-{slot}" (the slot part may contain
/// spaces), with an optional closed value set for categorical slots.
struct SlotSpec {
  std::string name;
  std::string description;
  std::optional<std::vector<std::string>> valid_values;

  bool operator==(const SlotSpec&) const = default;
};

enum class SchemaMode { kOpenDomain, kMwoz };

struct LabelSchema {
  // Fixed to YES/NO; descriptions are part of the prompt contract.
  std::vector<LabeledName> segmentation_labels;
  std::vector<LabeledName> intents;
  std::vector<std::string> domains;
  std::vector<SlotSpec> slots;

  /// Builds a schema with the canonical YES/NO segmentation label
  /// descriptions prefilled.
  static LabelSchema with_default_segmentation_labels();

  /// Loads from the JSON schema file format (see README). Throws Error on
  /// malformed input or invariant violations.
  static LabelSchema from_json_file(const std::string& path);
  static LabelSchema from_json_text(const std::string& text);
  std::string to_json_text() const;

  /// Returns the violated schema invariants for the given mode; empty means
  /// usable. Open-domain mode needs intents and domains; MWOZ mode needs
  /// slots. Names must be unique and non-empty per category.
  std::vector<std::string> validate(SchemaMode mode) const;

  /// Content hash over a canonical serialization; stable across platforms.
  std::string fingerprint() const;

  const SlotSpec* find_slot(const std::string& name) const;

  /// Case-insensitive lookup returning the schema-cased name, or nullopt.
  std::optional<std::string> canonical_intent(const std::string& value) const;
  std::optional<std::string> canonical_domain(const std::string& value) const;
};

}  // namespace segdst
