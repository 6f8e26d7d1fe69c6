#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "segdst/schema.hpp"
#include "segdst/types.hpp"

namespace segdst {

enum class DatasetFormat { kMwoz21, kMwoz24, kDialseg711, kJsonl };

const char* format_name(DatasetFormat format);
DatasetFormat format_from_name(const std::string& name);

/// Gold annotation for one conversation: full segment record, per-turn
/// cumulative belief states, or boundary set only.
using Gold =
    std::variant<DialogueStateRecord, std::vector<TurnSlotState>, BoundarySet>;

struct DatasetBundle {
  std::vector<Conversation> conversations;  // sorted by id
  std::map<std::string, Gold> gold;
  DatasetFormat format = DatasetFormat::kJsonl;

  int total_turns() const;
  const Conversation* find(const std::string& id) const;
};

/// Loads a MWOZ 2.1/2.4-style dialogue JSON file (dialogue id -> {"log":
/// [...]}). Gold cumulative belief states are extracted per user turn from
/// the following system turn's metadata; "not mentioned" and empty values
/// mean slot absence. Values are passed through normalize_value against the
/// given schema (slots missing from the schema normalize with default rules).
DatasetBundle load_mwoz(const std::string& path, const std::string& version,
                        const LabelSchema* schema = nullptr);

/// Loads a DialSeg711-style directory: one dialogue per text file, one
/// utterance per line, topic boundaries marked by separator lines (a run of
/// `separator_char`). Utterances pair into turns; a separator at an odd
/// utterance position is a load error.
DatasetBundle load_dialseg711(const std::string& path,
                              char separator_char = '=');

/// Loads canonical JSONL (one conversation per line, optional gold of any
/// supported kind).
DatasetBundle load_jsonl(const std::string& path);

/// Writes a bundle back to canonical JSONL.
void write_jsonl(const DatasetBundle& bundle, const std::string& path);

/// Deterministic split: conversations sorted by id, shuffled by an explicit
/// Fisher-Yates walk driven by mt19937_64(seed); first n_dev form dev.
std::pair<DatasetBundle, DatasetBundle> split_dev_test(
    const DatasetBundle& bundle, int n_dev, uint64_t seed);

}  // namespace segdst
