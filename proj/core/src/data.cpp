#include "segdst/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "segdst/detail/text.hpp"
#include "segdst/json_io.hpp"
#include "segdst/track.hpp"

namespace segdst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int gold_length(const Gold& gold) {
  if (const auto* record = std::get_if<DialogueStateRecord>(&gold)) {
    return record->boundaries.length;
  }
  if (const auto* states = std::get_if<std::vector<TurnSlotState>>(&gold)) {
    return static_cast<int>(states->size());
  }
  return std::get<BoundarySet>(gold).length;
}

void check_bundle(const DatasetBundle& bundle) {
  for (const auto& [id, gold] : bundle.gold) {
    const Conversation* conv = bundle.find(id);
    if (!conv) {
      throw Error("dataset: gold entry for unknown conversation " + id);
    }
    if (gold_length(gold) != conv->turn_count()) {
      throw Error("dataset: gold turn count mismatch for " + id);
    }
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool absent_value(const std::string& value) {
  return value.empty() || value == "not mentioned" || value == "none";
}

}  // namespace

const char* format_name(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kMwoz21: return "mwoz21";
    case DatasetFormat::kMwoz24: return "mwoz24";
    case DatasetFormat::kDialseg711: return "dialseg711";
    case DatasetFormat::kJsonl: return "jsonl";
  }
  return "unknown";
}

DatasetFormat format_from_name(const std::string& name) {
  if (name == "mwoz21") return DatasetFormat::kMwoz21;
  if (name == "mwoz24") return DatasetFormat::kMwoz24;
  if (name == "dialseg711") return DatasetFormat::kDialseg711;
  if (name == "jsonl") return DatasetFormat::kJsonl;
  throw Error("unknown dataset format: " + name);
}

int DatasetBundle::total_turns() const {
  int total = 0;
  for (const auto& conv : conversations) total += conv.turn_count();
  return total;
}

const Conversation* DatasetBundle::find(const std::string& id) const {
  auto it = std::lower_bound(
      conversations.begin(), conversations.end(), id,
      [](const Conversation& conv, const std::string& key) {
        return conv.id < key;
      });
  if (it != conversations.end() && it->id == id) return &*it;
  return nullptr;
}

DatasetBundle load_mwoz(const std::string& path, const std::string& version,
                        const LabelSchema* schema) {
  if (version != "2.1" && version != "2.4") {
    throw Error("load_mwoz: unknown version " + version);
  }
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("load_mwoz: invalid JSON in " + path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error("load_mwoz: expected an object of dialogue id -> dialogue");
  }

  DatasetBundle bundle;
  bundle.format =
      version == "2.1" ? DatasetFormat::kMwoz21 : DatasetFormat::kMwoz24;

  for (const auto& [dialogue_id, dialogue] : doc.items()) {
    if (!dialogue.contains("log") || !dialogue["log"].is_array()) {
      throw Error("load_mwoz: dialogue " + dialogue_id + " has no log");
    }
    const auto& log = dialogue["log"];
    if (log.size() % 2 != 0) {
      throw Error("load_mwoz: dialogue " + dialogue_id +
                  " has an odd number of log entries");
    }

    Conversation conv;
    conv.id = dialogue_id;
    conv.source = {{"dataset", "mwoz"}, {"version", version}};
    std::vector<TurnSlotState> states;

    for (size_t i = 0; i + 1 < log.size(); i += 2) {
      Turn turn;
      turn.index = static_cast<int>(i / 2) + 1;
      turn.user = log[i].value("text", std::string{});
      turn.agent = log[i + 1].value("text", std::string{});
      conv.turns.push_back(std::move(turn));

      TurnSlotState state;
      state.turn_index = static_cast<int>(i / 2) + 1;
      if (log[i + 1].contains("metadata") && log[i + 1]["metadata"].is_object()) {
        for (const auto& [domain, frames] : log[i + 1]["metadata"].items()) {
          auto extract = [&](const json& section, const std::string& prefix) {
            if (!section.is_object()) return;
            for (const auto& [slot, raw] : section.items()) {
              if (!raw.is_string()) continue;  // "booked" arrays and the like
              std::string value = raw.get<std::string>();
              if (absent_value(value)) continue;
              std::string name = domain + "-" + prefix + slot;
              const SlotSpec* spec = schema ? schema->find_slot(name) : nullptr;
              SlotSpec fallback;
              fallback.name = name;
              state.state[name] =
                  normalize_value_text(spec ? *spec : fallback, value);
            }
          };
          if (frames.contains("semi")) extract(frames["semi"], "");
          if (frames.contains("book")) extract(frames["book"], "book ");
        }
      } else {
        throw Error("load_mwoz: dialogue " + dialogue_id +
                    " system turn missing metadata");
      }
      states.push_back(std::move(state));
    }

    bundle.gold.emplace(conv.id, std::move(states));
    bundle.conversations.push_back(std::move(conv));
  }

  std::sort(bundle.conversations.begin(), bundle.conversations.end(),
            [](const Conversation& a, const Conversation& b) {
              return a.id < b.id;
            });
  check_bundle(bundle);
  return bundle;
}

DatasetBundle load_dialseg711(const std::string& path, char separator_char) {
  if (!fs::is_directory(path)) {
    throw Error("load_dialseg711: not a directory: " + path);
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  DatasetBundle bundle;
  bundle.format = DatasetFormat::kDialseg711;

  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw Error("load_dialseg711: cannot open " + file.string());

    std::vector<std::string> utterances;
    std::set<int> utterance_boundaries;  // boundary after utterance n
    std::string line;
    while (std::getline(in, line)) {
      std::string trimmed = detail::trim(line);
      if (trimmed.empty()) continue;
      bool is_separator =
          trimmed.size() >= 3 &&
          std::all_of(trimmed.begin(), trimmed.end(),
                      [&](char c) { return c == separator_char; });
      if (is_separator) {
        if (utterances.empty()) continue;  // leading separator is noise
        utterance_boundaries.insert(static_cast<int>(utterances.size()));
      } else {
        utterances.push_back(trimmed);
      }
    }
    if (utterances.empty()) continue;

    // Boundaries between the two utterances of a user-agent pair are
    // unrepresentable at turn granularity and rejected.
    for (int b : utterance_boundaries) {
      if (b % 2 != 0) {
        throw Error("load_dialseg711: separator inside a turn pair in " +
                    file.filename().string());
      }
    }

    Conversation conv;
    conv.id = file.filename().string();
    conv.source = {{"dataset", "dialseg711"}};
    for (size_t i = 0; i < utterances.size(); i += 2) {
      Turn turn;
      turn.index = static_cast<int>(i / 2) + 1;
      turn.user = utterances[i];
      if (i + 1 < utterances.size()) turn.agent = utterances[i + 1];
      conv.turns.push_back(std::move(turn));
    }

    BoundarySet boundaries;
    boundaries.length = conv.turn_count();
    for (int b : utterance_boundaries) {
      if (b / 2 >= 1 && b / 2 <= boundaries.length - 1) {
        boundaries.indices.insert(b / 2);
      }
    }
    bundle.gold.emplace(conv.id, std::move(boundaries));
    bundle.conversations.push_back(std::move(conv));
  }

  std::sort(bundle.conversations.begin(), bundle.conversations.end(),
            [](const Conversation& a, const Conversation& b) {
              return a.id < b.id;
            });
  check_bundle(bundle);
  return bundle;
}

DatasetBundle load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_jsonl: cannot open " + path);

  DatasetBundle bundle;
  bundle.format = DatasetFormat::kJsonl;
  std::set<std::string> seen_ids;

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (detail::trim(line).empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("load_jsonl: malformed line " + std::to_string(line_number) +
                  ": " + e.what());
    }
    Conversation conv;
    try {
      conv = conversation_from_json(doc);
    } catch (const std::exception& e) {
      throw Error("load_jsonl: line " + std::to_string(line_number) + ": " +
                  e.what());
    }
    if (!seen_ids.insert(conv.id).second) {
      throw Error("load_jsonl: duplicate conversation id " + conv.id);
    }
    if (doc.contains("gold") && !doc["gold"].is_null()) {
      try {
        bundle.gold.emplace(conv.id,
                            gold_from_json(doc["gold"], conv.turn_count()));
      } catch (const std::exception& e) {
        throw Error("load_jsonl: line " + std::to_string(line_number) +
                    ": gold: " + e.what());
      }
    }
    bundle.conversations.push_back(std::move(conv));
  }

  std::sort(bundle.conversations.begin(), bundle.conversations.end(),
            [](const Conversation& a, const Conversation& b) {
              return a.id < b.id;
            });
  check_bundle(bundle);
  return bundle;
}

void write_jsonl(const DatasetBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_jsonl: cannot open " + path);
  for (const auto& conv : bundle.conversations) {
    json doc = conversation_to_json(conv);
    auto it = bundle.gold.find(conv.id);
    doc["gold"] = it != bundle.gold.end() ? gold_to_json(it->second)
                                          : json(nullptr);
    out << doc.dump() << '\n';
  }
}

std::pair<DatasetBundle, DatasetBundle> split_dev_test(
    const DatasetBundle& bundle, int n_dev, uint64_t seed) {
  int n = static_cast<int>(bundle.conversations.size());
  if (n_dev < 0 || n_dev >= n) {
    throw Error("split_dev_test: n_dev out of range");
  }

  // Explicit Fisher-Yates over ids sorted ascending, driven by mt19937_64;
  // both are pinned by the standard, so the partition is platform-stable.
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = n - 1; i > 0; --i) {
    auto j = static_cast<int>(rng() % static_cast<uint64_t>(i + 1));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }

  DatasetBundle dev, test;
  dev.format = test.format = bundle.format;
  for (int i = 0; i < n; ++i) {
    const auto& conv = bundle.conversations[static_cast<size_t>(order[static_cast<size_t>(i)])];
    DatasetBundle& target = i < n_dev ? dev : test;
    target.conversations.push_back(conv);
    auto it = bundle.gold.find(conv.id);
    if (it != bundle.gold.end()) target.gold.emplace(conv.id, it->second);
  }
  auto by_id = [](const Conversation& a, const Conversation& b) {
    return a.id < b.id;
  };
  std::sort(dev.conversations.begin(), dev.conversations.end(), by_id);
  std::sort(test.conversations.begin(), test.conversations.end(), by_id);
  return {std::move(dev), std::move(test)};
}

}  // namespace segdst
