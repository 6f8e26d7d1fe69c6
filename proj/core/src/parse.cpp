#include "segdst/parse.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "segdst/detail/text.hpp"
#include "segdst/track.hpp"

namespace segdst {

namespace {

using detail::iequals;
using detail::trim;
using detail::xml_escape;
using detail::xml_unescape;

/// Finds the first <T{i}>...</T{i}> block; reports how many opening tags for
/// that index exist (duplicate blocks are degenerate repetition).
struct BlockScan {
  std::optional<std::string> content;
  int occurrences = 0;
};

BlockScan find_turn_block(const std::string& text, int index) {
  BlockScan scan;
  const std::string open = "<T" + std::to_string(index) + ">";
  const std::string close = "</T" + std::to_string(index) + ">";
  size_t pos = 0;
  while ((pos = text.find(open, pos)) != std::string::npos) {
    ++scan.occurrences;
    if (!scan.content) {
      size_t begin = pos + open.size();
      size_t end = text.find(close, begin);
      if (end != std::string::npos) {
        scan.content = text.substr(begin, end - begin);
      }
    }
    pos += open.size();
  }
  return scan;
}

/// Lenient single-tag extraction: matches only the known tag name and treats
/// everything between the pair as raw text.
std::optional<std::string> extract_tag(const std::string& block,
                                       const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  size_t begin = block.find(open);
  if (begin == std::string::npos) return std::nullopt;
  begin += open.size();
  size_t end = block.find(close, begin);
  if (end == std::string::npos) return std::nullopt;
  return xml_unescape(block.substr(begin, end - begin));
}

/// Removes markdown code fences; the XML between them is untouched.
std::string strip_code_fences(const std::string& text, bool& stripped) {
  if (text.find("```") == std::string::npos) return text;
  stripped = true;
  std::ostringstream out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).rfind("```", 0) == 0) continue;
    out << line << '\n';
  }
  return out.str();
}

std::optional<Relation> parse_relation(const std::string& value) {
  auto v = trim(value);
  if (iequals(v, "YES")) return Relation::kYes;
  if (iequals(v, "NO")) return Relation::kNo;
  return std::nullopt;
}

std::string strip_quotes(std::string value) {
  value = trim(value);
  if (value.size() >= 2) {
    char first = value.front();
    char last = value.back();
    if ((first == '\'' && last == '\'') || (first == '"' && last == '"')) {
      return value.substr(1, value.size() - 2);
    }
  }
  return value;
}

}  // namespace

bool ParseReport::failed(int turn_index) const {
  return std::any_of(failures.begin(), failures.end(), [&](const ParseNote& n) {
    return n.turn_index == turn_index;
  });
}

ParseReport parse_s3dst_output(const std::string& text, int t,
                               const LabelSchema& schema,
                               PromptVariant variant) {
  if (t < 1) throw Error("parse_s3dst_output: t must be >= 1");

  ParseReport report;
  bool stripped = false;
  const std::string body = strip_code_fences(text, stripped);
  if (stripped) report.recovered.push_back({0, "stripped wrapper"});

  const bool want_summary = variant_has_summary(variant);
  const bool want_relation = variant_has_segmentation(variant);
  const bool want_labels = variant_has_intent_domain(variant);

  for (int i = 1; i <= t; ++i) {
    auto block = find_turn_block(body, i);
    if (!block.content) {
      report.failures.push_back({i, "turn block absent"});
      continue;
    }
    if (block.occurrences > 1) {
      report.recovered.push_back({i, "duplicate turn block, first occurrence wins"});
    }

    TurnAnnotation ann;
    ann.turn_index = i;

    if (want_summary) {
      if (auto summary = extract_tag(*block.content, "summary")) {
        ann.summary = trim(*summary);
      } else {
        report.recovered.push_back({i, "missing summary"});
      }
    }

    if (want_relation) {
      auto raw = extract_tag(*block.content, "preceding_topical_relation");
      if (!raw) {
        report.failures.push_back({i, "missing preceding_topical_relation"});
        continue;
      }
      auto relation = parse_relation(*raw);
      if (!relation) {
        report.failures.push_back(
            {i, "unknown preceding_topical_relation: " + trim(*raw)});
        continue;
      }
      ann.preceding_topical_relation = *relation;
      if (i == 1 && ann.preceding_topical_relation == Relation::kYes) {
        // Turn 1 opens a new segment by definition.
        ann.preceding_topical_relation = Relation::kNo;
        report.recovered.push_back({1, "coerced turn-1 relation to NO"});
      }
    } else {
      // Turn-by-turn mode carries no segmentation labels; each turn stands
      // alone so per-turn intent/domain survive reconstruction.
      ann.preceding_topical_relation = Relation::kNo;
    }

    if (want_labels) {
      auto raw_intent = extract_tag(*block.content, "intent");
      if (!raw_intent) {
        report.failures.push_back({i, "missing intent"});
        continue;
      }
      auto intent = schema.canonical_intent(trim(*raw_intent));
      if (!intent) {
        report.failures.push_back({i, "unknown intent: " + trim(*raw_intent)});
        continue;
      }
      auto raw_domain = extract_tag(*block.content, "domain");
      if (!raw_domain) {
        report.failures.push_back({i, "missing domain"});
        continue;
      }
      auto domain = schema.canonical_domain(trim(*raw_domain));
      if (!domain) {
        report.failures.push_back({i, "unknown domain: " + trim(*raw_domain)});
        continue;
      }
      ann.intent = *intent;
      ann.domain = *domain;
    }

    report.annotations.push_back(std::move(ann));
  }
  return report;
}

ParseReport parse_icdst_output(const std::string& text, int t,
                               const LabelSchema& schema) {
  if (t < 1) throw Error("parse_icdst_output: t must be >= 1");

  ParseReport report;
  bool stripped = false;
  const std::string body = strip_code_fences(text, stripped);
  if (stripped) report.recovered.push_back({0, "stripped wrapper"});

  static const std::regex row_re(
      R"(^\s*T(\d+)\s*[.:]?\s*select\s+\*\s+from\s+states\s+where\s+(.*?)\s*(;?)\s*$)",
      std::regex::icase);
  static const std::regex and_re(R"(\s+and\s+)", std::regex::icase);
  static const std::regex cond_re(R"(^\s*([A-Za-z_]+)\s*=\s*(.*?)\s*$)");

  std::map<int, TurnAnnotation> parsed;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, row_re)) continue;
    int index = std::stoi(m[1].str());
    if (index < 1 || index > t) continue;
    if (parsed.count(index) || report.failed(index)) {
      report.recovered.push_back({index, "duplicate row, first occurrence wins"});
      continue;
    }
    if (m[3].str().empty()) {
      report.recovered.push_back({index, "missing trailing semicolon"});
    }

    TurnAnnotation ann;
    ann.turn_index = index;
    bool have_relation = false;
    bool bad = false;

    const std::string where = m[2].str();
    std::sregex_token_iterator cond(where.begin(), where.end(), and_re, -1);
    for (std::sregex_token_iterator end; cond != end && !bad; ++cond) {
      std::string token = *cond;
      std::smatch cm;
      if (!std::regex_match(token, cm, cond_re)) {
        report.failures.push_back({index, "malformed WHERE clause: " + trim(token)});
        bad = true;
        break;
      }
      const std::string key = detail::to_lower(cm[1].str());
      const std::string value = strip_quotes(cm[2].str());
      if (key == "preceding_topical_relation") {
        auto relation = parse_relation(value);
        if (!relation) {
          report.failures.push_back(
              {index, "unknown preceding_topical_relation: " + value});
          bad = true;
          break;
        }
        ann.preceding_topical_relation = *relation;
        have_relation = true;
      } else if (key == "intent") {
        auto intent = schema.canonical_intent(value);
        if (!intent) {
          report.failures.push_back({index, "unknown intent: " + value});
          bad = true;
          break;
        }
        ann.intent = *intent;
      } else if (key == "domain") {
        auto domain = schema.canonical_domain(value);
        if (!domain) {
          report.failures.push_back({index, "unknown domain: " + value});
          bad = true;
          break;
        }
        ann.domain = *domain;
      }
      // Unknown columns are ignored.
    }
    if (bad) continue;

    if (!have_relation) {
      report.failures.push_back({index, "malformed WHERE clause: no preceding_topical_relation"});
      continue;
    }
    if (!schema.intents.empty() && !ann.intent) {
      report.failures.push_back({index, "malformed WHERE clause: no intent"});
      continue;
    }
    if (!schema.domains.empty() && !ann.domain) {
      report.failures.push_back({index, "malformed WHERE clause: no domain"});
      continue;
    }
    if (index == 1 && ann.preceding_topical_relation == Relation::kYes) {
      ann.preceding_topical_relation = Relation::kNo;
      report.recovered.push_back({1, "coerced turn-1 relation to NO"});
    }
    parsed.emplace(index, std::move(ann));
  }

  for (int i = 1; i <= t; ++i) {
    auto it = parsed.find(i);
    if (it != parsed.end()) {
      report.annotations.push_back(std::move(it->second));
    } else if (!report.failed(i)) {
      report.failures.push_back({i, "turn row absent"});
    }
  }
  std::sort(report.failures.begin(), report.failures.end(),
            [](const ParseNote& a, const ParseNote& b) {
              return a.turn_index < b.turn_index;
            });
  return report;
}

SlotListParse parse_slot_value_list(const std::string& text,
                                    const LabelSchema& schema) {
  if (schema.slots.empty()) {
    throw Error("parse_slot_value_list: schema has no slots");
  }

  SlotListParse result;
  size_t open = text.find('[');
  size_t close = text.rfind(']');
  std::string body;
  if (open != std::string::npos && close != std::string::npos && close > open) {
    body = text.substr(open + 1, close - open - 1);
  } else {
    body = text;
  }

  // Prefer quoted entries; fall back to comma splitting for bare lists.
  std::vector<std::string> raw_entries;
  bool found_quote = false;
  for (size_t i = 0; i < body.size();) {
    char c = body[i];
    if (c == '\'' || c == '"') {
      size_t end = body.find(c, i + 1);
      if (end == std::string::npos) break;
      raw_entries.push_back(body.substr(i + 1, end - i - 1));
      found_quote = true;
      i = end + 1;
    } else {
      ++i;
    }
  }
  if (!found_quote) {
    std::istringstream in(body);
    std::string piece;
    while (std::getline(in, piece, ',')) {
      piece = trim(piece);
      if (!piece.empty()) raw_entries.push_back(piece);
    }
  }

  for (const auto& entry : raw_entries) {
    // Longest schema slot name that prefixes the entry, followed by a hyphen.
    const SlotSpec* best = nullptr;
    for (const auto& slot : schema.slots) {
      if (entry.size() >= slot.name.size() + 1 &&
          entry.compare(0, slot.name.size(), slot.name) == 0 &&
          entry[slot.name.size()] == '-') {
        if (!best || slot.name.size() > best->name.size()) best = &slot;
      }
    }
    if (!best) {
      result.failures.push_back("no matching slot prefix: " + entry);
      continue;
    }
    std::string value = entry.substr(best->name.size() + 1);
    if (trim(value).empty()) {
      result.failures.push_back("empty value: " + entry);
      continue;
    }
    result.entries.emplace_back(best->name, value);
    result.values[best->name] = value;  // most recent wins
  }
  return result;
}

ParseReport parse_mwoz_output(const std::string& text, int t,
                              const LabelSchema& schema) {
  if (t < 1) throw Error("parse_mwoz_output: t must be >= 1");

  ParseReport report;
  bool stripped = false;
  const std::string body = strip_code_fences(text, stripped);
  if (stripped) report.recovered.push_back({0, "stripped wrapper"});

  std::vector<RawTurnSlots> raw;
  for (int i = 1; i <= t; ++i) {
    auto block = find_turn_block(body, i);
    if (!block.content) {
      report.failures.push_back({i, "turn block absent"});
      continue;
    }
    if (block.occurrences > 1) {
      report.recovered.push_back({i, "duplicate turn block, first occurrence wins"});
    }
    auto list = extract_tag(*block.content, "updated_slot_value");
    if (!list) {
      report.failures.push_back({i, "missing updated_slot_value"});
      continue;
    }
    auto parsed = parse_slot_value_list(*list, schema);
    for (const auto& failure : parsed.failures) {
      report.recovered.push_back({i, "dropped entry: " + failure});
    }
    if (parsed.entries.size() > parsed.values.size()) {
      report.recovered.push_back({i, "duplicate slot, most recent value kept"});
    }
    raw.push_back({i, std::move(parsed.entries)});
  }

  report.turn_states = resolve_cumulative_state(raw);
  return report;
}

Conversation parse_conversation_xml(const std::string& text) {
  Conversation conv;
  for (int i = 1;; ++i) {
    auto block = find_turn_block(text, i);
    if (!block.content) break;
    Turn turn;
    turn.index = i;
    auto user = extract_tag(*block.content, "user");
    if (!user) throw Error("conversation XML: missing <user> in turn " +
                           std::to_string(i));
    turn.user = *user;
    auto agent = extract_tag(*block.content, "agent");
    if (!agent) throw Error("conversation XML: missing <agent> in turn " +
                            std::to_string(i));
    turn.agent = *agent;
    conv.turns.push_back(std::move(turn));
  }
  // An empty trailing agent tag means the final user utterance is unanswered.
  if (!conv.turns.empty() && conv.turns.back().agent &&
      conv.turns.back().agent->empty()) {
    conv.turns.back().agent.reset();
  }
  return conv;
}

std::string serialize_s3dst_output(
    const std::vector<TurnAnnotation>& annotations, PromptVariant variant) {
  std::ostringstream out;
  for (const auto& ann : annotations) {
    out << "<T" << ann.turn_index << ">\n";
    if (variant_has_summary(variant)) {
      out << "<summary>" << xml_escape(ann.summary.value_or("")) << "</summary>\n";
    }
    if (variant_has_segmentation(variant)) {
      out << "<preceding_topical_relation>"
          << relation_name(ann.preceding_topical_relation)
          << "</preceding_topical_relation>\n";
    }
    if (variant_has_intent_domain(variant)) {
      out << "<intent>" << xml_escape(ann.intent.value_or("")) << "</intent>\n";
      out << "<domain>" << xml_escape(ann.domain.value_or("")) << "</domain>\n";
    }
    out << "</T" << ann.turn_index << ">\n";
  }
  return out.str();
}

std::string serialize_icdst_output(
    const std::vector<TurnAnnotation>& annotations) {
  std::ostringstream out;
  for (const auto& ann : annotations) {
    out << "T" << ann.turn_index
        << ". SELECT * from states WHERE preceding_topical_relation = "
        << relation_name(ann.preceding_topical_relation);
    if (ann.intent) out << " AND intent = " << *ann.intent;
    if (ann.domain) out << " AND domain = " << *ann.domain;
    out << ";\n";
  }
  return out.str();
}

std::string serialize_mwoz_output(const std::vector<TurnSlotState>& states,
                                  const Conversation& conv) {
  std::ostringstream out;
  for (const auto& state : states) {
    out << "<T" << state.turn_index << ">\n";
    const std::string* agent_context = nullptr;
    const std::string* user = nullptr;
    if (state.turn_index >= 1 &&
        state.turn_index <= static_cast<int>(conv.turns.size())) {
      const auto& turn = conv.turns[static_cast<size_t>(state.turn_index) - 1];
      user = &turn.user;
      if (state.turn_index >= 2) {
        const auto& prev = conv.turns[static_cast<size_t>(state.turn_index) - 2];
        if (prev.agent) agent_context = &*prev.agent;
      }
    }
    out << "<agent_context>"
        << (agent_context ? xml_escape(*agent_context) : std::string{})
        << "</agent_context>\n";
    out << "<user_utterance>" << (user ? xml_escape(*user) : std::string{})
        << "</user_utterance>\n";
    out << "<updated_slot_value>[";
    bool first = true;
    for (const auto& [slot, value] : state.state) {
      if (!first) out << ", ";
      first = false;
      out << "'" << slot << "-" << value << "'";
    }
    out << "]</updated_slot_value>\n";
    out << "</T" << state.turn_index << ">\n";
  }
  return out.str();
}

}  // namespace segdst
