#include "segdst/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "segdst/detail/text.hpp"
#include "segdst/json_io.hpp"

namespace segdst {

using nlohmann::json;

namespace {

json notes_to_json(const std::vector<ParseNote>& notes) {
  json out = json::array();
  for (const auto& note : notes) {
    out.push_back({{"turn", note.turn_index}, {"message", note.message}});
  }
  return out;
}

std::vector<ParseNote> notes_from_json(const json& doc) {
  std::vector<ParseNote> notes;
  for (const auto& n : doc) {
    notes.push_back({n.at("turn").get<int>(), n.at("message").get<std::string>()});
  }
  return notes;
}

json annotation_to_json(const TurnAnnotation& ann) {
  json out;
  out["turn"] = ann.turn_index;
  if (ann.summary) out["summary"] = *ann.summary;
  out["preceding_topical_relation"] = relation_name(ann.preceding_topical_relation);
  if (ann.intent) out["intent"] = *ann.intent;
  if (ann.domain) out["domain"] = *ann.domain;
  return out;
}

TurnAnnotation annotation_from_json(const json& doc) {
  TurnAnnotation ann;
  ann.turn_index = doc.at("turn").get<int>();
  if (doc.contains("summary")) ann.summary = doc["summary"].get<std::string>();
  ann.preceding_topical_relation =
      doc.at("preceding_topical_relation").get<std::string>() == "YES"
          ? Relation::kYes
          : Relation::kNo;
  if (doc.contains("intent")) ann.intent = doc["intent"].get<std::string>();
  if (doc.contains("domain")) ann.domain = doc["domain"].get<std::string>();
  return ann;
}

/// Full per-turn label map for the open-domain record.
std::map<std::string, std::string> turn_labels(const DialogueStateRecord& record,
                                               int turn_index) {
  std::map<std::string, std::string> labels;
  labels["segment"] = relation_name(relation_at(record.boundaries, turn_index));
  for (const auto& segment : record.segments) {
    if (turn_index >= segment.start && turn_index <= segment.end) {
      auto intent = segment.slot_values.find(kIntentSlot);
      if (intent != segment.slot_values.end()) labels["intent"] = intent->second;
      auto domain = segment.slot_values.find(kDomainSlot);
      if (domain != segment.slot_values.end()) labels["domain"] = domain->second;
      break;
    }
  }
  return labels;
}

std::map<std::string, std::string> select_keys(
    const std::map<std::string, std::string>& values,
    const std::vector<std::string>& keys) {
  std::map<std::string, std::string> out;
  for (const auto& key : keys) {
    auto it = values.find(key);
    if (it != values.end()) out.emplace(key, it->second);
  }
  return out;
}

std::map<std::string, std::string> normalize_state(
    const std::map<std::string, std::string>& state,
    const LabelSchema& schema) {
  std::map<std::string, std::string> out;
  for (const auto& [slot, value] : state) {
    const SlotSpec* spec = schema.find_slot(slot);
    SlotSpec fallback;
    fallback.name = slot;
    out[slot] = normalize_value_text(spec ? *spec : fallback, value);
  }
  return out;
}

struct ScoringAccumulator {
  std::vector<ScoredTurn> pred_full, gold_full;  // open-domain label maps
  std::vector<ScoredTurn> pred_slots, gold_slots;  // MWOZ belief states
  std::vector<std::pair<BoundarySet, BoundarySet>> segmentations;  // ref, hyp
  int parse_failures = 0;
  int turns = 0;
  int conversations = 0;
};

const BoundarySet* gold_boundaries_of(const Gold& gold) {
  if (const auto* record = std::get_if<DialogueStateRecord>(&gold)) {
    return &record->boundaries;
  }
  return std::get_if<BoundarySet>(&gold);
}

void accumulate_conversation(ScoringAccumulator& acc,
                             const Conversation& conv, const Gold* gold,
                             const ConversationPrediction* pred,
                             const LabelSchema& schema,
                             PromptVariant variant) {
  const int t = conv.turn_count();
  acc.turns += t;
  ++acc.conversations;
  if (pred) acc.parse_failures += static_cast<int>(pred->failures.size());
  if (!gold) return;

  const bool mwoz = variant == PromptVariant::kS3dstMwoz;

  if (mwoz) {
    const auto* gold_states = std::get_if<std::vector<TurnSlotState>>(gold);
    if (!gold_states) return;
    std::map<int, const TurnSlotState*> pred_by_index;
    if (pred) {
      for (const auto& state : pred->turn_states) {
        pred_by_index[state.turn_index] = &state;
      }
    }
    for (int i = 1; i <= t; ++i) {
      ScoredTurn gold_turn{conv.id, i, false,
                           normalize_state((*gold_states)[static_cast<size_t>(i - 1)].state,
                                           schema)};
      ScoredTurn pred_turn{conv.id, i, true, {}};
      auto it = pred_by_index.find(i);
      if (pred && it != pred_by_index.end() && !pred->failed_turn(i)) {
        pred_turn.parse_failed = false;
        pred_turn.values = normalize_state(it->second->state, schema);
      }
      acc.gold_slots.push_back(std::move(gold_turn));
      acc.pred_slots.push_back(std::move(pred_turn));
    }
    return;
  }

  // Open-domain: per-turn label maps from the gold and predicted records.
  if (const auto* gold_record = std::get_if<DialogueStateRecord>(gold)) {
    for (int i = 1; i <= t; ++i) {
      ScoredTurn gold_turn{conv.id, i, false, turn_labels(*gold_record, i)};
      ScoredTurn pred_turn{conv.id, i, true, {}};
      if (pred) {
        pred_turn.parse_failed = pred->failed_turn(i);
        pred_turn.values = turn_labels(pred->record, i);
      }
      acc.gold_full.push_back(std::move(gold_turn));
      acc.pred_full.push_back(std::move(pred_turn));
    }
  }

  if (const BoundarySet* ref = gold_boundaries_of(*gold);
      ref && variant_has_segmentation(variant)) {
    BoundarySet hyp;
    hyp.length = t;
    if (pred) hyp = pred->record.boundaries;
    if (hyp.length == t && t >= 2) acc.segmentations.emplace_back(*ref, hyp);
  }
}

MetricReport finalize_report(const ScoringAccumulator& acc,
                             PromptVariant variant,
                             std::optional<int> window_size) {
  MetricReport report;
  report.turns = acc.turns;
  report.conversations = acc.conversations;
  report.parse_failures = acc.parse_failures;

  auto filtered = [](const std::vector<ScoredTurn>& turns,
                     const std::vector<std::string>& keys) {
    std::vector<ScoredTurn> out = turns;
    for (auto& turn : out) turn.values = select_keys(turn.values, keys);
    return out;
  };

  if (!acc.pred_full.empty()) {
    if (variant_has_intent_domain(variant)) {
      report.jga["i_d"] = joint_goal_accuracy(
          filtered(acc.pred_full, {"intent", "domain"}),
          filtered(acc.gold_full, {"intent", "domain"}));
      report.per_label_accuracy["intent"] =
          per_label_accuracy(acc.pred_full, acc.gold_full, "intent");
      report.per_label_accuracy["domain"] =
          per_label_accuracy(acc.pred_full, acc.gold_full, "domain");
    }
    if (variant_has_segmentation(variant)) {
      report.per_label_accuracy["segment"] =
          per_label_accuracy(acc.pred_full, acc.gold_full, "segment");
      if (variant_has_intent_domain(variant)) {
        report.jga["s_i_d"] = joint_goal_accuracy(
            filtered(acc.pred_full, {"segment", "intent", "domain"}),
            filtered(acc.gold_full, {"segment", "intent", "domain"}));
      }
    }
  }
  if (!acc.pred_slots.empty()) {
    report.jga["slots"] = joint_goal_accuracy(acc.pred_slots, acc.gold_slots);
  }

  if (!acc.segmentations.empty()) {
    double pk_sum = 0.0;
    double wd_sum = 0.0;
    int counted = 0;
    for (const auto& [ref, hyp] : acc.segmentations) {
      int k = window_size ? *window_size : default_window_size(ref);
      if (k < 1 || k >= ref.length) continue;
      pk_sum += pk(ref, hyp, k);
      wd_sum += window_diff(ref, hyp, k);
      ++counted;
    }
    if (counted > 0) {
      report.pk = pk_sum / counted;
      report.window_diff = wd_sum / counted;
    }
  }
  return report;
}

ConversationPrediction process_conversation(const Conversation& conv,
                                            const LabelSchema& schema,
                                            PromptVariant variant,
                                            Backend& backend,
                                            const GenerationParams& params) {
  ConversationPrediction pred;
  pred.id = conv.id;
  pred.variant = variant;

  RenderedPrompt prompt = build_prompt(variant, conv, schema);
  std::string response = backend.complete(prompt.text, params);

  const int t = conv.turn_count();
  ParseReport parsed;
  if (variant == PromptVariant::kS3dstMwoz) {
    parsed = parse_mwoz_output(response, t, schema);
    pred.turn_states = parsed.turn_states;
  } else if (variant == PromptVariant::kIcdstSql) {
    parsed = parse_icdst_output(response, t, schema);
  } else {
    parsed = parse_s3dst_output(response, t, schema, variant);
  }
  pred.annotations = parsed.annotations;
  pred.recovered = parsed.recovered;
  pred.failures = parsed.failures;

  if (variant != PromptVariant::kS3dstMwoz) {
    auto reconstructed = reconstruct_segments(parsed.annotations,
                                              parsed.failures, t);
    pred.record = std::move(reconstructed.record);
    pred.diagnostics = std::move(reconstructed.diagnostics);
  }
  return pred;
}

}  // namespace

Relation relation_at(const BoundarySet& boundaries, int turn_index) {
  if (turn_index <= 1) return Relation::kNo;
  return boundaries.indices.count(turn_index - 1) ? Relation::kNo
                                                  : Relation::kYes;
}

json prediction_to_json(const ConversationPrediction& pred) {
  json doc;
  doc["id"] = pred.id;
  doc["variant"] = variant_name(pred.variant);
  doc["annotations"] = json::array();
  for (const auto& ann : pred.annotations) {
    doc["annotations"].push_back(annotation_to_json(ann));
  }
  if (pred.variant == PromptVariant::kS3dstMwoz) {
    doc["turn_states"] = json::array();
    for (const auto& state : pred.turn_states) {
      doc["turn_states"].push_back(
          {{"turn", state.turn_index}, {"state", state.state}});
    }
  } else {
    doc["record"] = record_to_json(pred.record);
  }
  doc["recovered"] = notes_to_json(pred.recovered);
  doc["failures"] = notes_to_json(pred.failures);
  doc["diagnostics"] = pred.diagnostics;
  return doc;
}

ConversationPrediction prediction_from_json(const json& doc) {
  ConversationPrediction pred;
  pred.id = doc.at("id").get<std::string>();
  pred.variant = variant_from_name(doc.at("variant").get<std::string>());
  for (const auto& a : doc.at("annotations")) {
    pred.annotations.push_back(annotation_from_json(a));
  }
  if (doc.contains("turn_states")) {
    for (const auto& s : doc["turn_states"]) {
      TurnSlotState state;
      state.turn_index = s.at("turn").get<int>();
      state.state = s.at("state").get<std::map<std::string, std::string>>();
      pred.turn_states.push_back(std::move(state));
    }
  }
  if (doc.contains("record")) {
    const auto& boundaries = doc["record"].at("boundaries");
    int length = 0;
    for (const auto& s : doc["record"].at("segments")) {
      length = std::max(length, s.at("end").get<int>());
    }
    (void)boundaries;
    pred.record = record_from_json(doc["record"], length);
  }
  pred.recovered = notes_from_json(doc.at("recovered"));
  pred.failures = notes_from_json(doc.at("failures"));
  if (doc.contains("diagnostics")) {
    pred.diagnostics = doc["diagnostics"].get<std::vector<std::string>>();
  }
  return pred;
}

void write_predictions_jsonl(const std::string& path,
                             const std::vector<ConversationPrediction>& preds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& pred : preds) out << prediction_to_json(pred).dump() << '\n';
}

std::vector<ConversationPrediction> read_predictions_jsonl(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<ConversationPrediction> preds;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (detail::trim(line).empty()) continue;
    try {
      preds.push_back(prediction_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw Error("predictions line " + std::to_string(line_number) + ": " +
                  e.what());
    }
  }
  return preds;
}

json report_to_json(const MetricReport& report) {
  json doc;
  doc["schema_version"] = 1;
  doc["counts"] = {{"conversations", report.conversations},
                   {"turns", report.turns},
                   {"parse_failures", report.parse_failures}};
  doc["jga"] = report.jga;
  doc["per_label_accuracy"] = report.per_label_accuracy;
  doc["pk"] = report.pk ? json(*report.pk) : json(nullptr);
  doc["window_diff"] =
      report.window_diff ? json(*report.window_diff) : json(nullptr);
  return doc;
}

RunResult run_pipeline(const DatasetBundle& bundle, const LabelSchema& schema,
                       PromptVariant variant, Backend& backend,
                       const GenerationParams& params, int concurrency,
                       std::optional<int> window_size) {
  auto violations = schema.validate(variant_mode(variant));
  if (!violations.empty()) {
    throw Error("run: schema does not fit variant: " + violations.front());
  }

  const size_t n = bundle.conversations.size();
  std::vector<ConversationPrediction> predictions(n);

  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      size_t index = next.fetch_add(1);
      if (index >= n) return;
      try {
        predictions[index] = process_conversation(
            bundle.conversations[index], schema, variant, backend, params);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int workers = std::max(1, std::min<int>(concurrency, static_cast<int>(n)));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  if (first_error) std::rethrow_exception(first_error);

  RunResult result;
  result.predictions = std::move(predictions);
  result.report = score_predictions(result.predictions, bundle, schema,
                                    variant, window_size);
  return result;
}

MetricReport score_predictions(const std::vector<ConversationPrediction>& preds,
                               const DatasetBundle& bundle,
                               const LabelSchema& schema,
                               PromptVariant variant,
                               std::optional<int> window_size,
                               std::vector<std::string>* warnings) {
  std::map<std::string, const ConversationPrediction*> by_id;
  for (const auto& pred : preds) by_id[pred.id] = &pred;

  ScoringAccumulator acc;
  for (const auto& conv : bundle.conversations) {
    const Gold* gold = nullptr;
    auto gold_it = bundle.gold.find(conv.id);
    if (gold_it != bundle.gold.end()) gold = &gold_it->second;

    const ConversationPrediction* pred = nullptr;
    auto pred_it = by_id.find(conv.id);
    if (pred_it != by_id.end()) {
      pred = pred_it->second;
    } else if (warnings) {
      warnings->push_back("conversation " + conv.id +
                          " missing from predictions; scored incorrect");
    }
    accumulate_conversation(acc, conv, gold, pred, schema, variant);
  }
  return finalize_report(acc, variant, window_size);
}

}  // namespace segdst
