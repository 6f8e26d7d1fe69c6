#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "segdst/data.hpp"
#include "segdst/llm.hpp"
#include "segdst/metrics.hpp"
#include "segdst/parse.hpp"
#include "segdst/prompt.hpp"
#include "segdst/track.hpp"

namespace segdst {

/// Everything produced for one conversation: raw parse output, the
/// reconstructed joint prediction, and the parse diagnostics that make
/// metric discrepancies auditable after the fact.
struct ConversationPrediction {
  std::string id;
  PromptVariant variant = PromptVariant::kS3dstJoint;
  std::vector<TurnAnnotation> annotations;
  std::vector<TurnSlotState> turn_states;  // MWOZ mode
  DialogueStateRecord record;              // open-domain reconstruction
  std::vector<ParseNote> recovered;
  std::vector<ParseNote> failures;
  std::vector<std::string> diagnostics;

  bool failed_turn(int turn_index) const {
    for (const auto& note : failures) {
      if (note.turn_index == turn_index) return true;
    }
    return false;
  }
};

nlohmann::json prediction_to_json(const ConversationPrediction& pred);
ConversationPrediction prediction_from_json(const nlohmann::json& doc);

void write_predictions_jsonl(const std::string& path,
                             const std::vector<ConversationPrediction>& preds);
std::vector<ConversationPrediction> read_predictions_jsonl(
    const std::string& path);

/// Frozen report schema (schema_version 1); field names are part of the
/// external contract.
nlohmann::json report_to_json(const MetricReport& report);

struct RunResult {
  std::vector<ConversationPrediction> predictions;  // dataset order
  MetricReport report;
};

/// End-to-end pipeline: build prompt, complete, parse, track, score. Up to
/// `concurrency` conversations are dispatched in parallel; results are
/// buffered and emitted in dataset order. Parse failures are data; backend
/// and configuration errors throw.
RunResult run_pipeline(const DatasetBundle& bundle, const LabelSchema& schema,
                       PromptVariant variant, Backend& backend,
                       const GenerationParams& params, int concurrency = 1,
                       std::optional<int> window_size = std::nullopt);

/// Recomputes metrics from stored predictions, no LLM calls. A conversation
/// missing from `preds` is scored incorrect with a warning.
MetricReport score_predictions(const std::vector<ConversationPrediction>& preds,
                               const DatasetBundle& bundle,
                               const LabelSchema& schema,
                               PromptVariant variant,
                               std::optional<int> window_size = std::nullopt,
                               std::vector<std::string>* warnings = nullptr);

/// Per-turn relation label implied by a boundary set (turn 1 is NO; turn i is
/// NO iff boundary i-1 exists).
Relation relation_at(const BoundarySet& boundaries, int turn_index);

}  // namespace segdst
