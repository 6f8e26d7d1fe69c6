#pragma once

#include <string>

#include "segdst/schema.hpp"
#include "segdst/types.hpp"

namespace segdst {

enum class PromptVariant {
  kS3dstJoint,
  kS3dstNoPar,
  kS3dstUnstructuredInput,
  kS3dstSegmentOnly,
  kS3dstMwoz,
  kTbtDst,
  kIcdstSql,
};

const char* variant_name(PromptVariant variant);
PromptVariant variant_from_name(const std::string& name);

/// Which schema mode a variant renders against.
SchemaMode variant_mode(PromptVariant variant);

/// Whether the variant's output format carries a PAR <summary> line.
bool variant_has_summary(PromptVariant variant);
/// Whether the variant's output format carries segmentation labels.
bool variant_has_segmentation(PromptVariant variant);
/// Whether the variant's output format carries intent/domain labels.
bool variant_has_intent_domain(PromptVariant variant);

struct RenderedPrompt {
  PromptVariant variant;
  std::string text;
  int turn_count = 0;
  std::string schema_fingerprint;
};

/// Emits the hierarchical <T{i}><user>..</user><agent>..</agent></T{i}>
/// blocks, one tag per line, entity-escaped. Absent agent renders as an
/// empty <agent></agent> tag. Empty conversation renders as an empty string.
std::string render_conversation_xml(const Conversation& conv);

/// Plain-text numbered turn list used by the unstructured-input ablation.
std::string render_conversation_plain(const Conversation& conv);

/// MWOZ-style blocks: turn t's <agent_context> is turn t-1's agent reply
/// (empty for turn 1), followed by the verbatim <user_utterance>.
std::string render_conversation_mwoz(const Conversation& conv);

/// Renders the label/slot block for the variant's mode. Throws Error on a
/// schema/variant mode mismatch.
std::string render_schema_xml(const LabelSchema& schema, PromptVariant variant);

/// Instantiates the variant's template with schema and conversation blocks.
/// Byte-deterministic for identical inputs. Throws Error on mode mismatch or
/// an empty conversation.
RenderedPrompt build_prompt(PromptVariant variant, const Conversation& conv,
                            const LabelSchema& schema);

}  // namespace segdst
