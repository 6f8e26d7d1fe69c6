#include "segdst/prompt.hpp"

#include <sstream>

#include "segdst/detail/text.hpp"
#include "segdst/templates_data.hpp"

namespace segdst {

namespace {

using detail::xml_escape;

std::string_view template_for(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kS3dstJoint: return detail::k_template_s3dst_joint;
    case PromptVariant::kS3dstNoPar: return detail::k_template_s3dst_no_par;
    case PromptVariant::kS3dstUnstructuredInput:
      return detail::k_template_s3dst_unstructured_input;
    case PromptVariant::kS3dstSegmentOnly:
      return detail::k_template_s3dst_segment_only;
    case PromptVariant::kS3dstMwoz: return detail::k_template_s3dst_mwoz;
    case PromptVariant::kTbtDst: return detail::k_template_tbt_dst;
    case PromptVariant::kIcdstSql: return detail::k_template_icdst_sql;
  }
  throw Error("unknown prompt variant");
}

std::string render_domains_block(const LabelSchema& schema) {
  std::ostringstream out;
  out << "<valid_domains>\n";
  for (const auto& domain : schema.domains) {
    out << "<item>" << xml_escape(domain) << "</item>\n";
  }
  out << "</valid_domains>";
  return out.str();
}

std::string render_relation_block(const LabelSchema& schema) {
  std::ostringstream out;
  out << "<valid_preceding_topical_relation>\n";
  for (const auto& label : schema.segmentation_labels) {
    out << "<item>\n<name>" << xml_escape(label.name) << "</name>\n<desc>"
        << xml_escape(label.description) << "</desc>\n</item>\n";
  }
  out << "</valid_preceding_topical_relation>";
  return out.str();
}

std::string render_intents_block(const LabelSchema& schema) {
  std::ostringstream out;
  out << "<valid_intents>\n";
  for (const auto& intent : schema.intents) {
    out << "<item>\n<name>" << xml_escape(intent.name) << "</name>\n<desc>"
        << xml_escape(intent.description) << "</desc>\n</item>\n";
  }
  out << "</valid_intents>";
  return out.str();
}

std::string render_slots_block(const LabelSchema& schema) {
  std::ostringstream out;
  out << "<slots>\n";
  for (const auto& slot : schema.slots) {
    out << "<item>\n<name>" << xml_escape(slot.name) << "</name>\n"
        << "<description>" << xml_escape(slot.description) << "</description>\n";
    if (slot.valid_values) {
      out << "<valid_values>";
      for (size_t i = 0; i < slot.valid_values->size(); ++i) {
        if (i > 0) out << ", ";
        out << xml_escape((*slot.valid_values)[i]);
      }
      out << "</valid_values>\n";
    }
    out << "</item>\n";
  }
  out << "</slots>";
  return out.str();
}

std::string comma_names(const std::vector<std::string>& names) {
  std::string out;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ", ";
    out += names[i];
  }
  return out;
}

std::string icdst_descriptions(const LabelSchema& schema) {
  std::ostringstream out;
  // NO first, matching the printed ordering of the column-value pairs.
  for (auto it = schema.segmentation_labels.rbegin();
       it != schema.segmentation_labels.rend(); ++it) {
    out << "- preceding_topical_relation-" << it->name << ": "
        << it->description << "\n";
  }
  for (const auto& intent : schema.intents) {
    out << "- intent-" << intent.name << ": " << intent.description << "\n";
  }
  std::string text = out.str();
  if (!text.empty()) text.pop_back();  // the template supplies the newline
  return text;
}

void require_schema(const LabelSchema& schema, PromptVariant variant) {
  auto violations = schema.validate(variant_mode(variant));
  if (!violations.empty()) {
    throw Error("schema does not fit variant " +
                std::string(variant_name(variant)) + ": " + violations.front());
  }
}

}  // namespace

const char* variant_name(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kS3dstJoint: return "s3dst_joint";
    case PromptVariant::kS3dstNoPar: return "s3dst_no_par";
    case PromptVariant::kS3dstUnstructuredInput: return "s3dst_unstructured_input";
    case PromptVariant::kS3dstSegmentOnly: return "s3dst_segment_only";
    case PromptVariant::kS3dstMwoz: return "s3dst_mwoz";
    case PromptVariant::kTbtDst: return "tbt_dst";
    case PromptVariant::kIcdstSql: return "icdst_sql";
  }
  return "unknown";
}

PromptVariant variant_from_name(const std::string& name) {
  for (PromptVariant v :
       {PromptVariant::kS3dstJoint, PromptVariant::kS3dstNoPar,
        PromptVariant::kS3dstUnstructuredInput, PromptVariant::kS3dstSegmentOnly,
        PromptVariant::kS3dstMwoz, PromptVariant::kTbtDst,
        PromptVariant::kIcdstSql}) {
    if (name == variant_name(v)) return v;
  }
  throw Error("unknown prompt variant: " + name);
}

SchemaMode variant_mode(PromptVariant variant) {
  return variant == PromptVariant::kS3dstMwoz ? SchemaMode::kMwoz
                                              : SchemaMode::kOpenDomain;
}

bool variant_has_summary(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kS3dstJoint:
    case PromptVariant::kS3dstUnstructuredInput:
    case PromptVariant::kS3dstSegmentOnly:
    case PromptVariant::kTbtDst:
      return true;
    default:
      return false;
  }
}

bool variant_has_segmentation(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kTbtDst:
    case PromptVariant::kS3dstMwoz:
      return false;
    default:
      return true;
  }
}

bool variant_has_intent_domain(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kS3dstSegmentOnly:
    case PromptVariant::kS3dstMwoz:
      return false;
    default:
      return true;
  }
}

std::string render_conversation_xml(const Conversation& conv) {
  std::ostringstream out;
  for (const auto& turn : conv.turns) {
    out << "<T" << turn.index << ">\n";
    out << "<user>" << xml_escape(turn.user) << "</user>\n";
    out << "<agent>" << (turn.agent ? xml_escape(*turn.agent) : std::string{})
        << "</agent>\n";
    out << "</T" << turn.index << ">";
    if (turn.index != conv.turn_count()) out << "\n";
  }
  return out.str();
}

std::string render_conversation_plain(const Conversation& conv) {
  std::ostringstream out;
  for (const auto& turn : conv.turns) {
    out << "T" << turn.index << "\n";
    out << "user: " << turn.user << "\n";
    out << "agent: " << (turn.agent ? *turn.agent : std::string{});
    if (turn.index != conv.turn_count()) out << "\n";
  }
  return out.str();
}

std::string render_conversation_mwoz(const Conversation& conv) {
  std::ostringstream out;
  for (const auto& turn : conv.turns) {
    const std::string* prev_agent = nullptr;
    if (turn.index >= 2) {
      const auto& prev = conv.turns[static_cast<size_t>(turn.index) - 2];
      if (prev.agent) prev_agent = &*prev.agent;
    }
    out << "<T" << turn.index << ">\n";
    out << "<agent_context>"
        << (prev_agent ? xml_escape(*prev_agent) : std::string{})
        << "</agent_context>\n";
    out << "<user_utterance>" << xml_escape(turn.user) << "</user_utterance>\n";
    out << "</T" << turn.index << ">";
    if (turn.index != conv.turn_count()) out << "\n";
  }
  return out.str();
}

std::string render_schema_xml(const LabelSchema& schema,
                              PromptVariant variant) {
  require_schema(schema, variant);
  switch (variant) {
    case PromptVariant::kS3dstMwoz:
      return render_slots_block(schema);
    case PromptVariant::kS3dstSegmentOnly:
      return render_relation_block(schema);
    case PromptVariant::kTbtDst:
      return render_domains_block(schema) + "\n" + render_intents_block(schema);
    default:
      // Domains, then the YES/NO relation labels, then intents.
      return render_domains_block(schema) + "\n" + render_relation_block(schema) +
             "\n" + render_intents_block(schema);
  }
}

RenderedPrompt build_prompt(PromptVariant variant, const Conversation& conv,
                            const LabelSchema& schema) {
  if (conv.turns.empty()) throw Error("build_prompt: empty conversation");
  require_schema(schema, variant);

  std::string text(template_for(variant));

  if (variant == PromptVariant::kIcdstSql) {
    std::vector<std::string> intent_names;
    for (const auto& intent : schema.intents) intent_names.push_back(intent.name);
    detail::replace_all(text, "{{domain_names}}", comma_names(schema.domains));
    detail::replace_all(text, "{{intent_names}}", comma_names(intent_names));
    detail::replace_all(text, "{{column_value_descriptions}}",
                        icdst_descriptions(schema));
  } else {
    detail::replace_all(text, "{{schema_block}}",
                        render_schema_xml(schema, variant));
  }

  std::string conversation_block;
  switch (variant) {
    case PromptVariant::kS3dstUnstructuredInput:
      conversation_block = render_conversation_plain(conv);
      break;
    case PromptVariant::kS3dstMwoz:
      conversation_block = render_conversation_mwoz(conv);
      break;
    default:
      conversation_block = render_conversation_xml(conv);
  }
  detail::replace_all(text, "{{conversation_block}}", conversation_block);
  detail::replace_all(text, "{{turn_count}}",
                      std::to_string(conv.turn_count()));

  RenderedPrompt prompt;
  prompt.variant = variant;
  prompt.text = std::move(text);
  prompt.turn_count = conv.turn_count();
  prompt.schema_fingerprint = schema.fingerprint();
  return prompt;
}

}  // namespace segdst
