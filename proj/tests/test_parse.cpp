#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "segdst/parse.hpp"
#include "segdst/schema.hpp"

using namespace segdst;

namespace {

const std::string kSchemaDir = SEGDST_SCHEMA_DIR;

LabelSchema open_schema() {
  auto schema = LabelSchema::with_default_segmentation_labels();
  schema.intents = {{"INFORMATION SEEKING", "a"},
                    {"ANALYSIS", "b"},
                    {"CREATION", "c"}};
  schema.domains = {"GAMES", "WEATHER", "TRAVEL"};
  return schema;
}

std::string block(int i, const std::string& relation, const std::string& intent,
                  const std::string& domain,
                  const std::string& summary = "a summary") {
  std::string out = "<T" + std::to_string(i) + ">\n";
  out += "<summary>" + summary + "</summary>\n";
  out += "<preceding_topical_relation>" + relation +
         "</preceding_topical_relation>\n";
  out += "<intent>" + intent + "</intent>\n";
  out += "<domain>" + domain + "</domain>\n";
  out += "</T" + std::to_string(i) + ">\n";
  return out;
}

bool has_note(const std::vector<ParseNote>& notes, int index,
              const std::string& fragment) {
  for (const auto& note : notes) {
    if (note.turn_index == index &&
        note.message.find(fragment) != std::string::npos) {
      return true;
    }
  }
  return false;
}

/// Annotations and failures cover 1..t exactly once.
void check_coverage(const ParseReport& report, int t) {
  std::vector<int> seen(static_cast<size_t>(t) + 1, 0);
  for (const auto& ann : report.annotations) {
    REQUIRE(ann.turn_index >= 1);
    REQUIRE(ann.turn_index <= t);
    ++seen[static_cast<size_t>(ann.turn_index)];
  }
  std::set<int> failed;
  for (const auto& note : report.failures) failed.insert(note.turn_index);
  for (int f : failed) {
    REQUIRE(f >= 1);
    REQUIRE(f <= t);
    ++seen[static_cast<size_t>(f)];
  }
  for (int i = 1; i <= t; ++i) CHECK(seen[static_cast<size_t>(i)] == 1);
}

}  // namespace

TEST_CASE("compliant hierarchical output parses cleanly") {
  auto schema = open_schema();
  std::string text = block(1, "NO", "ANALYSIS", "GAMES") +
                     block(2, "YES", "ANALYSIS", "GAMES") +
                     block(3, "NO", "CREATION", "WEATHER");
  auto report = parse_s3dst_output(text, 3, schema, PromptVariant::kS3dstJoint);
  REQUIRE(report.annotations.size() == 3);
  CHECK(report.failures.empty());
  CHECK(report.recovered.empty());
  CHECK(report.annotations[0].preceding_topical_relation == Relation::kNo);
  CHECK(report.annotations[1].preceding_topical_relation == Relation::kYes);
  CHECK(report.annotations[2].intent == "CREATION");
  CHECK(report.annotations[2].domain == "WEATHER");
  CHECK(report.annotations[0].summary == "a summary");
  check_coverage(report, 3);
}

TEST_CASE("code fences and prose around the XML are tolerated") {
  auto schema = open_schema();
  std::string text = "Sure, here are the annotations:\n```xml\n" +
                     block(1, "NO", "ANALYSIS", "GAMES") + "```\nHope it helps!";
  auto report = parse_s3dst_output(text, 1, schema, PromptVariant::kS3dstJoint);
  REQUIRE(report.annotations.size() == 1);
  CHECK(report.failures.empty());
  CHECK(has_note(report.recovered, 0, "stripped wrapper"));
}

TEST_CASE("lowercase labels are canonicalized to schema casing") {
  auto schema = open_schema();
  auto report = parse_s3dst_output(block(1, "no", "analysis", "games"), 1,
                                   schema, PromptVariant::kS3dstJoint);
  REQUIRE(report.annotations.size() == 1);
  CHECK(report.annotations[0].intent == "ANALYSIS");
  CHECK(report.annotations[0].domain == "GAMES");
}

TEST_CASE("turn-1 YES is coerced to NO with a recovery note") {
  auto schema = open_schema();
  auto report = parse_s3dst_output(block(1, "YES", "ANALYSIS", "GAMES"), 1,
                                   schema, PromptVariant::kS3dstJoint);
  REQUIRE(report.annotations.size() == 1);
  CHECK(report.annotations[0].preceding_topical_relation == Relation::kNo);
  CHECK(has_note(report.recovered, 1, "coerced turn-1 relation to NO"));
}

TEST_CASE("missing and malformed turns become failures, not exceptions") {
  auto schema = open_schema();
  std::string text = block(1, "NO", "ANALYSIS", "GAMES") +
                     block(3, "YES", "NONSENSE", "GAMES");
  auto report = parse_s3dst_output(text, 3, schema, PromptVariant::kS3dstJoint);
  REQUIRE(report.annotations.size() == 1);
  CHECK(has_note(report.failures, 2, "turn block absent"));
  CHECK(has_note(report.failures, 3, "unknown intent: NONSENSE"));
  CHECK(report.failed(2));
  CHECK(report.failed(3));
  CHECK_FALSE(report.failed(1));
  check_coverage(report, 3);
}

TEST_CASE("duplicate turn blocks keep the first occurrence") {
  auto schema = open_schema();
  std::string text = block(1, "NO", "ANALYSIS", "GAMES") +
                     block(1, "NO", "CREATION", "WEATHER");
  auto report = parse_s3dst_output(text, 1, schema, PromptVariant::kS3dstJoint);
  REQUIRE(report.annotations.size() == 1);
  CHECK(report.annotations[0].intent == "ANALYSIS");
  CHECK(has_note(report.recovered, 1, "duplicate turn block"));
}

TEST_CASE("missing summary is a recovery note, not a failure") {
  auto schema = open_schema();
  std::string text =
      "<T1>\n<preceding_topical_relation>NO</preceding_topical_relation>\n"
      "<intent>ANALYSIS</intent>\n<domain>GAMES</domain>\n</T1>\n";
  auto report = parse_s3dst_output(text, 1, schema, PromptVariant::kS3dstJoint);
  REQUIRE(report.annotations.size() == 1);
  CHECK_FALSE(report.annotations[0].summary.has_value());
  CHECK(has_note(report.recovered, 1, "missing summary"));
}

TEST_CASE("turn-by-turn mode assigns NO to every turn") {
  auto schema = open_schema();
  std::string text;
  for (int i = 1; i <= 3; ++i) {
    text += "<T" + std::to_string(i) + ">\n<summary>s</summary>\n" +
            "<intent>ANALYSIS</intent>\n<domain>GAMES</domain>\n</T" +
            std::to_string(i) + ">\n";
  }
  auto report = parse_s3dst_output(text, 3, schema, PromptVariant::kTbtDst);
  REQUIRE(report.annotations.size() == 3);
  for (const auto& ann : report.annotations) {
    CHECK(ann.preceding_topical_relation == Relation::kNo);
    CHECK(ann.intent == "ANALYSIS");
  }
}

TEST_CASE("segment-only mode needs no intent or domain tags") {
  auto schema = open_schema();
  std::string text =
      "<T1>\n<summary>s</summary>\n"
      "<preceding_topical_relation>NO</preceding_topical_relation>\n</T1>\n";
  auto report =
      parse_s3dst_output(text, 1, schema, PromptVariant::kS3dstSegmentOnly);
  REQUIRE(report.annotations.size() == 1);
  CHECK_FALSE(report.annotations[0].intent.has_value());
}

TEST_CASE("icdst rows parse with case and punctuation slack") {
  auto schema = open_schema();
  std::string text =
      "T1. SELECT * from states WHERE preceding_topical_relation = NO AND "
      "intent = ANALYSIS AND domain = GAMES;\n"
      "t2. select * from states where preceding_topical_relation = yes and "
      "intent = analysis and domain = games\n";
  auto report = parse_icdst_output(text, 2, schema);
  REQUIRE(report.annotations.size() == 2);
  CHECK(report.annotations[1].preceding_topical_relation == Relation::kYes);
  CHECK(report.annotations[1].intent == "ANALYSIS");
  CHECK(has_note(report.recovered, 2, "missing trailing semicolon"));
  check_coverage(report, 2);
}

TEST_CASE("icdst quoted values and unknown columns are tolerated") {
  auto schema = open_schema();
  std::string text =
      "T1. SELECT * from states WHERE preceding_topical_relation = 'NO' AND "
      "intent = \"CREATION\" AND domain = 'WEATHER' AND confidence = high;\n";
  auto report = parse_icdst_output(text, 1, schema);
  REQUIRE(report.annotations.size() == 1);
  CHECK(report.annotations[0].intent == "CREATION");
  CHECK(report.annotations[0].domain == "WEATHER");
}

TEST_CASE("icdst missing rows and malformed clauses are failures") {
  auto schema = open_schema();
  std::string text =
      "T1. SELECT * from states WHERE preceding_topical_relation = NO AND "
      "intent = ANALYSIS AND domain = GAMES;\n"
      "T3. SELECT * from states WHERE what even is this;\n";
  auto report = parse_icdst_output(text, 3, schema);
  REQUIRE(report.annotations.size() == 1);
  CHECK(has_note(report.failures, 2, "turn row absent"));
  CHECK(has_note(report.failures, 3, "malformed WHERE clause"));
  check_coverage(report, 3);
}

TEST_CASE("slot lists decompose under longest-prefix matching") {
  auto schema = LabelSchema::from_json_file(kSchemaDir + "/mwoz.json");

  auto simple = parse_slot_value_list("['hotel-area-east', 'train-day-friday']",
                                      schema);
  CHECK(simple.failures.empty());
  CHECK(simple.values.at("hotel-area") == "east");
  CHECK(simple.values.at("train-day") == "friday");

  // The slot name itself contains a hyphenless space and the value adds
  // another hyphen; longest-prefix matching resolves both.
  auto spaced = parse_slot_value_list("['hotel-book day-monday']", schema);
  CHECK(spaced.failures.empty());
  CHECK(spaced.values.at("hotel-book day") == "monday");

  auto timed = parse_slot_value_list("['taxi-leave at-17:00']", schema);
  CHECK(timed.values.at("taxi-leave at") == "17:00");

  auto appendix = parse_slot_value_list(
      "['hotel-book day-monday', 'hotel-book number_of_people-3', "
      "'hotel-book number_of_days-4', 'hotel-name-wartworth', "
      "'hotel-area-east', 'hotel-parking-yes', 'hotel-stars-4', "
      "'hotel-internet-yes', 'train-book number_of_people-1', "
      "'train-destination-bishops stortford', 'train-day-friday', "
      "'train-arrive_by_time-19:45', 'train-departure-cambridge']",
      schema);
  CHECK(appendix.failures.empty());
  CHECK(appendix.entries.size() == 13);
  CHECK(appendix.values.at("hotel-book number_of_people") == "3");
  CHECK(appendix.values.at("train-arrive_by_time") == "19:45");
  CHECK(appendix.values.at("train-destination") == "bishops stortford");
}

TEST_CASE("slot list failures are reported per entry") {
  auto schema = LabelSchema::from_json_file(kSchemaDir + "/mwoz.json");
  auto parsed = parse_slot_value_list(
      "['mystery-slot-value', 'hotel-area-', 'hotel-area-east']", schema);
  REQUIRE(parsed.failures.size() == 2);
  CHECK(parsed.failures[0].find("no matching slot prefix") != std::string::npos);
  CHECK(parsed.failures[1].find("empty value") != std::string::npos);
  CHECK(parsed.values.at("hotel-area") == "east");
}

TEST_CASE("duplicate slots keep the most recent value but all entries") {
  auto schema = LabelSchema::from_json_file(kSchemaDir + "/mwoz.json");
  auto parsed = parse_slot_value_list(
      "['hotel-area-east', 'hotel-area-north']", schema);
  CHECK(parsed.entries.size() == 2);
  CHECK(parsed.values.at("hotel-area") == "north");
}

TEST_CASE("empty slot list parses to no entries") {
  auto schema = LabelSchema::from_json_file(kSchemaDir + "/mwoz.json");
  auto parsed = parse_slot_value_list("[]", schema);
  CHECK(parsed.entries.empty());
  CHECK(parsed.failures.empty());
}

TEST_CASE("mwoz output blocks yield cumulative turn states") {
  auto schema = LabelSchema::from_json_file(kSchemaDir + "/mwoz.json");
  std::string text =
      "<T1>\n<agent_context></agent_context>\n"
      "<user_utterance>taxi please</user_utterance>\n"
      "<updated_slot_value>['taxi-leave at-17:00']</updated_slot_value>\n</T1>\n"
      "<T2>\n<agent_context>where to?</agent_context>\n"
      "<user_utterance>the station</user_utterance>\n"
      "<updated_slot_value>['taxi-leave at-17:00', "
      "'taxi-destination-cambridge station']</updated_slot_value>\n</T2>\n";
  auto report = parse_mwoz_output(text, 2, schema);
  REQUIRE(report.turn_states.size() == 2);
  CHECK(report.turn_states[0].state ==
        std::map<std::string, std::string>{{"taxi-leave at", "17:00"}});
  CHECK(report.turn_states[1].state.at("taxi-destination") ==
        "cambridge station");
  CHECK(report.failures.empty());
}

TEST_CASE("mwoz output drops bad entries with recovery notes") {
  auto schema = LabelSchema::from_json_file(kSchemaDir + "/mwoz.json");
  std::string text =
      "<T1>\n<updated_slot_value>['nonsense', 'hotel-area-east']"
      "</updated_slot_value>\n</T1>\n";
  auto report = parse_mwoz_output(text, 1, schema);
  REQUIRE(report.turn_states.size() == 1);
  CHECK(report.turn_states[0].state.at("hotel-area") == "east");
  CHECK(has_note(report.recovered, 1, "dropped entry"));
}

TEST_CASE("serialize-then-parse recovers random annotation sets") {
  auto schema = open_schema();
  std::mt19937_64 rng(99);
  for (int round = 0; round < 100; ++round) {
    int t = 1 + static_cast<int>(rng() % 20);
    PromptVariant variant = (round % 2 == 0) ? PromptVariant::kS3dstJoint
                                             : PromptVariant::kS3dstNoPar;
    std::vector<TurnAnnotation> annotations;
    for (int i = 1; i <= t; ++i) {
      TurnAnnotation ann;
      ann.turn_index = i;
      if (variant_has_summary(variant)) {
        ann.summary = "summary " + std::to_string(i);
      }
      ann.preceding_topical_relation =
          (i == 1 || rng() % 2 == 0) ? Relation::kNo : Relation::kYes;
      ann.intent = schema.intents[rng() % schema.intents.size()].name;
      ann.domain = schema.domains[rng() % schema.domains.size()];
      annotations.push_back(std::move(ann));
    }
    auto text = serialize_s3dst_output(annotations, variant);
    auto report = parse_s3dst_output(text, t, schema, variant);
    CHECK(report.failures.empty());
    CHECK(report.annotations == annotations);

    auto sql = serialize_icdst_output(annotations);
    auto sql_report = parse_icdst_output(sql, t, schema);
    CHECK(sql_report.failures.empty());
    REQUIRE(sql_report.annotations.size() == annotations.size());
    for (size_t i = 0; i < annotations.size(); ++i) {
      CHECK(sql_report.annotations[i].preceding_topical_relation ==
            annotations[i].preceding_topical_relation);
      CHECK(sql_report.annotations[i].intent == annotations[i].intent);
      CHECK(sql_report.annotations[i].domain == annotations[i].domain);
    }
  }
}

TEST_CASE("parsers reject nonsensical turn counts") {
  auto schema = open_schema();
  CHECK_THROWS_AS(parse_s3dst_output("", 0, schema, PromptVariant::kS3dstJoint),
                  Error);
  CHECK_THROWS_AS(parse_icdst_output("", 0, schema), Error);
  auto mwoz = LabelSchema::from_json_file(kSchemaDir + "/mwoz.json");
  CHECK_THROWS_AS(parse_mwoz_output("", 0, mwoz), Error);
  CHECK_THROWS_AS(parse_slot_value_list("[]", schema), Error);
}
