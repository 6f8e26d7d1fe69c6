// segdst: zero-shot joint dialogue segmentation and state tracking harness.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "segdst/data.hpp"
#include "segdst/json_io.hpp"
#include "segdst/llm.hpp"
#include "segdst/prompt.hpp"
#include "segdst/runner.hpp"

namespace {

using namespace segdst;

struct CommonOptions {
  std::string dataset;
  std::string format = "jsonl";
  std::string variant = "s3dst_joint";
  std::string schema_path;
  std::string mock_script;
  std::string backend = "http";
  std::string endpoint;
  std::string cache_dir = "cache";
  std::string out = "out";
  double temperature = 0.0;
  int max_output_tokens = 1500;
  std::string model = "gpt-4";
  int concurrency = 1;
  std::optional<int> window_size;
  uint64_t seed = 0;
};

DatasetBundle load_dataset(const CommonOptions& opt,
                           const LabelSchema* schema) {
  switch (format_from_name(opt.format)) {
    case DatasetFormat::kMwoz21: return load_mwoz(opt.dataset, "2.1", schema);
    case DatasetFormat::kMwoz24: return load_mwoz(opt.dataset, "2.4", schema);
    case DatasetFormat::kDialseg711: return load_dialseg711(opt.dataset);
    case DatasetFormat::kJsonl: return load_jsonl(opt.dataset);
  }
  throw Error("unreachable");
}

std::unique_ptr<Backend> make_backend(const CommonOptions& opt) {
  if (opt.backend == "mock") {
    auto mock = std::make_unique<MockBackend>();
    if (!opt.mock_script.empty()) {
      // Script file: responses separated by a line of exactly "---".
      std::ifstream in(opt.mock_script);
      if (!in) throw Error("cannot open mock script " + opt.mock_script);
      std::string line, current;
      while (std::getline(in, line)) {
        if (line == "---") {
          mock->script(current);
          current.clear();
        } else {
          current += line;
          current += '\n';
        }
      }
      if (!current.empty()) mock->script(current);
    }
    return mock;
  }
  if (opt.backend == "replay") return make_strict_replay_backend(opt.cache_dir);

  HttpConfig config;
  config.endpoint = opt.endpoint;
  if (const char* key = std::getenv("SEGDST_API_KEY")) config.api_key = key;
  if (opt.backend == "http") return make_http_backend(std::move(config));
  if (opt.backend == "record") {
    return make_replay_backend(opt.cache_dir,
                               make_http_backend(std::move(config)));
  }
  throw Error("unknown backend: " + opt.backend);
}

GenerationParams make_params(const CommonOptions& opt) {
  GenerationParams params;
  params.temperature = opt.temperature;
  params.max_output_tokens = opt.max_output_tokens;
  params.model = opt.model;
  return params;
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt,
                      bool needs_backend = true) {
  cmd->add_option("--dataset", opt.dataset, "Dataset path")->required();
  cmd->add_option("--format", opt.format, "mwoz21|mwoz24|dialseg711|jsonl");
  cmd->add_option("--variant", opt.variant, "Prompt variant");
  cmd->add_option("--schema", opt.schema_path, "Label schema JSON")->required();
  if (needs_backend) {
    cmd->add_option("--backend", opt.backend, "http|replay|record|mock");
    cmd->add_option("--endpoint", opt.endpoint, "Chat-completion endpoint URL");
    cmd->add_option("--mock-script", opt.mock_script,
                    "Scripted responses for the mock backend (separated by ---)");
    cmd->add_option("--cache-dir", opt.cache_dir, "Record/replay cache directory");
    cmd->add_option("--model", opt.model, "Model name sent to the endpoint");
    cmd->add_option("--temperature", opt.temperature, "Sampling temperature");
    cmd->add_option("--max-output-tokens", opt.max_output_tokens,
                    "Output token cap per call");
    cmd->add_option("--concurrency", opt.concurrency,
                    "Parallel conversations in flight");
  }
  cmd->add_option("--window-size", [&opt](const std::vector<std::string>& vals) {
        opt.window_size = std::stoi(vals.front());
        return true;
      }, "Override the Pk/WindowDiff window size");
  cmd->add_option("--seed", opt.seed, "Split/shuffle seed");
}

int cmd_run(const CommonOptions& opt) {
  LabelSchema schema = LabelSchema::from_json_file(opt.schema_path);
  PromptVariant variant = variant_from_name(opt.variant);
  DatasetBundle bundle = load_dataset(opt, &schema);
  auto backend = make_backend(opt);

  RunResult result = run_pipeline(bundle, schema, variant, *backend,
                                  make_params(opt), opt.concurrency,
                                  opt.window_size);

  write_predictions_jsonl(opt.out + ".predictions.jsonl", result.predictions);
  std::ofstream report_out(opt.out + ".report.json");
  report_out << report_to_json(result.report).dump(2) << '\n';

  std::cout << report_to_json(result.report).dump(2) << '\n';
  std::cerr << "wrote " << opt.out << ".predictions.jsonl and " << opt.out
            << ".report.json\n";
  return 0;
}

int cmd_score(const CommonOptions& opt, const std::string& predictions_path) {
  LabelSchema schema = LabelSchema::from_json_file(opt.schema_path);
  PromptVariant variant = variant_from_name(opt.variant);
  DatasetBundle bundle = load_dataset(opt, &schema);
  auto preds = read_predictions_jsonl(predictions_path);
  if (!preds.empty()) variant = preds.front().variant;

  std::vector<std::string> warnings;
  MetricReport report = score_predictions(preds, bundle, schema, variant,
                                          opt.window_size, &warnings);
  for (const auto& warning : warnings) std::cerr << "warning: " << warning << '\n';
  std::cout << report_to_json(report).dump(2) << '\n';
  return 0;
}

int cmd_render(const CommonOptions& opt, const std::string& conversation_id) {
  LabelSchema schema = LabelSchema::from_json_file(opt.schema_path);
  PromptVariant variant = variant_from_name(opt.variant);
  DatasetBundle bundle = load_dataset(opt, &schema);
  const Conversation* conv = bundle.find(conversation_id);
  if (!conv) throw Error("unknown conversation id: " + conversation_id);
  std::cout << build_prompt(variant, *conv, schema).text;
  return 0;
}

int cmd_convert(const CommonOptions& opt, const std::string& out_path) {
  LabelSchema schema;
  if (!opt.schema_path.empty()) {
    schema = LabelSchema::from_json_file(opt.schema_path);
  }
  DatasetBundle bundle =
      load_dataset(opt, opt.schema_path.empty() ? nullptr : &schema);
  write_jsonl(bundle, out_path);
  std::cerr << "wrote " << bundle.conversations.size() << " conversations to "
            << out_path << '\n';
  return 0;
}

int cmd_cache_stats(const std::string& dir) {
  CacheStats stats = cache_stats(dir);
  nlohmann::json doc = {{"records", stats.records},
                        {"bytes", stats.bytes},
                        {"distinct_models", stats.distinct_models},
                        {"corrupt", stats.corrupt}};
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot joint dialogue segmentation and state tracking"};
  app.require_subcommand(1);

  CommonOptions run_opt, score_opt, render_opt, convert_opt;
  std::string predictions_path, conversation_id, convert_out, cache_dir;

  auto* run = app.add_subcommand("run", "Run the full pipeline and score it");
  add_common_flags(run, run_opt);
  run->add_option("--out", run_opt.out, "Output path prefix");

  auto* score = app.add_subcommand("score", "Recompute metrics from stored predictions");
  add_common_flags(score, score_opt, /*needs_backend=*/false);
  score->add_option("--predictions", predictions_path, "Predictions JSONL")->required();

  auto* render = app.add_subcommand("render", "Print the exact prompt for one conversation");
  add_common_flags(render, render_opt, /*needs_backend=*/false);
  render->add_option("--id", conversation_id, "Conversation id")->required();

  auto* convert = app.add_subcommand("convert", "Convert a dataset to canonical JSONL");
  convert->add_option("--dataset", convert_opt.dataset, "Dataset path")->required();
  convert->add_option("--format", convert_opt.format, "mwoz21|mwoz24|dialseg711|jsonl");
  convert->add_option("--schema", convert_opt.schema_path, "Label schema JSON");
  convert->add_option("--out", convert_out, "Output JSONL path")->required();

  auto* cache = app.add_subcommand("cache", "Cache utilities");
  auto* stats = cache->add_subcommand("stats", "Summarize the record/replay cache");
  stats->add_option("--cache-dir", cache_dir, "Cache directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (score->parsed()) return cmd_score(score_opt, predictions_path);
    if (render->parsed()) return cmd_render(render_opt, conversation_id);
    if (convert->parsed()) return cmd_convert(convert_opt, convert_out);
    if (cache->parsed() && stats->parsed()) return cmd_cache_stats(cache_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
