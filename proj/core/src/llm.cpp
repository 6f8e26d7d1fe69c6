#include "segdst/llm.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "segdst/detail/sha256.hpp"

namespace segdst {

namespace fs = std::filesystem;
using nlohmann::json;

std::string generation_key(const GenerationParams& params,
                           const std::string& prompt) {
  // Canonical field separator framing; temperature printed with fixed
  // precision so the key never depends on locale or float formatting.
  char temp_buf[32];
  std::snprintf(temp_buf, sizeof(temp_buf), "%.6f", params.temperature);
  std::string material;
  material += params.model;
  material += '\x1f';
  material += temp_buf;
  material += '\x1f';
  material += std::to_string(params.max_output_tokens);
  material += '\x1f';
  material += prompt;
  return detail::Sha256::hex(material);
}

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json record_to_json(const GenerationRecord& record) {
  return json{{"key", record.key},
              {"model", record.model},
              {"temperature", record.params.temperature},
              {"max_output_tokens", record.params.max_output_tokens},
              {"prompt", record.prompt},
              {"response", record.response},
              {"timestamp", record.timestamp},
              {"latency_ms", record.latency_ms}};
}

GenerationRecord record_from_json(const json& doc) {
  GenerationRecord record;
  record.key = doc.at("key").get<std::string>();
  record.model = doc.at("model").get<std::string>();
  record.params.model = record.model;
  record.params.temperature = doc.at("temperature").get<double>();
  record.params.max_output_tokens = doc.at("max_output_tokens").get<int>();
  record.prompt = doc.at("prompt").get<std::string>();
  record.response = doc.at("response").get<std::string>();
  record.timestamp = doc.value("timestamp", std::string{});
  record.latency_ms = doc.value("latency_ms", 0.0);
  return record;
}

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpConfig config) : config_(std::move(config)) {}

  std::string complete(const std::string& prompt,
                       const GenerationParams& params) override {
    std::string host, path;
    split_endpoint(config_.endpoint, host, path);

    json body = {{"model", params.model},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                 {"temperature", params.temperature},
                 {"max_tokens", params.max_output_tokens}};
    const std::string payload = body.dump();

    std::string last_error;
    std::mt19937_64 jitter_rng(std::random_device{}());
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
      httplib::Client client(host);
      client.set_read_timeout(config_.timeout_seconds, 0);
      client.set_connection_timeout(10, 0);
      httplib::Headers headers;
      if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
      }
      auto res = client.Post(path, headers, payload, "application/json");

      if (res && res->status >= 200 && res->status < 300) {
        return extract_message(res->body);
      }
      bool retryable = !res || res->status == 429 || res->status >= 500;
      last_error = res ? "HTTP " + std::to_string(res->status)
                       : "transport error";
      if (!retryable || attempt == config_.retry.max_attempts) break;

      int delay = config_.retry.base_delay_ms * (1 << (attempt - 1));
      delay = std::min(delay, config_.retry.max_delay_ms);
      delay += static_cast<int>(jitter_rng() % static_cast<uint64_t>(delay + 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    throw Error("http backend: request failed after retries: " + last_error);
  }

  const char* name() const override { return "http"; }

 private:
  static void split_endpoint(const std::string& endpoint, std::string& host,
                             std::string& path) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw Error("http backend: endpoint must include a scheme: " + endpoint);
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      host = endpoint;
      path = "/";
    } else {
      host = endpoint.substr(0, path_start);
      path = endpoint.substr(path_start);
    }
  }

  static std::string extract_message(const std::string& body) {
    json doc;
    try {
      doc = json::parse(body);
      return doc.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      throw Error(std::string("http backend: unexpected response shape: ") +
                  e.what());
    }
  }

  HttpConfig config_;
};

class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::string dir, std::unique_ptr<Backend> upstream)
      : dir_(std::move(dir)), upstream_(std::move(upstream)) {}

  std::string complete(const std::string& prompt,
                       const GenerationParams& params) override {
    const std::string key = generation_key(params, prompt);
    if (auto cached = read_cache_record(dir_, key)) {
      return cached->response;
    }
    if (!upstream_) {
      throw Error("strict replay: cache miss for key " + key);
    }
    auto start = std::chrono::steady_clock::now();
    std::string response = upstream_->complete(prompt, params);
    auto elapsed = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    GenerationRecord record;
    record.key = key;
    record.model = params.model;
    record.params = params;
    record.prompt = prompt;
    record.response = response;
    record.timestamp = utc_timestamp();
    record.latency_ms = elapsed;
    write_cache_record(dir_, record);
    return response;
  }

  const char* name() const override { return upstream_ ? "record" : "replay"; }

 private:
  std::string dir_;
  std::unique_ptr<Backend> upstream_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(HttpConfig config) {
  return std::make_unique<HttpBackend>(std::move(config));
}

std::unique_ptr<Backend> make_replay_backend(
    std::string dir, std::unique_ptr<Backend> upstream) {
  return std::make_unique<ReplayBackend>(std::move(dir), std::move(upstream));
}

std::unique_ptr<Backend> make_strict_replay_backend(std::string dir) {
  return std::make_unique<ReplayBackend>(std::move(dir), nullptr);
}

void MockBackend::script(std::string response) {
  std::lock_guard<std::mutex> lock(mutex_);
  responses_.push_back(std::move(response));
}

std::string MockBackend::complete(const std::string& prompt,
                                  const GenerationParams&) {
  int current = in_flight_.fetch_add(1) + 1;
  int seen = max_in_flight_.load();
  while (current > seen && !max_in_flight_.compare_exchange_weak(seen, current)) {
  }
  // Small stall so overlapping callers are actually observed in flight.
  std::this_thread::sleep_for(std::chrono::milliseconds(1));

  std::string response;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    prompts_.push_back(prompt);
    if (responses_.empty()) {
      in_flight_.fetch_sub(1);
      throw Error("mock backend: script exhausted");
    }
    response = std::move(responses_.front());
    responses_.pop_front();
  }
  calls_.fetch_add(1);
  in_flight_.fetch_sub(1);
  return response;
}

std::vector<std::string> MockBackend::prompts_seen() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return prompts_;
}

CacheStats cache_stats(const std::string& dir) {
  if (!fs::exists(dir)) throw Error("cache_stats: unreadable directory " + dir);
  CacheStats stats;
  std::set<std::string> models;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    stats.bytes += entry.file_size();
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      auto record = record_from_json(json::parse(buf.str()));
      ++stats.records;
      models.insert(record.model);
    } catch (const std::exception&) {
      ++stats.corrupt;
    }
  }
  stats.distinct_models = static_cast<int>(models.size());
  return stats;
}

std::optional<GenerationRecord> read_cache_record(const std::string& dir,
                                                  const std::string& key) {
  fs::path path = fs::path(dir) / (key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return record_from_json(json::parse(buf.str()));
  } catch (const std::exception& e) {
    throw Error("cache: corrupt record " + path.string() + ": " + e.what());
  }
}

void write_cache_record(const std::string& dir,
                        const GenerationRecord& record) {
  fs::create_directories(dir);
  fs::path final_path = fs::path(dir) / (record.key + ".json");
  fs::path temp_path = final_path;
  temp_path += ".tmp";
  {
    std::ofstream out(temp_path, std::ios::binary);
    if (!out) throw Error("cache: cannot write " + temp_path.string());
    out << record_to_json(record).dump(2) << '\n';
  }
  fs::rename(temp_path, final_path);
}

}  // namespace segdst
