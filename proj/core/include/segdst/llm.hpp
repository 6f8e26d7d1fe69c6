#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "segdst/types.hpp"

namespace segdst {

struct GenerationParams {
  double temperature = 0.0;
  int max_output_tokens = 1500;
  std::string model;
};

struct GenerationRecord {
  std::string key;  // content hash of (model, params, prompt)
  std::string model;
  GenerationParams params;
  std::string prompt;
  std::string response;
  std::string timestamp;     // ISO-8601 UTC
  double latency_ms = 0.0;
};

/// Stable content hash of (model, params, prompt); any byte change in the
/// prompt changes the key.
std::string generation_key(const GenerationParams& params,
                           const std::string& prompt);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const std::string& prompt,
                               const GenerationParams& params) = 0;
  virtual const char* name() const = 0;
};

struct RetryPolicy {
  int max_attempts = 5;
  int base_delay_ms = 500;
  int max_delay_ms = 16000;
};

struct HttpConfig {
  std::string endpoint;  // e.g. https://host/v1/chat/completions
  std::string api_key;   // bearer token; usually from SEGDST_API_KEY
  RetryPolicy retry;
  int timeout_seconds = 120;
};

/// POSTs a chat-completion JSON body {model, messages, temperature,
/// max_tokens} and returns the first message text. Retries with exponential
/// backoff and jitter on timeout/429/5xx only.
std::unique_ptr<Backend> make_http_backend(HttpConfig config);

/// On-disk record/replay cache: one JSON file per key under `dir`.
/// In strict replay mode a miss is an error naming the key; in record mode a
/// miss calls through `upstream` and stores the response atomically.
std::unique_ptr<Backend> make_replay_backend(std::string dir,
                                             std::unique_ptr<Backend> upstream);
std::unique_ptr<Backend> make_strict_replay_backend(std::string dir);

/// Scripted backend for tests: returns responses in order, throws when the
/// script is exhausted. Also doubles as a concurrency probe.
class MockBackend : public Backend {
 public:
  void script(std::string response);
  std::string complete(const std::string& prompt,
                       const GenerationParams& params) override;
  const char* name() const override { return "mock"; }

  int calls() const { return calls_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }
  std::vector<std::string> prompts_seen() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> responses_;
  std::vector<std::string> prompts_;
  std::atomic<int> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

struct CacheStats {
  int records = 0;
  std::uint64_t bytes = 0;
  int distinct_models = 0;
  int corrupt = 0;
};

/// Counts cache records under `dir`; corrupted files land in the corrupt
/// tally rather than being skipped silently.
CacheStats cache_stats(const std::string& dir);

/// Reads one cached record by key, if present.
std::optional<GenerationRecord> read_cache_record(const std::string& dir,
                                                  const std::string& key);

/// Writes a record (write-temp-then-rename, so concurrent readers never see
/// a partial file).
void write_cache_record(const std::string& dir, const GenerationRecord& record);

}  // namespace segdst
