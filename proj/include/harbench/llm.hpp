#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace harbench {

struct ChatMessage {
  std::string role;  // system | user
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;  // exactly one user message (the rendered prompt)
  double temperature = 0.0;
  int max_tokens = 1024;

  const std::string& user_content() const;
};

struct BackendConfig {
  std::string base_url;            // e.g. http://127.0.0.1:8080
  std::string api_key_env_var;     // credential indirection; never the key itself
  int max_concurrency = 4;
  int retry_max_attempts = 3;
  int retry_base_backoff_ms = 250;
  int timeout_ms = 30000;
};

struct InferenceRecord {
  std::string content_hash;  // sha256 of the prompt text
  std::string model;
  double temperature = 0.0;
  int max_tokens = 0;
  std::string response_text;
  bool empty_response = false;  // explicit marker; response_text may be ""
  double latency_ms = 0.0;
  std::string timestamp;
  std::string backend_name;
  int attempts = 1;
};

std::string record_to_jsonl(const InferenceRecord& r);
InferenceRecord record_from_jsonl(const std::string& line);

struct CompletionResult {
  std::string text;
  int attempts = 1;
  double latency_ms = 0.0;
  bool from_cache = false;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual CompletionResult complete(const ChatRequest& request) = 0;
};

/// Appends one JSONL record per inference; reads resolve duplicate keys by
/// last-write-wins. Key = (content_hash, model, temperature, max_tokens).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path path);

  std::optional<InferenceRecord> lookup(const std::string& content_hash,
                                        const std::string& model, double temperature,
                                        int max_tokens) const;
  void append(const InferenceRecord& record);
  size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  static std::string key(const std::string& hash, const std::string& model,
                         double temperature, int max_tokens);
  std::filesystem::path path_;
  std::map<std::string, InferenceRecord> records_;
  mutable std::mutex mutex_;
};

/// OpenAI-compatible chat completion client:
/// POST {base_url}/v1/chat/completions, answer in choices[0].message.content.
/// Transient failures (429/5xx/timeout) retry with exponential backoff;
/// auth failures do not.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  ~HttpBackend() override;
  std::string name() const override { return "http"; }
  CompletionResult complete(const ChatRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Serves only previously recorded responses; unknown prompts are errors.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<ResponseCache> cache) : cache_(std::move(cache)) {}
  std::string name() const override { return "replay"; }
  CompletionResult complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ResponseCache> cache_;
};

/// Deterministic scripted stand-in for an LLM. For chain-of-thought prompts
/// it emits a four-part analysis (variance, step changes, dominant
/// frequency, vertical drift) concluding "the person is most likely X"; for
/// direct-output prompts it answers from coarse amplitude statistics alone.
class HeuristicBackend : public Backend {
 public:
  std::string name() const override { return "heuristic"; }
  CompletionResult complete(const ChatRequest& request) override;
};

std::string heuristic_classify(const std::string& prompt_text);

/// Cache-first completion: a hit returns the recorded text with zero backend
/// calls; a miss delegates and appends the new record.
CompletionResult complete_cached(Backend& backend, ResponseCache& cache,
                                 const ChatRequest& request, const std::string& content_hash);

}  // namespace harbench
