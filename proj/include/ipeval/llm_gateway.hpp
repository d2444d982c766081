#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

namespace ipeval {

struct CompletionRequest {
  std::string model_id;
  std::string prompt;
  // unset = provider default (used for generation); evaluation pins 0
  std::optional<double> temperature;
  int max_tokens = 1024;
  std::string request_tag;  // pipeline stage label, carried into errors

  // Stable field order; its hash is the cache key.
  nlohmann::json canonical_json() const;
  std::string cache_key() const;
};

struct EmbeddingVector {
  std::string model_id;
  std::vector<double> values;
  size_t dim() const { return values.size(); }
};

struct BackoffSchedule {
  std::vector<std::chrono::milliseconds> steps{std::chrono::milliseconds(500),
                                               std::chrono::milliseconds(1000),
                                               std::chrono::milliseconds(2000)};
  std::chrono::milliseconds at(size_t attempt) const;
};

struct ProviderConfig {
  std::string name;          // registry key, e.g. "mock" or "openai"
  std::string type;          // "http" | "mock"
  std::string endpoint_url;  // http only, e.g. https://api.openai.com/v1
  std::string api_key_env;   // env var holding the credential; never logged
  int max_concurrency = 4;
  int max_retries = 2;
  BackoffSchedule backoff;
  std::filesystem::path replay_path;  // mock only

  static ProviderConfig from_json(const std::string& name, const nlohmann::json& j);
};

enum class GatewayErrorKind { transport, content, config };

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& message,
               std::string request_tag = "", int attempts = 1);

  GatewayErrorKind kind() const { return kind_; }
  const std::string& request_tag() const { return request_tag_; }
  int attempts() const { return attempts_; }

 private:
  GatewayErrorKind kind_;
  std::string request_tag_;
  int attempts_;
};

// Raw transport. Implementations do one attempt, no caching.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const CompletionRequest& req) = 0;
  virtual std::vector<std::vector<double>> embed(const std::string& model_id,
                                                 const std::vector<std::string>& texts) = 0;
  virtual bool offline() const { return false; }
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

// Adds the operational layer around a Provider: content-addressed disk
// cache, retry with backoff on transport failures, and a concurrency
// bound shared by all callers.
class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<Provider> provider, ProviderConfig config,
             std::filesystem::path cache_dir);  // empty cache_dir = no disk cache

  std::string complete(const CompletionRequest& req);

  // Order- and length-preserving; one vector per input text. Cached per
  // (model_id, text).
  std::vector<EmbeddingVector> embed(const std::string& model_id,
                                     const std::vector<std::string>& texts);

  bool offline() const { return provider_->offline(); }
  size_t cache_hits() const;
  size_t provider_calls() const;

 private:
  std::optional<std::string> cache_lookup_completion(const std::string& key) const;
  void cache_store_completion(const CompletionRequest& req, const std::string& key,
                              const std::string& response);
  std::optional<std::vector<double>> cache_lookup_embedding(const std::string& key) const;
  void cache_store_embedding(const std::string& model_id, const std::string& text,
                             const std::string& key, const std::vector<double>& values);
  std::string call_with_retry(const CompletionRequest& req);

  std::shared_ptr<Provider> provider_;
  ProviderConfig config_;
  std::filesystem::path cache_dir_;
  std::counting_semaphore<> slots_;
  mutable std::mutex stats_mutex_;
  size_t cache_hits_ = 0;
  size_t provider_calls_ = 0;
  std::mutex dim_mutex_;
  std::map<std::string, size_t> dims_by_model_;
};

std::string embedding_cache_key(const std::string& model_id, const std::string& text);

}  // namespace ipeval
