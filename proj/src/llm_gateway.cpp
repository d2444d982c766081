#include "ipeval/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ipeval/providers.hpp"
#include "ipeval/util.hpp"

namespace ipeval {

nlohmann::json CompletionRequest::canonical_json() const {
  // nlohmann::json orders object keys lexicographically, which makes
  // dump() a canonical serialization.
  nlohmann::json j;
  j["kind"] = "completion";
  j["max_tokens"] = max_tokens;
  j["model_id"] = model_id;
  j["prompt"] = prompt;
  j["request_tag"] = request_tag;
  if (temperature.has_value()) {
    j["temperature"] = *temperature;
  } else {
    j["temperature"] = nullptr;
  }
  return j;
}

std::string CompletionRequest::cache_key() const {
  return sha256_hex(canonical_json().dump());
}

std::chrono::milliseconds BackoffSchedule::at(size_t attempt) const {
  if (steps.empty()) return std::chrono::milliseconds(0);
  return steps[std::min(attempt, steps.size() - 1)];
}

ProviderConfig ProviderConfig::from_json(const std::string& name, const nlohmann::json& j) {
  ProviderConfig c;
  c.name = name;
  c.type = j.value("type", "http");
  c.endpoint_url = j.value("endpoint_url", "");
  c.api_key_env = j.value("api_key_env", "");
  c.max_concurrency = j.value("max_concurrency", 4);
  c.max_retries = j.value("max_retries", 2);
  if (j.contains("backoff_ms")) {
    c.backoff.steps.clear();
    for (const auto& ms : j.at("backoff_ms")) {
      c.backoff.steps.emplace_back(std::chrono::milliseconds(ms.get<int64_t>()));
    }
  }
  c.replay_path = j.value("replay", "");
  if (c.max_concurrency < 1) {
    throw GatewayError(GatewayErrorKind::config,
                       "provider '" + name + "': max_concurrency must be >= 1");
  }
  if (c.max_retries < 0) {
    throw GatewayError(GatewayErrorKind::config,
                       "provider '" + name + "': max_retries must be >= 0");
  }
  if (c.type != "http" && c.type != "mock") {
    throw GatewayError(GatewayErrorKind::config,
                       "provider '" + name + "': unknown type '" + c.type + "'");
  }
  if (c.type == "http" && c.endpoint_url.empty()) {
    throw GatewayError(GatewayErrorKind::config,
                       "provider '" + name + "': endpoint_url required for http");
  }
  if (c.type == "mock" && c.replay_path.empty()) {
    throw GatewayError(GatewayErrorKind::config,
                       "provider '" + name + "': replay file required for mock");
  }
  return c;
}

GatewayError::GatewayError(GatewayErrorKind kind, const std::string& message,
                           std::string request_tag, int attempts)
    : std::runtime_error(request_tag.empty() ? message
                                             : "[" + request_tag + "] " + message),
      kind_(kind),
      request_tag_(std::move(request_tag)),
      attempts_(attempts) {}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  if (config.type == "mock") {
    return make_mock_provider(config);
  }
  return make_http_provider(config);
}

LlmGateway::LlmGateway(std::shared_ptr<Provider> provider, ProviderConfig config,
                       std::filesystem::path cache_dir)
    : provider_(std::move(provider)),
      config_(std::move(config)),
      cache_dir_(std::move(cache_dir)),
      slots_(config_.max_concurrency) {
  if (!cache_dir_.empty()) {
    std::filesystem::create_directories(cache_dir_);
  }
}

std::optional<std::string> LlmGateway::cache_lookup_completion(const std::string& key) const {
  if (cache_dir_.empty()) return std::nullopt;
  std::filesystem::path file = cache_dir_ / (key + ".json");
  if (!std::filesystem::exists(file)) return std::nullopt;
  try {
    nlohmann::json j = nlohmann::json::parse(read_text_file(file));
    return j.at("response").get<std::string>();
  } catch (const std::exception&) {
    return std::nullopt;  // corrupt entry: treat as miss, it will be rewritten
  }
}

void LlmGateway::cache_store_completion(const CompletionRequest& req, const std::string& key,
                                        const std::string& response) {
  if (cache_dir_.empty()) return;
  nlohmann::json j;
  j["request"] = req.canonical_json();
  j["request_hash"] = key;
  j["response"] = response;
  j["created_at"] = static_cast<int64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  atomic_write_file(cache_dir_ / (key + ".json"), j.dump() + "\n");
}

std::optional<std::vector<double>> LlmGateway::cache_lookup_embedding(
    const std::string& key) const {
  if (cache_dir_.empty()) return std::nullopt;
  std::filesystem::path file = cache_dir_ / (key + ".json");
  if (!std::filesystem::exists(file)) return std::nullopt;
  try {
    nlohmann::json j = nlohmann::json::parse(read_text_file(file));
    return j.at("values").get<std::vector<double>>();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void LlmGateway::cache_store_embedding(const std::string& model_id, const std::string& text,
                                       const std::string& key,
                                       const std::vector<double>& values) {
  if (cache_dir_.empty()) return;
  nlohmann::json j;
  j["kind"] = "embedding";
  j["model_id"] = model_id;
  j["request_hash"] = key;
  j["text"] = text;
  j["values"] = values;
  j["created_at"] = static_cast<int64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  atomic_write_file(cache_dir_ / (key + ".json"), j.dump() + "\n");
}

std::string LlmGateway::call_with_retry(const CompletionRequest& req) {
  int attempts = 0;
  for (;;) {
    ++attempts;
    try {
      {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        ++provider_calls_;
      }
      std::string text = provider_->complete(req);
      if (text.empty()) {
        // tag is attached by the rethrow below
        throw GatewayError(GatewayErrorKind::content, "provider returned empty completion");
      }
      return text;
    } catch (const GatewayError& e) {
      if (e.kind() != GatewayErrorKind::transport || attempts > config_.max_retries) {
        throw GatewayError(e.kind(), e.what(), req.request_tag, attempts);
      }
      std::this_thread::sleep_for(config_.backoff.at(static_cast<size_t>(attempts - 1)));
    }
  }
}

std::string LlmGateway::complete(const CompletionRequest& req) {
  if (req.prompt.empty()) {
    throw GatewayError(GatewayErrorKind::config, "empty prompt", req.request_tag);
  }
  const std::string key = req.cache_key();
  if (auto cached = cache_lookup_completion(key)) {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    ++cache_hits_;
    return *cached;
  }
  slots_.acquire();
  std::string text;
  try {
    text = call_with_retry(req);
  } catch (...) {
    slots_.release();
    throw;
  }
  slots_.release();
  cache_store_completion(req, key, text);
  return text;
}

std::string embedding_cache_key(const std::string& model_id, const std::string& text) {
  nlohmann::json j;
  j["kind"] = "embedding";
  j["model_id"] = model_id;
  j["text"] = text;
  return sha256_hex(j.dump());
}

std::vector<EmbeddingVector> LlmGateway::embed(const std::string& model_id,
                                               const std::vector<std::string>& texts) {
  if (texts.empty()) {
    throw GatewayError(GatewayErrorKind::config, "embed: empty batch");
  }
  for (const std::string& t : texts) {
    if (t.empty()) {
      throw GatewayError(GatewayErrorKind::config, "embed: empty text in batch");
    }
  }

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<size_t> missing;
  std::map<std::string, size_t> first_seen;  // dedupe within the batch
  std::vector<std::string> to_fetch;

  for (size_t i = 0; i < texts.size(); ++i) {
    const std::string key = embedding_cache_key(model_id, texts[i]);
    if (auto cached = cache_lookup_embedding(key)) {
      out[i] = {model_id, std::move(*cached)};
      std::lock_guard<std::mutex> lock(stats_mutex_);
      ++cache_hits_;
      continue;
    }
    auto [it, inserted] = first_seen.emplace(texts[i], to_fetch.size());
    if (inserted) to_fetch.push_back(texts[i]);
    missing.push_back(i);
  }

  if (!to_fetch.empty()) {
    slots_.acquire();
    std::vector<std::vector<double>> fetched;
    try {
      {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        ++provider_calls_;
      }
      fetched = provider_->embed(model_id, to_fetch);
    } catch (...) {
      slots_.release();
      throw;
    }
    slots_.release();
    if (fetched.size() != to_fetch.size()) {
      throw GatewayError(GatewayErrorKind::content,
                         "embedding batch size mismatch: asked " +
                             std::to_string(to_fetch.size()) + ", got " +
                             std::to_string(fetched.size()));
    }
    for (size_t i = 0; i < to_fetch.size(); ++i) {
      cache_store_embedding(model_id, to_fetch[i],
                            embedding_cache_key(model_id, to_fetch[i]), fetched[i]);
    }
    for (size_t idx : missing) {
      out[idx] = {model_id, fetched[first_seen.at(texts[idx])]};
    }
  }

  // enforce one dimension per model across the whole run
  std::lock_guard<std::mutex> lock(dim_mutex_);
  for (const auto& v : out) {
    for (double x : v.values) {
      if (!std::isfinite(x)) {
        throw GatewayError(GatewayErrorKind::content,
                           "embedding contains non-finite value (model " + model_id + ")");
      }
    }
    auto [it, inserted] = dims_by_model_.emplace(model_id, v.dim());
    if (!inserted && it->second != v.dim()) {
      throw GatewayError(GatewayErrorKind::config,
                         "embedding dimension mismatch for model " + model_id + ": " +
                             std::to_string(it->second) + " vs " + std::to_string(v.dim()));
    }
  }
  return out;
}

size_t LlmGateway::cache_hits() const {
  std::lock_guard<std::mutex> lock(stats_mutex_);
  return cache_hits_;
}

size_t LlmGateway::provider_calls() const {
  std::lock_guard<std::mutex> lock(stats_mutex_);
  return provider_calls_;
}

}  // namespace ipeval
