#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <memory>

#include "ipeval/providers.hpp"
#include "ipeval/util.hpp"

namespace ipeval {

namespace {

struct ParsedUrl {
  std::string origin;     // scheme://host[:port]
  std::string base_path;  // e.g. /v1
};

ParsedUrl parse_endpoint(const std::string& url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw GatewayError(GatewayErrorKind::config, "endpoint_url must include scheme: " + url);
  }
  size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, ""};
  }
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

bool retriable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

// Chat-completion and embeddings in the de-facto OpenAI wire shape,
// which most providers (and local servers) accept.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(const ProviderConfig& config)
      : config_(config), url_(parse_endpoint(config.endpoint_url)) {
    if (!config_.api_key_env.empty()) {
      const char* key = std::getenv(config_.api_key_env.c_str());
      if (key != nullptr) api_key_ = key;
    }
  }

  std::string complete(const CompletionRequest& req) override {
    nlohmann::json body;
    body["model"] = req.model_id;
    body["messages"] = nlohmann::json::array({
        {{"role", "user"}, {"content", req.prompt}},
    });
    if (req.temperature.has_value()) body["temperature"] = *req.temperature;
    body["max_tokens"] = req.max_tokens;

    nlohmann::json response = post_json("/chat/completions", body, req.request_tag);
    try {
      const auto& choices = response.at("choices");
      if (choices.empty()) {
        throw GatewayError(GatewayErrorKind::content, "provider returned no choices",
                           req.request_tag);
      }
      return choices.at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError(GatewayErrorKind::content,
                         std::string("unexpected completion response shape: ") + e.what(),
                         req.request_tag);
    }
  }

  std::vector<std::vector<double>> embed(const std::string& model_id,
                                         const std::vector<std::string>& texts) override {
    nlohmann::json body;
    body["model"] = model_id;
    body["input"] = texts;
    nlohmann::json response = post_json("/embeddings", body, "embed");
    try {
      std::vector<std::vector<double>> out(texts.size());
      for (const auto& item : response.at("data")) {
        size_t index = item.at("index").get<size_t>();
        if (index >= out.size()) {
          throw GatewayError(GatewayErrorKind::content, "embedding index out of range");
        }
        out[index] = item.at("embedding").get<std::vector<double>>();
      }
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError(GatewayErrorKind::content,
                         std::string("unexpected embedding response shape: ") + e.what());
    }
  }

 private:
  nlohmann::json post_json(const std::string& endpoint, const nlohmann::json& body,
                           const std::string& tag) {
    httplib::Client client(url_.origin);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(180, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
    // TODO: honor Retry-After when providers send it instead of the
    // configured backoff alone
    auto result = client.Post(url_.base_path + endpoint, headers, body.dump(),
                              "application/json");
    if (!result) {
      throw GatewayError(GatewayErrorKind::transport,
                         "transport failure: " + httplib::to_string(result.error()), tag);
    }
    if (result->status != 200) {
      auto kind = retriable_status(result->status) ? GatewayErrorKind::transport
                                                   : GatewayErrorKind::content;
      throw GatewayError(kind,
                         "HTTP " + std::to_string(result->status) + " from " + endpoint, tag);
    }
    try {
      return nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw GatewayError(GatewayErrorKind::content,
                         std::string("response is not JSON: ") + e.what(), tag);
    }
  }

  ProviderConfig config_;
  ParsedUrl url_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<Provider> make_http_provider(const ProviderConfig& config) {
  return std::make_unique<HttpProvider>(config);
}

}  // namespace ipeval
