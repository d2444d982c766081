#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipeval/llm_gateway.hpp"
#include "ipeval/quality_filter.hpp"

namespace ipeval {

// Sampling parameters for one request class. Unset temperature defers
// to the provider default.
struct EvalParams {
  std::optional<double> temperature;
  int max_tokens = 1024;
};

struct ConfigOverrides {
  std::optional<uint64_t> seed;
  std::optional<std::string> provider;  // replaces both provider roles
};

struct RunConfig {
  std::string dataset_id;
  // exactly one corpus source
  std::optional<std::filesystem::path> corpus_manifest;
  std::optional<std::filesystem::path> synth_topics;  // one topic per line

  size_t chunk_words = 2000;
  int mcqs_per_chunk = 10;

  std::string generator_model;
  std::vector<std::string> evaluator_models;
  std::string embedder_model;

  ThresholdPolicy policy;
  uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::filesystem::path prompt_dir;

  std::map<std::string, ProviderConfig> providers;
  std::string completion_provider;
  std::string embedding_provider;

  EvalParams generation_params{std::nullopt, 2048};
  EvalParams evaluation_params{0.0, 64};

  std::vector<int> sweep_percentiles;  // empty disables the sweep stage

  // Parses and validates; relative paths resolve against the config
  // file's directory. Validation failures throw ConfigError.
  static RunConfig from_file(const std::filesystem::path& path,
                             const ConfigOverrides& overrides = {});
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                             const ConfigOverrides& overrides = {});

  // Full snapshot, used in the run manifest and (minus output_dir) as
  // the run-id fingerprint.
  nlohmann::json to_json() const;

  const ProviderConfig& provider_for_completions() const;
  const ProviderConfig& provider_for_embeddings() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> read_topic_lines(const std::filesystem::path& path);

}  // namespace ipeval
