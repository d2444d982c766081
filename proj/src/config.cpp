#include "ipeval/config.hpp"

#include <sstream>

#include "ipeval/util.hpp"

#ifndef IPEVAL_DEFAULT_PROMPT_DIR
#define IPEVAL_DEFAULT_PROMPT_DIR "resources/prompts/v1"
#endif

namespace ipeval {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base_dir,
                              const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_percentile(int p, const std::string& field) {
  require(p >= 0 && p <= 100, "config: " + field + " must be in 0..100");
}

EvalParams params_from_json(const nlohmann::json& j, const EvalParams& defaults) {
  EvalParams params = defaults;
  if (j.contains("temperature") && !j.at("temperature").is_null()) {
    params.temperature = j.at("temperature").get<double>();
    require(*params.temperature >= 0, "config: temperature must be >= 0");
  }
  if (j.contains("max_tokens")) {
    params.max_tokens = j.at("max_tokens").get<int>();
    require(params.max_tokens >= 1, "config: max_tokens must be >= 1");
  }
  return params;
}

nlohmann::json params_to_json(const EvalParams& params) {
  nlohmann::json j;
  j["temperature"] =
      params.temperature.has_value() ? nlohmann::json(*params.temperature) : nlohmann::json();
  j["max_tokens"] = params.max_tokens;
  return j;
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path,
                               const ConfigOverrides& overrides) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json(j, path.parent_path(), overrides);
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                               const ConfigOverrides& overrides) {
  RunConfig c;
  try {
    c.dataset_id = j.at("dataset_id").get<std::string>();
    if (j.contains("corpus_manifest") && !j.at("corpus_manifest").is_null()) {
      c.corpus_manifest = resolve(base_dir, j.at("corpus_manifest").get<std::string>());
    }
    if (j.contains("synth_topics") && !j.at("synth_topics").is_null()) {
      c.synth_topics = resolve(base_dir, j.at("synth_topics").get<std::string>());
    }
    c.chunk_words = j.value("chunk_words", size_t{2000});
    c.mcqs_per_chunk = j.value("mcqs_per_chunk", 10);
    c.generator_model = j.at("generator_model").get<std::string>();
    c.evaluator_models = j.at("evaluator_models").get<std::vector<std::string>>();
    c.embedder_model = j.at("embedder_model").get<std::string>();

    if (j.contains("filter")) {
      const nlohmann::json& f = j.at("filter");
      c.policy.jaccard_percentile = f.value("jaccard_percentile", 0);
      c.policy.rouge_percentile = f.value("rouge_percentile", 0);
      c.policy.cosine_percentile = f.value("cosine_percentile", 0);
      if (f.contains("cosine_upper_cap") && !f.at("cosine_upper_cap").is_null()) {
        c.policy.cosine_upper_cap = f.at("cosine_upper_cap").get<double>();
      }
    }

    c.seed = j.value("seed", uint64_t{0});
    c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    c.prompt_dir = j.contains("prompt_dir") && !j.at("prompt_dir").is_null()
                       ? resolve(base_dir, j.at("prompt_dir").get<std::string>())
                       : std::filesystem::path(IPEVAL_DEFAULT_PROMPT_DIR);

    require(j.contains("providers") && j.at("providers").is_object() &&
                !j.at("providers").empty(),
            "config: at least one provider required");
    for (const auto& [name, pj] : j.at("providers").items()) {
      ProviderConfig pc = ProviderConfig::from_json(name, pj);
      pc.replay_path = resolve(base_dir, pc.replay_path);
      c.providers.emplace(name, std::move(pc));
    }
    c.completion_provider = j.value("completion_provider", "");
    c.embedding_provider = j.value("embedding_provider", "");
    if (c.completion_provider.empty() && c.providers.size() == 1) {
      c.completion_provider = c.providers.begin()->first;
    }
    if (c.embedding_provider.empty() && c.providers.size() == 1) {
      c.embedding_provider = c.providers.begin()->first;
    }

    if (j.contains("generation")) {
      c.generation_params = params_from_json(j.at("generation"), c.generation_params);
    }
    if (j.contains("evaluation")) {
      c.evaluation_params = params_from_json(j.at("evaluation"), c.evaluation_params);
    }
    if (j.contains("sweep_percentiles")) {
      c.sweep_percentiles = j.at("sweep_percentiles").get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.provider) {
    c.completion_provider = *overrides.provider;
    c.embedding_provider = *overrides.provider;
  }

  require(!c.dataset_id.empty(), "config: dataset_id must be non-empty");
  require(c.corpus_manifest.has_value() != c.synth_topics.has_value(),
          "config: exactly one of corpus_manifest and synth_topics required");
  require(c.chunk_words >= 1, "config: chunk_words must be >= 1");
  require(c.mcqs_per_chunk >= 1, "config: mcqs_per_chunk must be >= 1");
  require(!c.generator_model.empty(), "config: generator_model must be non-empty");
  require(!c.evaluator_models.empty(), "config: at least one evaluator model required");
  for (const std::string& m : c.evaluator_models) {
    require(!m.empty(), "config: evaluator model ids must be non-empty");
  }
  require(!c.embedder_model.empty(), "config: embedder_model must be non-empty");
  check_percentile(c.policy.jaccard_percentile, "filter.jaccard_percentile");
  check_percentile(c.policy.rouge_percentile, "filter.rouge_percentile");
  check_percentile(c.policy.cosine_percentile, "filter.cosine_percentile");
  if (c.policy.cosine_upper_cap) {
    require(*c.policy.cosine_upper_cap > 0 && *c.policy.cosine_upper_cap <= 1,
            "config: filter.cosine_upper_cap must be in (0,1]");
  }
  for (int p : c.sweep_percentiles) check_percentile(p, "sweep_percentiles");
  require(!c.output_dir.empty(), "config: output_dir must be non-empty");
  require(c.providers.count(c.completion_provider) == 1,
          "config: completion_provider '" + c.completion_provider + "' not in providers");
  require(c.providers.count(c.embedding_provider) == 1,
          "config: embedding_provider '" + c.embedding_provider + "' not in providers");

  if (c.corpus_manifest) {
    require(std::filesystem::exists(*c.corpus_manifest),
            "config: corpus_manifest not found: " + c.corpus_manifest->string());
  }
  if (c.synth_topics) {
    require(std::filesystem::exists(*c.synth_topics),
            "config: synth_topics not found: " + c.synth_topics->string());
  }
  require(std::filesystem::exists(c.prompt_dir),
          "config: prompt_dir not found: " + c.prompt_dir.string());
  for (const auto& [name, pc] : c.providers) {
    if (pc.type == "mock") {
      require(std::filesystem::exists(pc.replay_path),
              "config: provider '" + name + "' replay not found: " + pc.replay_path.string());
    }
  }
  return c;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["dataset_id"] = dataset_id;
  j["corpus_manifest"] =
      corpus_manifest ? nlohmann::json(corpus_manifest->string()) : nlohmann::json();
  j["synth_topics"] = synth_topics ? nlohmann::json(synth_topics->string()) : nlohmann::json();
  j["chunk_words"] = chunk_words;
  j["mcqs_per_chunk"] = mcqs_per_chunk;
  j["generator_model"] = generator_model;
  j["evaluator_models"] = evaluator_models;
  j["embedder_model"] = embedder_model;
  j["filter"] = {{"jaccard_percentile", policy.jaccard_percentile},
                 {"rouge_percentile", policy.rouge_percentile},
                 {"cosine_percentile", policy.cosine_percentile}};
  j["filter"]["cosine_upper_cap"] =
      policy.cosine_upper_cap ? nlohmann::json(*policy.cosine_upper_cap) : nlohmann::json();
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  j["prompt_dir"] = prompt_dir.string();
  nlohmann::json providers_json = nlohmann::json::object();
  for (const auto& [name, pc] : providers) {
    nlohmann::json pj;
    pj["type"] = pc.type;
    pj["endpoint_url"] = pc.endpoint_url;
    pj["api_key_env"] = pc.api_key_env;
    pj["max_concurrency"] = pc.max_concurrency;
    pj["max_retries"] = pc.max_retries;
    std::vector<int64_t> backoff_ms;
    for (const auto& step : pc.backoff.steps) backoff_ms.push_back(step.count());
    pj["backoff_ms"] = backoff_ms;
    pj["replay"] = pc.replay_path.string();
    providers_json[name] = std::move(pj);
  }
  j["providers"] = std::move(providers_json);
  j["completion_provider"] = completion_provider;
  j["embedding_provider"] = embedding_provider;
  j["generation"] = params_to_json(generation_params);
  j["evaluation"] = params_to_json(evaluation_params);
  j["sweep_percentiles"] = sweep_percentiles;
  return j;
}

const ProviderConfig& RunConfig::provider_for_completions() const {
  return providers.at(completion_provider);
}

const ProviderConfig& RunConfig::provider_for_embeddings() const {
  return providers.at(embedding_provider);
}

std::vector<std::string> read_topic_lines(const std::filesystem::path& path) {
  std::vector<std::string> topics;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!t.empty() && t[0] != '#') topics.push_back(t);
  }
  return topics;
}

}  // namespace ipeval
