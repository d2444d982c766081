#include "ipeval/pipeline.hpp"

#include <algorithm>
#include <ctime>
#include <set>
#include <sstream>

#include "ipeval/baseline_synth.hpp"
#include "ipeval/corpus.hpp"
#include "ipeval/evaluator.hpp"
#include "ipeval/jsonl.hpp"
#include "ipeval/mcq.hpp"
#include "ipeval/quality_filter.hpp"
#include "ipeval/scoring.hpp"
#include "ipeval/text.hpp"
#include "ipeval/util.hpp"

#ifndef IPEVAL_VERSION
#define IPEVAL_VERSION "0.0.0"
#endif

namespace ipeval {

namespace fs = std::filesystem;

namespace {

std::string iso8601_now() {
  std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string params_fingerprint(const EvalParams& p) {
  std::string t = p.temperature ? std::to_string(*p.temperature) : "default";
  return t + ":" + std::to_string(p.max_tokens);
}

constexpr size_t kEmbedBatch = 128;

}  // namespace

std::string tool_version() { return IPEVAL_VERSION; }

std::string compute_run_id(const RunConfig& config, const std::string& version) {
  nlohmann::json snapshot = config.to_json();
  snapshot.erase("output_dir");
  return sha256_hex(snapshot.dump() + "|" + version).substr(0, 12);
}

class Pipeline::GatewayPool {
 public:
  LlmGateway& get(const ProviderConfig& pc, const fs::path& cache_dir) {
    auto hit = gateways_.find(pc.name);
    if (hit != gateways_.end()) return *hit->second;
    std::shared_ptr<Provider> provider = make_provider(pc);
    auto gateway = std::make_unique<LlmGateway>(std::move(provider), pc, cache_dir);
    auto [it, inserted] = gateways_.emplace(pc.name, std::move(gateway));
    return *it->second;
  }

 private:
  std::map<std::string, std::unique_ptr<LlmGateway>> gateways_;
};

Pipeline::Pipeline(RunConfig config)
    : config_(std::move(config)),
      prompts_(PromptLibrary::load(config_.prompt_dir)),
      run_id_(compute_run_id(config_, tool_version())),
      gateways_(std::make_unique<GatewayPool>()) {
  fs::path manifest_path = out("manifest.json");
  if (fs::exists(manifest_path)) {
    try {
      manifest_ = nlohmann::json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::parse_error&) {
      manifest_ = nlohmann::json::object();  // corrupt manifest: redo stages
    }
  } else {
    manifest_ = nlohmann::json::object();
  }
  if (!manifest_.contains("stages") || !manifest_.at("stages").is_object()) {
    manifest_["stages"] = nlohmann::json::object();
  }
}

Pipeline::~Pipeline() = default;

fs::path Pipeline::out(const std::string& relative) const {
  return config_.output_dir / relative;
}

std::string Pipeline::artifact_hash(const fs::path& relative) const {
  return sha256_hex(read_text_file(config_.output_dir / relative));
}

void Pipeline::require_artifact(const std::string& relative,
                                const std::string& producing_stage) const {
  if (!fs::exists(out(relative))) {
    throw PipelineError("missing artifact '" + relative + "'; run stage '" +
                        producing_stage + "' first");
  }
}

void Pipeline::note(const std::string& line) { stage_log_.push_back(line); }

bool Pipeline::stage_fresh(const std::string& stage, const std::string& fingerprint) const {
  const nlohmann::json& stages = manifest_.at("stages");
  if (!stages.contains(stage)) return false;
  const nlohmann::json& entry = stages.at(stage);
  if (entry.value("input_fingerprint", "") != fingerprint) return false;
  if (!entry.contains("outputs") || !entry.at("outputs").is_object()) return false;
  for (const auto& [file, hash] : entry.at("outputs").items()) {
    if (!fs::exists(out(file))) return false;
    if (artifact_hash(file) != hash.get<std::string>()) return false;
  }
  return true;
}

void Pipeline::record_stage(const std::string& stage, const std::string& fingerprint,
                            const std::map<std::string, std::string>& outputs) {
  nlohmann::json entry;
  entry["input_fingerprint"] = fingerprint;
  entry["outputs"] = outputs;
  entry["completed_at"] = iso8601_now();
  manifest_["stages"][stage] = std::move(entry);

  nlohmann::json full;
  full["schema"] = "run_manifest.v1";
  full["run_id"] = run_id_;
  full["tool_version"] = tool_version();
  full["config"] = config_.to_json();
  full["stages"] = manifest_.at("stages");
  atomic_write_file(out("manifest.json"), full.dump(2) + "\n");
}

LlmGateway& Pipeline::gateway(const std::string& provider_name) {
  auto it = config_.providers.find(provider_name);
  if (it == config_.providers.end()) {
    throw PipelineError("provider '" + provider_name + "' not configured");
  }
  return gateways_->get(it->second, out("cache"));
}

fs::path Pipeline::corpus_manifest_path() const {
  if (config_.corpus_manifest) return *config_.corpus_manifest;
  return out("synth/manifest.jsonl");
}

bool Pipeline::evaluate_full_pool() const { return !config_.sweep_percentiles.empty(); }

void Pipeline::run_synth() {
  if (!config_.synth_topics) {
    throw PipelineError("synth-baseline needs synth_topics in the config");
  }
  std::vector<std::string> topics = read_topic_lines(*config_.synth_topics);
  if (topics.empty()) {
    throw PipelineError("no topics in " + config_.synth_topics->string());
  }

  std::string topics_blob;
  for (const std::string& t : topics) topics_blob += t + "\n";
  std::string fingerprint =
      "synth|" + sha256_hex(topics_blob) + "|" + config_.generator_model + "|" +
      config_.completion_provider + "|" + params_fingerprint(config_.generation_params) +
      "|" + sha256_hex(prompts_.raw(PromptKind::baseline_subtopics)) + "|" +
      sha256_hex(prompts_.raw(PromptKind::baseline_chapter));
  if (stage_fresh("synth", fingerprint)) {
    note("synth: up to date");
    return;
  }

  LlmGateway& gw = gateway(config_.completion_provider);
  std::vector<nlohmann::json> topic_rows, manifest_rows;
  std::map<std::string, std::string> outputs;

  CompletionRequest base;
  base.model_id = config_.generator_model;
  base.temperature = config_.generation_params.temperature;
  base.max_tokens = config_.generation_params.max_tokens;
  for (size_t ti = 0; ti < topics.size(); ++ti) {
    SyntheticTopic st = generate_subtopics(prompts_, topics[ti], base, gw);
    topic_rows.push_back({{"schema", "synth_topic.v1"},
                          {"topic", st.topic},
                          {"subtopics", st.subtopics}});
    for (size_t si = 0; si < st.subtopics.size(); ++si) {
      std::string doc_id =
          slugify(topics[ti]) + "-t" + std::to_string(ti) + "-s" + std::to_string(si);
      Document doc =
          generate_chapter(prompts_, topics[ti], st.subtopics[si], doc_id, base, gw);
      std::string rel = "synth/docs/" + doc_id + ".txt";
      atomic_write_file(out(rel), doc.text);
      manifest_rows.push_back({{"doc_id", doc_id},
                               {"path", "docs/" + doc_id + ".txt"},
                               {"title", *doc.title},
                               {"synthetic", true}});
      outputs[rel] = artifact_hash(rel);
    }
  }
  write_jsonl(out("synth/topics.jsonl"), topic_rows);
  write_jsonl(out("synth/manifest.jsonl"), manifest_rows);
  outputs["synth/topics.jsonl"] = artifact_hash("synth/topics.jsonl");
  outputs["synth/manifest.jsonl"] = artifact_hash("synth/manifest.jsonl");
  record_stage("synth", fingerprint, outputs);
  note("synth: " + std::to_string(manifest_rows.size()) + " documents from " +
       std::to_string(topics.size()) + " topics");
}

void Pipeline::run_chunk() {
  if (config_.synth_topics) {
    require_artifact("synth/manifest.jsonl", "synth-baseline");
  }
  CorpusLoadResult corpus = load_corpus(corpus_manifest_path());

  std::string blob = "chunk|" + std::to_string(config_.chunk_words);
  for (const Document& doc : corpus.documents) {
    blob += "|" + sha256_hex(doc.doc_id + ":" + doc.text);
  }
  for (const CorpusLoadError& e : corpus.errors) {
    blob += "|err:" + e.doc_id + ":" + e.message;
  }
  std::string fingerprint = sha256_hex(blob);
  if (stage_fresh("chunk", fingerprint)) {
    note("chunk: up to date");
    return;
  }

  std::vector<Chunk> chunks;
  for (const Document& doc : corpus.documents) {
    std::vector<Chunk> doc_chunks = chunk_document(doc, config_.chunk_words);
    chunks.insert(chunks.end(), doc_chunks.begin(), doc_chunks.end());
  }
  write_chunks(out("chunks.jsonl"), chunks);

  std::vector<nlohmann::json> error_rows;
  for (const CorpusLoadError& e : corpus.errors) {
    error_rows.push_back({{"schema", "corpus_error.v1"},
                          {"doc_id", e.doc_id},
                          {"path", e.path},
                          {"message", e.message}});
  }
  write_jsonl(out("corpus_errors.jsonl"), error_rows);

  record_stage("chunk", fingerprint,
               {{"chunks.jsonl", artifact_hash("chunks.jsonl")},
                {"corpus_errors.jsonl", artifact_hash("corpus_errors.jsonl")}});
  note("chunk: " + std::to_string(chunks.size()) + " chunks from " +
       std::to_string(corpus.documents.size()) + " documents" +
       (corpus.errors.empty()
            ? ""
            : " (" + std::to_string(corpus.errors.size()) + " documents rejected)"));
}

void Pipeline::run_generate() {
  require_artifact("chunks.jsonl", "chunk");
  std::vector<Chunk> chunks = read_chunks(out("chunks.jsonl"));
  if (chunks.empty()) throw PipelineError("chunks.jsonl is empty; nothing to generate");

  std::string fingerprint =
      "generate|" + artifact_hash("chunks.jsonl") + "|" + config_.generator_model + "|" +
      std::to_string(config_.mcqs_per_chunk) + "|" +
      params_fingerprint(config_.generation_params) + "|" +
      sha256_hex(prompts_.raw(PromptKind::mcq_generation)) + "|" +
      config_.completion_provider;
  if (stage_fresh("generate", fingerprint)) {
    note("generate: up to date");
    return;
  }

  LlmGateway& gw = gateway(config_.completion_provider);
  size_t workers =
      static_cast<size_t>(config_.provider_for_completions().max_concurrency);
  std::vector<GenerationBatch> batches(chunks.size());
  parallel_for(chunks.size(), workers, [&](size_t i) {
    CompletionRequest req;
    req.model_id = config_.generator_model;
    req.prompt = build_generation_prompt(prompts_, chunks[i], config_.mcqs_per_chunk);
    req.temperature = config_.generation_params.temperature;
    req.max_tokens = config_.generation_params.max_tokens;
    req.request_tag = "mcq_generation";
    batches[i] = parse_generation_output(chunks[i].chunk_id, gw.complete(req));
  });

  std::vector<Mcq> mcqs;
  std::vector<McqReject> rejects;
  for (const GenerationBatch& batch : batches) {
    if (batch.batch_error) {
      rejects.push_back({batch.chunk_id, batch.raw_text, *batch.batch_error});
      continue;
    }
    for (const McqReject& r : batch.rejects) rejects.push_back(r);
    for (const Mcq& m : batch.parsed) {
      if (auto reason = validate_mcq(m)) {
        rejects.push_back({batch.chunk_id, render_mcq(m), *reason});
      } else {
        mcqs.push_back(m);
      }
    }
  }
  write_mcqs(out("mcqs.jsonl"), mcqs);
  write_mcq_rejects(out("mcq_rejects.jsonl"), rejects);
  record_stage("generate", fingerprint,
               {{"mcqs.jsonl", artifact_hash("mcqs.jsonl")},
                {"mcq_rejects.jsonl", artifact_hash("mcq_rejects.jsonl")}});
  note("generate: " + std::to_string(mcqs.size()) + " MCQs (" +
       std::to_string(rejects.size()) + " rejected)");
}

void Pipeline::run_filter() {
  require_artifact("mcqs.jsonl", "generate");
  require_artifact("chunks.jsonl", "chunk");
  std::vector<Mcq> mcqs = read_mcqs(out("mcqs.jsonl"));
  if (mcqs.empty()) throw PipelineError("mcqs.jsonl is empty; nothing to filter");

  nlohmann::json policy_json = config_.to_json().at("filter");
  std::string fingerprint = "filter|" + artifact_hash("mcqs.jsonl") + "|" +
                            artifact_hash("chunks.jsonl") + "|" + config_.embedder_model +
                            "|" + config_.embedding_provider + "|" + policy_json.dump();
  if (stage_fresh("filter", fingerprint)) {
    note("filter: up to date");
    return;
  }

  std::map<std::string, std::string> chunk_text;
  for (const Chunk& c : read_chunks(out("chunks.jsonl"))) chunk_text[c.chunk_id] = c.text;

  // one embedding pass over the distinct option texts
  std::set<std::string> distinct;
  for (const Mcq& m : mcqs) distinct.insert(m.options.begin(), m.options.end());
  std::vector<std::string> texts(distinct.begin(), distinct.end());
  LlmGateway& gw = gateway(config_.embedding_provider);
  std::map<std::string, std::vector<double>> vectors;
  for (size_t at = 0; at < texts.size(); at += kEmbedBatch) {
    size_t end = std::min(at + kEmbedBatch, texts.size());
    std::vector<std::string> batch(texts.begin() + static_cast<ptrdiff_t>(at),
                                   texts.begin() + static_cast<ptrdiff_t>(end));
    std::vector<EmbeddingVector> embedded = gw.embed(config_.embedder_model, batch);
    for (size_t i = 0; i < batch.size(); ++i) vectors[batch[i]] = embedded[i].values;
  }
  EmbedFn embed_fn = [&vectors](const std::vector<std::string>& option_texts) {
    std::vector<std::vector<double>> result;
    result.reserve(option_texts.size());
    for (const std::string& t : option_texts) result.push_back(vectors.at(t));
    return result;
  };

  std::vector<FilterScores> scores(mcqs.size());
  parallel_for(mcqs.size(), std::min<size_t>(8, mcqs.size()), [&](size_t i) {
    const Mcq& m = mcqs[i];
    auto chunk = chunk_text.find(m.chunk_id);
    if (chunk == chunk_text.end()) {
      throw PipelineError("mcq " + m.mcq_id + " references unknown chunk " + m.chunk_id);
    }
    FilterScores s;
    s.mcq_id = m.mcq_id;
    auto [j_margin, r_margin] = score_alignment(chunk->second, m);
    s.jaccard_margin = j_margin;
    s.rouge_margin = r_margin;
    s.cosine_plausibility = score_plausibility(m, embed_fn);
    scores[i] = std::move(s);
  });

  FilterOutcome outcome = apply_filter(scores, config_.policy);
  write_filter_scores(out("filter_scores.jsonl"), scores);
  write_filter_decisions(out("filter_decisions.jsonl"), outcome);
  nlohmann::json thresholds = {{"schema", "filter_thresholds.v1"},
                               {"jaccard", outcome.thresholds.jaccard},
                               {"rouge", outcome.thresholds.rouge},
                               {"cosine", outcome.thresholds.cosine},
                               {"policy", policy_json}};
  atomic_write_file(out("filter_thresholds.json"), thresholds.dump(2) + "\n");

  record_stage("filter", fingerprint,
               {{"filter_scores.jsonl", artifact_hash("filter_scores.jsonl")},
                {"filter_decisions.jsonl", artifact_hash("filter_decisions.jsonl")},
                {"filter_thresholds.json", artifact_hash("filter_thresholds.json")}});
  note("filter: kept " + std::to_string(outcome.kept.size()) + " of " +
       std::to_string(scores.size()));
}

void Pipeline::run_evaluate() {
  for (const std::string& model : config_.evaluator_models) evaluate_one_model(model);
}

void Pipeline::evaluate_one_model(const std::string& model_id) {
  require_artifact("mcqs.jsonl", "generate");
  require_artifact("filter_decisions.jsonl", "filter");
  require_artifact("chunks.jsonl", "chunk");

  const std::string slug = slugify(model_id);
  const std::string stage = "evaluate:" + slug;
  const bool full_pool = evaluate_full_pool();
  std::string fingerprint =
      "evaluate|" + artifact_hash("mcqs.jsonl") + "|" +
      artifact_hash("filter_decisions.jsonl") + "|" + artifact_hash("chunks.jsonl") + "|" +
      model_id + "|" + params_fingerprint(config_.evaluation_params) + "|" +
      std::to_string(config_.seed) + "|" +
      sha256_hex(prompts_.raw(PromptKind::answer_direct)) + "|" +
      sha256_hex(prompts_.raw(PromptKind::answer_with_context)) + "|" +
      config_.completion_provider + "|" + (full_pool ? "full" : "kept");
  if (stage_fresh(stage, fingerprint)) {
    note(stage + ": up to date");
    return;
  }

  std::vector<Mcq> mcqs = read_mcqs(out("mcqs.jsonl"));
  std::set<std::string> kept;
  for (const nlohmann::json& row : read_jsonl(out("filter_decisions.jsonl"))) {
    if (row.at("kept").get<bool>()) kept.insert(row.at("mcq_id").get<std::string>());
  }
  std::vector<Mcq> pool;
  for (const Mcq& m : mcqs) {
    if (full_pool || kept.count(m.mcq_id) > 0) pool.push_back(m);
  }
  if (pool.empty()) throw PipelineError("no questions to evaluate (filter kept none)");

  std::map<std::string, std::string> chunk_text;
  for (const Chunk& c : read_chunks(out("chunks.jsonl"))) chunk_text[c.chunk_id] = c.text;
  for (const Mcq& m : pool) {
    if (chunk_text.find(m.chunk_id) == chunk_text.end()) {
      throw PipelineError("mcq " + m.mcq_id + " references unknown chunk " + m.chunk_id);
    }
  }

  LlmGateway& gw = gateway(config_.completion_provider);
  CompletionRequest base;
  base.model_id = model_id;
  base.temperature = config_.evaluation_params.temperature;
  base.max_tokens = config_.evaluation_params.max_tokens;
  CompleteFn complete = [&gw](const CompletionRequest& req) { return gw.complete(req); };

  size_t workers = static_cast<size_t>(config_.provider_for_completions().max_concurrency);
  std::vector<EvalOutcome> outcomes(pool.size());
  parallel_for(pool.size(), workers, [&](size_t i) {
    outcomes[i] = evaluate_question(prompts_, pool[i], chunk_text.at(pool[i].chunk_id), base,
                                    config_.seed, complete);
  });

  std::vector<RotationRecord> records;
  std::vector<QuestionVerdict> verdicts;
  std::vector<nlohmann::json> incomplete_rows;
  for (size_t i = 0; i < pool.size(); ++i) {
    EvalOutcome& outcome = outcomes[i];
    records.insert(records.end(), outcome.records.begin(), outcome.records.end());
    if (outcome.verdict) {
      verdicts.push_back(*outcome.verdict);
    } else {
      nlohmann::json failures = nlohmann::json::array();
      for (const EvalFailure& f : outcome.failures) {
        failures.push_back({{"condition", condition_name(f.condition)},
                            {"rotation_index", f.rotation_index},
                            {"message", f.message}});
      }
      incomplete_rows.push_back({{"schema", "eval_incomplete.v1"},
                                 {"mcq_id", pool[i].mcq_id},
                                 {"failures", failures}});
    }
  }

  const std::string dir = "eval/" + slug + "/";
  write_rotation_records(out(dir + "records.jsonl"), records);
  write_verdicts(out(dir + "verdicts.jsonl"), verdicts);
  write_jsonl(out(dir + "incomplete.jsonl"), incomplete_rows);
  record_stage(stage, fingerprint,
               {{dir + "records.jsonl", artifact_hash(dir + "records.jsonl")},
                {dir + "verdicts.jsonl", artifact_hash(dir + "verdicts.jsonl")},
                {dir + "incomplete.jsonl", artifact_hash(dir + "incomplete.jsonl")}});
  note(stage + ": " + std::to_string(verdicts.size()) + " questions (" +
       std::to_string(incomplete_rows.size()) + " incomplete)");
}

void Pipeline::run_score() {
  for (const std::string& model : config_.evaluator_models) score_one_model(model);
}

void Pipeline::score_one_model(const std::string& model_id) {
  const std::string slug = slugify(model_id);
  const std::string dir = "eval/" + slug + "/";
  require_artifact("mcqs.jsonl", "generate");
  require_artifact("filter_decisions.jsonl", "filter");
  require_artifact("filter_thresholds.json", "filter");
  require_artifact(dir + "records.jsonl", "evaluate");
  require_artifact(dir + "verdicts.jsonl", "evaluate");
  require_artifact(dir + "incomplete.jsonl", "evaluate");

  const std::string stage = "score:" + slug;
  std::string fingerprint =
      "score|" + artifact_hash("mcqs.jsonl") + "|" +
      artifact_hash("filter_decisions.jsonl") + "|" +
      artifact_hash("filter_thresholds.json") + "|" + artifact_hash(dir + "records.jsonl") +
      "|" + artifact_hash(dir + "verdicts.jsonl") + "|" +
      artifact_hash(dir + "incomplete.jsonl") + "|" + config_.dataset_id + "|" + model_id;
  if (stage_fresh(stage, fingerprint)) {
    note(stage + ": up to date");
    return;
  }

  std::vector<Mcq> mcqs = read_mcqs(out("mcqs.jsonl"));
  std::vector<std::string> kept;
  for (const nlohmann::json& row : read_jsonl(out("filter_decisions.jsonl"))) {
    if (row.at("kept").get<bool>()) kept.push_back(row.at("mcq_id").get<std::string>());
  }
  std::map<std::string, QuestionVerdict> verdict_by_id;
  for (const QuestionVerdict& v : read_verdicts(out(dir + "verdicts.jsonl"))) {
    verdict_by_id[v.mcq_id] = v;
  }
  std::set<std::string> incomplete_ids;
  for (const nlohmann::json& row : read_jsonl(out(dir + "incomplete.jsonl"))) {
    incomplete_ids.insert(row.at("mcq_id").get<std::string>());
  }

  std::vector<QuestionVerdict> table_verdicts;
  std::set<std::string> scored_ids;
  size_t n_excluded = 0;
  for (const std::string& id : kept) {
    auto hit = verdict_by_id.find(id);
    if (hit != verdict_by_id.end()) {
      table_verdicts.push_back(hit->second);
      scored_ids.insert(id);
    } else if (incomplete_ids.count(id) > 0) {
      ++n_excluded;
    } else {
      throw PipelineError("kept question " + id + " has no verdict for model '" + model_id +
                          "'; rerun stage 'evaluate'");
    }
  }

  std::vector<RotationRecord> all_records = read_rotation_records(out(dir + "records.jsonl"));
  std::vector<RotationRecord> scored_records;
  for (RotationRecord& r : all_records) {
    if (scored_ids.count(r.mcq_id) > 0) scored_records.push_back(std::move(r));
  }
  PositionalBias bias = positional_bias_stats(mcqs, scored_records);

  nlohmann::json thresholds_json =
      nlohmann::json::parse(read_text_file(out("filter_thresholds.json")));
  FilterThresholds thresholds;
  thresholds.jaccard = thresholds_json.at("jaccard").get<double>();
  thresholds.rouge = thresholds_json.at("rouge").get<double>();
  thresholds.cosine = thresholds_json.at("cosine").get<double>();

  IpReport report =
      make_ip_report(config_.dataset_id, model_id, table_verdicts, config_.policy, thresholds,
                     n_excluded, std::move(bias), iso8601_now());
  const std::string report_rel = "report/" + slug + ".json";
  atomic_write_file(out(report_rel), report_to_json(report).dump(2) + "\n");
  record_stage(stage, fingerprint, {{report_rel, artifact_hash(report_rel)}});

  std::ostringstream line;
  line << stage << ": n=" << report.table.n_total;
  if (report.ip) {
    line << " ip=" << *report.ip;
  } else {
    line << " ip=undefined";
  }
  note(line.str());
}

void Pipeline::run_sweep(const std::optional<std::vector<int>>& percentiles_override) {
  std::vector<int> percentiles =
      percentiles_override ? *percentiles_override : config_.sweep_percentiles;
  if (percentiles.empty()) {
    throw PipelineError(
        "no sweep percentiles configured; set sweep_percentiles or pass --percentiles");
  }
  for (int p : percentiles) {
    if (p < 0 || p > 100) throw PipelineError("sweep percentile outside 0..100");
  }
  for (const std::string& model : config_.evaluator_models) {
    sweep_one_model(model, percentiles);
  }
}

void Pipeline::sweep_one_model(const std::string& model_id,
                               const std::vector<int>& percentiles) {
  const std::string slug = slugify(model_id);
  const std::string dir = "eval/" + slug + "/";
  require_artifact("filter_scores.jsonl", "filter");
  require_artifact(dir + "verdicts.jsonl", "evaluate");

  const std::string stage = "sweep:" + slug;
  std::string percentiles_key;
  for (int p : percentiles) percentiles_key += std::to_string(p) + ",";
  std::string fingerprint =
      "sweep|" + artifact_hash("filter_scores.jsonl") + "|" +
      artifact_hash(dir + "verdicts.jsonl") + "|" + percentiles_key + "|" +
      (config_.policy.cosine_upper_cap ? std::to_string(*config_.policy.cosine_upper_cap)
                                       : "none") +
      "|" + model_id;
  if (stage_fresh(stage, fingerprint)) {
    note(stage + ": up to date");
    return;
  }

  std::vector<FilterScores> scores = read_filter_scores(out("filter_scores.jsonl"));
  std::map<std::string, QuestionVerdict> verdict_by_id;
  for (const QuestionVerdict& v : read_verdicts(out(dir + "verdicts.jsonl"))) {
    verdict_by_id[v.mcq_id] = v;
  }

  std::vector<SweepRow> rows;
  for (SweepFamily family :
       {SweepFamily::cosine_only, SweepFamily::surface_only, SweepFamily::joint}) {
    std::vector<SweepRow> family_rows = threshold_sweep(
        scores, verdict_by_id, percentiles, family, config_.policy.cosine_upper_cap);
    rows.insert(rows.end(), family_rows.begin(), family_rows.end());
  }
  const std::string rel = "sweep/" + slug + ".csv";
  write_sweep_csv(out(rel), rows);
  record_stage(stage, fingerprint, {{rel, artifact_hash(rel)}});
  note(stage + ": " + std::to_string(rows.size()) + " rows");
}

void Pipeline::run_all(const std::optional<std::vector<int>>& percentiles_override) {
  if (config_.synth_topics) run_synth();
  run_chunk();
  run_generate();
  run_filter();
  run_evaluate();
  run_score();
  if (percentiles_override || !config_.sweep_percentiles.empty()) {
    run_sweep(percentiles_override);
  }
}

std::string summarize_run(const fs::path& run_dir) {
  fs::path report_dir = run_dir / "report";
  if (!fs::exists(report_dir)) {
    throw PipelineError("no reports under " + run_dir.string() + "; run stage 'score' first");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(report_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) {
    throw PipelineError("no reports under " + run_dir.string() + "; run stage 'score' first");
  }
  std::sort(files.begin(), files.end());

  std::ostringstream outp;
  char buffer[160];
  for (const fs::path& file : files) {
    nlohmann::json r = nlohmann::json::parse(read_text_file(file));
    const auto& counts = r.at("counts");
    outp << "dataset " << r.at("dataset_id").get<std::string>() << ", model "
         << r.at("model_id").get<std::string>() << "\n";
    size_t n = counts.at("n_total").get<size_t>();
    outp << "  questions scored: " << n;
    size_t excluded = r.at("n_excluded_incomplete").get<size_t>();
    if (excluded > 0) outp << " (+" << excluded << " incomplete, excluded)";
    outp << "\n";
    if (n > 0) {
      const auto& f = r.at("fractions");
      std::snprintf(buffer, sizeof(buffer),
                    "  both correct %.3f | context only %.3f | direct only %.3f | both "
                    "incorrect %.3f\n",
                    f.at("both_correct").get<double>(), f.at("context_only").get<double>(),
                    f.at("direct_only").get<double>(),
                    f.at("both_incorrect").get<double>());
      outp << buffer;
      std::snprintf(buffer, sizeof(buffer),
                    "  accuracy (4x): direct %.3f, with context %.3f\n",
                    f.at("direct_4x_accuracy").get<double>(),
                    f.at("context_4x_accuracy").get<double>());
      outp << buffer;
    }
    if (r.at("ip").is_null()) {
      outp << "  information potential: undefined ("
           << r.value("ip_note", std::string("n/a")) << ")\n";
    } else {
      std::snprintf(buffer, sizeof(buffer), "  information potential: %.3f (%s)\n",
                    r.at("ip").get<double>(), r.at("ip_exact").get<std::string>().c_str());
      outp << buffer;
    }
    const auto& bias = r.at("positional_bias");
    auto histogram_line = [&](const char* label, const nlohmann::json& h) {
      const auto& fr = h.at("fractions");
      std::snprintf(buffer, sizeof(buffer), "  %s: A %.3f B %.3f C %.3f D %.3f\n", label,
                    fr.at("A").get<double>(), fr.at("B").get<double>(),
                    fr.at("C").get<double>(), fr.at("D").get<double>());
      outp << buffer;
    };
    histogram_line("correct letter as generated", bias.at("generation"));
    histogram_line("correct letter as asked", bias.at("asked"));
    histogram_line("answers, direct", bias.at("answered_direct"));
    histogram_line("answers, with context", bias.at("answered_context"));
    outp << "\n";
  }
  return outp.str();
}

}  // namespace ipeval
